#include "pcps/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pcps/bss.hpp"
#include "pcps/linalg.hpp"
#include "pcps/rng.hpp"

namespace pcps {

namespace {

int iceil(double x) {
    require(x > 0.0 && std::isfinite(x), "dimension formula must be positive and finite");
    return static_cast<int>(std::ceil(x));
}

void require_orthonormal(const Matrix& z, const char* what) {
    require(z.cols() >= 1, std::string(what) + ": needs at least one column");
    Matrix g = z.transpose() * z;
    g -= Matrix::Identity(z.cols(), z.cols());
    require(g.norm() <= 1e-8 * std::sqrt(static_cast<double>(z.cols())),
            std::string(what) + ": columns are not orthonormal");
}

}  // namespace

const char* family_name(SketchFamily f) {
    switch (f) {
        case SketchFamily::svd: return "svd";
        case SketchFamily::approx_svd: return "approx-svd";
        case SketchFamily::dense_jl: return "dense-jl";
        case SketchFamily::sparse_embedding: return "sparse-embedding";
        case SketchFamily::osnap: return "osnap";
        case SketchFamily::non_oblivious: return "non-oblivious";
        case SketchFamily::column_sampling: return "column-sampling";
        case SketchFamily::bss: return "bss";
        case SketchFamily::logk: return "logk";
    }
    throw std::logic_error("unknown sketch family");
}

SketchFamily family_from_name(const std::string& name) {
    for (SketchFamily f :
         {SketchFamily::svd, SketchFamily::approx_svd, SketchFamily::dense_jl,
          SketchFamily::sparse_embedding, SketchFamily::osnap, SketchFamily::non_oblivious,
          SketchFamily::column_sampling, SketchFamily::bss, SketchFamily::logk}) {
        if (name == family_name(f)) return f;
    }
    throw std::invalid_argument("unknown sketch family: " + name);
}

int dense_jl_dim(int k, double eps, double delta, const CalibConstants& cc) {
    return iceil(cc.dense_jl * (k + std::log(1.0 / delta)) / (eps * eps));
}

int sparse_embedding_dim(int k, double eps, double delta, const CalibConstants& cc) {
    return iceil(cc.sparse_embedding * static_cast<double>(k) * k / (eps * eps * delta));
}

int osnap_sparsity(int k, double delta, const CalibConstants& cc, int d_prime) {
    int s = iceil(cc.osnap_sparsity * std::log(k / delta));
    if (d_prime >= 1 && s > d_prime) s = d_prime;
    return s;
}

int osnap_dim(int k, double eps, double delta, const CalibConstants& cc) {
    int s = osnap_sparsity(k, delta, cc);
    int d = iceil(cc.osnap * k * std::log(k / delta) / (eps * eps));
    if (d < s) d = s;
    return ((d + s - 1) / s) * s;  // block layout needs s | d'
}

int logk_dim(int k, double eps, double delta, const CalibConstants& cc) {
    return iceil(cc.logk * std::log(k / delta) / (eps * eps));
}

Matrix jl_matrix(Index d, Index d_prime, SketchFamily family, std::uint64_t seed, int sparsity) {
    require(d >= 1 && d_prime >= 1, "jl_matrix: dimensions must be positive");
    Rng rng(seed);
    Matrix r = Matrix::Zero(d_prime, d);
    switch (family) {
        case SketchFamily::dense_jl: {
            const double scale = 1.0 / std::sqrt(static_cast<double>(d_prime));
            for (Index i = 0; i < d_prime; ++i)
                for (Index j = 0; j < d; ++j) r(i, j) = rng.sign() * scale;
            break;
        }
        case SketchFamily::sparse_embedding: {
            for (Index j = 0; j < d; ++j) {
                Index row = static_cast<Index>(rng.below(static_cast<std::uint64_t>(d_prime)));
                r(row, j) = rng.sign();
            }
            break;
        }
        case SketchFamily::osnap: {
            require(sparsity >= 1, "jl_matrix: osnap needs a positive sparsity");
            require(d_prime % sparsity == 0, "jl_matrix: osnap rows must be a multiple of s");
            const Index block = d_prime / sparsity;
            const double scale = 1.0 / std::sqrt(static_cast<double>(sparsity));
            for (Index j = 0; j < d; ++j) {
                for (int t = 0; t < sparsity; ++t) {
                    Index row = t * block +
                                static_cast<Index>(rng.below(static_cast<std::uint64_t>(block)));
                    r(row, j) = rng.sign() * scale;
                }
            }
            break;
        }
        default:
            throw std::invalid_argument("jl_matrix: family has no oblivious matrix form");
    }
    return r;
}

SketchResult svd_sketch_m(const Matrix& a, int k, int m) {
    require(k >= 1 && m >= 1, "svd_sketch_m: rank arguments must be positive");
    SvdFactors f = svd(a);
    const Index r = f.rank();
    const Index mm = std::min<Index>(m, r);
    SketchResult out;
    out.a_tilde = f.u.leftCols(mm) * f.sigma.head(mm).asDiagonal();
    out.c_known = tail_energy(f, mm);
    out.basis = f.v.leftCols(mm);  // a_tilde == a * basis up to rounding
    out.config.k = k;
    out.config.family = SketchFamily::svd;
    return out;
}

SketchResult svd_sketch(const Matrix& a, int k, double eps) {
    require(k >= 1 && eps > 0.0 && eps < 1.0, "svd_sketch: bad rank or accuracy");
    SketchResult out = svd_sketch_m(a, k, iceil(k / eps));
    out.config.epsilon = eps;
    return out;
}

int choose_svd_rank(const Vector& sigma, int k, double eps) {
    require(k >= 1 && eps > 0.0 && eps < 1.0, "choose_svd_rank: bad rank or accuracy");
    const Index r = sigma.size();
    double tail_k = 0.0;
    for (Index i = k; i < r; ++i) tail_k += sigma[i] * sigma[i];
    const int cap = iceil(k / eps);
    const int stop = std::min<int>(cap, static_cast<int>(r));
    const double budget = eps * tail_k;
    for (int m = 1; m <= stop; ++m) {
        double window = 0.0;
        for (Index i = m; i < std::min<Index>(m + k, r); ++i) window += sigma[i] * sigma[i];
        if (window <= budget * (1.0 + 1e-12) + 1e-300) return m;
    }
    return stop;  // guaranteed reachable at the cap; kept as a numerical backstop
}

int choose_svd_rank(const Matrix& a, int k, double eps) {
    return choose_svd_rank(svd(a).sigma, k, eps);
}

SketchResult approx_svd_sketch(const Matrix& a, const Matrix& z, int k, double eps) {
    require(a.cols() == z.rows(), "approx_svd_sketch: Z must act on the columns of A");
    require_orthonormal(z, "approx_svd_sketch");
    SketchResult out;
    out.a_tilde = a * z;
    Matrix residual = a - out.a_tilde * z.transpose();
    out.c_known = residual.squaredNorm();
    out.basis = z;
    out.config.k = k;
    out.config.epsilon = eps;
    out.config.family = SketchFamily::approx_svd;
    return out;
}

SketchResult random_projection_sketch(const Matrix& a, const SketchConfig& cfg) {
    cfg.validate();
    const Index d = a.cols();
    SketchResult out;
    out.config = cfg;
    switch (cfg.family) {
        case SketchFamily::dense_jl: {
            int dp = dense_jl_dim(cfg.k, cfg.epsilon, cfg.delta, cfg.constants);
            out.a_tilde = a * jl_matrix(d, dp, cfg.family, cfg.seed).transpose();
            break;
        }
        case SketchFamily::sparse_embedding: {
            int dp = sparse_embedding_dim(cfg.k, cfg.epsilon, cfg.delta, cfg.constants);
            out.a_tilde = a * jl_matrix(d, dp, cfg.family, cfg.seed).transpose();
            break;
        }
        case SketchFamily::osnap: {
            int dp = osnap_dim(cfg.k, cfg.epsilon, cfg.delta, cfg.constants);
            int s = osnap_sparsity(cfg.k, cfg.delta, cfg.constants);
            out.a_tilde = a * jl_matrix(d, dp, cfg.family, cfg.seed, s).transpose();
            break;
        }
        default:
            throw std::invalid_argument("random_projection_sketch: not an oblivious family");
    }
    return out;
}

Matrix approx_rank_basis(const Matrix& a, int k, double delta, std::uint64_t seed,
                         const CalibConstants& cc) {
    require(k >= 1, "approx_rank_basis: k must be positive");
    // A constant-factor projection sketch is enough here: the basis feeds
    // stages that only need the residual within a factor of 2 of the best
    // rank-k residual.
    const double eps0 = 1.0 / 3.0;
    int dp = dense_jl_dim(k, eps0, delta, cc);
    Matrix sketch = a * jl_matrix(a.cols(), dp, SketchFamily::dense_jl, seed).transpose();
    SvdFactors f = svd(sketch);
    const Index kk = std::min<Index>(k, f.rank());
    require(kk >= 1, "approx_rank_basis: input has no numerical rank");
    Matrix w = f.u.leftCols(kk).transpose() * a;  // kk x d
    return orthonormal_rowspace_basis(w);
}

Vector approx_residual_column_norms(const Matrix& a, const Matrix& z, double delta,
                                    std::uint64_t seed, const CalibConstants& cc) {
    require(a.cols() == z.rows(), "approx_residual_column_norms: shape mismatch");
    if (z.cols() > 0) require_orthonormal(z, "approx_residual_column_norms");
    require(delta > 0.0 && delta < 1.0, "approx_residual_column_norms: bad delta");
    const Index n = a.rows();
    const Index d = a.cols();
    int p = iceil(cc.residual_jl * std::log(static_cast<double>(d) / delta));
    Matrix pi = jl_matrix(n, p, SketchFamily::dense_jl, seed);
    // Stage the product so the n x d residual is never formed. An empty basis
    // degenerates to estimating the raw column norms.
    Matrix pa = pi * a;                                  // p x d
    Matrix est = z.cols() > 0 ? Matrix(pa - (pa * z) * z.transpose()) : pa;  // p x d
    Vector norms(d);
    for (Index j = 0; j < d; ++j) norms[j] = est.col(j).norm();
    return norms;
}

Matrix ensure_spectral_condition(const Matrix& a, const Matrix& z, int k) {
    require(a.cols() == z.rows(), "ensure_spectral_condition: shape mismatch");
    require_orthonormal(z, "ensure_spectral_condition");
    require(k >= 1, "ensure_spectral_condition: k must be positive");
    const double tail = tail_energy(a, k);
    Matrix residual = a - (a * z) * z.transpose();
    const double slack = 1e-8 * a.squaredNorm();
    const double fro = residual.squaredNorm();
    if (fro > 2.0 * tail + slack) {
        throw std::invalid_argument(
            "ensure_spectral_condition: residual misses the Frobenius bound, ratio " +
            std::to_string(tail > 0 ? fro / tail : std::numeric_limits<double>::infinity()));
    }
    SvdFactors f = svd(residual);
    const double threshold = (2.0 / k) * tail;
    Matrix extended = z;
    int appended = 0;
    for (Index i = 0; i < f.rank() && appended < k; ++i) {
        if (f.sigma[i] * f.sigma[i] <= threshold) break;  // sigma is non-increasing
        Vector v = f.v.col(i);
        // The residual row space is orthogonal to Z already; re-project to
        // keep the extended basis orthonormal against rounding.
        v -= extended * (extended.transpose() * v);
        double norm = v.norm();
        if (norm < 1e-8) continue;
        v /= norm;
        extended.conservativeResize(Eigen::NoChange, extended.cols() + 1);
        extended.col(extended.cols() - 1) = v;
        ++appended;
    }
    return extended;
}

SketchResult column_sampling_sketch(const Matrix& a, const Matrix& z, int k, double eps,
                                    double delta, std::uint64_t seed, bool exact_norms,
                                    const CalibConstants& cc) {
    require(a.cols() == z.rows(), "column_sampling_sketch: shape mismatch");
    require_orthonormal(z, "column_sampling_sketch");
    require(k >= 1 && eps > 0.0 && eps < 1.0, "column_sampling_sketch: bad rank or accuracy");
    require(delta > 0.0 && delta < 1.0, "column_sampling_sketch: bad delta");
    const Index d = a.cols();
    const double tail = tail_energy(a, k);
    const double scale = a.squaredNorm();

    Vector res_norm2(d);
    if (exact_norms) {
        Matrix residual = a - (a * z) * z.transpose();
        require(residual.squaredNorm() <= 2.0 * tail + 1e-8 * scale,
                "column_sampling_sketch: basis misses the Frobenius residual bound");
        for (Index j = 0; j < d; ++j) res_norm2[j] = residual.col(j).squaredNorm();
    } else {
        Vector est = approx_residual_column_norms(a, z, delta, derive_seed(seed, 1), cc);
        // The estimates sit within [1/2, 3/2] of the truth; doubling keeps
        // every score an overestimate, which sampling tolerates.
        for (Index j = 0; j < d; ++j) res_norm2[j] = 4.0 * est[j] * est[j];
    }

    Vector scores(d);
    const bool degenerate_tail = tail <= 1e-14 * scale;
    for (Index j = 0; j < d; ++j) {
        double t = z.row(j).squaredNorm();  // leverage of column j against Z
        if (!degenerate_tail) t += res_norm2[j] * (static_cast<double>(k) / tail);
        scores[j] = t;
    }
    double total = scores.sum();
    require(total > 0.0, "column_sampling_sketch: all sampling scores vanished");

    const int t_count = iceil(cc.sampling * k * std::log(k / delta) / (eps * eps));
    Vector cum(d);
    double run = 0.0;
    for (Index j = 0; j < d; ++j) {
        run += scores[j];
        cum[j] = run;
    }

    Rng rng(derive_seed(seed, 2));
    SketchResult out;
    out.config.k = k;
    out.config.epsilon = eps;
    out.config.delta = delta;
    out.config.family = SketchFamily::column_sampling;
    out.config.seed = seed;
    out.config.constants = cc;
    out.a_tilde.resize(a.rows(), t_count);
    ColumnMap map;
    map.indices.resize(t_count);
    map.weights.resize(t_count);
    for (int t = 0; t < t_count; ++t) {
        double u = rng.uniform() * total;
        Index lo = 0, hi = d - 1;
        while (lo < hi) {
            Index mid = (lo + hi) / 2;
            if (cum[mid] >= u) hi = mid; else lo = mid + 1;
        }
        const double p = scores[lo] / total;
        const double w = 1.0 / std::sqrt(static_cast<double>(t_count) * p);
        map.indices[t] = lo;
        map.weights[t] = w;
        out.a_tilde.col(t) = a.col(lo) * w;
    }
    out.column_map = std::move(map);
    return out;
}

SketchResult bss_sketch(const Matrix& a, int k, double eps, double delta, std::uint64_t seed,
                        const CalibConstants& cc) {
    require(k >= 1 && eps > 0.0 && eps < 1.0, "bss_sketch: bad rank or accuracy");
    Matrix z0 = approx_rank_basis(a, k, delta, derive_seed(seed, 1), cc);
    SketchResult sampled =
        column_sampling_sketch(a, z0, k, eps, delta, derive_seed(seed, 2), false, cc);
    const Matrix& abar = sampled.a_tilde;

    // Rebuild the two-block structure for the sampled matrix, then let the
    // deterministic selection thin it down to O(k/eps^2) columns.
    SvdFactors f = svd(abar);
    const Index kk = std::min<Index>(k, f.rank());
    Matrix zbar = f.v.leftCols(kk);
    zbar = ensure_spectral_condition(abar, zbar, k);
    const double tail_bar = tail_energy(f, k);
    const Index t = abar.cols();

    Matrix b1 = zbar.transpose();  // m x t
    Matrix m_rows;                 // t x (m [+ n]) -- rows are scaled columns of [B1; B2]
    Vector extra(t);
    const bool flat = tail_bar <= 1e-14 * abar.squaredNorm();
    if (flat) {
        m_rows = 0.5 * b1.transpose();
        extra.setZero();
    } else {
        Matrix b2 = std::sqrt(static_cast<double>(k) / tail_bar) *
                    (abar - (abar * zbar) * zbar.transpose());  // n x t
        m_rows.resize(t, b1.rows() + b2.rows());
        m_rows << 0.5 * b1.transpose(), 0.5 * b2.transpose();
        for (Index j = 0; j < t; ++j) extra[j] = 0.5 * b2.col(j).norm();
    }

    BssSelection sel = detail::bss_select_core(m_rows, k, eps, flat ? nullptr : &extra,
                                               /*enforce_stable_rank=*/false, cc);

    SketchResult out;
    out.config.k = k;
    out.config.epsilon = eps;
    out.config.delta = delta;
    out.config.family = SketchFamily::bss;
    out.config.seed = seed;
    out.config.constants = cc;
    const int cols = static_cast<int>(sel.indices.size());
    out.a_tilde.resize(a.rows(), cols);
    ColumnMap map;
    map.indices.resize(cols);
    map.weights.resize(cols);
    const ColumnMap& inner = *sampled.column_map;
    for (int j = 0; j < cols; ++j) {
        const Index sampled_col = sel.indices[j];
        const double w = inner.weights[sampled_col] * std::sqrt(sel.weights[j]);
        map.indices[j] = inner.indices[sampled_col];
        map.weights[j] = w;
        out.a_tilde.col(j) = a.col(map.indices[j]) * w;
    }
    out.column_map = std::move(map);
    return out;
}

SketchResult non_oblivious_sketch(const Matrix& a, int k, double eps, double delta,
                                  SketchFamily inner, std::uint64_t seed,
                                  const CalibConstants& cc) {
    require(k >= 1 && eps > 0.0 && eps < 1.0, "non_oblivious_sketch: bad rank or accuracy");
    const Index n = a.rows();
    const int k_prime = iceil(k / eps) + k - 1;
    const double eps_inner = cc.nonoblivious_eps;

    int rows = 0;
    int s = 0;
    switch (inner) {
        case SketchFamily::dense_jl:
            rows = dense_jl_dim(k_prime, eps_inner, delta, cc);
            break;
        case SketchFamily::sparse_embedding:
            rows = sparse_embedding_dim(k_prime, eps_inner, delta, cc);
            break;
        case SketchFamily::osnap:
            rows = osnap_dim(k_prime, eps_inner, delta, cc);
            s = osnap_sparsity(k_prime, delta, cc);
            break;
        default:
            throw std::invalid_argument("non_oblivious_sketch: inner family must be oblivious");
    }
    // More rows than A has add nothing to the row space of the product.
    if (rows > n) {
        rows = static_cast<int>(n);
        if (inner == SketchFamily::osnap && s > 0) {
            s = std::min(s, rows);
            rows = (rows / s) * s;
            if (rows == 0) { rows = static_cast<int>(n); s = 1; }
        }
    }

    Matrix r = jl_matrix(n, rows, inner, seed, s);
    Matrix abar = r * a;  // rows x d
    SvdFactors f = svd(abar);
    const Index kk = std::min<Index>(k_prime, f.rank());
    require(kk >= 1, "non_oblivious_sketch: sketched matrix has no numerical rank");

    SketchResult out;
    out.config.k = k;
    out.config.epsilon = eps;
    out.config.delta = delta;
    out.config.family = SketchFamily::non_oblivious;
    out.config.seed = seed;
    out.config.constants = cc;
    out.basis = f.v.leftCols(kk);
    out.a_tilde = a * *out.basis;
    Matrix residual = a - out.a_tilde * out.basis->transpose();
    out.c_known = residual.squaredNorm();
    return out;
}

SketchResult logk_projection_sketch(const Matrix& a, int k, double eps, double delta,
                                    std::uint64_t seed, const CalibConstants& cc) {
    require(k >= 1 && eps > 0.0 && eps < 1.0, "logk_projection_sketch: bad rank or accuracy");
    int dp = logk_dim(k, eps, delta, cc);
    SketchResult out;
    out.config.k = k;
    out.config.epsilon = eps;
    out.config.delta = delta;
    out.config.family = SketchFamily::logk;
    out.config.seed = seed;
    out.config.constants = cc;
    out.a_tilde = a * jl_matrix(a.cols(), dp, SketchFamily::dense_jl, seed).transpose();
    return out;
}

SketchResult build_sketch(const Matrix& a, const SketchConfig& cfg) {
    cfg.validate();
    switch (cfg.family) {
        case SketchFamily::svd:
            return svd_sketch(a, cfg.k, cfg.epsilon);
        case SketchFamily::approx_svd: {
            const int m = iceil(cfg.k / cfg.epsilon);
            Matrix z = approx_rank_basis(a, m, cfg.delta, derive_seed(cfg.seed, 11),
                                         cfg.constants);
            SketchResult out = approx_svd_sketch(a, z, cfg.k, cfg.epsilon);
            out.config = cfg;
            return out;
        }
        case SketchFamily::dense_jl:
        case SketchFamily::sparse_embedding:
        case SketchFamily::osnap:
            return random_projection_sketch(a, cfg);
        case SketchFamily::column_sampling: {
            Matrix z = approx_rank_basis(a, cfg.k, cfg.delta, derive_seed(cfg.seed, 11),
                                         cfg.constants);
            return column_sampling_sketch(a, z, cfg.k, cfg.epsilon, cfg.delta,
                                          derive_seed(cfg.seed, 12), false, cfg.constants);
        }
        case SketchFamily::bss:
            return bss_sketch(a, cfg.k, cfg.epsilon, cfg.delta, cfg.seed, cfg.constants);
        case SketchFamily::non_oblivious:
            return non_oblivious_sketch(a, cfg.k, cfg.epsilon, cfg.delta, SketchFamily::dense_jl,
                                        cfg.seed, cfg.constants);
        case SketchFamily::logk:
            return logk_projection_sketch(a, cfg.k, cfg.epsilon, cfg.delta, cfg.seed,
                                          cfg.constants);
    }
    throw std::logic_error("build_sketch: unreachable");
}

}  // namespace pcps
