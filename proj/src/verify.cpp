#include "pcps/verify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "pcps/linalg.hpp"
#include "pcps/projections.hpp"
#include "pcps/rng.hpp"
#include "pcps/solvers.hpp"

namespace pcps {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt_json_double(double v) {
    if (std::isnan(v)) return "null";
    if (std::isinf(v)) return v > 0 ? "1e9999" : "-1e9999";
    return fmt_double(v);
}

// Frobenius costs of one candidate against both matrices.
struct CostPair {
    double exact;
    double sketched;
};

// Candidate projections/clusterings shared by the two-sided and one-sided
// sampling checks.
std::vector<CostPair> sample_costs(const Matrix& a, const Matrix& a_tilde, int k, int n_samples,
                                   std::uint64_t seed, bool include_clusterings) {
    std::vector<CostPair> costs;
    const Index n = a.rows();
    const Index pk = std::min<Index>(k, n);  // a projection's rank cannot exceed n
    for (int i = 0; i < n_samples; ++i) {
        RankKProjection p = random_rank_k_projection(n, pk, derive_seed(seed, 1000 + i));
        costs.push_back({projection_cost_frobenius(a, p), projection_cost_frobenius(a_tilde, p)});
    }
    if (include_clusterings) {
        for (int i = 0; i < n_samples; ++i) {
            Rng rng(derive_seed(seed, 5000 + i));
            std::vector<int> labels(n);
            for (Index j = 0; j < n; ++j)
                labels[j] = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
            if (i % 2 == 1) {
                // Refine half the candidates so the sample covers locally
                // optimal assignments, not just uniform noise.
                labels = lloyd_refine(a, labels, k, 5).labels;
            }
            ClusterIndicator ci = cluster_indicator(labels, n, k);
            costs.push_back(
                {projection_cost_frobenius(a, ci), projection_cost_frobenius(a_tilde, ci)});
        }
        // Adversarial candidate: the clustering that is optimal for the sketch.
        if (a_tilde.cols() > 0 && n >= k) {
            std::vector<int> best = lloyd_kmeans(a_tilde, k, derive_seed(seed, 77)).labels;
            ClusterIndicator ci = cluster_indicator(best, n, k);
            costs.push_back(
                {projection_cost_frobenius(a, ci), projection_cost_frobenius(a_tilde, ci)});
        }
    }
    // Adversarial candidate: the best rank-k projection of A itself.
    {
        SvdFactors f = svd(a);
        const Index kk = std::min<Index>(k, f.rank());
        if (kk >= 1) {
            RankKProjection p{f.u.leftCols(kk)};
            costs.push_back(
                {projection_cost_frobenius(a, p), projection_cost_frobenius(a_tilde, p)});
        }
    }
    return costs;
}

CheckReport feasibility_report(const char* name, const std::vector<CostPair>& costs,
                               double lower_factor, double upper_factor, double eps,
                               int n_samples, double slack, std::optional<double> c_known) {
    CheckReport rep;
    rep.check = name;
    rep.samples = static_cast<int>(costs.size());
    rep.epsilon = eps;

    double lo_raw = -std::numeric_limits<double>::infinity();
    double hi_raw = std::numeric_limits<double>::infinity();
    for (const CostPair& cp : costs) {
        lo_raw = std::max(lo_raw, lower_factor * cp.exact - cp.sketched);
        hi_raw = std::min(hi_raw, upper_factor * cp.exact - cp.sketched);
    }
    rep.c_lo = std::max(0.0, lo_raw - slack);
    rep.c_hi = hi_raw + slack;

    if (c_known) {
        bool ok = *c_known >= -slack;
        for (const CostPair& cp : costs) {
            ok = ok && lower_factor * cp.exact <= cp.sketched + *c_known + slack &&
                 cp.sketched + *c_known <= upper_factor * cp.exact + slack;
        }
        rep.passed = ok;
        rep.details["c_known"] = *c_known;
    } else {
        rep.passed = rep.c_lo <= rep.c_hi;
    }

    const double c_eff = c_known ? *c_known : rep.c_lo;
    double worst_lo = std::numeric_limits<double>::infinity();
    double worst_hi = 0.0;
    for (const CostPair& cp : costs) {
        if (cp.exact <= slack) continue;  // ratio undefined at vanishing cost
        double ratio = (cp.sketched + c_eff) / cp.exact;
        worst_lo = std::min(worst_lo, ratio);
        worst_hi = std::max(worst_hi, ratio);
    }
    if (!std::isfinite(worst_lo)) worst_lo = 0.0;
    rep.worst_lower = worst_lo;
    rep.worst_upper = worst_hi;
    rep.details["slack"] = slack;
    rep.details["requested_samples"] = n_samples;
    return rep;
}

}  // namespace

std::string CheckReport::to_json() const {
    std::ostringstream os;
    os << "{\"check\":\"" << check << "\",\"samples\":" << samples
       << ",\"epsilon\":" << fmt_json_double(epsilon) << ",\"c_lo\":" << fmt_json_double(c_lo)
       << ",\"c_hi\":" << fmt_json_double(c_hi)
       << ",\"worst_lower\":" << fmt_json_double(worst_lower)
       << ",\"worst_upper\":" << fmt_json_double(worst_upper)
       << ",\"passed\":" << (passed ? "true" : "false");
    if (!details.empty()) {
        os << ",\"details\":{";
        bool first = true;
        for (const auto& [key, value] : details) {
            if (!first) os << ",";
            first = false;
            os << "\"" << key << "\":" << fmt_json_double(value);
        }
        os << "}";
    }
    os << "}";
    return os.str();
}

std::string CheckReport::to_kv() const {
    std::ostringstream os;
    os << "check=" << check << "\nsamples=" << samples << "\nepsilon=" << fmt_double(epsilon)
       << "\nc_lo=" << fmt_double(c_lo) << "\nc_hi=" << fmt_double(c_hi)
       << "\nworst_lower=" << fmt_double(worst_lower)
       << "\nworst_upper=" << fmt_double(worst_upper)
       << "\npassed=" << (passed ? "true" : "false") << "\n";
    for (const auto& [key, value] : details) os << key << "=" << fmt_double(value) << "\n";
    return os.str();
}

CheckReport check_pcp(const Matrix& a, const Matrix& a_tilde, int k, double eps, int n_samples,
                      std::uint64_t seed, bool include_clusterings,
                      std::optional<double> c_known) {
    require(a.rows() == a_tilde.rows(), "check_pcp: row counts differ");
    require(k >= 1 && eps >= 0.0 && std::isfinite(eps), "check_pcp: bad rank or accuracy");
    require(n_samples >= 1, "check_pcp: need at least one sample");
    const double slack = 1e-8 * a.squaredNorm();
    auto costs = sample_costs(a, a_tilde, k, n_samples, seed, include_clusterings);
    return feasibility_report("pcp", costs, 1.0 - eps, 1.0 + eps, eps, n_samples, slack,
                              c_known);
}

CheckReport check_pcp_one_sided(const Matrix& a, const Matrix& a_tilde, int k, double eps,
                                int n_samples, std::uint64_t seed, bool include_clusterings,
                                std::optional<double> c_known) {
    require(a.rows() == a_tilde.rows(), "check_pcp_one_sided: row counts differ");
    require(k >= 1 && eps >= 0.0 && std::isfinite(eps), "check_pcp_one_sided: bad rank or accuracy");
    require(n_samples >= 1, "check_pcp_one_sided: need at least one sample");
    const double slack = 1e-8 * a.squaredNorm();
    auto costs = sample_costs(a, a_tilde, k, n_samples, seed, include_clusterings);
    return feasibility_report("pcp1", costs, 1.0, 1.0 + eps, eps, n_samples, slack, c_known);
}

CheckReport check_error_conditions(const Matrix& a, const Matrix& a_tilde, int k, double eps) {
    require(a.rows() == a_tilde.rows(), "check_error_conditions: row counts differ");
    require(a.rows() <= 2000, "check_error_conditions: size guard exceeded (max 2000 rows)");
    require(k >= 1 && eps >= 0.0 && std::isfinite(eps), "check_error_conditions: bad rank or accuracy");

    Matrix e = a_tilde * a_tilde.transpose() - a * a.transpose();
    e = 0.5 * (e + e.transpose());  // clear rounding asymmetry before the eigensolve
    std::vector<double> top = top_eigenvalues_sym(e, k);

    Eigen::SelfAdjointEigenSolver<Matrix> es(e);
    require(es.info() == Eigen::Success, "check_error_conditions: eigen decomposition failed");
    const double lambda_max = es.eigenvalues().maxCoeff();

    double sum_top = 0.0;
    for (double lambda : top) sum_top += std::abs(lambda);

    const double slack = 1e-8 * a.squaredNorm();
    const double tail = tail_energy(a, k);

    CheckReport rep;
    rep.check = "lemma6";
    rep.samples = static_cast<int>(top.size());
    rep.epsilon = eps;
    rep.c_lo = rep.c_hi = -es.eigenvalues().sum();  // the offset induced by E
    const bool psd_ok = lambda_max <= slack;
    const bool sum_ok = sum_top <= eps * tail + slack;
    rep.passed = psd_ok && sum_ok;
    rep.worst_lower = a.squaredNorm() > 0 ? lambda_max / a.squaredNorm() : 0.0;
    rep.worst_upper = eps * tail + slack > 0 ? sum_top / (eps * tail + slack) : 0.0;
    rep.details["lambda_max"] = lambda_max;
    rep.details["sum_abs_top_k"] = sum_top;
    rep.details["eps_times_tail"] = eps * tail;
    rep.details["slack"] = slack;
    return rep;
}

CheckReport check_subspace_spectral(const Matrix& m, const Matrix& r, double eps) {
    require(r.cols() == m.rows(), "check_subspace_spectral: R must act on the rows of M");
    require(eps >= 0.0 && std::isfinite(eps), "check_subspace_spectral: accuracy must be nonnegative");
    Matrix rm = r * m;
    Matrix e = rm.transpose() * rm - m.transpose() * m;
    e = 0.5 * (e + e.transpose());
    std::vector<double> top = top_eigenvalues_sym(e, 1);
    const double err = top.size() > 0 ? std::abs(top[0]) : 0.0;
    CheckReport rep;
    rep.check = "subspace-spectral";
    rep.samples = 1;
    rep.epsilon = eps;
    rep.c_lo = rep.c_hi = 0.0;
    rep.worst_lower = rep.worst_upper = err / eps;
    rep.passed = err <= eps;
    rep.details["spectral_error"] = err;
    return rep;
}

CheckReport check_frobenius_preservation(const Matrix& m, const Matrix& r, double eps) {
    require(r.cols() == m.rows(), "check_frobenius_preservation: R must act on the rows of M");
    require(eps >= 0.0 && std::isfinite(eps), "check_frobenius_preservation: accuracy must be nonnegative");
    const double before = m.squaredNorm();
    const double after = (r * m).squaredNorm();
    const double err = std::abs(after - before);
    CheckReport rep;
    rep.check = "frobenius";
    rep.samples = 1;
    rep.epsilon = eps;
    rep.worst_lower = rep.worst_upper = before > 0 ? err / (eps * before) : 0.0;
    rep.passed = err <= eps * before;
    rep.details["norm_before"] = before;
    rep.details["norm_after"] = after;
    return rep;
}

CheckReport check_spectral_pcp(const Matrix& a, const Matrix& a_tilde, int k, double eps,
                               int n_samples, std::uint64_t seed,
                               std::optional<double> c_known) {
    require(a.rows() == a_tilde.rows(), "check_spectral_pcp: row counts differ");
    require(k >= 1 && eps >= 0.0 && std::isfinite(eps), "check_spectral_pcp: bad rank or accuracy");
    require(n_samples >= 1, "check_spectral_pcp: need at least one sample");
    const Index n = a.rows();
    const double slack = 1e-8 * a.squaredNorm();

    // One SVD per matrix; each sampled projection then needs only an
    // r x r eigensolve: ||(I-QQ^T)A||_2^2 = lambda_max(S (I - T^T T) S) with
    // T = Q^T U and S = diag(sigma).
    SvdFactors fa = svd(a);
    SvdFactors ft = svd(a_tilde);
    auto costs_for = [](const SvdFactors& f, const Matrix& q) -> std::pair<double, double> {
        if (f.rank() == 0) return {0.0, 0.0};
        const Index r = f.rank();
        Matrix t = q.transpose() * f.u.leftCols(r);  // k x r
        Matrix inner = Matrix::Identity(r, r) - t.transpose() * t;
        Matrix g = f.sigma.head(r).asDiagonal() * inner * f.sigma.head(r).asDiagonal();
        g = 0.5 * (g + g.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(g);
        require(es.info() == Eigen::Success, "check_spectral_pcp: eigensolve failed");
        const double spectral = std::max(0.0, es.eigenvalues().maxCoeff());
        const double frobenius = std::max(0.0, es.eigenvalues().sum());
        return {spectral, frobenius};
    };

    struct SpectralSample {
        double lo;  // (1-eps)||A-PA||_2^2 - eps/k ||A-PA||_F^2
        double hi;  // (1+eps)||A-PA||_2^2 + eps/k ||A-PA||_F^2
        double sketched;
        double exact_sp;
    };
    std::vector<SpectralSample> samples;
    auto add_candidate = [&](const Matrix& q) {
        auto [sp_a, fr_a] = costs_for(fa, q);
        auto [sp_t, fr_t] = costs_for(ft, q);
        (void)fr_t;
        SpectralSample s;
        s.lo = (1.0 - eps) * sp_a - (eps / k) * fr_a;
        s.hi = (1.0 + eps) * sp_a + (eps / k) * fr_a;
        s.sketched = sp_t;
        s.exact_sp = sp_a;
        samples.push_back(s);
    };
    const Index pk = std::min<Index>(k, n);
    for (int i = 0; i < n_samples; ++i)
        add_candidate(random_rank_k_projection(n, pk, derive_seed(seed, 1000 + i)).basis);
    if (fa.rank() >= 1) add_candidate(fa.u.leftCols(std::min<Index>(k, fa.rank())));

    CheckReport rep;
    rep.check = "spectral-pcp";
    rep.samples = static_cast<int>(samples.size());
    rep.epsilon = eps;
    double lo_raw = -std::numeric_limits<double>::infinity();
    double hi_raw = std::numeric_limits<double>::infinity();
    for (const SpectralSample& s : samples) {
        lo_raw = std::max(lo_raw, s.lo - s.sketched);
        hi_raw = std::min(hi_raw, s.hi - s.sketched);
    }
    rep.c_lo = std::max(0.0, lo_raw - slack);
    rep.c_hi = hi_raw + slack;
    if (c_known) {
        bool ok = *c_known >= -slack;
        for (const SpectralSample& s : samples) {
            ok = ok && s.lo <= s.sketched + *c_known + slack &&
                 s.sketched + *c_known <= s.hi + slack;
        }
        rep.passed = ok;
        rep.details["c_known"] = *c_known;
    } else {
        rep.passed = rep.c_lo <= rep.c_hi;
    }
    const double c_eff = c_known ? *c_known : rep.c_lo;
    double worst_lo = std::numeric_limits<double>::infinity();
    double worst_hi = 0.0;
    for (const SpectralSample& s : samples) {
        if (s.exact_sp <= slack) continue;
        double ratio = (s.sketched + c_eff) / s.exact_sp;
        worst_lo = std::min(worst_lo, ratio);
        worst_hi = std::max(worst_hi, ratio);
    }
    if (!std::isfinite(worst_lo)) worst_lo = 0.0;
    rep.worst_lower = worst_lo;
    rep.worst_upper = worst_hi;
    rep.details["slack"] = slack;
    return rep;
}

CheckReport check_B_construction(const Matrix& a, const Matrix& z, int k) {
    require(a.cols() == z.rows(), "check_B_construction: Z must act on the columns of A");
    require(k >= 1, "check_B_construction: k must be positive");
    const double tail = tail_energy(a, k);
    require(tail > 1e-14 * a.squaredNorm(),
            "check_B_construction: tail energy vanishes, the residual block is undefined");

    Matrix residual = a - (a * z) * z.transpose();
    const double fro = residual.squaredNorm();
    const double sp = spectral_norm(residual);
    const double fro_ratio = fro / (2.0 * tail);
    const double sp_ratio = (sp * sp) / ((2.0 / k) * tail);
    if (fro_ratio > 1.0 + 1e-8 || sp_ratio > 1.0 + 1e-8) {
        throw std::invalid_argument(
            "check_B_construction: basis misses the residual bounds (frobenius ratio " +
            fmt_double(fro_ratio) + ", spectral ratio " + fmt_double(sp_ratio) + ")");
    }

    Matrix b1 = z.transpose();
    Matrix b2 = std::sqrt(static_cast<double>(k) / tail) * residual;
    Matrix b(b1.rows() + b2.rows(), a.cols());
    b << b1, b2;

    Matrix gram = b * b.transpose();
    std::vector<double> top = top_eigenvalues_sym(gram, 1);
    const double gram_norm = top.size() > 0 ? std::abs(top[0]) : 0.0;
    const double trace = gram.trace();
    const double trace_b2 = b2.squaredNorm();
    const double cross = (b1 * b2.transpose()).norm();
    const double cross_scale = std::max(1.0, b1.norm() * b2.norm());

    CheckReport rep;
    rep.check = "B";
    rep.samples = 1;
    rep.epsilon = 0.0;
    const bool norm_ok = gram_norm >= 1.0 - 1e-8 && gram_norm <= 2.0 + 1e-8;
    const bool trace_ok = trace <= 3.0 * k + 1e-8;
    const bool trace_b2_ok = trace_b2 <= 2.0 * k + 1e-8;
    const bool cross_ok = cross <= 1e-10 * cross_scale;
    rep.passed = norm_ok && trace_ok && trace_b2_ok && cross_ok;
    rep.worst_lower = gram_norm;        // should sit in [1, 2]
    rep.worst_upper = trace / (3.0 * k);
    rep.details["gram_spectral_norm"] = gram_norm;
    rep.details["gram_trace"] = trace;
    rep.details["residual_block_trace"] = trace_b2;
    rep.details["cross_block_norm"] = cross;
    rep.details["residual_fro_ratio"] = fro_ratio;
    rep.details["residual_spectral_ratio"] = sp_ratio;
    return rep;
}

}  // namespace pcps
