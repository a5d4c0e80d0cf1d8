#include "pcps/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pcps/linalg.hpp"
#include "pcps/rng.hpp"

namespace pcps {

namespace {

// D^2-weighted seeding. Equal cumulative weights resolve to the lowest index;
// a fully degenerate weight vector (all remaining distances zero) falls back
// to cycling through the rows.
Matrix kmeanspp_centers(const Matrix& x, int k, Rng& rng) {
    const Index n = x.rows();
    Matrix centers(k, x.cols());
    Index first = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    centers.row(0) = x.row(first);
    Vector dist2(n);
    for (Index i = 0; i < n; ++i) dist2[i] = (x.row(i) - centers.row(0)).squaredNorm();
    for (int j = 1; j < k; ++j) {
        double total = dist2.sum();
        Index pick;
        if (total <= 0.0 || !std::isfinite(total)) {
            pick = static_cast<Index>(j) % n;
        } else {
            double u = rng.uniform() * total;
            double run = 0.0;
            pick = n - 1;
            for (Index i = 0; i < n; ++i) {
                run += dist2[i];
                if (run >= u) {
                    pick = i;
                    break;
                }
            }
        }
        centers.row(j) = x.row(pick);
        for (Index i = 0; i < n; ++i) {
            double d = (x.row(i) - centers.row(j)).squaredNorm();
            if (d < dist2[i]) dist2[i] = d;
        }
    }
    return centers;
}

void assign_points(const Matrix& x, const Matrix& centers, std::vector<int>& labels) {
    const Index n = x.rows();
    const int k = static_cast<int>(centers.rows());
    for (Index i = 0; i < n; ++i) {
        int best = 0;
        double best_d = (x.row(i) - centers.row(0)).squaredNorm();
        for (int j = 1; j < k; ++j) {
            double d = (x.row(i) - centers.row(j)).squaredNorm();
            if (d < best_d) {  // ties keep the lowest label
                best_d = d;
                best = j;
            }
        }
        labels[i] = best;
    }
}

// Rebuild centroids; clusters that came out empty steal the point farthest
// from its current centroid (one per empty cluster, never emptying a
// singleton donor).
void recompute_centers(const Matrix& x, std::vector<int>& labels, int k, Matrix& centers) {
    const Index n = x.rows();
    std::vector<Index> counts(k, 0);
    centers.setZero();
    for (Index i = 0; i < n; ++i) {
        centers.row(labels[i]) += x.row(i);
        ++counts[labels[i]];
    }
    for (int j = 0; j < k; ++j) {
        if (counts[j] > 0) centers.row(j) /= static_cast<double>(counts[j]);
    }
    for (int j = 0; j < k; ++j) {
        if (counts[j] > 0) continue;
        Index donor = -1;
        double worst = -1.0;
        for (Index i = 0; i < n; ++i) {
            if (counts[labels[i]] <= 1) continue;
            double d = (x.row(i) - centers.row(labels[i])).squaredNorm();
            if (d > worst) {
                worst = d;
                donor = i;
            }
        }
        if (donor < 0) continue;  // fewer distinct points than clusters
        --counts[labels[donor]];
        labels[donor] = j;
        counts[j] = 1;
        centers.row(j) = x.row(donor);
    }
}

double assignment_cost(const Matrix& x, const Matrix& centers, const std::vector<int>& labels) {
    double cost = 0.0;
    for (Index i = 0; i < x.rows(); ++i) cost += (x.row(i) - centers.row(labels[i])).squaredNorm();
    return cost;
}

KMeansResult lloyd_loop(const Matrix& x, Matrix centers, std::vector<int> labels, int k,
                        int max_iters, double rel_tol) {
    KMeansResult res;
    res.labels = std::move(labels);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iters; ++it) {
        assign_points(x, centers, res.labels);
        recompute_centers(x, res.labels, k, centers);
        double cost = assignment_cost(x, centers, res.labels);
        res.iterations = it + 1;
        res.cost_on_input = cost;
        const bool settled = std::isfinite(prev) && prev - cost <= rel_tol * prev;
        if (settled || cost == 0.0) {
            res.converged = true;
            return res;
        }
        prev = cost;
    }
    return res;
}

}  // namespace

KMeansResult lloyd_kmeans(const Matrix& x, int k, std::uint64_t seed, int max_iters,
                          double rel_tol) {
    require(k >= 1, "lloyd_kmeans: k must be positive");
    require(x.rows() >= k, "lloyd_kmeans: fewer rows than clusters");
    require(max_iters >= 1, "lloyd_kmeans: max_iters must be positive");
    Rng rng(seed);
    Matrix centers = kmeanspp_centers(x, k, rng);
    std::vector<int> labels(x.rows(), 0);
    return lloyd_loop(x, std::move(centers), std::move(labels), k, max_iters, rel_tol);
}

KMeansResult lloyd_refine(const Matrix& x, const std::vector<int>& labels, int k, int max_iters,
                          double rel_tol) {
    require(k >= 1, "lloyd_refine: k must be positive");
    require(static_cast<Index>(labels.size()) == x.rows(), "lloyd_refine: label count mismatch");
    for (int l : labels) require(l >= 0 && l < k, "lloyd_refine: label out of range");
    Matrix centers = Matrix::Zero(k, x.cols());
    std::vector<int> start = labels;
    recompute_centers(x, start, k, centers);
    return lloyd_loop(x, std::move(centers), std::move(start), k, max_iters, rel_tol);
}

namespace {

struct BruteState {
    const Matrix& x;
    int k;
    Vector row_norm2;
    Matrix block_sum;           // k x d running sums
    std::vector<Index> block_n;
    std::vector<int> assign;
    std::vector<int> best_assign;
    double best = std::numeric_limits<double>::infinity();
    double prefix_norm2 = 0.0;  // sum of ||x_i||^2 over assigned rows
    double explained = 0.0;     // sum over blocks of ||sum||^2 / count
    std::uint64_t leaves = 0;

    explicit BruteState(const Matrix& m, int kk)
        : x(m), k(kk), block_sum(Matrix::Zero(kk, m.cols())), block_n(kk, 0),
          assign(m.rows(), -1), best_assign(m.rows(), 0) {
        row_norm2.resize(m.rows());
        for (Index i = 0; i < m.rows(); ++i) row_norm2[i] = m.row(i).squaredNorm();
    }

    void dfs(Index i, int used) {
        if (i == x.rows()) {
            ++leaves;
            double cost = prefix_norm2 - explained;
            if (cost < best) {
                best = cost;
                best_assign = assign;
            }
            return;
        }
        // Partial cost only grows as rows are added, so prune on it.
        if (prefix_norm2 - explained >= best) return;
        const int limit = std::min(used + 1, k);
        for (int b = 0; b < limit; ++b) {
            const Index nb = block_n[b];
            const double old_term = nb == 0 ? 0.0 : block_sum.row(b).squaredNorm() / nb;
            block_sum.row(b) += x.row(i);
            const double new_term = block_sum.row(b).squaredNorm() / (nb + 1);
            block_n[b] = nb + 1;
            explained += new_term - old_term;
            prefix_norm2 += row_norm2[i];
            assign[i] = b;

            dfs(i + 1, b == used ? used + 1 : used);

            assign[i] = -1;
            prefix_norm2 -= row_norm2[i];
            explained -= new_term - old_term;
            block_n[b] = nb;
            block_sum.row(b) -= x.row(i);
        }
    }
};

}  // namespace

KMeansResult brute_force_kmeans(const Matrix& x, int k) {
    require(k >= 1, "brute_force_kmeans: k must be positive");
    require(x.rows() >= 1, "brute_force_kmeans: empty input");
    require(x.rows() <= 14, "brute_force_kmeans: size guard exceeded (max 14 rows)");
    BruteState st(x, std::min<int>(k, static_cast<int>(x.rows())));
    st.dfs(0, 0);
    KMeansResult res;
    res.labels = st.best_assign;
    res.cost_on_input = std::max(0.0, st.best);
    res.iterations = static_cast<int>(std::min<std::uint64_t>(
        st.leaves, static_cast<std::uint64_t>(std::numeric_limits<int>::max())));
    res.converged = true;
    return res;
}

double evaluate_clustering_cost(const Matrix& a, const std::vector<int>& labels) {
    require(static_cast<Index>(labels.size()) == a.rows(),
            "evaluate_clustering_cost: label count mismatch");
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    require(k >= 1, "evaluate_clustering_cost: no labels");
    Matrix centers = Matrix::Zero(k, a.cols());
    std::vector<Index> counts(k, 0);
    for (Index i = 0; i < a.rows(); ++i) {
        centers.row(labels[i]) += a.row(i);
        ++counts[labels[i]];
    }
    for (int j = 0; j < k; ++j)
        if (counts[j] > 0) centers.row(j) /= static_cast<double>(counts[j]);
    return assignment_cost(a, centers, labels);
}

KMeansResult solve_kmeans_via_sketch(const Matrix& a, const SketchConfig& cfg,
                                     const SolverOptions& solver, bool brute_force) {
    SketchResult sk = build_sketch(a, cfg);
    KMeansResult on_sketch =
        brute_force ? brute_force_kmeans(sk.a_tilde, cfg.k)
                    : lloyd_kmeans(sk.a_tilde, cfg.k, solver.seed, solver.max_iters,
                                   solver.rel_tol);
    KMeansResult out = on_sketch;
    out.cost_on_input = evaluate_clustering_cost(a, on_sketch.labels);
    return out;
}

LraResult solve_lra_via_sketch(const Matrix& a, const SketchConfig& cfg) {
    require(cfg.family != SketchFamily::logk,
            "solve_lra_via_sketch: the logk family is k-means-only");
    SketchResult sk = build_sketch(a, cfg);
    SvdFactors f = svd(sk.a_tilde);
    const Index kk = std::min<Index>(cfg.k, f.rank());
    require(kk >= 1, "solve_lra_via_sketch: sketch has no numerical rank");
    LraResult out;
    out.basis = f.u.leftCols(kk);
    Matrix residual = a - out.basis * (out.basis.transpose() * a);
    out.cost = residual.squaredNorm();
    return out;
}

}  // namespace pcps
