// Re-derives the dimension-formula multipliers by binary search for the
// smallest value passing a fixed verification battery, then writes them to
// the constants file. The shipped defaults came from this procedure; rerun it
// to reproduce or tighten them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "pcps/bss.hpp"
#include "pcps/linalg.hpp"
#include "pcps/rng.hpp"
#include "pcps/sketch.hpp"
#include "pcps/solvers.hpp"
#include "pcps/stream.hpp"
#include "pcps/testdata.hpp"
#include "pcps/verify.hpp"

namespace {

using namespace pcps;

Matrix whitened_rank_k(Index q, int k, std::uint64_t seed) {
    Rng rng(seed);
    Matrix g = gaussian_matrix(q, k, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(q, k);
}

// Smallest multiplier in [lo, hi] passing the predicate, assuming larger
// values only help. Returns hi scaled by the safety margin when even hi
// fails (the margin then at least documents the attempt).
double smallest_passing(double lo, double hi, int iters,
                        const std::function<bool(double)>& passes, double margin) {
    if (passes(lo)) return lo * margin;
    double bad = lo, good = hi;
    if (!passes(hi)) return hi * margin;
    for (int i = 0; i < iters; ++i) {
        double mid = 0.5 * (bad + good);
        if (passes(mid)) good = mid;
        else bad = mid;
    }
    return good * margin;
}

bool embedding_battery(SketchFamily family, double c, int n_seeds, int min_pass) {
    CalibConstants cc = CalibConstants::defaults();
    const int k = 4;
    const double eps = 0.5, delta = 0.1;
    int pass = 0;
    for (int s = 0; s < n_seeds; ++s) {
        Matrix m = whitened_rank_k(60, k, derive_seed(1234, s));
        int dp = 0;
        int nnz = 0;
        switch (family) {
            case SketchFamily::dense_jl:
                cc.dense_jl = c;
                dp = dense_jl_dim(k, eps, delta, cc);
                break;
            case SketchFamily::sparse_embedding:
                cc.sparse_embedding = c;
                dp = sparse_embedding_dim(k, eps, delta, cc);
                break;
            case SketchFamily::osnap:
                cc.osnap = c;
                dp = osnap_dim(k, eps, delta, cc);
                nnz = osnap_sparsity(k, delta, cc);
                break;
            default:
                return false;
        }
        Matrix r = jl_matrix(m.rows(), dp, family, derive_seed(77, s), nnz);
        if (check_subspace_spectral(m, r, eps).passed) ++pass;
    }
    return pass >= min_pass;
}

bool sampling_battery(double c, int n_seeds, int min_pass, int samples) {
    CalibConstants cc = CalibConstants::defaults();
    cc.sampling = c;
    int pass = 0;
    for (int s = 0; s < n_seeds; ++s) {
        Matrix a = gaussian_dense(100, 80, derive_seed(555, s));
        Matrix z = approx_rank_basis(a, 3, 0.1, derive_seed(556, s), cc);
        SketchResult sk =
            column_sampling_sketch(a, z, 3, 0.5, 0.1, derive_seed(557, s), false, cc);
        if (check_pcp(a, sk.a_tilde, 3, 0.5, samples, derive_seed(558, s), true).passed) ++pass;
    }
    return pass >= min_pass;
}

bool bss_battery(double c, int n_instances) {
    CalibConstants cc = CalibConstants::defaults();
    cc.bss = c;
    for (int s = 0; s < n_instances; ++s) {
        Matrix m = whitened_rank_k(150, 4, derive_seed(888, s));
        BssSelection sel = bss_select(m, 4, 0.5, false, cc);
        Matrix weighted = Matrix::Zero(m.cols(), m.cols());
        for (std::size_t i = 0; i < sel.indices.size(); ++i) {
            weighted.noalias() +=
                sel.weights[i] * (m.row(sel.indices[i]).transpose() * m.row(sel.indices[i]));
        }
        Matrix e = weighted - m.transpose() * m;
        std::vector<double> top = top_eigenvalues_sym(0.5 * (e + e.transpose()), 1);
        if (top.size() == 0 || std::abs(top[0]) > 0.5) return false;
    }
    return true;
}

bool logk_battery(double c, int n_instances) {
    CalibConstants cc = CalibConstants::defaults();
    cc.logk = c;
    for (int s = 0; s < n_instances; ++s) {
        Matrix a = gaussian_dense(12, 20, derive_seed(999, s));
        double opt = brute_force_kmeans(a, 3).cost_on_input;
        SketchResult sk = logk_projection_sketch(a, 3, 0.5, 0.1, derive_seed(1000, s), cc);
        KMeansResult km = brute_force_kmeans(sk.a_tilde, 3);
        double cost = evaluate_clustering_cost(a, km.labels);
        if (opt > 1e-12 && cost / opt > 9.5) return false;
    }
    return true;
}

bool residual_battery(double c, int n_seeds, int min_pass) {
    CalibConstants cc = CalibConstants::defaults();
    cc.residual_jl = c;
    int pass = 0;
    for (int s = 0; s < n_seeds; ++s) {
        Matrix a = gaussian_dense(200, 50, derive_seed(444, s));
        Matrix z = approx_rank_basis(a, 5, 0.1, derive_seed(445, s), cc);
        Matrix residual = a - (a * z) * z.transpose();
        Vector est = approx_residual_column_norms(a, z, 0.1, derive_seed(446, s), cc);
        bool ok = true;
        for (Index j = 0; j < a.cols(); ++j) {
            double exact = residual.col(j).norm();
            if (est[j] < 0.5 * exact - 1e-12 || est[j] > 1.5 * exact + 1e-12) {
                ok = false;
                break;
            }
        }
        if (ok) ++pass;
    }
    return pass >= min_pass;
}

bool stream_battery(double c, int n_seeds, int min_pass) {
    CalibConstants cc = CalibConstants::defaults();
    cc.stream = c;
    const int k = 5;
    int pass = 0;
    for (int s = 0; s < n_seeds; ++s) {
        Vector sigma(40);
        for (Index i = 0; i < sigma.size(); ++i) sigma[i] = 1.0 / static_cast<double>(i + 1);
        Matrix a = matrix_with_spectrum(150, 100, sigma, derive_seed(333, s));
        StreamState st = stream_init(150, 100, k, 0.5, 0.1, derive_seed(334, s),
                                     SketchFamily::sparse_embedding, cc);
        for (Index i = 0; i < a.rows(); ++i)
            for (Index j = 0; j < a.cols(); ++j)
                if (a(i, j) != 0.0) stream_update(st, {i, j, a(i, j)});
        StreamBasis basis = stream_finalize(st);
        double residual = stream_residual_cost(a, basis.z);
        if (residual <= 1.5 * tail_energy(a, k)) ++pass;
    }
    return pass >= min_pass;
}

double nonoblivious_contract(int n_seeds, double quantile) {
    CalibConstants cc = CalibConstants::defaults();
    std::vector<double> ratios;
    for (int s = 0; s < n_seeds; ++s) {
        Vector sigma(80);
        for (Index i = 0; i < sigma.size(); ++i) sigma[i] = std::pow(i + 1.0, -1.0);
        Matrix a = matrix_with_spectrum(200, 100, sigma, derive_seed(222, s));
        SketchResult sk = non_oblivious_sketch(a, 5, 0.5, 0.1, SketchFamily::dense_jl,
                                               derive_seed(223, s), cc);
        double sp = spectral_norm(a - sk.a_tilde * sk.basis->transpose());
        double tail = tail_energy(a, 5);
        ratios.push_back(tail > 0 ? 5.0 * sp * sp / tail : 0.0);
    }
    std::sort(ratios.begin(), ratios.end());
    const std::size_t idx =
        std::min(ratios.size() - 1,
                 static_cast<std::size_t>(std::ceil(quantile * ratios.size())));
    return ratios[idx];
}

}  // namespace

int run_calibration(const std::string& path, bool quick) {
    const int seeds = quick ? 8 : 40;
    const int iters = quick ? 3 : 6;
    const double margin = 1.25;
    const int min_pass = static_cast<int>(std::ceil(0.95 * seeds));

    CalibConstants out = CalibConstants::defaults();

    std::cerr << "calibrating dense-jl...\n";
    out.dense_jl = smallest_passing(
        1.0, 12.0, iters,
        [&](double c) { return embedding_battery(SketchFamily::dense_jl, c, seeds, min_pass); },
        margin);
    std::cerr << "calibrating sparse-embedding...\n";
    out.sparse_embedding = smallest_passing(
        0.25, 4.0, iters,
        [&](double c) {
            return embedding_battery(SketchFamily::sparse_embedding, c, seeds, min_pass);
        },
        margin);
    std::cerr << "calibrating osnap...\n";
    out.osnap = smallest_passing(
        0.5, 8.0, iters,
        [&](double c) { return embedding_battery(SketchFamily::osnap, c, seeds, min_pass); },
        margin);
    std::cerr << "calibrating column sampling...\n";
    const int samp_seeds = quick ? 5 : 20;
    const int samp_min = static_cast<int>(std::ceil(0.95 * samp_seeds));
    out.sampling = smallest_passing(
        0.5, 8.0, quick ? 2 : 4,
        [&](double c) { return sampling_battery(c, samp_seeds, samp_min, quick ? 100 : 300); },
        margin);
    std::cerr << "calibrating bss...\n";
    out.bss = smallest_passing(
        1.0, 10.0, iters, [&](double c) { return bss_battery(c, quick ? 4 : 10); }, margin);
    std::cerr << "calibrating logk...\n";
    out.logk = smallest_passing(
        0.5, 8.0, quick ? 2 : 4, [&](double c) { return logk_battery(c, quick ? 6 : 30); },
        margin);
    std::cerr << "calibrating residual norms...\n";
    out.residual_jl = smallest_passing(
        1.0, 24.0, iters,
        [&](double c) { return residual_battery(c, samp_seeds, samp_min); }, margin);
    std::cerr << "calibrating stream...\n";
    out.stream = smallest_passing(
        0.25, 6.0, quick ? 2 : 4,
        [&](double c) { return stream_battery(c, samp_seeds, samp_min); }, margin);
    std::cerr << "measuring non-oblivious spectral contract...\n";
    out.nonoblivious_cal = 1.2 * nonoblivious_contract(seeds, 0.97);

    out.save(path);
    std::cout << "{\"dense_jl\":" << out.dense_jl
              << ",\"sparse_embedding\":" << out.sparse_embedding << ",\"osnap\":" << out.osnap
              << ",\"sampling\":" << out.sampling << ",\"bss\":" << out.bss
              << ",\"logk\":" << out.logk << ",\"residual_jl\":" << out.residual_jl
              << ",\"stream\":" << out.stream << ",\"nonoblivious_cal\":" << out.nonoblivious_cal
              << ",\"written\":\"" << path << "\"}\n";
    return 0;
}
