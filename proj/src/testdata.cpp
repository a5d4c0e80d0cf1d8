#include "pcps/testdata.hpp"

#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

#include "pcps/rng.hpp"

namespace pcps {

namespace {

Matrix orthonormal_columns(Index n, Index r, Rng& rng) {
    Matrix g = gaussian_matrix(n, r, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(n, r);
}

}  // namespace

LabeledMatrix gaussian_cloud_clusters(Index n, Index d, int k, double separation,
                                      std::uint64_t seed) {
    require(n >= 1 && d >= 1, "gaussian_cloud_clusters: dimensions must be positive");
    require(k >= 1 && static_cast<Index>(k) <= n, "gaussian_cloud_clusters: bad cluster count");
    require(separation >= 0.0, "gaussian_cloud_clusters: separation must be non-negative");

    Rng center_rng(derive_seed(seed, 1));
    Matrix centers(k, d);
    for (int j = 0; j < k; ++j) {
        Vector dir(d);
        for (Index t = 0; t < d; ++t) dir[t] = center_rng.gaussian();
        double norm = dir.norm();
        if (norm < 1e-12) {
            dir.setZero();
            dir[0] = 1.0;
            norm = 1.0;
        }
        centers.row(j) = (separation / norm) * dir.transpose();
    }

    Rng point_rng(derive_seed(seed, 2));
    LabeledMatrix out;
    out.points.resize(n, d);
    out.labels.resize(n);
    const Index base = n / k;
    const Index extra = n % k;
    Index at = 0;
    for (int j = 0; j < k; ++j) {
        const Index len = base + (j < extra ? 1 : 0);
        for (Index i = 0; i < len; ++i, ++at) {
            for (Index t = 0; t < d; ++t) out.points(at, t) = centers(j, t) + point_rng.gaussian();
            out.labels[at] = j;
        }
    }
    return out;
}

Matrix lower_bound_instance(int k, double eps, Index n_prime, std::uint64_t seed) {
    require(k >= 2, "lower_bound_instance: k must be at least 2");
    require(eps > 0.0 && eps < 1.0, "lower_bound_instance: epsilon outside (0,1)");
    require(n_prime >= 1, "lower_bound_instance: n_prime must be positive");
    const double m_real = k / eps;
    const Index m = static_cast<Index>(std::llround(m_real));
    require(std::abs(m_real - static_cast<double>(m)) <= 1e-9 * m_real,
            "lower_bound_instance: k/eps must be integral");
    const double lambda = 1.0 - 2.0 * std::sqrt(k / (static_cast<double>(n_prime) * eps));
    require(lambda > 0.0, "lower_bound_instance: n_prime too small for a positive identity block");

    Matrix a = Matrix::Zero(n_prime + k - 1, m + k - 1);
    for (int i = 0; i < k - 1; ++i) a(i, i) = lambda;
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_prime));
    for (Index i = 0; i < n_prime; ++i)
        for (Index j = 0; j < m; ++j) a(k - 1 + i, k - 1 + j) = scale * rng.gaussian();
    return a;
}

Matrix matrix_with_spectrum(Index n, Index d, const Vector& sigma, std::uint64_t seed) {
    const Index r = sigma.size();
    require(r >= 1 && r <= std::min(n, d), "matrix_with_spectrum: spectrum length out of range");
    for (Index i = 0; i + 1 < r; ++i)
        require(sigma[i] >= sigma[i + 1], "matrix_with_spectrum: spectrum must be non-increasing");
    require(sigma[r - 1] >= 0.0, "matrix_with_spectrum: negative singular value");
    Rng rng(seed);
    Matrix u = orthonormal_columns(n, r, rng);
    Matrix v = orthonormal_columns(d, r, rng);
    return u * sigma.asDiagonal() * v.transpose();
}

Matrix gaussian_dense(Index n, Index d, std::uint64_t seed) {
    Rng rng(seed);
    return gaussian_matrix(n, d, rng);
}

}  // namespace pcps
