#include "pcps/projections.hpp"

#include <Eigen/QR>
#include <cmath>

#include "pcps/linalg.hpp"
#include "pcps/rng.hpp"

namespace pcps {

ClusterIndicator cluster_indicator(const std::vector<int>& labels, Index n, int k) {
    require(static_cast<Index>(labels.size()) == n, "cluster_indicator: labels length != n");
    require(k >= 1, "cluster_indicator: k < 1");
    ClusterIndicator c;
    c.labels = labels;
    c.k = k;
    c.sizes.assign(static_cast<size_t>(k), 0);
    for (int l : labels) {
        require(l >= 0 && l < k, "cluster_indicator: label out of range");
        ++c.sizes[static_cast<size_t>(l)];
    }
    return c;
}

Matrix indicator_matrix(const ClusterIndicator& c) {
    const Index n = static_cast<Index>(c.labels.size());
    // column index of each nonempty cluster
    std::vector<int> col(static_cast<size_t>(c.k), -1);
    int next = 0;
    for (int j = 0; j < c.k; ++j)
        if (c.sizes[static_cast<size_t>(j)] > 0) col[static_cast<size_t>(j)] = next++;

    Matrix x = Matrix::Zero(n, next);
    for (Index i = 0; i < n; ++i) {
        const int l = c.labels[static_cast<size_t>(i)];
        x(i, col[static_cast<size_t>(l)]) = 1.0 / std::sqrt(static_cast<double>(c.sizes[static_cast<size_t>(l)]));
    }
    return x;
}

Matrix apply_projection(const Matrix& a, const RankKProjection& p) {
    require(p.basis.rows() == a.rows(), "apply_projection: row count mismatch");
    return p.basis * (p.basis.transpose() * a);
}

Matrix apply_centroids(const Matrix& a, const ClusterIndicator& c) {
    require(static_cast<Index>(c.labels.size()) == a.rows(), "apply_centroids: row count mismatch");
    Matrix means = Matrix::Zero(c.k, a.cols());
    for (Index i = 0; i < a.rows(); ++i) means.row(c.labels[static_cast<size_t>(i)]) += a.row(i);
    for (int j = 0; j < c.k; ++j)
        if (c.sizes[static_cast<size_t>(j)] > 0) means.row(j) /= static_cast<double>(c.sizes[static_cast<size_t>(j)]);
    Matrix out(a.rows(), a.cols());
    for (Index i = 0; i < a.rows(); ++i) out.row(i) = means.row(c.labels[static_cast<size_t>(i)]);
    return out;
}

double projection_cost_frobenius(const Matrix& a, const RankKProjection& p) {
    require(p.basis.rows() == a.rows(), "projection_cost: row count mismatch");
    // residual computed directly rather than via the Pythagorean identity,
    // which cancels catastrophically when the cost is near zero
    return (a - apply_projection(a, p)).squaredNorm();
}

double projection_cost_frobenius(const Matrix& a, const ClusterIndicator& c) {
    return (a - apply_centroids(a, c)).squaredNorm();
}

double projection_cost_spectral(const Matrix& a, const RankKProjection& p) {
    require(p.basis.rows() == a.rows(), "projection_cost: row count mismatch");
    return std::pow(spectral_norm(a - apply_projection(a, p)), 2);
}

double projection_cost_spectral(const Matrix& a, const ClusterIndicator& c) {
    return std::pow(spectral_norm(a - apply_centroids(a, c)), 2);
}

RankKProjection random_rank_k_projection(Index n, Index k, uint64_t seed) {
    require(k >= 1 && k <= n, "random_rank_k_projection: need 1 <= k <= n");
    Rng rng(seed);
    Matrix g = gaussian_matrix(n, k, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, k);
    return RankKProjection{std::move(q)};
}

}  // namespace pcps
