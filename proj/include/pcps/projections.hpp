#pragma once

#include <cstdint>
#include <vector>

#include "pcps/matrix.hpp"

namespace pcps {

// Rank-k orthogonal projection P = Q Q^T, stored as its basis. Never
// materialized as an n x n matrix; application is A - Q (Q^T A).
struct RankKProjection {
    Matrix basis;  // n x k, orthonormal columns
};

// A k-way clustering of n rows. The induced indicator matrix X_C has entry
// 1/sqrt(|C_j|) for rows of cluster j; X_C X_C^T is the clustering's
// projection. Empty clusters are dropped from the indicator, so the
// projection rank is the number of nonempty clusters.
struct ClusterIndicator {
    std::vector<int> labels;  // size n, values in [0, k)
    int k = 0;
    std::vector<int> sizes;  // size k, counts per label

    int effective_k() const {
        int c = 0;
        for (int s : sizes)
            if (s > 0) ++c;
        return c;
    }
};

ClusterIndicator cluster_indicator(const std::vector<int>& labels, Index n, int k);

// n x k_effective indicator matrix with orthonormal columns.
Matrix indicator_matrix(const ClusterIndicator& c);

// Q (Q^T A): rows projected onto span(Q).
Matrix apply_projection(const Matrix& a, const RankKProjection& p);

// X_C X_C^T A: every row replaced by its cluster centroid.
Matrix apply_centroids(const Matrix& a, const ClusterIndicator& c);

// ||A - P A||_F^2
double projection_cost_frobenius(const Matrix& a, const RankKProjection& p);
double projection_cost_frobenius(const Matrix& a, const ClusterIndicator& c);

// ||A - P A||_2^2
double projection_cost_spectral(const Matrix& a, const RankKProjection& p);
double projection_cost_spectral(const Matrix& a, const ClusterIndicator& c);

// Orthonormalized n x k standard-Gaussian draw.
RankKProjection random_rank_k_projection(Index n, Index k, uint64_t seed);

}  // namespace pcps
