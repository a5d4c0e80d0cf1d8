#pragma once

#include <cstdint>
#include <vector>

#include "pcps/matrix.hpp"

namespace pcps {

struct LabeledMatrix {
    Matrix points;
    std::vector<int> labels;
};

// k gaussian clusters with unit-variance coordinates around centers of norm
// `separation`. Cluster sizes differ by at most one and rows are grouped by
// cluster.
LabeledMatrix gaussian_cloud_clusters(Index n, Index d, int k, double separation,
                                      std::uint64_t seed);

// Block-diagonal instance pairing a small scaled identity against a flat
// gaussian block: top-left (k-1)x(k-1) identity scaled by
// 1 - 2*sqrt(k/(n_prime*eps)), bottom-right n_prime x (k/eps) gaussian with
// entry variance 1/n_prime. Requires k/eps integral and a positive scaling.
Matrix lower_bound_instance(int k, double eps, Index n_prime, std::uint64_t seed);

// Random orthonormal factors around a prescribed singular spectrum.
Matrix matrix_with_spectrum(Index n, Index d, const Vector& sigma, std::uint64_t seed);

// Plain iid N(0,1) matrix.
Matrix gaussian_dense(Index n, Index d, std::uint64_t seed);

}  // namespace pcps
