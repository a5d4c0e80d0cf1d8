#pragma once

#include <cstdint>
#include <vector>

#include "pcps/matrix.hpp"
#include "pcps/projections.hpp"
#include "pcps/sketch.hpp"

namespace pcps {

struct KMeansResult {
    std::vector<int> labels;
    double cost_on_input = 0.0;  // sum of squared distances to assigned centroids
    int iterations = 0;
    bool converged = false;
};

struct SolverOptions {
    std::uint64_t seed = 0;
    int max_iters = 100;
    double rel_tol = 1e-6;
};

// Lloyd's algorithm with D^2-weighted seeding. Empty clusters are repaired by
// moving the point currently farthest from its centroid. Stops when the
// relative cost improvement drops below rel_tol or after max_iters rounds.
KMeansResult lloyd_kmeans(const Matrix& x, int k, std::uint64_t seed, int max_iters = 100,
                          double rel_tol = 1e-6);

// Lloyd rounds starting from a given assignment instead of a fresh seeding.
KMeansResult lloyd_refine(const Matrix& x, const std::vector<int>& labels, int k, int max_iters,
                          double rel_tol = 1e-6);

// Exact minimum over all partitions into at most k non-empty blocks,
// enumerated as restricted-growth strings with branch-and-bound pruning.
// Guarded at 14 rows; ties are resolved by first enumeration order.
KMeansResult brute_force_kmeans(const Matrix& x, int k);

// Cost of an externally supplied assignment against centroids recomputed
// from that assignment.
double evaluate_clustering_cost(const Matrix& a, const std::vector<int>& labels);

// Sketch the rows of A, cluster the sketch, report the assignment's cost on A.
KMeansResult solve_kmeans_via_sketch(const Matrix& a, const SketchConfig& cfg,
                                     const SolverOptions& solver, bool brute_force = false);

struct LraResult {
    Matrix basis;  // n x k, orthonormal columns spanning the chosen left subspace
    double cost = 0.0;  // ||A - QQ^T A||_F^2
};

// Rank-k left subspace taken from the sketch's top singular directions,
// evaluated on A.
LraResult solve_lra_via_sketch(const Matrix& a, const SketchConfig& cfg);

}  // namespace pcps
