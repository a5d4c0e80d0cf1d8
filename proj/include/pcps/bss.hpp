#pragma once

#include <cstdint>
#include <vector>

#include "pcps/matrix.hpp"
#include "pcps/sketch.hpp"

namespace pcps {

// Output of the deterministic row selection: `indices[t]` is a row of M and
// `weights[t]` its multiplier in the weighted Gram sum. Repeats are allowed
// (the same row may be picked in several steps; its weight entries then
// appear once with the accumulated value).
struct BssSelection {
    std::vector<Index> indices;
    std::vector<double> weights;
};

// Deterministic barrier-potential selection of d' = ceil(c_b k / eps^2)
// reweighted rows of M (q x N) such that ||M^T diag(w) M - M^T M||_2 <= eps.
// Requires ||M^T M||_2 <= 1 and stable rank <= k. With with_norm_row, an
// extra coordinate holding each row's norm is appended before selection, so
// the weighted selection also preserves tr(M^T M) to eps.
// If d' >= q the selection degenerates to every row with unit weight.
BssSelection bss_select(const Matrix& m, int k, double eps, bool with_norm_row,
                        const CalibConstants& cc = CalibConstants::defaults());

namespace detail {

// Pipeline entry: optional explicit extra coordinate (one value per row of M)
// and a switch for the stable-rank precondition, which the column-selection
// pipeline exceeds by a constant factor.
BssSelection bss_select_core(const Matrix& m, int k, double eps, const Vector* extra_coord,
                             bool enforce_stable_rank, const CalibConstants& cc);

}  // namespace detail

}  // namespace pcps
