#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "pcps/matrix.hpp"

namespace pcps {

// Outcome of one empirical check. c_lo/c_hi bound the feasible offsets: the
// check passes when some c >= 0 satisfies every sampled inequality, i.e. when
// c_lo <= c_hi. worst_lower/worst_upper are the extreme observed ratios
// (sketch cost + offset) / (exact cost), ignoring samples whose exact cost is
// below the numerical slack. Checks that are not sampling-based reuse the
// ratio fields for their tightest measured margin; `details` names them.
struct CheckReport {
    std::string check;
    int samples = 0;
    double epsilon = 0.0;
    double c_lo = 0.0;
    double c_hi = 0.0;
    double worst_lower = 0.0;
    double worst_upper = 0.0;
    bool passed = false;
    std::map<std::string, double> details;

    std::string to_json() const;
    std::string to_kv() const;
};

// Two-sided cost preservation over random rank-k projections, optional random
// and locally-refined clusterings, the top-k singular projection of A, and the
// clustering that is optimal for the sketch. With c_known the inequalities are
// asserted at that offset; otherwise feasibility of any fixed c >= 0 is
// checked. All comparisons carry slack 1e-8 * ||A||_F^2.
CheckReport check_pcp(const Matrix& a, const Matrix& a_tilde, int k, double eps, int n_samples,
                      std::uint64_t seed, bool include_clusterings,
                      std::optional<double> c_known = std::nullopt);

// One-sided variant: lower factor 1 instead of (1 - eps).
CheckReport check_pcp_one_sided(const Matrix& a, const Matrix& a_tilde, int k, double eps,
                                int n_samples, std::uint64_t seed, bool include_clusterings,
                                std::optional<double> c_known = std::nullopt);

// Eigenvalue conditions on E = sketch Gram minus exact Gram: no positive
// eigenvalue beyond slack, and the k largest magnitudes summing to at most
// eps times the tail energy past rank k. Guarded at 2000 rows.
CheckReport check_error_conditions(const Matrix& a, const Matrix& a_tilde, int k, double eps);

// ||M^T R^T R M - M^T M||_2 <= eps, computed exactly.
CheckReport check_subspace_spectral(const Matrix& m, const Matrix& r, double eps);

// | ||RM||_F^2 - ||M||_F^2 | <= eps * ||M||_F^2.
CheckReport check_frobenius_preservation(const Matrix& m, const Matrix& r, double eps);

// Spectral-norm analogue of the projection sampling check, with the mixed
// Frobenius term eps/k * ||A - PA||_F^2 on both sides.
CheckReport check_spectral_pcp(const Matrix& a, const Matrix& a_tilde, int k, double eps,
                               int n_samples, std::uint64_t seed,
                               std::optional<double> c_known = std::nullopt);

// Structural checks on the two-block matrix built from an orthonormal basis Z
// and the scaled residual A - AZZ^T: spectral norm of the Gram in [1, 2],
// trace bounds, and orthogonality of the blocks. Preconditions on Z
// (Frobenius and per-direction spectral bounds on the residual) are enforced
// and violations reported with the measured ratios.
CheckReport check_B_construction(const Matrix& a, const Matrix& z, int k);

}  // namespace pcps
