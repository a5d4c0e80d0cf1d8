#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcps/matrix.hpp"

namespace pcps {

enum class SketchFamily {
    svd,
    approx_svd,
    dense_jl,
    sparse_embedding,
    osnap,
    non_oblivious,
    column_sampling,
    bss,
    logk,
};

const char* family_name(SketchFamily f);
SketchFamily family_from_name(const std::string& name);

// Multipliers hiding the big-O constants of every dimension formula. The
// shipped defaults come from a one-time calibration run (`pcps calibrate`
// reproduces it); a plain-text config file next to the binary overrides them.
struct CalibConstants {
    double dense_jl = 6.0;          // d' = ceil(c * (k + ln(1/delta)) / eps^2)
    double sparse_embedding = 1.0;  // d' = ceil(c * k^2 / (eps^2 * delta))
    double osnap = 2.0;             // d' = ceil(c * k * ln(k/delta) / eps^2)
    double osnap_sparsity = 2.0;    // s  = ceil(c * ln(k/delta))
    double sampling = 2.0;          // t  = ceil(c * k * ln(k/delta) / eps^2)
    double bss = 4.0;               // d' = ceil(c * k / eps^2)
    double logk = 4.0;              // d' = ceil(c * ln(k/delta) / eps^2)
    double residual_jl = 8.0;       // rows of the norm-estimation projection: ceil(c * ln(d/delta))
    double nonoblivious_eps = 1.0;  // constant internal error of the non-oblivious reduction
    double nonoblivious_cal = 1.0;  // calibrated epsilon for the spectral residual contract
    double stream = 2.0;            // stream sketch rows: ceil(c * k^2 / (eps^2 * delta))

    static CalibConstants defaults() { return {}; }
    // Reads key=value lines; missing file or missing keys fall back to defaults.
    static CalibConstants load_or_default(const std::string& path);
    void save(const std::string& path) const;
};

struct SketchConfig {
    int k = 1;
    double epsilon = 0.5;
    double delta = 0.1;
    SketchFamily family = SketchFamily::svd;
    CalibConstants constants = {};
    uint64_t seed = 0;

    void validate() const {
        require(k >= 1, "SketchConfig: k < 1");
        require(epsilon > 0.0 && epsilon < 1.0, "SketchConfig: epsilon outside (0,1)");
        require(delta > 0.0 && delta < 1.0, "SketchConfig: delta outside (0,1)");
    }
};

// Selected-column bookkeeping for the sampling and BSS families: a_tilde
// column t is A.col(indices[t]) * weights[t].
struct ColumnMap {
    std::vector<Index> indices;
    std::vector<double> weights;
};

struct SketchResult {
    Matrix a_tilde;  // n x d'
    SketchConfig config;
    std::optional<double> c_known;      // Definition-1 constant, when analytic
    std::optional<ColumnMap> column_map;
    std::optional<Matrix> basis;        // right basis Z when a_tilde = A Z
};

// Dimension formulas (all clamped below by 1).
int dense_jl_dim(int k, double eps, double delta, const CalibConstants& cc);
int sparse_embedding_dim(int k, double eps, double delta, const CalibConstants& cc);
int osnap_dim(int k, double eps, double delta, const CalibConstants& cc);
int osnap_sparsity(int k, double delta, const CalibConstants& cc, int d_prime = 0);
int logk_dim(int k, double eps, double delta, const CalibConstants& cc);

// Sketching matrix R (d' x d). dense family: entries +-1/sqrt(d');
// sparse-embedding: one +-1 per column; osnap: s nonzeros of +-1/sqrt(s) per
// column, one per contiguous row block (d' must be a multiple of s).
Matrix jl_matrix(Index d, Index d_prime, SketchFamily family, uint64_t seed, int sparsity = 0);

// --- constructions ---

// A_m in factored form: a_tilde = U_m Sigma_m, m = ceil(k/eps) clamped to
// rank; c_known = tail energy past m.
SketchResult svd_sketch(const Matrix& a, int k, double eps);
SketchResult svd_sketch_m(const Matrix& a, int k, int m);  // explicit m

// Smallest m whose following k squared singular values sum to at most
// eps * tail_energy(k); never exceeds ceil(k/eps).
int choose_svd_rank(const Matrix& a, int k, double eps);
int choose_svd_rank(const Vector& sigma, int k, double eps);

// a_tilde = A Z for a caller-provided orthonormal Z (d x m, m = ceil(k/eps));
// c_known = ||A - A Z Z^T||_F^2.
SketchResult approx_svd_sketch(const Matrix& a, const Matrix& z, int k, double eps);

// a_tilde = A R^T for the oblivious families {dense_jl, sparse_embedding, osnap}.
SketchResult random_projection_sketch(const Matrix& a, const SketchConfig& cfg);

// Rank-k right basis built from a small oblivious sketch plus an exact SVD of
// it; satisfies ||A - A Z Z^T||_F^2 <= 2 * tail_energy(k) up to sketching
// failure probability delta.
Matrix approx_rank_basis(const Matrix& a, int k, double delta, uint64_t seed,
                         const CalibConstants& cc);

// Per-column estimates of ||(A - A Z Z^T)_{:,i}|| within [1/2, 3/2] of the
// truth simultaneously, with probability >= 1 - delta. Computed through a
// small dense projection applied in stages (Pi A, then (Pi A) Z, subtract).
Vector approx_residual_column_norms(const Matrix& a, const Matrix& z, double delta,
                                    uint64_t seed, const CalibConstants& cc);

// Z' = Z plus every singular direction of A - A Z Z^T whose squared singular
// value exceeds (2/k) * tail_energy(k). At most k directions qualify, so Z'
// has at most 2k columns and ||A - A Z' Z'^T||_2^2 <= (2/k) * tail_energy(k).
Matrix ensure_spectral_condition(const Matrix& a, const Matrix& z, int k);

// t = ceil(c_s k ln(k/delta)/eps^2) columns drawn i.i.d. proportionally to
// ||Z^T_{:,i}||^2 + (k / tail_energy(k)) * r_i^2, each reweighted by
// 1/sqrt(t p_i). r_i are residual column norms: exact when exact_norms,
// otherwise the staged estimates scaled up by 2 so they overestimate.
SketchResult column_sampling_sketch(const Matrix& a, const Matrix& z, int k, double eps,
                                    double delta, uint64_t seed, bool exact_norms,
                                    const CalibConstants& cc);

// Sampling + deterministic barrier selection pipeline; final sketch holds
// ceil(c_b k / eps^2) reweighted original columns of A.
SketchResult bss_sketch(const Matrix& a, int k, double eps, double delta, uint64_t seed,
                        const CalibConstants& cc);

// A-dependent sketch: R (target rank k' = ceil(k/eps) + k - 1) hits A from
// the left, Z = best rank-k' row basis of RA, a_tilde = A Z.
SketchResult non_oblivious_sketch(const Matrix& a, int k, double eps, double delta,
                                  SketchFamily family, uint64_t seed, const CalibConstants& cc);

// a_tilde = A R^T with only O(ln(k/delta)/eps^2) columns. Valid for k-means
// cost transfer only (constant-factor regime), not for rank-k LRA.
SketchResult logk_projection_sketch(const Matrix& a, int k, double eps, double delta,
                                    uint64_t seed, const CalibConstants& cc);

// Family dispatch used by the solvers and the CLI.
SketchResult build_sketch(const Matrix& a, const SketchConfig& cfg);

}  // namespace pcps
