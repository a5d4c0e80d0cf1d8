#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pcps/matrix.hpp"
#include "pcps/sketch.hpp"

namespace pcps {

struct TurnstileUpdate {
    Index row = 0;
    Index col = 0;
    double delta = 0.0;
};

// Single-pass turnstile sketch S*A where S is a hashed sign matrix whose
// columns are never materialized: each update touches one accumulator cell
// per hash block. Memory is O(d' * d), independent of n.
class StreamState {
  public:
    StreamState(Index n, Index d, int k, double eps, double delta, std::uint64_t seed,
                SketchFamily family, const CalibConstants& cc);

    void apply(const TurnstileUpdate& u);

    const Matrix& accumulator() const { return acc_; }
    Index rows() const { return n_; }
    Index cols() const { return d_; }
    Index sketch_rows() const { return sketch_rows_; }
    int rank_target() const { return k_; }
    std::uint64_t update_count() const { return updates_; }
    std::size_t state_bytes() const;

    // Hash layout, exposed so the batch oracle can materialize S.
    int blocks() const { return blocks_; }
    Index bucket(Index row, int block) const;
    double sign_of(Index row, int block) const;
    double scale() const { return scale_; }

  private:
    Index n_ = 0;
    Index d_ = 0;
    int k_ = 0;
    Index sketch_rows_ = 0;
    int blocks_ = 1;
    Index block_size_ = 0;
    double scale_ = 1.0;
    std::uint64_t updates_ = 0;
    std::vector<std::array<std::uint64_t, 4>> bucket_coeffs_;  // one polynomial per block
    std::vector<std::array<std::uint64_t, 4>> sign_coeffs_;
    Matrix acc_;
};

StreamState stream_init(Index n, Index d, int k, double eps, double delta, std::uint64_t seed,
                        SketchFamily family = SketchFamily::sparse_embedding,
                        const CalibConstants& cc = CalibConstants::defaults());

void stream_update(StreamState& state, const TurnstileUpdate& u);

struct StreamBasis {
    Matrix z;  // d x (<= k), top right singular directions of the accumulator
    Vector sketch_singular_values;
};

StreamBasis stream_finalize(const StreamState& state);

// ||A - AZZ^T||_F^2 for an orthonormal-column Z.
double stream_residual_cost(const Matrix& a, const Matrix& z);

// Update streams on disk: text lines "row col delta", or the binary layout
// (u64 row, u64 col, f64 delta) little-endian per record.
std::vector<TurnstileUpdate> read_updates_text(std::istream& in);
std::vector<TurnstileUpdate> read_updates_binary(std::istream& in);

}  // namespace pcps
