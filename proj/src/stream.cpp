#include "pcps/stream.hpp"

#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pcps/linalg.hpp"
#include "pcps/rng.hpp"

namespace pcps {

namespace {

constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;  // Mersenne, fast reduction

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
    unsigned __int128 z = static_cast<unsigned __int128>(a) * b;
    std::uint64_t lo = static_cast<std::uint64_t>(z & kPrime);
    std::uint64_t hi = static_cast<std::uint64_t>(z >> 61);
    std::uint64_t r = lo + hi;
    if (r >= kPrime) r -= kPrime;
    return r;
}

// Degree-3 polynomial over GF(p): 4-wise independent when the coefficients
// are uniform.
std::uint64_t poly_eval(const std::array<std::uint64_t, 4>& c, std::uint64_t x) {
    x %= kPrime;
    std::uint64_t acc = c[3];
    acc = mulmod(acc, x); acc += c[2]; if (acc >= kPrime) acc -= kPrime;
    acc = mulmod(acc, x); acc += c[1]; if (acc >= kPrime) acc -= kPrime;
    acc = mulmod(acc, x); acc += c[0]; if (acc >= kPrime) acc -= kPrime;
    return acc;
}

std::array<std::uint64_t, 4> draw_coeffs(Rng& rng) {
    std::array<std::uint64_t, 4> c;
    for (auto& v : c) v = rng.below(kPrime);
    return c;
}

}  // namespace

StreamState::StreamState(Index n, Index d, int k, double eps, double delta, std::uint64_t seed,
                         SketchFamily family, const CalibConstants& cc)
    : n_(n), d_(d), k_(k) {
    require(n >= 1 && d >= 1, "StreamState: dimensions must be positive");
    require(k >= 1, "StreamState: k must be positive");
    require(eps > 0.0 && eps < 1.0, "StreamState: epsilon outside (0,1)");
    require(delta > 0.0 && delta < 1.0, "StreamState: delta outside (0,1)");
    switch (family) {
        case SketchFamily::sparse_embedding: {
            double raw = cc.stream * static_cast<double>(k) * k / (eps * eps * delta);
            require(raw > 0.0 && raw < 1e9, "StreamState: sketch size out of range");
            sketch_rows_ = static_cast<Index>(std::ceil(raw));
            blocks_ = 1;
            block_size_ = sketch_rows_;
            scale_ = 1.0;
            break;
        }
        case SketchFamily::osnap: {
            sketch_rows_ = osnap_dim(k, eps, delta, cc);
            blocks_ = osnap_sparsity(k, delta, cc);
            block_size_ = sketch_rows_ / blocks_;
            scale_ = 1.0 / std::sqrt(static_cast<double>(blocks_));
            break;
        }
        default:
            throw std::invalid_argument("StreamState: family must hash single coordinates");
    }
    Rng rng(derive_seed(seed, 31));
    bucket_coeffs_.reserve(blocks_);
    sign_coeffs_.reserve(blocks_);
    for (int t = 0; t < blocks_; ++t) {
        bucket_coeffs_.push_back(draw_coeffs(rng));
        sign_coeffs_.push_back(draw_coeffs(rng));
    }
    acc_ = Matrix::Zero(sketch_rows_, d_);
}

Index StreamState::bucket(Index row, int block) const {
    const std::uint64_t h = poly_eval(bucket_coeffs_[block], static_cast<std::uint64_t>(row));
    return static_cast<Index>(block) * block_size_ +
           static_cast<Index>(h % static_cast<std::uint64_t>(block_size_));
}

double StreamState::sign_of(Index row, int block) const {
    const std::uint64_t h = poly_eval(sign_coeffs_[block], static_cast<std::uint64_t>(row));
    return (h & 1u) ? 1.0 : -1.0;
}

void StreamState::apply(const TurnstileUpdate& u) {
    require(u.row >= 0 && u.row < n_, "stream_update: row out of range");
    require(u.col >= 0 && u.col < d_, "stream_update: column out of range");
    require(std::isfinite(u.delta), "stream_update: non-finite delta");
    for (int t = 0; t < blocks_; ++t) {
        acc_(bucket(u.row, t), u.col) += sign_of(u.row, t) * scale_ * u.delta;
    }
    ++updates_;
}

std::size_t StreamState::state_bytes() const {
    return sizeof(*this) +
           static_cast<std::size_t>(acc_.size()) * sizeof(double) +
           (bucket_coeffs_.capacity() + sign_coeffs_.capacity()) *
               sizeof(std::array<std::uint64_t, 4>);
}

StreamState stream_init(Index n, Index d, int k, double eps, double delta, std::uint64_t seed,
                        SketchFamily family, const CalibConstants& cc) {
    return StreamState(n, d, k, eps, delta, seed, family, cc);
}

void stream_update(StreamState& state, const TurnstileUpdate& u) { state.apply(u); }

StreamBasis stream_finalize(const StreamState& state) {
    SvdFactors f = svd(state.accumulator());
    const Index kk = std::min<Index>(state.rank_target(), f.rank());
    StreamBasis out;
    out.z = f.v.leftCols(kk);
    out.sketch_singular_values = f.sigma;
    return out;
}

double stream_residual_cost(const Matrix& a, const Matrix& z) {
    if (z.cols() == 0) return a.squaredNorm();
    require(a.cols() == z.rows(), "stream_residual_cost: shape mismatch");
    return (a - (a * z) * z.transpose()).squaredNorm();
}

std::vector<TurnstileUpdate> read_updates_text(std::istream& in) {
    std::vector<TurnstileUpdate> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        TurnstileUpdate u;
        if (!(ls >> u.row >> u.col >> u.delta)) {
            throw std::invalid_argument("update stream: malformed line " +
                                        std::to_string(lineno));
        }
        out.push_back(u);
    }
    return out;
}

std::vector<TurnstileUpdate> read_updates_binary(std::istream& in) {
    std::vector<TurnstileUpdate> out;
    while (true) {
        std::uint64_t row = 0, col = 0;
        double delta = 0.0;
        in.read(reinterpret_cast<char*>(&row), sizeof(row));
        if (in.gcount() == 0 && in.eof()) break;
        in.read(reinterpret_cast<char*>(&col), sizeof(col));
        in.read(reinterpret_cast<char*>(&delta), sizeof(delta));
        if (!in) throw std::invalid_argument("update stream: truncated binary record");
        out.push_back({static_cast<Index>(row), static_cast<Index>(col), delta});
    }
    return out;
}

}  // namespace pcps
