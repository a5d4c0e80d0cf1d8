#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstring>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pcps/linalg.hpp"
#include "pcps/rng.hpp"
#include "pcps/stream.hpp"
#include "pcps/testdata.hpp"

using namespace pcps;

namespace {

// S*A with the per-cell summation running over rows in ascending order,
// matching the arrival order of a row-sorted update stream.
Matrix batch_oracle(const StreamState& st, const std::vector<TurnstileUpdate>& updates) {
    Matrix a = Matrix::Zero(st.rows(), st.cols());
    for (const auto& u : updates) a(u.row, u.col) += u.delta;
    Matrix out = Matrix::Zero(st.sketch_rows(), st.cols());
    for (Index i = 0; i < st.rows(); ++i) {
        for (int b = 0; b < st.blocks(); ++b) {
            const double s = st.sign_of(i, b) * st.scale();
            const Index r = st.bucket(i, b);
            for (Index j = 0; j < st.cols(); ++j) {
                if (a(i, j) != 0.0) out(r, j) += s * a(i, j);
            }
        }
    }
    return out;
}

// every cell at most once, emitted in ascending (row, col) order
std::vector<TurnstileUpdate> sorted_cell_stream(const Matrix& a) {
    std::vector<TurnstileUpdate> out;
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            if (a(i, j) != 0.0) out.push_back({i, j, a(i, j)});
    return out;
}

}  // namespace

TEST_CASE("initialization zeroes the accumulator and sizes it by the formula") {
    StreamState st = stream_init(100, 10, 3, 0.5, 0.5, 42);
    CHECK(st.sketch_rows() == 144);  // ceil(2 * 9 / (0.25 * 0.5))
    CHECK(st.rows() == 100);
    CHECK(st.cols() == 10);
    CHECK(st.rank_target() == 3);
    CHECK(st.update_count() == 0);
    CHECK(st.accumulator().cwiseAbs().maxCoeff() == 0.0);
    CHECK(st.blocks() == 1);
    CHECK(st.scale() == 1.0);
}

TEST_CASE("same seed reproduces the hash functions, different seed does not") {
    StreamState a = stream_init(200, 5, 2, 0.5, 0.1, 7);
    StreamState b = stream_init(200, 5, 2, 0.5, 0.1, 7);
    StreamState c = stream_init(200, 5, 2, 0.5, 0.1, 8);
    bool differs = false;
    for (Index i = 0; i < 200; ++i) {
        CHECK(a.bucket(i, 0) == b.bucket(i, 0));
        CHECK(a.sign_of(i, 0) == b.sign_of(i, 0));
        if (a.bucket(i, 0) != c.bucket(i, 0) || a.sign_of(i, 0) != c.sign_of(i, 0))
            differs = true;
    }
    CHECK(differs);
}

TEST_CASE("one update touches exactly the hashed cell") {
    StreamState st = stream_init(50, 8, 2, 0.5, 0.1, 11);
    stream_update(st, {17, 5, 2.5});
    const Index r = st.bucket(17, 0);
    const double expect = st.sign_of(17, 0) * 2.5;
    CHECK(st.accumulator()(r, 5) == expect);
    CHECK(st.accumulator().cwiseAbs().sum() == std::abs(expect));
    CHECK(st.update_count() == 1);
}

TEST_CASE("an update followed by its negation restores the zero state") {
    StreamState st = stream_init(50, 8, 2, 0.5, 0.1, 12);
    stream_update(st, {3, 2, 1.7});
    stream_update(st, {3, 2, -1.7});
    CHECK(st.accumulator().cwiseAbs().maxCoeff() == 0.0);
    CHECK(st.update_count() == 2);
}

TEST_CASE("updates reject out-of-range indices and non-finite deltas") {
    StreamState st = stream_init(10, 4, 2, 0.5, 0.1, 13);
    CHECK_THROWS_AS(stream_update(st, {10, 0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(stream_update(st, {0, 4, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(stream_update(st, {-1, 0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(stream_update(st, {0, 0, std::numeric_limits<double>::infinity()}),
                    std::invalid_argument);
}

TEST_CASE("row-sorted full streams match the batch product bit for bit") {
    for (std::uint64_t t = 0; t < 5; ++t) {
        Matrix a = gaussian_dense(40, 6, 1400 + t);
        StreamState st = stream_init(40, 6, 2, 0.5, 0.2, 140 + t);
        auto updates = sorted_cell_stream(a);
        for (const auto& u : updates) stream_update(st, u);
        Matrix oracle = batch_oracle(st, updates);
        CHECK((st.accumulator() - oracle).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("the bit-exact batch match also holds for the multi-block family") {
    Matrix a = gaussian_dense(30, 5, 15);
    StreamState st = stream_init(30, 5, 2, 0.5, 0.1, 16, SketchFamily::osnap);
    CHECK(st.blocks() > 1);
    CHECK(st.sketch_rows() % st.blocks() == 0);
    CHECK(st.scale() == 1.0 / std::sqrt(static_cast<double>(st.blocks())));
    auto updates = sorted_cell_stream(a);
    for (const auto& u : updates) stream_update(st, u);
    CHECK((st.accumulator() - batch_oracle(st, updates)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("permuting a fixed update multiset moves entries by at most 1e-12") {
    Matrix a = gaussian_dense(25, 6, 17);
    auto updates = sorted_cell_stream(a);
    // split some cells into two partial deltas so the multiset is not one-per-cell
    std::vector<TurnstileUpdate> multi = updates;
    for (std::size_t i = 0; i < updates.size(); i += 7) {
        multi[i].delta *= 0.25;
        multi.push_back({updates[i].row, updates[i].col, 0.75 * updates[i].delta});
    }

    StreamState forward = stream_init(25, 6, 2, 0.5, 0.1, 18);
    for (const auto& u : multi) stream_update(forward, u);

    std::vector<TurnstileUpdate> shuffled = multi;
    Rng rng(19);
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    StreamState backward = stream_init(25, 6, 2, 0.5, 0.1, 18);
    for (const auto& u : shuffled) stream_update(backward, u);

    CHECK((forward.accumulator() - backward.accumulator()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("state size does not grow with the number of streamed rows") {
    StreamState small = stream_init(100, 12, 3, 0.5, 0.1, 20);
    StreamState large = stream_init(1000000, 12, 3, 0.5, 0.1, 20);
    CHECK(small.state_bytes() == large.state_bytes());
}

TEST_CASE("finalize recovers an exactly low-rank matrix") {
    Rng rng(21);
    Matrix a = gaussian_matrix(30, 3, rng) * gaussian_matrix(3, 12, rng);
    StreamState st = stream_init(30, 12, 3, 0.5, 0.1, 22);
    for (const auto& u : sorted_cell_stream(a)) stream_update(st, u);
    StreamBasis basis = stream_finalize(st);
    CHECK(basis.z.cols() == 3);
    CHECK((basis.z.transpose() * basis.z - Matrix::Identity(3, 3)).norm() <= 1e-10);
    CHECK(stream_residual_cost(a, basis.z) <= 1e-8 * a.squaredNorm());
}

TEST_CASE("an empty stream finalizes to an empty basis with zero residual on zero input") {
    StreamState st = stream_init(20, 6, 2, 0.5, 0.1, 23);
    StreamBasis basis = stream_finalize(st);
    CHECK(basis.z.cols() == 0);
    Matrix zero = Matrix::Zero(20, 6);
    CHECK(stream_residual_cost(zero, basis.z) == 0.0);
}

TEST_CASE("finalize lands within 1.5x of the best rank-k residual on decaying spectra") {
    Vector sigma(30);
    for (int i = 0; i < 30; ++i) sigma[i] = std::pow(0.75, i);
    Matrix a = matrix_with_spectrum(120, 80, sigma, 24);
    const double tail = tail_energy(a, 5);
    int hits = 0;
    for (std::uint64_t t = 0; t < 10; ++t) {
        StreamState st = stream_init(120, 80, 5, 0.5, 0.1, 2400 + t);
        for (const auto& u : sorted_cell_stream(a)) stream_update(st, u);
        StreamBasis basis = stream_finalize(st);
        if (stream_residual_cost(a, basis.z) <= 1.5 * tail) ++hits;
    }
    CHECK(hits >= 9);
}

TEST_CASE("text update streams skip comments and report the offending line") {
    std::istringstream ok("# header\n3 1 2.5\n\n0 2 -1e-3\n");
    auto updates = read_updates_text(ok);
    REQUIRE(updates.size() == 2);
    CHECK(updates[0].row == 3);
    CHECK(updates[0].col == 1);
    CHECK(updates[0].delta == 2.5);
    CHECK(updates[1].delta == -1e-3);

    std::istringstream bad("1 2 0.5\nnot numbers\n");
    try {
        read_updates_text(bad);
        FAIL("malformed line accepted");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("binary update streams round-trip and reject truncation") {
    std::vector<TurnstileUpdate> updates = {{5, 1, 0.125}, {0, 3, -7.5}, {2, 2, 1e-300}};
    std::ostringstream out(std::ios::binary);
    for (const auto& u : updates) {
        std::uint64_t row = static_cast<std::uint64_t>(u.row);
        std::uint64_t col = static_cast<std::uint64_t>(u.col);
        out.write(reinterpret_cast<const char*>(&row), sizeof(row));
        out.write(reinterpret_cast<const char*>(&col), sizeof(col));
        out.write(reinterpret_cast<const char*>(&u.delta), sizeof(u.delta));
    }
    std::string bytes = out.str();

    std::istringstream in(bytes, std::ios::binary);
    auto back = read_updates_binary(in);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].row == updates[i].row);
        CHECK(back[i].col == updates[i].col);
        CHECK(back[i].delta == updates[i].delta);
    }

    std::istringstream cut(bytes.substr(0, 20), std::ios::binary);
    CHECK_THROWS_AS(read_updates_binary(cut), std::invalid_argument);
}

TEST_CASE("rejects families whose columns carry more than one hashed coordinate") {
    CHECK_THROWS_AS(stream_init(10, 5, 2, 0.5, 0.1, 25, SketchFamily::dense_jl),
                    std::invalid_argument);
}
