#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pcps/matrix_io.hpp"
#include "pcps/testdata.hpp"

using namespace pcps;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() /
              ("pcps-io-test-" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string file(const std::string& name) const { return (dir / name).string(); }
};

bool bits_equal(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * 8) == 0;
}

// values chosen to stress shortest-round-trip formatting, including a
// negative zero, a denormal, and sums that don't land on short decimals
Matrix awkward_matrix() {
    Matrix m(3, 3);
    m << 1.0 / 3.0, -0.1, 0.1 + 0.2,
         -1.7976931348623157e308, 5e-324, -0.0,
         3.141592653589793, 1e-300, 123456789.123456789;
    return m;
}

bool has_leftover_temp(const fs::path& dir) {
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().filename().string().find(".tmp.") != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("csv round-trips every double bit for bit") {
    TempDir td;
    Matrix m = awkward_matrix();
    write_csv(td.file("m.csv"), m);
    Matrix back = read_csv(td.file("m.csv"));
    CHECK(bits_equal(m, back));
    CHECK_FALSE(has_leftover_temp(td.dir));
}

TEST_CASE("binary round-trips every double bit for bit") {
    TempDir td;
    Matrix m = awkward_matrix();
    write_binary(td.file("m.bin"), m);
    Matrix back = read_binary(td.file("m.bin"));
    CHECK(bits_equal(m, back));
    CHECK_FALSE(has_leftover_temp(td.dir));
}

TEST_CASE("large random matrices survive both formats") {
    TempDir td;
    Matrix m = gaussian_dense(40, 17, 301);
    write_csv(td.file("g.csv"), m);
    write_binary(td.file("g.bin"), m);
    CHECK(bits_equal(m, read_csv(td.file("g.csv"))));
    CHECK(bits_equal(m, read_binary(td.file("g.bin"))));
}

TEST_CASE("the generic reader sniffs the format from the magic bytes") {
    TempDir td;
    Matrix m = gaussian_dense(6, 4, 302);
    write_csv(td.file("a.csv"), m);
    write_binary(td.file("a.bin"), m);
    CHECK(bits_equal(m, read_matrix(td.file("a.csv"))));
    CHECK(bits_equal(m, read_matrix(td.file("a.bin"))));
}

TEST_CASE("csv rejects ragged rows, bad numbers, and empty files") {
    TempDir td;
    {
        std::ofstream out(td.file("ragged.csv"));
        out << "1,2,3\n4,5\n";
    }
    try {
        read_csv(td.file("ragged.csv"));
        FAIL("ragged row accepted");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    {
        std::ofstream out(td.file("alpha.csv"));
        out << "1,two\n";
    }
    CHECK_THROWS_AS(read_csv(td.file("alpha.csv")), std::invalid_argument);

    {
        std::ofstream out(td.file("empty.csv"));
    }
    CHECK_THROWS_AS(read_csv(td.file("empty.csv")), std::invalid_argument);

    {
        std::ofstream out(td.file("inf.csv"));
        out << "1,inf\n";
    }
    CHECK_THROWS_AS(read_csv(td.file("inf.csv")), std::invalid_argument);
}

TEST_CASE("binary rejects corrupt headers and truncation") {
    TempDir td;
    Matrix m = gaussian_dense(4, 3, 303);
    write_binary(td.file("ok.bin"), m);

    std::ifstream in(td.file("ok.bin"), std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();

    auto dump = [&](const std::string& name, std::string content) {
        std::ofstream out(td.file(name), std::ios::binary);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
    };

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    dump("magic.bin", bad_magic);
    CHECK_THROWS_AS(read_binary(td.file("magic.bin")), std::invalid_argument);

    std::string bad_version = bytes;
    bad_version[4] = 9;
    dump("version.bin", bad_version);
    CHECK_THROWS_AS(read_binary(td.file("version.bin")), std::invalid_argument);

    dump("cut.bin", bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_AS(read_binary(td.file("cut.bin")), std::invalid_argument);

    dump("tiny.bin", bytes.substr(0, 10));
    CHECK_THROWS_AS(read_binary(td.file("tiny.bin")), std::invalid_argument);
}

TEST_CASE("missing files raise an open error naming the path") {
    TempDir td;
    try {
        read_matrix(td.file("absent.csv"));
        FAIL("missing file accepted");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("absent.csv") != std::string::npos);
    }
}

TEST_CASE("labels round-trip and reject garbage") {
    TempDir td;
    std::vector<int> labels = {0, 2, 1, 1, 5, 0};
    write_labels(td.file("l.txt"), labels);
    CHECK(read_labels(td.file("l.txt")) == labels);

    {
        std::ofstream out(td.file("bad.txt"));
        out << "0\nx\n";
    }
    CHECK_THROWS_AS(read_labels(td.file("bad.txt")), std::invalid_argument);
}

TEST_CASE("atomic text writes land whole and replace previous content") {
    TempDir td;
    write_text_atomic(td.file("note.txt"), "first\n");
    write_text_atomic(td.file("note.txt"), "second\n");
    std::ifstream in(td.file("note.txt"));
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "second\n");
    CHECK_FALSE(has_leftover_temp(td.dir));
}
