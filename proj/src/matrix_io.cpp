#include "pcps/matrix_io.hpp"

#include <unistd.h>

#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <vector>

namespace pcps {

namespace {

static_assert(sizeof(double) == 8, "unexpected double width");

constexpr char kMagic[4] = {'P', 'C', 'P', 'S'};
constexpr std::uint16_t kVersion = 1;

std::string format_shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Write-then-rename so readers never observe a partial file.
void atomic_write(const std::string& path, const std::string& bytes) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path dir = target.parent_path();
    if (dir.empty()) dir = ".";
    fs::path tmp = dir / (target.filename().string() + ".tmp." +
                          std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("rename failed: " + path + ": " + ec.message());
    }
}

double parse_double(const char* begin, const char* end, std::size_t lineno) {
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    double v = 0.0;
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw std::invalid_argument("csv: bad number on line " + std::to_string(lineno) + ": '" +
                                    std::string(begin, end) + "'");
    }
    return v;
}

}  // namespace

Matrix read_csv(const std::string& path) {
    std::string text = read_file(path);
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::size_t end = nl == std::string::npos ? text.size() : nl;
        ++lineno;
        std::size_t trimmed = end;
        while (trimmed > pos && (text[trimmed - 1] == '\r' || text[trimmed - 1] == ' ')) --trimmed;
        if (trimmed > pos) {
            std::vector<double> row;
            std::size_t field = pos;
            for (std::size_t i = pos; i <= trimmed; ++i) {
                if (i == trimmed || text[i] == ',') {
                    row.push_back(parse_double(text.data() + field, text.data() + i, lineno));
                    field = i + 1;
                }
            }
            if (!rows.empty() && rows[0].size() != row.size()) {
                throw std::invalid_argument("csv: ragged row on line " + std::to_string(lineno));
            }
            rows.push_back(std::move(row));
        }
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    if (rows.empty()) throw std::invalid_argument("csv: no data in " + path);
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    require_finite(m, "csv matrix");
    return m;
}

void write_csv(const std::string& path, const Matrix& m) {
    std::ostringstream os;
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << format_shortest(m(i, j));
        }
        os << '\n';
    }
    atomic_write(path, os.str());
}

Matrix read_binary(const std::string& path) {
    std::string bytes = read_file(path);
    const std::size_t header = 4 + 2 + 8 + 8;
    if (bytes.size() < header || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw std::invalid_argument("binary matrix: bad magic in " + path);
    std::uint16_t version = 0;
    std::memcpy(&version, bytes.data() + 4, 2);
    if (version != kVersion)
        throw std::invalid_argument("binary matrix: unsupported version in " + path);
    std::uint64_t rows = 0, cols = 0;
    std::memcpy(&rows, bytes.data() + 6, 8);
    std::memcpy(&cols, bytes.data() + 14, 8);
    if (rows == 0 || cols == 0 || rows > (1u << 30) || cols > (1u << 30))
        throw std::invalid_argument("binary matrix: implausible shape in " + path);
    const std::size_t need = header + rows * cols * 8;
    if (bytes.size() != need)
        throw std::invalid_argument("binary matrix: truncated payload in " + path);
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    std::memcpy(m.data(), bytes.data() + header, rows * cols * 8);  // row-major on both sides
    require_finite(m, "binary matrix");
    return m;
}

void write_binary(const std::string& path, const Matrix& m) {
    std::string bytes;
    bytes.resize(4 + 2 + 8 + 8 + static_cast<std::size_t>(m.size()) * 8);
    std::memcpy(bytes.data(), kMagic, 4);
    std::memcpy(bytes.data() + 4, &kVersion, 2);
    const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
    std::memcpy(bytes.data() + 6, &rows, 8);
    std::memcpy(bytes.data() + 14, &cols, 8);
    std::memcpy(bytes.data() + 22, m.data(), static_cast<std::size_t>(m.size()) * 8);
    atomic_write(path, bytes);
}

Matrix read_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char head[4] = {0, 0, 0, 0};
    in.read(head, 4);
    in.close();
    if (in.gcount() == 4 && std::memcmp(head, kMagic, 4) == 0) return read_binary(path);
    return read_csv(path);
}

void write_labels(const std::string& path, const std::vector<int>& labels) {
    std::ostringstream os;
    for (int l : labels) os << l << '\n';
    atomic_write(path, os.str());
}

std::vector<int> read_labels(const std::string& path) {
    std::string text = read_file(path);
    std::vector<int> labels;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        int v = 0;
        auto res = std::from_chars(line.data(), line.data() + line.size(), v);
        if (res.ec != std::errc{})
            throw std::invalid_argument("labels: bad entry on line " + std::to_string(lineno));
        labels.push_back(v);
    }
    return labels;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    atomic_write(path, content);
}

}  // namespace pcps
