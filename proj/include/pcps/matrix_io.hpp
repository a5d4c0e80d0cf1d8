#pragma once

#include <string>
#include <vector>

#include "pcps/matrix.hpp"

namespace pcps {

// CSV numbers are written with shortest round-trip formatting, so
// write -> read reproduces every double bit for bit. The binary layout is
// "PCPS", u16 version, u64 rows, u64 cols, then row-major f64, all
// little-endian.
Matrix read_csv(const std::string& path);
Matrix read_binary(const std::string& path);

// Sniffs the binary magic, falls back to CSV.
Matrix read_matrix(const std::string& path);

// Writers go through a temp file in the target directory plus rename, so a
// crash never leaves a half-written file at `path`.
void write_csv(const std::string& path, const Matrix& m);
void write_binary(const std::string& path, const Matrix& m);

void write_labels(const std::string& path, const std::vector<int>& labels);
std::vector<int> read_labels(const std::string& path);

void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace pcps
