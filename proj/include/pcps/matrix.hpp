#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace pcps {

// Row-major to match the on-disk layout, so file I/O is a straight memcpy.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_finite(const Matrix& a, const std::string& what) {
    if (!a.allFinite()) throw std::invalid_argument(what + ": matrix has non-finite entries");
}

inline double sq_frobenius(const Matrix& a) { return a.squaredNorm(); }

}  // namespace pcps
