#include "pcps/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace pcps {

namespace {

constexpr double kRankCutoff = 1e-12;

}  // namespace

SvdFactors svd(const Matrix& a) {
    require(a.size() > 0, "svd: empty matrix");
    require_finite(a, "svd");

    Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success)
        throw std::runtime_error("svd: decomposition did not converge (" +
                                 std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ")");
    const Vector& sv = dec.singularValues();

    const double cutoff =
        sv.size() > 0 ? static_cast<double>(std::max(a.rows(), a.cols())) * sv(0) * kRankCutoff : 0.0;
    Index r = 0;
    while (r < sv.size() && sv(r) > cutoff) ++r;

    SvdFactors f;
    f.u = dec.matrixU().leftCols(r);
    f.sigma = sv.head(r);
    f.v = dec.matrixV().leftCols(r);
    return f;
}

Matrix truncated(const SvdFactors& f, Index m) {
    const Index mm = std::min(m, f.rank());
    if (mm == 0) return Matrix::Zero(f.u.rows(), f.v.rows());
    return f.u.leftCols(mm) * f.sigma.head(mm).asDiagonal() * f.v.leftCols(mm).transpose();
}

double tail_energy(const SvdFactors& f, Index m) {
    require(m >= 0, "tail_energy: negative index");
    if (m >= f.rank()) return 0.0;
    return f.sigma.tail(f.rank() - m).squaredNorm();
}

double tail_energy(const Matrix& a, Index m) { return tail_energy(svd(a), m); }

double spectral_norm(const Matrix& a) {
    require(a.size() > 0, "spectral_norm: empty matrix");
    if (a.isZero(0.0)) return 0.0;
    // Power iteration cannot certify 1e-8 relative accuracy when the top of
    // the spectrum is nearly flat; a thin decomposition can, and is cheap at
    // the sizes this library targets.
    Eigen::BDCSVD<Matrix> dec(a);
    return dec.singularValues()(0);
}

Matrix orthonormal_rowspace_basis(const Matrix& a) {
    SvdFactors f = svd(a);
    return f.v;
}

std::vector<double> top_eigenvalues_sym(const Matrix& s, Index k) {
    require(s.rows() == s.cols(), "top_eigenvalues_sym: not square");
    const double asym = (s - s.transpose()).norm();
    require(asym <= 1e-10 * std::max(s.norm(), 1e-300),
            "top_eigenvalues_sym: input is not symmetric");

    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    require(es.info() == Eigen::Success, "top_eigenvalues_sym: eigensolver failed");

    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), [](double x, double y) { return std::abs(x) > std::abs(y); });
    if (static_cast<Index>(ev.size()) > k) ev.resize(static_cast<size_t>(k));
    return ev;
}

}  // namespace pcps
