#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pcps/linalg.hpp"
#include "pcps/rng.hpp"

using namespace pcps;

namespace {

Matrix diag3(double a, double b, double c) {
    Matrix m = Matrix::Zero(3, 3);
    m(0, 0) = a;
    m(1, 1) = b;
    m(2, 2) = c;
    return m;
}

double ortho_defect(const Matrix& q) {
    return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).norm();
}

}  // namespace

TEST_CASE("svd of a diagonal matrix returns the diagonal as singular values") {
    SvdFactors f = svd(diag3(3, 2, 1));
    REQUIRE(f.rank() == 3);
    CHECK(f.sigma(0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(f.sigma(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.sigma(2) == doctest::Approx(1.0).epsilon(1e-12));
    // U and V are I3 up to column signs, and the signs must agree pairwise.
    for (Index j = 0; j < 3; ++j) {
        CHECK(std::abs(f.u(j, j)) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(f.u(j, j) * f.v(j, j) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("svd of the zero matrix has empty factors") {
    SvdFactors f = svd(Matrix::Zero(2, 2));
    CHECK(f.rank() == 0);
    CHECK(f.u.cols() == 0);
    CHECK(f.v.cols() == 0);
}

TEST_CASE("svd reconstruction and orthonormality on random input") {
    Rng rng(101);
    Matrix a = gaussian_matrix(5, 3, rng);
    SvdFactors f = svd(a);
    Matrix rebuilt = f.u * f.sigma.asDiagonal() * f.v.transpose();
    CHECK((rebuilt - a).norm() <= 1e-8 * a.norm());
    CHECK(ortho_defect(f.u) <= 1e-10);
    CHECK(ortho_defect(f.v) <= 1e-10);
    for (Index i = 0; i + 1 < f.rank(); ++i) CHECK(f.sigma(i) >= f.sigma(i + 1));
}

TEST_CASE("squared singular values sum to the squared Frobenius norm") {
    Rng rng(202);
    Matrix a = gaussian_matrix(12, 7, rng);
    SvdFactors f = svd(a);
    double sum = 0.0;
    for (Index i = 0; i < f.rank(); ++i) sum += f.sigma(i) * f.sigma(i);
    CHECK(sum == doctest::Approx(a.squaredNorm()).epsilon(1e-8));
}

TEST_CASE("tail_energy on a known spectrum") {
    SvdFactors f = svd(diag3(3, 2, 1));
    CHECK(tail_energy(f, 1) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(tail_energy(f, 3) == doctest::Approx(0.0));
    CHECK(tail_energy(f, 0) == doctest::Approx(14.0).epsilon(1e-12));
    CHECK(tail_energy(f, 10) == 0.0);  // past the rank
}

TEST_CASE("tail_energy matches the residual of the truncated reconstruction") {
    Rng rng(303);
    Matrix a = gaussian_matrix(10, 6, rng);
    SvdFactors f = svd(a);
    for (Index m = 0; m <= f.rank(); ++m) {
        double residual = (a - truncated(f, m)).squaredNorm();
        CHECK(residual == doctest::Approx(tail_energy(f, m)).epsilon(1e-8));
    }
}

TEST_CASE("spectral_norm agrees with the full SVD") {
    CHECK(spectral_norm(diag3(3, 2, 1)) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(spectral_norm(Matrix::Zero(4, 2)) == 0.0);

    Rng rng(404);
    Matrix a = gaussian_matrix(20, 10, rng);
    double sigma1 = svd(a).sigma(0);
    CHECK(spectral_norm(a) == doctest::Approx(sigma1).epsilon(1e-8));
}

TEST_CASE("rowspace basis of a single-direction matrix") {
    Matrix a(2, 2);
    a << 2, 0, 0, 0;
    Matrix z = orthonormal_rowspace_basis(a);
    REQUIRE(z.cols() == 1);
    CHECK(std::abs(z(0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(z(1, 0)) <= 1e-10);
}

TEST_CASE("rowspace basis reproduces A when rows are orthonormal") {
    Matrix a(2, 3);
    a << 1, 0, 0, 0, 1, 0;
    Matrix z = orthonormal_rowspace_basis(a);
    CHECK((a - a * z * z.transpose()).norm() <= 1e-10);
}

TEST_CASE("rowspace basis has rank-many columns and projects idempotently") {
    // rank-3 by construction: 10x6 = (10x3) * (3x6)
    Rng rng(505);
    Matrix a = gaussian_matrix(10, 3, rng) * gaussian_matrix(3, 6, rng);
    Matrix z = orthonormal_rowspace_basis(a);
    CHECK(z.cols() == 3);
    CHECK(ortho_defect(z) <= 1e-10);
    CHECK((a - a * z * z.transpose()).norm() <= 1e-8 * a.norm());
    Matrix once = a * z * z.transpose();
    CHECK((once - once * z * z.transpose()).norm() <= 1e-10 * a.norm());
}

TEST_CASE("top eigenvalues ordered by absolute value with signs kept") {
    std::vector<double> top = top_eigenvalues_sym(diag3(-5, 3, 1), 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0] == doctest::Approx(-5.0).epsilon(1e-10));
    CHECK(top[1] == doctest::Approx(3.0).epsilon(1e-10));

    std::vector<double> ident = top_eigenvalues_sym(Matrix::Identity(3, 3), 3);
    for (double v : ident) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("most negative eigenvalue of -MM^T is -||M||_2^2") {
    Rng rng(606);
    Matrix m = gaussian_matrix(8, 5, rng);
    Matrix s = -(m * m.transpose());
    std::vector<double> top = top_eigenvalues_sym(s, 1);
    REQUIRE(top.size() == 1);
    double expect = spectral_norm(m);
    CHECK(top[0] == doctest::Approx(-expect * expect).epsilon(1e-8));
}

TEST_CASE("top_eigenvalues_sym rejects asymmetric input") {
    Matrix s(2, 2);
    s << 0, 1, 0, 0;
    CHECK_THROWS_AS(top_eigenvalues_sym(s, 1), std::invalid_argument);
}
