#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pcps/linalg.hpp"
#include "pcps/solvers.hpp"
#include "pcps/testdata.hpp"

using namespace pcps;

namespace {

// same partition regardless of which integer names which cluster
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    return true;
}

}  // namespace

TEST_CASE("cloud generator balances sizes and groups labels") {
    LabeledMatrix lm = gaussian_cloud_clusters(10, 4, 3, 5.0, 201);
    REQUIRE(lm.points.rows() == 10);
    REQUIRE(lm.labels.size() == 10);
    std::vector<int> expect = {0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
    CHECK(lm.labels == expect);
    CHECK(lm.points.allFinite());
}

TEST_CASE("cloud generator is deterministic under its seed") {
    LabeledMatrix a = gaussian_cloud_clusters(8, 3, 2, 4.0, 202);
    LabeledMatrix b = gaussian_cloud_clusters(8, 3, 2, 4.0, 202);
    CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.labels == b.labels);
}

TEST_CASE("zero separation still leaves positive clustering cost below k = n") {
    LabeledMatrix lm = gaussian_cloud_clusters(8, 3, 2, 0.0, 203);
    CHECK(brute_force_kmeans(lm.points, 2).cost_on_input > 0.0);
}

TEST_CASE("wide separation makes the planted partition optimal") {
    LabeledMatrix lm = gaussian_cloud_clusters(12, 4, 3, 100.0, 204);
    KMeansResult opt = brute_force_kmeans(lm.points, 3);
    CHECK(same_partition(opt.labels, lm.labels));
}

TEST_CASE("cloud generator rejects bad shapes") {
    CHECK_THROWS_AS(gaussian_cloud_clusters(3, 2, 4, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_cloud_clusters(0, 2, 1, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_cloud_clusters(5, 2, 2, -1.0, 0), std::invalid_argument);
}

TEST_CASE("lower bound instance has the prescribed block structure") {
    Matrix a = lower_bound_instance(4, 0.5, 2048, 205);
    REQUIRE(a.rows() == 2048 + 3);
    REQUIRE(a.cols() == 8 + 3);

    // 1 - 2*sqrt(4/1024) is exactly representable
    for (int i = 0; i < 3; ++i) CHECK(a(i, i) == 0.875);
    CHECK(a.topRightCorner(3, 8).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.bottomLeftCorner(2048, 3).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(a(i, j) == 0.0);

    // gaussian block entries have variance 1/n'
    double mass = a.bottomRightCorner(2048, 8).squaredNorm();
    CHECK(mass > 7.0);
    CHECK(mass < 9.0);
}

TEST_CASE("lower bound instance enforces its feasibility preconditions") {
    CHECK_THROWS_AS(lower_bound_instance(3, 0.4, 2048, 0), std::invalid_argument);  // k/eps = 7.5
    CHECK_THROWS_AS(lower_bound_instance(4, 0.5, 8, 0), std::invalid_argument);     // lambda <= 0
    CHECK_THROWS_AS(lower_bound_instance(1, 0.5, 2048, 0), std::invalid_argument);
}

TEST_CASE("gaussian block keeps its smallest singular value off the floor") {
    // m = 50 columns against n' = 2000 rows: bound 1 - 2*sqrt(m/n')
    const double bound = 1.0 - 2.0 * std::sqrt(50.0 / 2000.0);
    for (std::uint64_t seed : {206ULL, 207ULL, 208ULL}) {
        Matrix a = lower_bound_instance(25, 0.5, 2000, seed);
        Matrix g = a.bottomRightCorner(2000, 50);
        SvdFactors f = svd(g);
        CHECK(f.sigma[f.sigma.size() - 1] >= bound);
    }
}

TEST_CASE("the best rank-m approximation zeroes exactly the simplex block") {
    Matrix a = lower_bound_instance(4, 0.5, 2048, 209);
    Matrix g_only = Matrix::Zero(a.rows(), a.cols());
    g_only.bottomRightCorner(2048, 8) = a.bottomRightCorner(2048, 8);

    SvdFactors fg = svd(Matrix(a.bottomRightCorner(2048, 8)));
    REQUIRE(fg.sigma[7] > 0.875);  // identity block loses the tie

    SvdFactors f = svd(a);
    Matrix a_m = truncated(f, 8);
    CHECK((a_m - g_only).norm() <= 1e-8 * a.norm());
}

TEST_CASE("spectrum factory reproduces the requested singular values") {
    Vector sigma(4);
    sigma << 5.0, 3.0, 1.0, 0.5;
    Matrix a = matrix_with_spectrum(20, 9, sigma, 210);
    REQUIRE(a.rows() == 20);
    REQUIRE(a.cols() == 9);
    SvdFactors f = svd(a);
    for (int i = 0; i < 4; ++i) CHECK(f.sigma[i] == doctest::Approx(sigma[i]).epsilon(1e-10));
    for (Index i = 4; i < f.sigma.size(); ++i) CHECK(f.sigma[i] <= 1e-10 * sigma[0]);

    Matrix b = matrix_with_spectrum(20, 9, sigma, 210);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spectrum factory validates its input") {
    Vector rising(2);
    rising << 1.0, 2.0;
    CHECK_THROWS_AS(matrix_with_spectrum(5, 5, rising, 0), std::invalid_argument);

    Vector negative(2);
    negative << 1.0, -0.5;
    CHECK_THROWS_AS(matrix_with_spectrum(5, 5, negative, 0), std::invalid_argument);

    Vector long_spec(6);
    long_spec << 6, 5, 4, 3, 2, 1;
    CHECK_THROWS_AS(matrix_with_spectrum(5, 5, long_spec, 0), std::invalid_argument);
}

TEST_CASE("dense gaussian factory is deterministic with sane moments") {
    Matrix a = gaussian_dense(50, 40, 211);
    Matrix b = gaussian_dense(50, 40, 211);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs(a.mean()) < 0.1);
    CHECK(a.squaredNorm() / 2000.0 == doctest::Approx(1.0).epsilon(0.1));
}
