#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "pcps/linalg.hpp"
#include "pcps/projections.hpp"
#include "pcps/rng.hpp"

using namespace pcps;

TEST_CASE("indicator entries are 1/sqrt(cluster size)") {
    ClusterIndicator c = cluster_indicator({0, 0, 1}, 3, 2);
    Matrix x = indicator_matrix(c);
    REQUIRE(x.rows() == 3);
    REQUIRE(x.cols() == 2);
    const double r2 = 1.0 / std::sqrt(2.0);
    CHECK(x(0, 0) == doctest::Approx(r2));
    CHECK(x(1, 0) == doctest::Approx(r2));
    CHECK(x(2, 1) == doctest::Approx(1.0));
    CHECK(x(0, 1) == 0.0);
    CHECK(x(2, 0) == 0.0);
}

TEST_CASE("singleton clusters give the identity indicator") {
    Matrix x = indicator_matrix(cluster_indicator({0, 1, 2}, 3, 3));
    CHECK((x - Matrix::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("one cluster of four gives the constant 1/2 column") {
    Matrix x = indicator_matrix(cluster_indicator({0, 0, 0, 0}, 4, 1));
    REQUIRE(x.cols() == 1);
    for (Index i = 0; i < 4; ++i) CHECK(x(i, 0) == doctest::Approx(0.5));
}

TEST_CASE("empty clusters are dropped from the indicator") {
    ClusterIndicator c = cluster_indicator({0, 0, 2}, 3, 3);  // cluster 1 empty
    CHECK(c.effective_k() == 2);
    CHECK(indicator_matrix(c).cols() == 2);
}

TEST_CASE("out-of-range labels are rejected") {
    CHECK_THROWS_AS(cluster_indicator({0, 2}, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(cluster_indicator({0, -1}, 2, 2), std::invalid_argument);
}

TEST_CASE("projecting the identity onto one axis costs one unit") {
    Matrix q(2, 1);
    q << 1, 0;
    CHECK(projection_cost_frobenius(Matrix::Identity(2, 2), RankKProjection{q}) ==
          doctest::Approx(1.0));
}

TEST_CASE("projection onto the full column space costs nothing") {
    Rng rng(11);
    Matrix a = gaussian_matrix(6, 4, rng);
    SvdFactors f = svd(a);
    RankKProjection full{f.u};
    CHECK(projection_cost_frobenius(a, full) <= 1e-8 * a.squaredNorm());
    CHECK(projection_cost_spectral(a, full) <= 1e-8 * a.squaredNorm());
}

TEST_CASE("two-cluster cost of four points on a line") {
    // points 0, 1, 10, 11; centroids 0.5 and 10.5; cost 2 * (0.25 + 0.25)
    Matrix a(4, 1);
    a << 0, 1, 10, 11;
    ClusterIndicator c = cluster_indicator({0, 0, 1, 1}, 4, 2);
    CHECK(projection_cost_frobenius(a, c) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spectral cost of killing the top direction of diag(3,2)") {
    Matrix a(2, 2);
    a << 3, 0, 0, 2;
    Matrix q(2, 1);
    q << 1, 0;
    CHECK(projection_cost_spectral(a, RankKProjection{q}) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("spectral cost matches the norm of the residual") {
    Rng rng(22);
    Matrix a = gaussian_matrix(9, 5, rng);
    RankKProjection p = random_rank_k_projection(9, 2, 7);
    double direct = spectral_norm(a - p.basis * (p.basis.transpose() * a));
    CHECK(projection_cost_spectral(a, p) == doctest::Approx(direct * direct).epsilon(1e-8));
}

TEST_CASE("random projections are orthonormal and deterministic") {
    RankKProjection p = random_rank_k_projection(5, 2, 99);
    CHECK((p.basis.transpose() * p.basis - Matrix::Identity(2, 2)).norm() <= 1e-10);

    RankKProjection again = random_rank_k_projection(5, 2, 99);
    CHECK(p.basis == again.basis);  // bit-identical

    // Full-rank basis spans everything: zero cost on any matrix.
    Rng rng(33);
    Matrix a = gaussian_matrix(3, 4, rng);
    RankKProjection full = random_rank_k_projection(3, 3, 1);
    CHECK(projection_cost_frobenius(a, full) <= 1e-8 * a.squaredNorm());
}

TEST_CASE("projection cost is bounded below by the tail energy") {
    Rng rng(44);
    Matrix a = gaussian_matrix(12, 8, rng);
    const int k = 3;
    const double tail = tail_energy(a, k);
    for (int i = 0; i < 25; ++i) {
        RankKProjection p = random_rank_k_projection(12, k, 1000 + i);
        CHECK(projection_cost_frobenius(a, p) >= tail - 1e-8 * a.squaredNorm());
    }
    // Equality at the top-k left singular projection.
    SvdFactors f = svd(a);
    RankKProjection best{f.u.leftCols(k)};
    CHECK(projection_cost_frobenius(a, best) == doctest::Approx(tail).epsilon(1e-8));
}

TEST_CASE("indicator cost equals the pairwise squared-distance form") {
    Rng rng(55);
    Matrix a = gaussian_matrix(10, 4, rng);
    std::vector<int> labels = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
    ClusterIndicator c = cluster_indicator(labels, 10, 3);

    double pairwise = 0.0;
    for (int cl = 0; cl < 3; ++cl) {
        std::vector<Index> members;
        for (Index i = 0; i < 10; ++i)
            if (labels[i] == cl) members.push_back(i);
        double sum = 0.0;
        for (size_t x = 0; x < members.size(); ++x)
            for (size_t y = x + 1; y < members.size(); ++y)
                sum += (a.row(members[x]) - a.row(members[y])).squaredNorm();
        pairwise += sum / static_cast<double>(members.size());
    }
    CHECK(projection_cost_frobenius(a, c) == doctest::Approx(pairwise).epsilon(1e-8));
}

TEST_CASE("cost plus retained energy equals the total energy") {
    Rng rng(66);
    Matrix a = gaussian_matrix(8, 6, rng);
    RankKProjection p = random_rank_k_projection(8, 3, 5);
    double kept = (p.basis * (p.basis.transpose() * a)).squaredNorm();
    CHECK(projection_cost_frobenius(a, p) + kept ==
          doctest::Approx(a.squaredNorm()).epsilon(1e-8));
}

TEST_CASE("centroid application replaces rows by their cluster mean") {
    Matrix a(4, 1);
    a << 0, 1, 10, 11;
    ClusterIndicator c = cluster_indicator({0, 0, 1, 1}, 4, 2);
    Matrix m = apply_centroids(a, c);
    CHECK(m(0, 0) == doctest::Approx(0.5));
    CHECK(m(1, 0) == doctest::Approx(0.5));
    CHECK(m(2, 0) == doctest::Approx(10.5));
    CHECK(m(3, 0) == doctest::Approx(10.5));
}
