#include <cmath>
#include <random>

#include "doctest.h"

#include "dmalab/errors.hpp"
#include "dmalab/rhs.hpp"
#include "test_support.hpp"

using namespace dmalab;
using testing::v2;

TEST_CASE("power-law evaluation") {
    const auto disk = testing::unit_disk();
    CHECK(PowerLawRHS(1, 0, 3, disk)(v2(0.3, 0.1), -1.0) == 1.0);
    CHECK(PowerLawRHS(1, 2, 3, disk)(v2(0.3, 0.1), -0.5) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(PowerLawRHS(2, 1, 4, disk)(v2(0.5, 0.0), -2.0) == doctest::Approx(0.5).epsilon(1e-15));
    // Degenerate factor vanishes on the boundary when beta > n + 1.
    CHECK(PowerLawRHS(2, 1, 4, disk)(v2(1.0, 0.0), -2.0) == 0.0);
    CHECK(PowerLawRHS(3, 1, 3, disk)(v2(1.0, 0.0), -2.0) == doctest::Approx(1.5));

    CHECK_THROWS_AS(PowerLawRHS(1, 0, 3, disk)(v2(0, 0), 0.0), SignError);
    CHECK_THROWS_AS(PowerLawRHS(1, 0, 3, disk)(v2(0, 0), 0.5), SignError);
    CHECK_THROWS_AS(PowerLawRHS(1, 0, 3, disk)(v2(2, 0), -1.0), DomainMembershipError);
    CHECK_THROWS_AS(PowerLawRHS(1, 0, 2.5, disk), RegimeError);
    CHECK_THROWS_AS(PowerLawRHS(0, 0, 3, disk), Error);
    CHECK_THROWS_AS(PowerLawRHS(1, -1, 3, disk), Error);
}

TEST_CASE("monotone in t and positive inside") {
    std::mt19937_64 rng(2);
    const auto sq = testing::unit_square();
    std::uniform_real_distribution<double> t(-5.0, -1e-6);
    for (double beta : {3.0, 3.5, 5.0}) {
        const PowerLawRHS F(1.3, 1.7, beta, sq);
        for (int k = 0; k < 500; ++k) {
            const Vec x = testing::uniform_in_domain(rng, *sq);
            double t1 = t(rng);
            double t2 = t(rng);
            if (t1 > t2) std::swap(t1, t2);
            CHECK(F(x, t1) <= F(x, t2));
            CHECK(F(x, t1) > 0.0);
        }
    }
}

TEST_CASE("regularised right-hand side") {
    const auto sq = testing::unit_square();
    const PowerLawRHS F(1, 2, 3, sq);
    const Vec x = v2(0.3, 0.4);
    for (double eps : {1e-2, 1e-4, 1e-6}) {
        const RegularizedRHS G(F, eps);
        for (double t : {-0.1, -0.5, -3.0}) CHECK(G(x, t) == F(x, t));
        CHECK(G(x, -0.1 * eps) == F(x, -eps));
        CHECK(G(x, 0.0) == F(x, -eps));
        CHECK(G(x, -eps * 0.5) <= std::pow(eps, -2.0));
    }
}

TEST_CASE("structure verification") {
    const auto sq = testing::unit_square();
    const auto samples = structure_samples(*sq);
    const PowerLawRHS F(1.5, 1.0, 3.5, sq);

    auto rep = verify_structure(F, *sq, 1.5, 1.0, 3.5, samples);
    CHECK(rep.all_passed());

    RhsFunction doubled = [&](const Vec& x, double t) { return 2.0 * F(x, t); };
    rep = verify_structure(doubled, *sq, 1.5, 1.0, 3.5, samples);
    CHECK(rep.monotone.passed);
    CHECK_FALSE(rep.upper.passed);
    CHECK(rep.lower.passed);

    RhsFunction bumped = [&](const Vec& x, double t) { return F(x, t) * (1.0 + sq->distance_to_boundary(x)); };
    rep = verify_structure(bumped, *sq, 1.5, 1.0, 3.5, samples);
    CHECK(rep.lower.passed);
    REQUIRE_FALSE(rep.upper.passed);
    REQUIRE(rep.upper.worst);
    CHECK(sq->distance_to_boundary(rep.upper.worst->x) > 0.0);

    RhsFunction decreasing = [&](const Vec& x, double t) { return F(x, t) * std::pow(-t, 3.0); };
    rep = verify_structure(decreasing, *sq, 1.5, 1.0, 3.5, samples);
    CHECK_FALSE(rep.monotone.passed);
}
