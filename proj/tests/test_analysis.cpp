#include <cmath>
#include <random>

#include "doctest.h"

#include "dmalab/analysis.hpp"
#include "dmalab/errors.hpp"
#include "test_support.hpp"

using namespace dmalab;
using testing::v2;

TEST_CASE("predicted exponents: examples") {
    const auto p = predicted_exponents(2, 1, 3);
    CHECK(p.gamma1.is_exact());
    CHECK(p.gamma1.value == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK_FALSE(p.gamma2.has_value());
    CHECK(p.gamma3.kind == ExponentKind::NotApplicable);
    CHECK(p.gamma4.kind == ExponentKind::NotApplicable);

    const auto q = predicted_exponents(2, 2, 3, 2.5);
    REQUIRE(q.gamma2.has_value());
    CHECK(q.gamma2->is_exact());
    CHECK(q.gamma2->value == doctest::Approx(0.7).epsilon(1e-14));

    SphereCertificate ball;
    ball.exterior_radius = 1.0;
    ball.interior_radius = 1.0;
    const auto r = predicted_exponents(2, 2, 3, std::nullopt, &ball);
    CHECK(r.gamma3.is_exact());
    CHECK(r.gamma3.value == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(r.gamma4.is_exact());
    CHECK(r.gamma4.value == doctest::Approx(0.75).epsilon(1e-15));

    // Regime splits.
    CHECK(predicted_exponents(2, 1, 4).gamma1.kind == ExponentKind::OpenUpTo1);
    CHECK(predicted_exponents(2, 1, 3.5, std::nullopt, &ball).gamma3.kind == ExponentKind::OpenUpTo1);
    CHECK(predicted_exponents(2, 1, 4, std::nullopt, &ball).gamma3.kind == ExponentKind::One);
    CHECK(predicted_exponents(2, 1, 3, std::nullopt, &ball).gamma4.kind == ExponentKind::NotApplicable);
    CHECK(predicted_exponents(2, 0, 3, 3.0).gamma2->kind == ExponentKind::OpenUpTo1);

    CHECK_THROWS_AS(predicted_exponents(2, 1, 2.5), RegimeError);
    CHECK_THROWS_AS(predicted_exponents(2, 1, 3, 2.0), RegimeError);
    CHECK(predicted_exponents(2, 1, 4).gamma1.to_json()["kind"] == "open_up_to_1");
    CHECK_FALSE(predicted_exponents(2, 1, 4).gamma1.to_json().contains("value"));
}

TEST_CASE("predicted exponents: monotonicity and identities") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        const int n = 2 + static_cast<int>(u(rng) * 3);
        const double alpha = 3 * u(rng);
        const double beta = n + 1 + 2 * u(rng);
        const double db = 1e-3;
        const double da = 1e-3;
        CHECK(gamma1_formula(n, alpha, beta + db) > gamma1_formula(n, alpha, beta));
        CHECK(gamma1_formula(n, alpha + da, beta) < gamma1_formula(n, alpha, beta));
        CHECK(gamma3_formula(n, alpha, beta + db) > gamma3_formula(n, alpha, beta));
        CHECK(gamma3_formula(n, alpha + da, beta) < gamma3_formula(n, alpha, beta));

        const double a = 2 + 50 * u(rng);
        const double gap = std::abs(gamma2_formula(n, alpha, beta, a) - gamma1_formula(n, alpha, beta));
        CHECK(std::abs(gap - (2.0 * n - 2) / (a * (n + alpha))) <= 1e-12);
        CHECK(std::abs(gamma2_formula(n, alpha, beta, 2.0) - gamma3_formula(n, alpha, beta)) <= 1e-12);
    }
}

TEST_CASE("decay fits") {
    const Vec z = v2(0, 0);
    const Vec e = v2(0, 1);
    const auto fit = fit_decay([](const Vec& x) { return -std::pow(x[1], 0.7); }, z, e, {1e-4, 1e-1});
    CHECK(std::abs(fit.slope - 0.7) <= 1e-3);
    CHECK(fit.standard_error <= 1e-10);
    CHECK(fit.samples == 24);
    CHECK(fit.variant_slopes.size() == 2);

    CHECK_THROWS_AS(fit_decay([](const Vec&) { return 0.0; }, z, e, {1e-4, 1e-1}), WindowError);
    CHECK_THROWS_AS(fit_decay([](const Vec& x) { return -x[1]; }, z, e, {0.1, 0.01}), WindowError);

    const auto disk = testing::unit_disk();
    const auto g = std::make_shared<const Grid2D>(discretize_domain(disk, 1.0 / 32));
    const auto s = solve_fixed_rhs(g, std::vector<double>(g->size(), 4.0));
    const auto gf = fit_boundary_exponent(s, *disk, v2(1, 0));
    // Oracle: least-squares slope of log(d (2 - d)) on the same geometric samples.
    {
        const double lo = 4.0 / 32, hi = 0.2;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < 24; ++i) {
            const double d = lo * std::pow(hi / lo, i / 23.0);
            const double x = std::log(d), y = std::log(d * (2 - d));
            sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        const double expected = (24 * sxy - sx * sy) / (24 * sxx - sx * sx);
        CHECK(std::abs(gf.slope - expected) <= 0.02);
    }
    CHECK_THROWS_AS(fit_boundary_exponent(s, *disk, v2(0.5, 0)), DomainMembershipError);

    RadialOptions opt;
    opt.depends_on_u = false;
    const auto p = radial_solve(2, 1.0, [](double, double) { return 4.0; }, opt);
    CHECK(std::abs(fit_boundary_exponent(p).slope - 1.0) <= 0.02);

    DecayFit synthetic;
    synthetic.slope = 0.7;
    synthetic.standard_error = 0.01;
    CHECK_FALSE(check_upper_bound(synthetic, 0.72).contradiction);
    CHECK(check_upper_bound(synthetic, 0.75).contradiction);
    CHECK_FALSE(check_upper_bound(synthetic, 0.5).contradiction);
    CHECK(check_two_sided(synthetic, 0.5).contradiction);
    CHECK_FALSE(check_two_sided(synthetic, 0.74, 3.0, 0.05).contradiction);
    CHECK(check_two_sided(synthetic, 0.76, 3.0, 0.05).contradiction);
}

TEST_CASE("Holder reduction") {
    const auto sq = testing::unit_square();
    const auto g = std::make_shared<const Grid2D>(discretize_domain(sq, 1.0 / 32));
    DiscreteSolution zero{g, std::vector<double>(g->size(), 0.0)};
    for (double gamma : {0.1, 0.5, 1.0}) {
        for (double M : {0.0, 1.0, 7.0}) CHECK(holder_reduction_check(zero, gamma, M).passed);
    }

    DiscreteSolution dist{g, {}};
    for (double d : g->distance) dist.values.push_back(-d);
    const auto rep = holder_reduction_check(dist, 1.0, 1.0);
    CHECK(rep.hypothesis_ok);
    CHECK(rep.passed);
    CHECK(rep.pairs == 10000);

    // Hypothesis fails: the bound is reported as not applicable.
    const auto bad = holder_reduction_check(dist, 1.0, 0.5);
    CHECK_FALSE(bad.hypothesis_ok);
    CHECK_FALSE(bad.passed);

    const auto disk = testing::unit_disk();
    const auto gd = std::make_shared<const Grid2D>(discretize_domain(disk, 1.0 / 16));
    const auto s = solve_singular(gd, PowerLawRHS(1, 2, 3, disk));
    const double M = holder_constant(s, 0.75);
    const auto hr = holder_reduction_check(s, 0.75, M);
    CHECK(hr.hypothesis_ok);
    CHECK(hr.passed);
    CHECK(hr.worst_ratio <= 1.0);
}

TEST_CASE("barrier sandwich") {
    const auto disk = testing::unit_disk();
    const auto g = std::make_shared<const Grid2D>(discretize_domain(disk, 1.0 / 16));
    const PowerLawRHS F(1, 2, 3, disk);
    const auto s = solve_singular(g, F);

    const SphereBarrier sub = sphere_barrier_params(2, 2, 3, 1, 1.0, BarrierSide::Sub);
    const SphereBarrier sup = sphere_barrier_params(2, 2, 3, 1, 1.0, BarrierSide::Super);
    const auto sub_cert = verify_subsolution(sub, F, *disk, 2000);
    const auto sup_cert = verify_subsolution(sup, F, *disk, 2000);
    REQUIRE(sub_cert.passed);
    REQUIRE(sup_cert.passed);

    const auto rep = sandwich_check(s, sub, sub_cert, &sup, &sup_cert);
    CHECK(rep.passed);
    CHECK(rep.sub_violation <= 3.0);
    CHECK(rep.super_violation <= 3.0);
    CHECK(rep.sub_samples == g->size());

    BarrierCertificate failed = sub_cert;
    failed.passed = false;
    CHECK_THROWS_AS(sandwich_check(s, sub, failed), ParameterError);
    CHECK_THROWS_AS(sandwich_check(s, sup, sup_cert), ParameterError);
}
