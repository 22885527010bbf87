#include <cmath>
#include <map>
#include <random>

#include "doctest.h"

#include "dmalab/errors.hpp"
#include "dmalab/radial.hpp"
#include "dmalab/solver.hpp"
#include "test_support.hpp"

using namespace dmalab;
using testing::v2;

namespace {

std::shared_ptr<const Grid2D> grid(std::shared_ptr<const ConvexDomain> d, double h, int width = 1) {
    return std::make_shared<const Grid2D>(discretize_domain(std::move(d), h, width));
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("lattice discretisation") {
    CHECK(discretize_domain(testing::unit_square(), 0.25).size() == 9);
    // Enumeration oracle for the disk: lattice points with |x| < 1.
    for (double h : {0.5, 0.25, 0.1}) {
        std::size_t count = 0;
        const int m = static_cast<int>(std::ceil(1.0 / h));
        for (int i = -m; i <= m; ++i) {
            for (int j = -m; j <= m; ++j) count += std::hypot(i * h, j * h) < 1.0 - 1e-9;
        }
        CHECK(discretize_domain(testing::unit_disk(), h).size() == count);
    }
    CHECK(discretize_domain(testing::unit_disk(), 0.5).size() == 9);

    const std::vector<std::shared_ptr<const ConvexDomain>> domains = {
        testing::unit_disk(), testing::unit_square(),
        std::make_shared<const ConvexDomain>(ConvexDomain::polygon({{0, 0}, {2, 0}, {1.2, 1.1}}))};
    const std::vector<double> areas = {M_PI, 1.0, 1.1};
    for (std::size_t k = 0; k < domains.size(); ++k) {
        for (int width : {1, 2, 3}) {
            const Grid2D g = discretize_domain(domains[k], 1.0 / 16, width);
            const double ratio = g.size() * g.h * g.h / areas[k];
            CHECK(ratio >= 0.5);
            CHECK(ratio <= 1.5);
            CHECK(g.pairs.size() == std::vector<std::size_t>{2, 4, 8}[width - 1]);
            for (std::size_t i = 0; i < g.size(); ++i) {
                CHECK(g.distance[i] > 0.0);
                for (std::size_t d = 0; d < g.directions.size(); ++d) {
                    const Eigen::Vector2d v(g.directions[d][0], g.directions[d][1]);
                    for (int s = 0; s < 2; ++s) {
                        const StencilArm& arm = g.arms[i][2 * d + s];
                        CHECK(arm.length > 0.0);
                        CHECK(arm.length <= g.h * v.norm() * (1 + 1e-12));
                        if (arm.neighbor < 0) {
                            const Vec end = g.nodes[i] + (s == 0 ? 1.0 : -1.0) * arm.length * v.normalized();
                            CHECK(std::abs(domains[k]->signed_distance(end)) < 1e-9);
                        }
                    }
                }
            }
        }
    }
    CHECK_THROWS_AS(discretize_domain(testing::unit_square(), 0.8), DiscretizationError);
    CHECK_THROWS_AS(discretize_domain(testing::unit_square(), 0.1, 4), ParameterError);
}

TEST_CASE("discrete operator on quadratics") {
    for (int width : {1, 2, 3}) {
        const Grid2D g = discretize_domain(testing::unit_disk(), 1.0 / 16, width);
        std::vector<double> q1(g.size()), q2(g.size()), zero(g.size(), 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto& x = g.nodes[i];
            q1[i] = 0.5 * x.squaredNorm();
            q2[i] = 0.5 * (x.x() * x.x() + 4 * x.y() * x.y());
        }
        int uncut = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            bool cut = false;
            for (const auto& arm : g.arms[i]) cut = cut || arm.neighbor < 0;
            CHECK(ma_operator(g, zero, i) == 0.0);
            if (cut) continue;
            ++uncut;
            CHECK(std::abs(ma_operator(g, q1, i) - 1.0) <= 1e-12);
            CHECK(std::abs(ma_operator(g, q2, i) - 4.0) <= 1e-12);
        }
        CHECK(uncut > 0);
    }
}

TEST_CASE("fixed right-hand side: exact quadratic on the disk") {
    const auto g = grid(testing::unit_disk(), 1.0 / 32);
    const std::vector<double> f(g->size(), 4.0);
    const DiscreteSolution s = solve_fixed_rhs(g, f);
    // The scheme is exact on quadratics, including at cut cells.
    CHECK(std::abs(s.sample(Vec::Zero(2)) + 1.0) <= 1e-8);
    double err = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) err = std::max(err, std::abs(s.values[i] - (g->nodes[i].squaredNorm() - 1)));
    CHECK(err <= 1e-8);
    CHECK(s.residual(f) <= 1e-8);
    CHECK(s.min_second_difference() >= -1e-8);
    for (double v : s.values) CHECK(v <= 0.0);

    const DiscreteSolution z = solve_fixed_rhs(g, std::vector<double>(g->size(), 0.0));
    for (double v : z.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(solve_fixed_rhs(g, std::vector<double>(g->size(), -1.0)), ParameterError);
}

TEST_CASE("sweeps reach the same fixed point") {
    const auto g = grid(testing::unit_square(), 1.0 / 16);
    std::vector<double> f(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) f[i] = 1.0 + g->nodes[i].x();
    const auto a = solve_fixed_rhs(g, f, {SweepMethod::Newton});
    const auto b = solve_fixed_rhs(g, f, {SweepMethod::GaussSeidel});
    const auto c = solve_fixed_rhs(g, f, {SweepMethod::Jacobi});
    CHECK(sup_diff(a.values, b.values) < 1e-8);
    CHECK(sup_diff(a.values, c.values) < 1e-8);
    SolverOptions tight{SweepMethod::Jacobi, 1e-10, 5};
    CHECK_THROWS_AS(solve_fixed_rhs(g, f, tight), ConvergenceError);
}

TEST_CASE("discrete comparison on random right-hand sides") {
    const auto g = grid(testing::unit_square(), 1.0 / 16, 2);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> f1(g->size()), f2(g->size());
        for (std::size_t i = 0; i < g->size(); ++i) {
            f2[i] = u(rng);
            f1[i] = f2[i] + u(rng);
        }
        const auto s1 = solve_fixed_rhs(g, f1);
        const auto s2 = solve_fixed_rhs(g, f2);
        int violations = 0;
        for (std::size_t i = 0; i < g->size(); ++i) violations += s1.values[i] > s2.values[i] + 1e-12;
        CHECK(violations == 0);
    }
}

TEST_CASE("grid convergence on a smooth right-hand side") {
    // A non-polynomial radial right-hand side, compared between h and h/2 at shared nodes.
    std::vector<double> diffs;
    std::vector<double> prev;
    std::shared_ptr<const Grid2D> prev_grid;
    for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        const auto g = grid(testing::unit_disk(), h);
        std::vector<double> f(g->size());
        for (std::size_t i = 0; i < g->size(); ++i) f[i] = 1.0 + g->nodes[i].squaredNorm();
        const auto s = solve_fixed_rhs(g, f);
        if (prev_grid) {
            double d = 0.0;
            for (std::size_t i = 0; i < prev_grid->size(); ++i) {
                const int j = g->find(2 * prev_grid->lattice[i][0], 2 * prev_grid->lattice[i][1]);
                REQUIRE(j >= 0);
                d = std::max(d, std::abs(prev[i] - s.values[static_cast<std::size_t>(j)]));
            }
            diffs.push_back(d);
        }
        prev = s.values;
        prev_grid = g;
    }
    for (std::size_t k = 1; k < diffs.size(); ++k) CHECK(diffs[k] <= diffs[k - 1] / 1.3);
}

TEST_CASE("singular right-hand side") {
    const auto disk = testing::unit_disk();
    const auto g = grid(disk, 1.0 / 16);

    // alpha = 0 removes the u-dependence.
    const auto flat = solve_singular(g, PowerLawRHS(1, 0, 3, disk));
    const auto ref = solve_fixed_rhs(g, std::vector<double>(g->size(), 1.0));
    CHECK(sup_diff(flat.values, ref.values) < 1e-12);

    SingularSchedule sch;
    const auto s1 = solve_singular(g, PowerLawRHS(1, 2, 3, disk), sch);
    const auto s2 = solve_singular(g, PowerLawRHS(2, 2, 3, disk), sch);
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(s2.values[i] <= s1.values[i] + 1e-9);
    CHECK(s1.min_second_difference() >= -1e-8);
    for (double v : s1.values) CHECK(v <= 0.0);
    CHECK_FALSE(s1.floors.empty());

    // Scheduling independence.
    SingularSchedule gs = sch;
    gs.inner.method = SweepMethod::GaussSeidel;
    SingularSchedule jac = sch;
    jac.inner.method = SweepMethod::Jacobi;
    const auto a = solve_singular(g, PowerLawRHS(1, 2, 3, disk), gs);
    const auto b = solve_singular(g, PowerLawRHS(1, 2, 3, disk), jac);
    CHECK(sup_diff(a.values, b.values) < 1e-6);

    // Rotation invariance: equal radii carry equal values.
    std::map<long long, std::vector<double>> rings;
    for (std::size_t i = 0; i < g->size(); ++i) {
        const long long key = static_cast<long long>(g->lattice[i][0]) * g->lattice[i][0] +
                              static_cast<long long>(g->lattice[i][1]) * g->lattice[i][1];
        rings[key].push_back(s1.values[i]);
    }
    for (const auto& [key, vals] : rings) {
        const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
        CHECK(*hi - *lo <= 2 * g->h);
    }

    // Agreement with the radial oracle.
    const RadialProfile p = radial_solve(PowerLawRHS(1, 2, 3, 2), 1.0);
    double err = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) err = std::max(err, std::abs(s1.values[i] - p.value_at(g->nodes[i].norm())));
    CHECK(err < 5e-2);

    SingularSchedule bad;
    bad.damping = 0.0;
    CHECK_THROWS_AS(solve_singular(g, PowerLawRHS(1, 2, 3, disk), bad), ParameterError);
}
