#include <cmath>
#include <random>

#include "doctest.h"

#include "dmalab/barriers.hpp"
#include "dmalab/errors.hpp"
#include "test_support.hpp"

using namespace dmalab;
using testing::v2;

namespace {

// Points of {x_n in [lo, hi]} x {|x'| <= rmax} drawn uniformly in the bounding box.
std::vector<Vec> slab_points(int n, double rmax, double lo, double hi, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> t(lo, hi);
    std::vector<Vec> pts;
    while (pts.size() < count) {
        Vec x(n);
        for (int i = 0; i + 1 < n; ++i) x[i] = rmax * u(rng);
        x[n - 1] = t(rng);
        if (x.head(n - 1).norm() <= rmax) pts.push_back(x);
    }
    return pts;
}

// Independent central-difference Hessian of W in double precision.
Mat fd_hessian(const Barrier& W, const Vec& x, double h) {
    const int n = W.dimension();
    Mat H(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Vec pp = x, pm = x, mp = x, mm = x;
            pp[i] += h; pp[j] += h;
            pm[i] += h; pm[j] -= h;
            mp[i] -= h; mp[j] += h;
            mm[i] -= h; mm[j] -= h;
            H(i, j) = (W.value(pp) - W.value(pm) - W.value(mp) + W.value(mm)) / (4 * h * h);
        }
    }
    return H;
}

}  // namespace

TEST_CASE("edge recipe") {
    const EdgeBarrier e = edge_barrier_params(2, 1, 3, 1, 1);
    CHECK(e.gamma == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(e.N == 2);
    CHECK(1.0 - (1.0 + 1.0 / (e.N * e.N)) * e.gamma > 0.0);
    CHECK(1.0 - (1.0 + 1.0 / ((e.N - 1) * (e.N - 1))) * e.gamma <= 0.0);
    // Oracle: M^(n+alpha) = A / min_r [N^2 l^2 gamma (1 - (1 + r^2/N^2 l^2) gamma) (N^2 l^2 - r^2)^((alpha-n)/2)],
    // the minimum is at r = l: 4 (2/3)(1 - (5/4)(2/3)) 3^(-1/2).
    const double m = 4.0 * (2.0 / 3.0) * (1.0 - 1.25 * 2.0 / 3.0) / std::sqrt(3.0);
    CHECK(e.M == doctest::Approx(std::pow(1.0 / m, 1.0 / 3.0)).epsilon(1e-6));
    CHECK(e.M == doctest::Approx(1.574).epsilon(1e-3));
    CHECK_THROWS_AS(edge_barrier_params(2, 1, 4, 1, 1), RegimeError);
    const EdgeBarrier capped = edge_barrier_params(2, 1, 4, 1, 1, 0.9);
    CHECK(capped.gamma == doctest::Approx(0.9));
    CHECK(capped.beta < edge_beta_limit(2, 1));
}

TEST_CASE("edge closed forms") {
    const EdgeBarrier e = edge_barrier_params(2, 1, 3, 1, 1);
    const double L = e.N * e.l;
    for (double xn : {0.1, 0.5, 2.0}) {
        const BarrierEval v = e.evaluate_local(v2(0.0, xn));
        const double expected = std::pow(e.M, 2) * L * L * e.gamma * std::pow(xn, 2 * e.gamma - 2) * std::pow(L, -2.0) *
                                (1.0 - e.gamma);
        CHECK(v.det == doctest::Approx(expected).epsilon(1e-12));
        CHECK(-v.value == doctest::Approx(e.axis_magnitude(xn)).epsilon(1e-14));
    }
    // n gamma < 2 here, so the determinant blows up at the plane.
    CHECK(e.evaluate_local(v2(0.0, 1e-8)).det > e.evaluate_local(v2(0.0, 1e-4)).det);
    const EdgeBarrier e3 = edge_barrier_params(3, 0, 4.9, 1, 1);
    CHECK(3 * e3.gamma > 2.0);
    CHECK(e3.evaluate_local(Vec::Unit(3, 2) * 1e-8).det < e3.evaluate_local(Vec::Unit(3, 2) * 1e-4).det);
    CHECK_THROWS_AS(e.evaluate_local(v2(0.2, 0.0)), BarrierDomainError);

    // Factored determinant against the Schur complement of the explicit Hessian.
    for (const auto& p : slab_points(3, 1.0, 0.05, 1.0, 200, 4)) {
        const EdgeBarrier b3 = edge_barrier_params(3, 1, 4.5, 1, 1);
        const BarrierEval v = b3.evaluate_local(p);
        const Mat G = v.hessian.topLeftCorner(2, 2);
        const Vec xi = v.hessian.block(0, 2, 2, 1);
        const double schur = G.determinant() * (v.hessian(2, 2) - xi.dot(G.inverse() * xi));
        CHECK(std::abs(schur - v.det) <= 1e-10 * std::abs(v.det));
    }
}

TEST_CASE("cusp recipe and regimes") {
    CuspBarrier c = cusp_barrier_params(2, 2, 3, 1, 2.5, 1);
    CHECK(c.b == doctest::Approx(8.0 / 7.0).epsilon(1e-14));
    CHECK(c.regime == CuspRegime::Step2);
    c = cusp_barrier_params(2, 2, 3, 1, 4, 1);
    CHECK(c.b == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(c.regime == CuspRegime::Step3);
    // delta = 0.1 is admissible for a = 4, b = 0.8: 2 (0.9)^3 > (1 + 0.2) * 2 (0.2) / 0.8.
    CHECK(2.0 * std::pow(0.9, 3) > 1.2 * 2.0 * 0.2 / 0.8);
    CHECK((c.a - 2) * std::pow(1 - c.delta, c.a - 1) > (1 + c.delta * (c.a - 2)) * 2 * (1 - c.b) / c.b);
    CHECK(c.sigma() > 0.0);
    CHECK(c.eps * std::pow(1.0 / c.delta, c.a / 2) <= c.eta * (1 + 1e-12));

    CHECK_THROWS_AS(cusp_barrier_params(2, 2, 3, 1, 2.0, 1), RegimeError);
    CHECK_THROWS_AS(cusp_barrier_params(2, 2, 3, 1, 1.5, 1), RegimeError);

    // a exactly at the regime threshold: assigned to Step 3 with b = 1 and flagged.
    const double a_star = cusp_regime_threshold(2, 2, 3);
    CHECK(a_star == doctest::Approx(3.0));
    c = cusp_barrier_params(2, 2, 3, 1, a_star, 1);
    CHECK(c.regime == CuspRegime::Step3);
    CHECK(c.on_regime_boundary);
    CHECK(c.b == 1.0);
    CHECK_FALSE(c.flags().empty());
}

TEST_CASE("cusp closed forms") {
    const CuspBarrier c = cusp_barrier_params(2, 2, 3, 1, 2.5, 1);
    for (double xn : {0.01, 0.1, 0.5}) {
        const CuspEval v = c.evaluate_local(v2(0.0, xn));
        CHECK(v.value == doctest::Approx(-std::pow(xn / c.eps, 2.0 / (c.a * c.b))).epsilon(1e-13));
        CHECK(-v.value == doctest::Approx(c.axis_magnitude(xn)).epsilon(1e-13));
    }
    for (double r : {0.1, 0.3}) CHECK(c.value(v2(r, c.eps * std::pow(r, c.a))) == doctest::Approx(0.0).epsilon(1e-12));

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const CuspBarrier& bar : {c, cusp_barrier_params(2, 2, 3, 1, 4, 1), cusp_barrier_params(3, 1, 4, 1, 3, 1)}) {
        int checked = 0;
        while (checked < 100) {
            const int n = bar.n;
            Vec p(n);
            p[n - 1] = 0.05 + 0.5 * u(rng);
            const double reach = std::pow(p[n - 1] / bar.eps, 1.0 / bar.a);
            for (int i = 0; i + 1 < n; ++i) p[i] = (2 * u(rng) - 1) * reach / std::sqrt(n - 1.0);
            if (!bar.in_region(p) || bar.singular_distance(p) < 1e-2) continue;
            ++checked;
            const CuspEval v = bar.evaluate_local(p);
            const auto& P = v.parts;
            const double block = P.Wrr * P.Wnn - P.Wrn * P.Wrn;
            CHECK(std::abs(P.I1 + P.I2 + P.I3 - block) <= 1e-10 * std::abs(block));
            if (bar.regime == CuspRegime::Step2) {
                CHECK(P.I1 > 0.0);
                CHECK(P.I2 > 0.0);
                CHECK(P.I3 > 0.0);
            }
            const Mat H = fd_hessian(bar, p, 1e-5);
            CHECK((H - v.hessian).norm() <= 1e-5 * v.hessian.norm());
            CHECK(v.det == doctest::Approx(v.hessian.determinant()).epsilon(1e-9));
        }
    }
}

TEST_CASE("cusp region inclusion and sandwich") {
    const CuspBarrier c = cusp_barrier_params(2, 2, 3, 1, 4, 1);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const double xn = u(rng);
        const double rmax = std::pow(xn / c.eta, 1.0 / c.a);
        const double r = rmax * u(rng);
        const double S = std::pow(xn / c.eps, 2.0 / c.a);
        CHECK(c.delta * S >= r * r * (1 - 1e-12));
        const double Wb = std::pow(-c.value(v2(r, xn)), c.b);
        CHECK((1 - c.delta) * S <= Wb * (1 + 1e-12));
        CHECK(Wb <= S * (1 + 1e-12));
    }
}

TEST_CASE("sphere recipe and closed forms") {
    SphereBarrier s = sphere_barrier_params(2, 2, 3, 1, 1, BarrierSide::Sub);
    CHECK(s.b == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(2 * (s.b - 1) + s.b * 2 - 1 == doctest::Approx(0.0));
    CHECK(sphere_exponent(2, 2, 3, s.b) == doctest::Approx(0.0));
    // Both radial exponents vanish, so M solves (1 - |2b - 1|) (2b)^n M^(n+alpha) = A exactly.
    CHECK(s.M == doctest::Approx(std::pow(1.0 / (0.5 * 2.25), 0.25)).epsilon(1e-8));
    const SphereBarrier sup = sphere_barrier_params(2, 2, 3, 1, 1, BarrierSide::Super);
    CHECK(sup.b == doctest::Approx(0.75));
    CHECK_THROWS_AS(sphere_barrier_params(2, 1, 3, 1, 1, BarrierSide::Super), RegimeError);
    CHECK(sphere_barrier_params(2, 0, 4, 1, 1, BarrierSide::Sub).b == 1.0);

    s.center = v2(0.2, -0.1);
    CHECK(s.value(s.center) == doctest::Approx(-s.M * std::pow(s.R, 2 * s.b)));
    CHECK(s.value(s.center + v2(s.R, 0)) == doctest::Approx(0.0));
    CHECK_THROWS_AS(s.evaluate(s.center + v2(1.5, 0)), BarrierDomainError);
    for (double r : {0.0, 0.3, 0.9}) {
        const BarrierEval v = s.evaluate(s.center + v2(0, r));
        const double R2 = s.R * s.R;
        const double det = std::pow(2 * s.M * s.b, 2) * std::pow(R2 - r * r, 2 * (s.b - 1) - 1) * (R2 - (2 * s.b - 1) * r * r);
        CHECK(v.det == doctest::Approx(det).epsilon(1e-12));
        if (r > 0) CHECK(-v.value == doctest::Approx(s.axis_magnitude(s.R - r)).epsilon(1e-12));
    }
    const SphereBarrier q = sphere_barrier_params(2, 0, 4, 1, 1, BarrierSide::Sub);
    for (double r : {0.0, 0.5}) CHECK(q.evaluate(v2(r, 0)).det == doctest::Approx(std::pow(2 * q.M, 2)).epsilon(1e-13));
    std::vector<Vec> pts;
    for (int k = 0; k < 20; ++k) pts.push_back(v2(0.03 * k, -0.02 * k));
    CHECK(hessian_fd_check(q, pts, 1e-3).max_rel_error <= 1e-10);
}

TEST_CASE("exponent bookkeeping") {
    for (int n : {2, 3}) {
        for (double alpha : {0.0, 1.0, 2.0, 3.5}) {
            for (double a : {2.5, 3.0, 4.0, 6.0, 11.0}) {
                for (double beta = n + 1.0; beta < cusp_beta_limit(n, alpha, a); beta += 0.25) {
                    const double b = cusp_exponent_b(n, alpha, beta, a);
                    CHECK(std::abs(cusp_step2_exponent(n, alpha, beta, a, b)) < 1e-12);
                    CHECK(std::abs(cusp_step3_exponent(n, alpha, beta, a, b)) < 1e-12);
                }
            }
            for (double beta = n + 1.0; beta < alpha + n; beta += 0.25) {
                CHECK(std::abs(sphere_exponent(n, alpha, beta, beta / (n + alpha))) < 1e-12);
            }
        }
    }
}

TEST_CASE("certification") {
    const auto sq = testing::unit_square();
    EdgeBarrier e = edge_barrier_params(2, 1, 3, 1, sq->diameter());
    e.frame = LocalFrame::from_direction(v2(0.5, 0.0), v2(0.0, 1.0));
    const PowerLawRHS F(1, 1, 3, sq);
    const BarrierCertificate cert = verify_subsolution(e, F, *sq);
    CHECK(cert.passed);
    CHECK(cert.samples >= 10000);
    CHECK(cert.min_H >= 1.0 - 1e-9);

    // H is linear in 1/F.
    const BarrierCertificate half = verify_subsolution(e, F.with_A(2.0), *sq);
    CHECK(half.min_H == doctest::Approx(0.5 * cert.min_H).epsilon(1e-12));
    CHECK_FALSE(half.passed);

    const auto disk = testing::unit_disk();
    SphereBarrier sup = sphere_barrier_params(2, 2, 3, 1, 1, BarrierSide::Super);
    const PowerLawRHS G(1, 2, 3, disk);
    CHECK(verify_subsolution(sup, G, *disk).passed);
    sup.M *= 2.0;
    const BarrierCertificate bad = verify_subsolution(sup, G, *disk);
    CHECK_FALSE(bad.passed);
    CHECK(bad.max_H > 1.0);

    const SphereBarrier sub = sphere_barrier_params(2, 2, 3, 1, 1, BarrierSide::Sub);
    CHECK(verify_subsolution(sub, G, *disk).passed);

    // alpha > n: the stretch must keep r <= l away from the circle |x'| = N l.
    EdgeBarrier wide = edge_barrier_params(2, 3, 3, 1, sq->diameter());
    CHECK(wide.N >= 2);
    wide.frame = LocalFrame::from_direction(v2(0.5, 0.0), v2(0.0, 1.0));
    CHECK(verify_subsolution(wide, PowerLawRHS(1, 3, 3, sq), *sq).passed);

    // Exact-regime sphere sub-barriers: the vanishing exponent must not zero the bound.
    for (int n : {2, 3, 4}) {
        for (double alpha : {0.5, 2.0, 3.0}) {
            for (double beta = n + 1.0; beta < n + alpha; beta += 0.125) {
                CHECK_NOTHROW(sphere_barrier_params(n, alpha, beta, 1, 1, BarrierSide::Sub));
            }
        }
    }
}
