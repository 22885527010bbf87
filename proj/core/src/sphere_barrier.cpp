#include <cmath>

#include "dmalab/barriers.hpp"
#include "dmalab/errors.hpp"
#include "dmalab/report.hpp"
#include "numeric_util.hpp"

namespace dmalab {

double sphere_exponent(int n, double alpha, double beta, double b) { return n * (b - 1.0) + b * alpha + n - beta; }

SphereBarrier sphere_barrier_params(int n, double alpha, double beta, double A, double R, BarrierSide kind,
                                    std::optional<double> gamma_target) {
    if (n < 2) throw ParameterError("sphere barrier: n must be at least 2");
    if (!(A > 0.0)) throw ParameterError("sphere barrier: A must be positive");
    if (!(alpha >= 0.0)) throw ParameterError("sphere barrier: alpha must be non-negative");
    if (!(R > 0.0)) throw ParameterError("sphere barrier: radius must be positive");
    if (!(beta >= n + 1.0)) throw RegimeError("sphere barrier: requires beta >= n + 1");

    SphereBarrier bar;
    bar.n = n;
    bar.alpha = alpha;
    bar.beta = beta;
    bar.A = A;
    bar.R = R;
    bar.kind = kind;
    bar.center = Vec::Zero(n);

    if (kind == BarrierSide::Super) {
        if (!(beta < n + alpha)) {
            throw RegimeError("sphere super-barrier requires beta < n + alpha (interior exponent below 1)");
        }
        const double b = beta / (n + alpha);
        bar.b = b;
        const double bound = std::pow(2.0 * b, n) * 2.0 * R * R * std::pow(2.0 * R, beta - n - 1.0);
        bar.M = std::pow(A / bound, 1.0 / (n + alpha)) * (1.0 - 1e-9);
        return bar;
    }

    if (beta >= alpha + n + 1.0) {
        bar.b = 1.0;
        auto radial = [&](double r) {
            return std::pow(R + r, alpha) * std::pow(R - r, alpha + n + 1.0 - beta);
        };
        const auto [r_min, f_min] = detail::grid_minimize(radial, 0.0, R);
        (void)r_min;
        bar.M = std::pow(A / (std::pow(2.0, n) * f_min), 1.0 / (n + alpha)) * (1.0 + 1e-9);
        return bar;
    }

    double b = beta / (n + alpha);
    if (beta >= alpha + n) {
        if (!gamma_target || !(*gamma_target > 0.0 && *gamma_target < 1.0)) {
            throw RegimeError(
                "sphere sub-barrier: alpha + n <= beta < alpha + n + 1 needs a target exponent in (0, 1)");
        }
        b = *gamma_target;
        bar.from_target = true;
    }
    bar.b = b;
    const double e1 = n * (b - 1.0) + b * alpha - 1.0;
    double e2 = sphere_exponent(n, alpha, beta, b);
    // Vanishes for b = beta/(n + alpha); rounding must not leave 0^(+tiny) = 0 at r = R.
    if (std::abs(e2) < 1e-12) e2 = 0.0;
    auto radial = [&](double r) { return std::pow(R + r, e1) * std::pow(R - r, e2); };
    const auto [r_min, f_min] = detail::grid_minimize(radial, 0.0, R);
    (void)r_min;
    const double bound = (1.0 - std::abs(2.0 * b - 1.0)) * R * R * std::pow(2.0 * b, n) * f_min;
    if (!(bound > 0.0)) throw RegimeError("sphere sub-barrier: degenerate determinant bound");
    bar.M = std::pow(A / bound, 1.0 / (n + alpha)) * (1.0 + 1e-9);
    return bar;
}

BarrierEval SphereBarrier::evaluate(const Vec& x) const {
    if (x.size() != n) throw ParameterError("sphere barrier: dimension mismatch");
    const Vec v = x - center;
    const double r2 = v.squaredNorm();
    const double P = R * R - r2;
    if (!(P > 0.0)) throw BarrierDomainError("sphere barrier: requires |x - y0| < R");
    BarrierEval e;
    e.value = -M * std::pow(P, b);
    const double c1 = 2.0 * M * b * std::pow(P, b - 1.0);
    e.gradient = c1 * v;
    e.hessian = c1 * Mat::Identity(n, n) - 4.0 * M * b * (b - 1.0) * std::pow(P, b - 2.0) * (v * v.transpose());
    e.det = std::pow(2.0 * M * b, n) * std::pow(P, n * (b - 1.0) - 1.0) * (R * R - (2.0 * b - 1.0) * r2);
    return e;
}

double SphereBarrier::value(const Vec& x) const {
    const double r2 = (x - center).squaredNorm();
    const double P = R * R - r2;
    if (P < -1e-12 * R * R) throw BarrierDomainError("sphere barrier: point outside the ball");
    return -M * std::pow(std::max(P, 0.0), b);
}

long double SphereBarrier::value_extended(const std::vector<long double>& x) const {
    long double r2 = 0.0L;
    for (int i = 0; i < n; ++i) {
        const long double d = x[i] - static_cast<long double>(center[i]);
        r2 += d * d;
    }
    const long double P = static_cast<long double>(R) * R - r2;
    return -static_cast<long double>(M) * std::pow(P, static_cast<long double>(b));
}

bool SphereBarrier::in_region(const Vec& x) const { return (x - center).norm() < R; }

double SphereBarrier::singular_distance(const Vec& x) const { return R - (x - center).norm(); }

std::vector<std::string> SphereBarrier::flags() const {
    if (from_target) return {"exponent b taken from the target (middle regime)"};
    return {};
}

double SphereBarrier::axis_magnitude(double d) const { return M * std::pow(2.0 * R - d, b) * std::pow(d, b); }

nlohmann::json SphereBarrier::to_json() const {
    return {{"family", family()}, {"side", to_string(side())}, {"n", n},        {"alpha", alpha},
            {"beta", beta},       {"A", A},                    {"M", M},        {"b", b},
            {"R", R},             {"center", vec_to_json(center)}, {"from_target", from_target}};
}

}  // namespace dmalab
