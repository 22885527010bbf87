#include <cmath>
#include <sstream>

#include "dmalab/barriers.hpp"
#include "dmalab/errors.hpp"
#include "dmalab/report.hpp"
#include "numeric_util.hpp"

namespace dmalab {

std::string to_string(BarrierSide side) { return side == BarrierSide::Sub ? "sub" : "super"; }

double edge_beta_limit(int n, double alpha) { return alpha + 2.0 * n - 1.0; }

EdgeBarrier edge_barrier_params(int n, double alpha, double beta, double A, double l,
                                std::optional<double> gamma_target) {
    if (n < 2) throw ParameterError("edge barrier: n must be at least 2");
    if (!(A > 0.0)) throw ParameterError("edge barrier: A must be positive");
    if (!(alpha >= 0.0)) throw ParameterError("edge barrier: alpha must be non-negative");
    if (!(l > 0.0)) throw ParameterError("edge barrier: diameter must be positive");
    if (!(beta >= n + 1.0)) throw RegimeError("edge barrier: requires beta >= n + 1");

    EdgeBarrier bar;
    bar.n = n;
    bar.alpha = alpha;
    bar.beta_requested = beta;
    bar.beta = beta;
    bar.A = A;
    bar.l = l;
    bar.frame = LocalFrame::identity(n);

    if (beta >= edge_beta_limit(n, alpha)) {
        if (!gamma_target) {
            std::ostringstream msg;
            msg << "edge barrier: beta >= alpha + 2n - 1 = " << edge_beta_limit(n, alpha)
                << " gives exponent 1; supply a target exponent in (0, 1)";
            throw RegimeError(msg.str());
        }
        const double gt = *gamma_target;
        const double capped = gt * (n + alpha) + n - 1.0;
        if (!(gt > 0.0 && gt < 1.0) || capped < n + 1.0) {
            throw RegimeError("edge barrier: target exponent must lie in [2/(n + alpha), 1)");
        }
        // d^(beta - capped) <= l^(beta - capped) moves into the coefficient.
        bar.A = A * std::pow(l, beta - capped);
        bar.beta = capped;
    }

    bar.gamma = (bar.beta - n + 1.0) / (n + alpha);
    const double ratio = bar.gamma / (1.0 - bar.gamma);
    int N = 1;
    while (static_cast<double>(N) * N <= ratio) ++N;
    // With alpha > n the factor (N^2 l^2 - r^2)^((alpha - n)/2) vanishes at r = l when N = 1.
    if (alpha > n) N = std::max(N, 2);
    bar.N = N;

    const double L2 = static_cast<double>(N) * N * l * l;
    const double g = bar.gamma;
    auto lower = [&](double r) {
        return L2 * g * (1.0 - (1.0 + r * r / L2) * g) * std::pow(L2 - r * r, 0.5 * (alpha - n)) / bar.A;
    };
    const auto [r_min, g_min] = detail::grid_minimize(lower, 0.0, l);
    (void)r_min;
    if (!(g_min > 0.0)) throw RegimeError("edge barrier: stretch N does not keep the determinant positive");
    bar.M = std::pow(1.0 / g_min, 1.0 / (n + alpha)) * (1.0 + 1e-9);
    return bar;
}

BarrierEval EdgeBarrier::evaluate_local(const Vec& p) const {
    if (p.size() != n) throw ParameterError("edge barrier: dimension mismatch");
    const double xn = p[n - 1];
    if (!(xn > 0.0)) throw BarrierDomainError("edge barrier: requires x_n > 0");
    const Vec xp = p.head(n - 1);
    const double r2 = xp.squaredNorm();
    const double L2 = static_cast<double>(N) * N * l * l;
    if (!(r2 < L2)) throw BarrierDomainError("edge barrier: requires |x'| < N l");
    const double S = std::sqrt(L2 - r2);
    const double xg = std::pow(xn, gamma);

    BarrierEval e;
    e.value = -M * xg * S;
    e.gradient = Vec::Zero(n);
    e.gradient.head(n - 1) = M * xg / S * xp;
    e.gradient[n - 1] = -M * gamma * xg / xn * S;

    e.hessian = Mat::Zero(n, n);
    e.hessian.topLeftCorner(n - 1, n - 1) =
        M * xg * (Mat::Identity(n - 1, n - 1) / S + xp * xp.transpose() / (S * S * S));
    const Vec cross = M * gamma * xg / xn / S * xp;
    e.hessian.block(0, n - 1, n - 1, 1) = cross;
    e.hessian.block(n - 1, 0, 1, n - 1) = cross.transpose();
    e.hessian(n - 1, n - 1) = M * gamma * (1.0 - gamma) * xg / (xn * xn) * S;

    e.det = std::pow(M, n) * L2 * gamma * std::pow(xn, n * gamma - 2.0) * std::pow(L2 - r2, -0.5 * n) *
            (1.0 - (1.0 + r2 / L2) * gamma);
    return e;
}

BarrierEval EdgeBarrier::evaluate(const Vec& x) const {
    BarrierEval e = evaluate_local(frame.to_local(x));
    detail::pull_back(frame, e.gradient, e.hessian);
    return e;
}

double EdgeBarrier::value(const Vec& x) const {
    const Vec p = frame.to_local(x);
    const double L2 = static_cast<double>(N) * N * l * l;
    const double r2 = p.head(n - 1).squaredNorm();
    // Boundary points may sit a rounding error below the supporting plane.
    if (p[n - 1] < -1e-12 * l || r2 > L2) throw BarrierDomainError("edge barrier: point outside the barrier region");
    return -M * std::pow(std::max(p[n - 1], 0.0), gamma) * std::sqrt(L2 - r2);
}

long double EdgeBarrier::value_extended(const std::vector<long double>& x) const {
    const auto p = detail::to_local_extended(frame, x);
    long double r2 = 0.0L;
    for (int i = 0; i + 1 < n; ++i) r2 += p[i] * p[i];
    const long double L2 = static_cast<long double>(N) * N * l * l;
    return -static_cast<long double>(M) * std::pow(p[n - 1], static_cast<long double>(gamma)) * std::sqrt(L2 - r2);
}

bool EdgeBarrier::in_region(const Vec& x) const {
    const Vec p = frame.to_local(x);
    return p[n - 1] > 0.0 && p.head(n - 1).norm() < N * l;
}

double EdgeBarrier::singular_distance(const Vec& x) const {
    const Vec p = frame.to_local(x);
    return std::min(p[n - 1], N * l - p.head(n - 1).norm());
}

std::vector<std::string> EdgeBarrier::flags() const {
    if (beta != beta_requested) return {"beta capped to realise the target exponent"};
    return {};
}

double EdgeBarrier::axis_magnitude(double d) const { return M * N * l * std::pow(d, gamma); }

nlohmann::json EdgeBarrier::to_json() const {
    return {{"family", family()}, {"side", to_string(side())},
            {"n", n},             {"alpha", alpha},
            {"beta", beta},       {"beta_requested", beta_requested},
            {"A", A},             {"M", M},
            {"N", N},             {"gamma", gamma},
            {"l", l},             {"frame", frame_to_json(frame)}};
}

}  // namespace dmalab
