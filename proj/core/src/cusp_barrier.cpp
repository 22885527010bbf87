#include <cmath>
#include <sstream>

#include "dmalab/barriers.hpp"
#include "dmalab/errors.hpp"
#include "dmalab/report.hpp"
#include "numeric_util.hpp"

namespace dmalab {

std::string to_string(CuspRegime regime) { return regime == CuspRegime::Step2 ? "step2" : "step3"; }

double cusp_beta_limit(int n, double alpha, double a) { return alpha + 2.0 * n - 1.0 - (2.0 * n - 2.0) / a; }

double cusp_regime_threshold(int n, double alpha, double beta) { return (2.0 * alpha + 2.0) / (beta - n + 1.0); }

double cusp_exponent_b(int n, double alpha, double beta, double a) {
    return 2.0 * (n + alpha) / (a * (beta - n + 1.0) + 2.0 * n - 2.0);
}

double cusp_step2_exponent(int n, double alpha, double beta, double a, double b) {
    return (1.0 - b) * (n - 2) + 2.0 - 3.0 * b + 0.5 * a * b * (4.0 / a - 2.0) + 0.5 * a * b * (n + 1.0 - beta) +
           alpha;
}

double cusp_step3_exponent(int n, double alpha, double beta, double a, double b) {
    return 2.0 - b - a * b + (1.0 - b) * (n - 2) + 0.5 * a * b * (n + 1.0 - beta) + alpha;
}

CuspBarrier cusp_barrier_params(int n, double alpha, double beta, double A, double a, double eta,
                                std::optional<double> gamma_target, double l) {
    if (n < 2) throw ParameterError("cusp barrier: n must be at least 2");
    if (!(a > 2.0)) throw RegimeError("cusp barrier requires domain exponent a in (2, +inf)");
    if (!(A > 0.0)) throw ParameterError("cusp barrier: A must be positive");
    if (!(alpha >= 0.0)) throw ParameterError("cusp barrier: alpha must be non-negative");
    if (!(eta > 0.0)) throw ParameterError("cusp barrier: eta must be positive");
    if (!(beta >= n + 1.0)) throw RegimeError("cusp barrier: requires beta >= n + 1");

    CuspBarrier bar;
    bar.n = n;
    bar.alpha = alpha;
    bar.beta_requested = beta;
    bar.beta = beta;
    bar.A = A;
    bar.a = a;
    bar.eta = eta;
    bar.frame = LocalFrame::identity(n);

    const double limit = cusp_beta_limit(n, alpha, a);
    if (beta >= limit) {
        if (!gamma_target) {
            std::ostringstream msg;
            msg << "cusp barrier: beta >= " << limit << " gives exponent 1; supply a target exponent in (0, 1)";
            throw RegimeError(msg.str());
        }
        const double gt = *gamma_target;
        const double capped = gt * (n + alpha) + n - 1.0 - (2.0 * n - 2.0) / a;
        if (!(gt > 0.0 && gt < 1.0) || capped < n + 1.0) {
            throw RegimeError("cusp barrier: target exponent too small for beta >= n + 1");
        }
        if (!(l > 0.0)) throw ParameterError("cusp barrier: l must be positive");
        bar.A = A * std::pow(l, beta - capped);
        bar.beta = capped;
    }

    const double be = bar.beta;
    bar.b = cusp_exponent_b(n, alpha, be, a);
    const double threshold = cusp_regime_threshold(n, alpha, be);
    if (std::abs(a - threshold) <= 1e-12 * a) {
        bar.regime = CuspRegime::Step3;
        bar.on_regime_boundary = true;
        bar.b = 1.0;
    } else {
        bar.regime = a < threshold ? CuspRegime::Step2 : CuspRegime::Step3;
    }
    const double b = bar.b;

    if (bar.regime == CuspRegime::Step2) {
        bar.delta = 0.1;
    } else {
        double delta = 0.5;
        int it = 0;
        while (!((a - 2.0) * std::pow(1.0 - delta, a - 1.0) > (1.0 + delta * (a - 2.0)) * 2.0 * (1.0 - b) / b)) {
            delta *= 0.5;
            if (++it > 200) throw RegimeError("cusp barrier: no admissible margin delta");
        }
        bar.delta = delta;
    }
    const double delta = bar.delta;

    const double common = (1.0 / bar.A) * std::pow(2.0 / b, n - 2);
    double C = 0.0;
    if (bar.regime == CuspRegime::Step2) {
        C = common * 8.0 * (b - 1.0) / (a * a * b * b * b) *
            std::pow(1.0 / (1.0 - delta), 2.0 - a + 0.5 * a * (n + 1.0 - be));
    } else {
        C = common * std::pow(1.0 / (1.0 - delta), 0.5 * a * (n + 1.0 - be)) * bar.sigma();
    }
    if (!(C > 0.0)) throw RegimeError("cusp barrier: determinant lower bound is not positive");

    double eps = eta * std::pow(delta, 0.5 * a);
    const double power = be - n + 1.0;
    int it = 0;
    while (std::pow(1.0 / eps, power) * C < 1.0) {
        eps *= 0.5;
        if (++it > 2000) throw RegimeError("cusp barrier: no admissible scale eps");
    }
    bar.eps = eps;
    return bar;
}

double CuspBarrier::sigma() const {
    return (1.0 + delta * (a - 2.0)) * 8.0 * (b - 1.0) / (a * a * b * b * b) +
           4.0 * (a - 2.0) / (a * a * b * b) * std::pow(1.0 - delta, a - 1.0);
}

CuspEval CuspBarrier::evaluate_local(const Vec& p) const {
    if (p.size() != n) throw ParameterError("cusp barrier: dimension mismatch");
    const double xn = p[n - 1];
    if (!(xn > 0.0)) throw BarrierDomainError("cusp barrier: requires x_n > 0");
    const Vec xp = p.head(n - 1);
    const double r2 = xp.squaredNorm();
    const double r = std::sqrt(r2);
    const double s = xn / eps;
    const double S = std::pow(s, 2.0 / a);
    const double q = S - r2;
    if (!(q > 0.0)) throw BarrierDomainError("cusp barrier: point outside the cusp region");

    const double ib = 1.0 / b;
    const double q1 = std::pow(q, ib - 1.0);
    const double q2 = std::pow(q, ib - 2.0);

    CuspEval e;
    e.value = -std::pow(q, ib);

    Vec dq(n);
    dq.head(n - 1) = -2.0 * xp;
    dq[n - 1] = (2.0 / a) * std::pow(s, 2.0 / a - 1.0) / eps;
    Mat ddq = -2.0 * Mat::Identity(n, n);
    ddq(n - 1, n - 1) = (2.0 / a) * (2.0 / a - 1.0) * std::pow(s, 2.0 / a - 2.0) / (eps * eps);

    e.gradient = -ib * q1 * dq;
    e.hessian = -ib * (ib - 1.0) * q2 * (dq * dq.transpose()) - ib * q1 * ddq;

    CuspParts& P = e.parts;
    const double e2 = 1.0 / (eps * eps);
    P.Wr = (2.0 / b) * q1 * r;
    P.Wn = -(2.0 / (a * b)) * q1 * std::pow(s, 2.0 / a - 1.0) / eps;
    P.Wrr = 4.0 * (b - 1.0) / (b * b) * q2 * r2 + (2.0 / b) * q1;
    P.Wnn = 4.0 * (b - 1.0) / (a * a * b * b) * q2 * std::pow(s, 4.0 / a - 2.0) * e2 +
            2.0 * (a - 2.0) / (a * a * b) * q1 * std::pow(s, 2.0 / a - 2.0) * e2;
    P.Wrn = 4.0 * (1.0 - b) / (a * b * b) * q2 * std::pow(s, 2.0 / a - 1.0) * r / eps;
    const double w23 = std::pow(q, 2.0 / b - 3.0);
    const double w22 = std::pow(q, 2.0 / b - 2.0);
    P.I1 = 8.0 * (a - 2.0) * (b - 1.0) / (a * a * b * b * b) * w23 * std::pow(s, 2.0 / a - 2.0) * r2 * e2;
    P.I2 = 8.0 * (b - 1.0) / (a * a * b * b * b) * w23 * std::pow(s, 4.0 / a - 2.0) * e2;
    P.I3 = 4.0 * (a - 2.0) / (a * a * b * b) * w22 * std::pow(s, 2.0 / a - 2.0) * e2;

    e.det = std::pow((2.0 / b) * q1, n - 2) * (P.I1 + P.I2 + P.I3);
    return e;
}

CuspEval CuspBarrier::evaluate_with_parts(const Vec& x) const {
    CuspEval e = evaluate_local(frame.to_local(x));
    detail::pull_back(frame, e.gradient, e.hessian);
    return e;
}

BarrierEval CuspBarrier::evaluate(const Vec& x) const { return evaluate_with_parts(x); }

double CuspBarrier::value(const Vec& x) const {
    const Vec p = frame.to_local(x);
    if (p[n - 1] < -1e-12) throw BarrierDomainError("cusp barrier: requires x_n >= 0");
    const double xn = std::max(p[n - 1], 0.0);
    const double q = std::pow(xn / eps, 2.0 / a) - p.head(n - 1).squaredNorm();
    if (q < -1e-12) throw BarrierDomainError("cusp barrier: point outside the cusp region");
    return -std::pow(std::max(q, 0.0), 1.0 / b);
}

long double CuspBarrier::value_extended(const std::vector<long double>& x) const {
    const auto p = detail::to_local_extended(frame, x);
    long double r2 = 0.0L;
    for (int i = 0; i + 1 < n; ++i) r2 += p[i] * p[i];
    const long double q =
        std::pow(p[n - 1] / static_cast<long double>(eps), 2.0L / static_cast<long double>(a)) - r2;
    return -std::pow(q, 1.0L / static_cast<long double>(b));
}

bool CuspBarrier::in_region(const Vec& x) const {
    const Vec p = frame.to_local(x);
    if (!(p[n - 1] > 0.0)) return false;
    return std::pow(p[n - 1] / eps, 2.0 / a) - p.head(n - 1).squaredNorm() > 0.0;
}

double CuspBarrier::singular_distance(const Vec& x) const {
    const Vec p = frame.to_local(x);
    const double xn = p[n - 1];
    if (!(xn > 0.0)) return 0.0;
    const double s = xn / eps;
    const double q = std::pow(s, 2.0 / a) - p.head(n - 1).squaredNorm();
    if (!(q > 0.0)) return 0.0;
    const double qn = (2.0 / a) * std::pow(s, 2.0 / a - 1.0) / eps;
    const double grad = std::sqrt(4.0 * p.head(n - 1).squaredNorm() + qn * qn);
    return std::min(xn, q / grad);
}

std::vector<std::string> CuspBarrier::flags() const {
    std::vector<std::string> out;
    if (on_regime_boundary) out.emplace_back("a equals the regime threshold; treated as step 3 with b = 1");
    if (beta != beta_requested) out.emplace_back("beta capped to realise the target exponent");
    return out;
}

double CuspBarrier::axis_magnitude(double d) const { return std::pow(d / eps, 2.0 / (a * b)); }

nlohmann::json CuspBarrier::to_json() const {
    return {{"family", family()},
            {"side", to_string(side())},
            {"n", n},
            {"alpha", alpha},
            {"beta", beta},
            {"beta_requested", beta_requested},
            {"A", A},
            {"a", a},
            {"b", b},
            {"eps", eps},
            {"eta", eta},
            {"delta", delta},
            {"sigma", sigma()},
            {"regime", to_string(regime)},
            {"regime_boundary", on_regime_boundary},
            {"frame", frame_to_json(frame)}};
}

}  // namespace dmalab
