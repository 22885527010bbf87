#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dmalab/analysis.hpp"
#include "dmalab/errors.hpp"
#include "dmalab/report.hpp"

namespace dmalab {

std::string to_string(ExponentKind kind) {
    switch (kind) {
        case ExponentKind::Exact: return "exact";
        case ExponentKind::OpenUpTo1: return "open_up_to_1";
        case ExponentKind::One: return "one";
        case ExponentKind::NotApplicable: return "not_applicable";
    }
    return "unknown";
}

std::string Exponent::describe() const {
    std::ostringstream os;
    switch (kind) {
        case ExponentKind::Exact: os << value; break;
        case ExponentKind::OpenUpTo1: os << "any number in (0, 1)"; break;
        case ExponentKind::One: os << "1"; break;
        case ExponentKind::NotApplicable: os << "not applicable"; break;
    }
    return os.str();
}

nlohmann::json Exponent::to_json() const {
    nlohmann::json j{{"kind", to_string(kind)}};
    if (kind == ExponentKind::Exact || kind == ExponentKind::One) j["value"] = value;
    return j;
}

nlohmann::json ExponentPrediction::to_json() const {
    nlohmann::json j{{"n", n}, {"alpha", alpha}, {"beta", beta}, {"gamma1", gamma1.to_json()},
                     {"gamma3", gamma3.to_json()}, {"gamma4", gamma4.to_json()}};
    j["a"] = a ? nlohmann::json(*a) : nlohmann::json(nullptr);
    j["gamma2"] = gamma2 ? gamma2->to_json() : nlohmann::json(nullptr);
    j["exterior_radius"] = exterior_radius ? nlohmann::json(*exterior_radius) : nlohmann::json(nullptr);
    j["interior_radius"] = interior_radius ? nlohmann::json(*interior_radius) : nlohmann::json(nullptr);
    return j;
}

double gamma1_formula(int n, double alpha, double beta) { return (beta - n + 1.0) / (n + alpha); }

double gamma2_formula(int n, double alpha, double beta, double a) {
    return gamma1_formula(n, alpha, beta) + (2.0 * n - 2.0) / (a * (n + alpha));
}

double gamma3_formula(int n, double alpha, double beta) { return beta / (n + alpha); }

ExponentPrediction predicted_exponents(int n, double alpha, double beta, std::optional<double> a,
                                       const SphereCertificate* spheres) {
    if (n < 1) throw ParameterError("predicted_exponents: n >= 1");
    if (!(alpha >= 0.0)) throw RegimeError("predicted_exponents: requires alpha >= 0");
    if (!(beta >= n + 1.0)) throw RegimeError("predicted_exponents: requires beta >= n + 1");
    if (a && !(*a > 2.0)) throw RegimeError("gamma_2 requires domain exponent a in (2, +inf)");

    ExponentPrediction p;
    p.n = n;
    p.alpha = alpha;
    p.beta = beta;
    p.a = a;
    if (spheres) {
        p.exterior_radius = spheres->exterior_radius;
        p.interior_radius = spheres->interior_radius;
    }

    p.gamma1 = beta < alpha + 2.0 * n - 1.0 ? Exponent::exact(gamma1_formula(n, alpha, beta)) : Exponent::open();
    if (a) {
        const double bound = alpha + 2.0 * n - 1.0 - (2.0 * n - 2.0) / *a;
        p.gamma2 = beta < bound ? Exponent::exact(gamma2_formula(n, alpha, beta, *a)) : Exponent::open();
    }
    if (p.exterior_radius) {
        if (beta < alpha + n) {
            p.gamma3 = Exponent::exact(gamma3_formula(n, alpha, beta));
        } else if (beta < alpha + n + 1.0) {
            p.gamma3 = Exponent::open();
        } else {
            p.gamma3 = Exponent::one();
        }
    }
    if (p.interior_radius && beta < n + alpha) p.gamma4 = Exponent::exact(gamma3_formula(n, alpha, beta));
    return p;
}

nlohmann::json DecayFit::to_json() const {
    return {{"slope", slope},
            {"intercept", intercept},
            {"standard_error", standard_error},
            {"d_min", window.d_min},
            {"d_max", window.d_max},
            {"samples", samples},
            {"boundary_point", boundary_point.size() ? vec_to_json(boundary_point) : nlohmann::json(nullptr)},
            {"direction", direction.size() ? vec_to_json(direction) : nlohmann::json(nullptr)},
            {"variant_slopes", variant_slopes}};
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double se = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - f.intercept - f.slope * x[i];
        ssr += e * e;
    }
    f.se = x.size() > 2 ? std::sqrt(ssr / (m - 2.0) / sxx) : 0.0;
    return f;
}

DecayFit fit_core(const std::function<double(double)>& at, const FitWindow& w, std::size_t count) {
    if (!(w.d_min > 0.0) || !(w.d_max > w.d_min)) throw WindowError("fit window must satisfy 0 < d_min < d_max");
    if (count < 2) throw WindowError("fit needs at least 2 sample positions");
    DecayFit fit;
    fit.window = w;
    std::vector<double> lx;
    std::vector<double> ly;
    const double ratio = std::log(w.d_max / w.d_min) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
        const double d = w.d_min * std::exp(ratio * static_cast<double>(i));
        const double v = at(d);
        if (!(std::isfinite(v) && v < -1e-12)) continue;
        fit.d.push_back(d);
        fit.abs_u.push_back(-v);
        lx.push_back(std::log(d));
        ly.push_back(std::log(-v));
    }
    fit.samples = lx.size();
    if (fit.samples < 8) {
        std::ostringstream os;
        os << "only " << fit.samples << " usable samples in window [" << w.d_min << ", " << w.d_max << "]";
        throw WindowError(os.str());
    }
    const LineFit lf = least_squares(lx, ly);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.standard_error = lf.se;
    return fit;
}

DecayFit fit_with_variants(const std::function<double(double)>& at, const FitWindow& w, std::size_t count) {
    DecayFit fit = fit_core(at, w, count);
    for (const FitWindow& v : {FitWindow{2.0 * w.d_min, w.d_max}, FitWindow{w.d_min, 0.5 * w.d_max}}) {
        try {
            fit.variant_slopes.push_back(fit_core(at, v, count).slope);
        } catch (const WindowError&) {
            fit.variant_slopes.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return fit;
}

}  // namespace

DecayFit fit_decay(const ScalarField& u, const Vec& z, const Vec& direction, const FitWindow& window,
                   std::size_t count) {
    const Vec dir = direction.normalized();
    DecayFit fit = fit_with_variants([&](double d) { return u(z + d * dir); }, window, count);
    fit.boundary_point = z;
    fit.direction = dir;
    return fit;
}

DecayFit fit_boundary_exponent(const DiscreteSolution& solution, const ConvexDomain& domain, const Vec& z,
                               std::optional<FitWindow> window, std::size_t count) {
    if (!solution.grid) throw ParameterError("fit_boundary_exponent: solution has no grid");
    if (!domain.on_boundary(z)) throw DomainMembershipError("fit_boundary_exponent: z is not a boundary point");
    const FitWindow w = window.value_or(FitWindow{4.0 * solution.grid->h, 0.1 * domain.diameter()});
    const Vec dir = domain.inward_normal(z);
    DecayFit fit = fit_with_variants([&](double d) { return solution.sample(z + d * dir); }, w, count);
    fit.boundary_point = z;
    fit.direction = dir;
    return fit;
}

DecayFit fit_boundary_exponent(const RadialProfile& profile, std::optional<FitWindow> window, std::size_t count) {
    const FitWindow w = window.value_or(FitWindow{std::sqrt(profile.tolerance), 0.1 * profile.R});
    DecayFit fit = fit_with_variants([&](double d) { return profile.value_at(profile.R - d); }, w, count);
    fit.boundary_point = Vec::Zero(1);
    fit.boundary_point[0] = profile.R;
    fit.direction = -Vec::Ones(1);
    return fit;
}

Consistency check_upper_bound(const DecayFit& fit, double predicted, double sigmas) {
    Consistency c;
    const double se = std::max(fit.standard_error, 1e-15);
    c.z_score = (fit.slope - predicted) / se;
    c.contradiction = fit.slope < predicted - sigmas * se;
    std::ostringstream os;
    os << (c.contradiction ? "significantly below " : "not significantly below ") << predicted << " (slope "
       << fit.slope << ", se " << fit.standard_error << ")";
    c.verdict = os.str();
    return c;
}

Consistency check_two_sided(const DecayFit& fit, double predicted, double sigmas, double abs_tol) {
    Consistency c;
    const double se = std::max(fit.standard_error, 1e-15);
    c.z_score = (fit.slope - predicted) / se;
    c.contradiction = std::abs(fit.slope - predicted) > std::max(sigmas * se, abs_tol);
    std::ostringstream os;
    os << (c.contradiction ? "inconsistent with " : "consistent with ") << predicted << " (slope " << fit.slope
       << ", se " << fit.standard_error << ")";
    c.verdict = os.str();
    return c;
}

nlohmann::json HolderReport::to_json() const {
    return {{"hypothesis_ok", hypothesis_ok},
            {"passed", passed},
            {"hypothesis_ratio", hypothesis_ratio},
            {"worst_ratio", worst_ratio},
            {"pairs", pairs},
            {"worst_a", worst_a.size() ? vec_to_json(worst_a) : nlohmann::json(nullptr)},
            {"worst_b", worst_b.size() ? vec_to_json(worst_b) : nlohmann::json(nullptr)}};
}

HolderReport holder_reduction_check(const std::vector<Vec>& points, const std::vector<double>& values,
                                    const std::vector<double>& distances, double diameter, double gamma, double M,
                                    std::size_t n_pairs, std::uint64_t seed) {
    if (points.size() != values.size() || points.size() != distances.size()) {
        throw ParameterError("holder_reduction_check: size mismatch");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ParameterError("holder_reduction_check: gamma in (0, 1]");
    if (!(M >= 0.0)) throw ParameterError("holder_reduction_check: M >= 0");
    HolderReport rep;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double bound = M * std::pow(distances[i], gamma);
        const double excess = std::abs(values[i]) - bound;
        if (bound > 0.0) rep.hypothesis_ratio = std::max(rep.hypothesis_ratio, std::abs(values[i]) / bound);
        if (excess > 1e-12 * std::max(1.0, bound)) {
            rep.hypothesis_ok = false;
            if (rep.worst_a.size() == 0) rep.worst_a = points[i];
        }
    }
    if (!rep.hypothesis_ok) return rep;
    rep.passed = true;
    if (points.size() < 2) return rep;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    const double K = M * (1.0 + std::pow(diameter, gamma));
    for (std::size_t k = 0; k < n_pairs; ++k) {
        const std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        if (i == j) j = (j + 1) % points.size();
        const double gap = std::abs(values[i] - values[j]);
        const double bound = K * std::pow((points[i] - points[j]).norm(), gamma);
        ++rep.pairs;
        const double ratio = bound > 0.0 ? gap / bound : (gap > 0.0 ? INFINITY : 0.0);
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_a = points[i];
            rep.worst_b = points[j];
        }
        if (gap > bound + 1e-8) rep.passed = false;
    }
    return rep;
}

HolderReport holder_reduction_check(const DiscreteSolution& solution, double gamma, double M, std::size_t n_pairs,
                                    std::uint64_t seed) {
    if (!solution.grid) throw ParameterError("holder_reduction_check: solution has no grid");
    const Grid2D& g = *solution.grid;
    std::vector<Vec> pts;
    pts.reserve(g.size());
    for (const auto& p : g.nodes) pts.emplace_back(p);
    return holder_reduction_check(pts, solution.values, g.distance, g.domain->diameter(), gamma, M, n_pairs, seed);
}

double holder_constant(const DiscreteSolution& solution, double gamma) {
    if (!solution.grid) throw ParameterError("holder_constant: solution has no grid");
    double M = 0.0;
    for (std::size_t i = 0; i < solution.values.size(); ++i) {
        M = std::max(M, std::abs(solution.values[i]) / std::pow(solution.grid->distance[i], gamma));
    }
    return M;
}

nlohmann::json SandwichReport::to_json() const {
    return {{"passed", passed},
            {"C", C},
            {"h", h},
            {"sub_violation_over_h", sub_violation},
            {"super_violation_over_h", super_violation},
            {"sub_samples", sub_samples},
            {"super_samples", super_samples},
            {"worst_point", worst_point.size() ? vec_to_json(worst_point) : nlohmann::json(nullptr)}};
}

SandwichReport sandwich_check(const DiscreteSolution& solution, const Barrier& sub,
                              const BarrierCertificate& sub_certificate, const Barrier* super,
                              const BarrierCertificate* super_certificate, double C) {
    if (!solution.grid) throw ParameterError("sandwich_check: solution has no grid");
    if (!sub_certificate.passed || sub.side() != BarrierSide::Sub) {
        throw ParameterError("sandwich_check: refusing an uncertified sub-barrier");
    }
    if (super && (!super_certificate || !super_certificate->passed || super->side() != BarrierSide::Super)) {
        throw ParameterError("sandwich_check: refusing an uncertified super-barrier");
    }
    const Grid2D& g = *solution.grid;
    SandwichReport rep;
    rep.C = C;
    rep.h = g.h;
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec x = g.nodes[i];
        const double u = solution.values[i];
        if (sub.in_region(x)) {
            ++rep.sub_samples;
            const double v = std::max(0.0, sub.value(x) - u) / g.h;
            rep.sub_violation = std::max(rep.sub_violation, v);
            if (v > worst) {
                worst = v;
                rep.worst_point = x;
            }
        }
        if (super && super->in_region(x)) {
            ++rep.super_samples;
            const double v = std::max(0.0, u - super->value(x)) / g.h;
            rep.super_violation = std::max(rep.super_violation, v);
            if (v > worst) {
                worst = v;
                rep.worst_point = x;
            }
        }
    }
    rep.passed = rep.sub_violation <= C && rep.super_violation <= C;
    return rep;
}

}  // namespace dmalab
