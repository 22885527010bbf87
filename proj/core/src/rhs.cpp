#include "dmalab/rhs.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dmalab/errors.hpp"

namespace dmalab {

namespace {

void check_constants(double A, double alpha, double beta, int n) {
    if (n < 2) throw ParameterError("rhs: dimension must be at least 2");
    if (!(A > 0.0) || !std::isfinite(A)) throw ParameterError("rhs: A must be positive");
    if (!(alpha >= 0.0)) throw ParameterError("rhs: alpha must be non-negative");
    if (!(beta >= n + 1.0)) throw RegimeError("rhs: beta must satisfy beta >= n + 1");
}

}  // namespace

PowerLawRHS::PowerLawRHS(double A, double alpha, double beta, int n) : A_(A), alpha_(alpha), beta_(beta), n_(n) {
    check_constants(A, alpha, beta, n);
}

PowerLawRHS::PowerLawRHS(double A, double alpha, double beta, std::shared_ptr<const ConvexDomain> domain)
    : A_(A), alpha_(alpha), beta_(beta), n_(domain ? domain->dimension() : 0), domain_(std::move(domain)) {
    if (!domain_) throw ParameterError("rhs: null domain");
    check_constants(A, alpha, beta, n_);
}

double PowerLawRHS::at_distance(double d, double t) const {
    if (!(t < 0.0)) throw SignError("rhs: t must be negative");
    if (d < 0.0) throw DomainMembershipError("rhs: negative boundary distance");
    const double de = distance_exponent();
    double factor = 1.0;
    if (de > 0.0) factor = d > 0.0 ? std::pow(d, de) : 0.0;
    return A_ * factor * std::pow(-t, -alpha_);
}

double PowerLawRHS::operator()(const Vec& x, double t) const {
    if (!domain_) throw ParameterError("rhs: no domain attached; use at_distance");
    if (!(t < 0.0)) throw SignError("rhs: t must be negative");
    return at_distance(domain_->distance_to_boundary(x), t);
}

PowerLawRHS PowerLawRHS::with_A(double A) const {
    PowerLawRHS copy = *this;
    check_constants(A, alpha_, beta_, n_);
    copy.A_ = A;
    return copy;
}

PowerLawRHS::operator RhsFunction() const {
    return [self = *this](const Vec& x, double t) { return self(x, t); };
}

RegularizedRHS::RegularizedRHS(RhsFunction base, double floor) : base_(std::move(base)), floor_(floor) {
    if (!(floor > 0.0)) throw ParameterError("regularized rhs: floor must be positive");
    if (!base_) throw ParameterError("regularized rhs: empty base");
}

double RegularizedRHS::operator()(const Vec& x, double t) const { return base_(x, std::min(t, -floor_)); }

RegularizedRHS::operator RhsFunction() const {
    return [self = *this](const Vec& x, double t) { return self(x, t); };
}

std::vector<StructureSample> structure_samples(const ConvexDomain& domain, std::size_t n_points,
                                               std::size_t n_levels) {
    std::vector<StructureSample> out;
    const auto points = domain.interior_samples(n_points);
    for (const auto& x : points) {
        for (std::size_t k = 0; k < n_levels; ++k) {
            out.push_back({x, -std::ldexp(8.0, -static_cast<int>(k))});
        }
    }
    return out;
}

StructureReport verify_structure(const RhsFunction& F, const ConvexDomain& domain, double A, double alpha,
                                 double beta, const std::vector<StructureSample>& samples) {
    const PowerLawRHS bound(A, alpha, beta, domain.dimension());
    constexpr double kRel = 1e-12;
    StructureReport report;

    auto record = [&](StructureCheck& check, double excess, double scale, const StructureSample& s) {
        if (excess > kRel * std::max(1.0, std::abs(scale))) check.passed = false;
        if (excess > check.worst_excess || !check.worst) {
            if (excess > check.worst_excess) check.worst_excess = excess;
            check.worst = s;
        }
    };

    // Group by point so that monotonicity compares values at the same x.
    std::map<const StructureSample*, double> values;
    for (const auto& s : samples) {
        if (!(s.t < 0.0)) throw SignError("verify_structure: sample with t >= 0");
        const double d = domain.distance_to_boundary(s.x);
        const double f = F(s.x, s.t);
        const double b = bound.at_distance(d, s.t);
        record(report.upper, f - b, b, s);
        record(report.lower, b - f, b, s);
        values[&s] = f;
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            const auto& si = samples[i];
            const auto& sj = samples[j];
            if (si.x.size() != sj.x.size() || (si.x - sj.x).norm() != 0.0) continue;
            const bool i_lower = si.t < sj.t;
            const auto& lo = i_lower ? si : sj;
            const auto& hi = i_lower ? sj : si;
            const double f_lo = values[&lo];
            const double f_hi = values[&hi];
            record(report.monotone, f_lo - f_hi, f_hi, lo);
        }
    }
    if (report.monotone.worst_excess <= 0.0) report.monotone.worst.reset();
    if (report.upper.worst_excess <= 0.0) report.upper.worst.reset();
    if (report.lower.worst_excess <= 0.0) report.lower.worst.reset();
    return report;
}

}  // namespace dmalab
