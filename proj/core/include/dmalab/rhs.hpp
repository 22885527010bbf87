#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "dmalab/geometry.hpp"

namespace dmalab {

/// Right-hand side as a callable F(x, t), t < 0.
using RhsFunction = std::function<double(const Vec& x, double t)>;

/// F(x, t) = A d_x^(beta - n - 1) |t|^(-alpha).
class PowerLawRHS {
public:
    /// Without a domain only at_distance() is usable.
    PowerLawRHS(double A, double alpha, double beta, int n);
    PowerLawRHS(double A, double alpha, double beta, std::shared_ptr<const ConvexDomain> domain);

    double A() const noexcept { return A_; }
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    int dimension() const noexcept { return n_; }
    /// beta - n - 1 >= 0.
    double distance_exponent() const noexcept { return beta_ - n_ - 1.0; }
    const std::shared_ptr<const ConvexDomain>& domain() const noexcept { return domain_; }

    double operator()(const Vec& x, double t) const;
    /// Same formula with d_x supplied directly.
    double at_distance(double d, double t) const;

    /// Copy with A replaced.
    PowerLawRHS with_A(double A) const;

    operator RhsFunction() const;

private:
    double A_;
    double alpha_;
    double beta_;
    int n_;
    std::shared_ptr<const ConvexDomain> domain_;
};

/// base(x, min(t, -floor)).
class RegularizedRHS {
public:
    RegularizedRHS(RhsFunction base, double floor);

    double floor() const noexcept { return floor_; }
    double operator()(const Vec& x, double t) const;

    operator RhsFunction() const;

private:
    RhsFunction base_;
    double floor_;
};

struct StructureSample {
    Vec x;
    double t = -1.0;
};

struct StructureCheck {
    bool passed = true;
    /// Largest violation F - bound (or bound - F, or F(t1) - F(t2)).
    double worst_excess = 0.0;
    std::optional<StructureSample> worst;
};

struct StructureReport {
    StructureCheck monotone;
    StructureCheck upper;
    StructureCheck lower;

    bool all_passed() const { return monotone.passed && upper.passed && lower.passed; }
};

/// Interior points times a geometric ladder of negative t values.
std::vector<StructureSample> structure_samples(const ConvexDomain& domain, std::size_t n_points = 256,
                                               std::size_t n_levels = 12);

/// Checks monotonicity in t and the two-sided power-law bounds with constants
/// (A, alpha, beta) on the supplied samples. Relative tolerance 1e-12.
StructureReport verify_structure(const RhsFunction& F, const ConvexDomain& domain, double A, double alpha,
                                 double beta, const std::vector<StructureSample>& samples);

}  // namespace dmalab
