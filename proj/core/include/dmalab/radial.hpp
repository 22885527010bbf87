#pragma once

#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmalab/rhs.hpp"

namespace dmalab {

/// Radial right-hand side F(r, u), u < 0.
using RadialRhs = std::function<double(double r, double u)>;

struct RadialProfile {
    int n = 2;
    double R = 1.0;
    std::vector<double> r;
    std::vector<double> u;
    std::vector<double> du;
    double tolerance = 1e-10;
    /// Value of the shooting parameter u(0) after extrapolation.
    double center_value = 0.0;
    std::vector<double> floors;
    std::vector<double> center_by_floor;

    /// Cubic Hermite interpolation; linear on the last (boundary) interval.
    double value_at(double radius) const;
    double derivative_at(double radius) const;
    nlohmann::json metadata() const;
};

struct RadialOptions {
    double tol = 1e-10;
    /// Integrator tolerance (absolute and relative).
    double ode_tol = 1e-12;
    /// Integration stops at distance `cutoff * R` from the sphere; the rest is
    /// closed with a local power law.
    double cutoff = 1e-10;
    std::size_t uniform_points = 1001;
    /// Floors |u| >= floor_k used for the u-singularity, extrapolated to 0.
    std::vector<double> floors = {1e-6, 1e-7, 1e-8};
    /// When false the right-hand side ignores u and a single floor is used.
    bool depends_on_u = true;
};

/// Solves (u'/r)^(n-1) u'' = F(r, u), u'(0) = 0, u(R) = 0 by shooting on u(0).
RadialProfile radial_solve(int n, double R, const RadialRhs& F, const RadialOptions& options = {});

/// F(x, t) = A (R - r)^(beta-n-1) |t|^(-alpha) on the ball of radius R.
RadialProfile radial_solve(const PowerLawRHS& F, double R, RadialOptions options = {});

}  // namespace dmalab
