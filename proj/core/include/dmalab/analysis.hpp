#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmalab/barriers.hpp"
#include "dmalab/geometry.hpp"
#include "dmalab/radial.hpp"
#include "dmalab/solver.hpp"

namespace dmalab {

enum class ExponentKind { Exact, OpenUpTo1, One, NotApplicable };

std::string to_string(ExponentKind kind);

struct Exponent {
    ExponentKind kind = ExponentKind::NotApplicable;
    double value = 0.0;  ///< meaningful for Exact and One

    static Exponent exact(double v) { return {ExponentKind::Exact, v}; }
    static Exponent open() { return {ExponentKind::OpenUpTo1, 0.0}; }
    static Exponent one() { return {ExponentKind::One, 1.0}; }
    static Exponent not_applicable() { return {ExponentKind::NotApplicable, 0.0}; }

    bool is_exact() const { return kind == ExponentKind::Exact; }
    std::string describe() const;
    nlohmann::json to_json() const;
};

struct ExponentPrediction {
    int n = 2;
    double alpha = 0.0;
    double beta = 3.0;
    std::optional<double> a;
    std::optional<double> exterior_radius;
    std::optional<double> interior_radius;

    Exponent gamma1;
    /// Present only when a domain exponent a was supplied.
    std::optional<Exponent> gamma2;
    /// NotApplicable without an exterior sphere.
    Exponent gamma3;
    /// NotApplicable without an interior sphere or when beta/(n+alpha) >= 1.
    Exponent gamma4;

    nlohmann::json to_json() const;
};

/// The raw formulas, no regime logic.
double gamma1_formula(int n, double alpha, double beta);
double gamma2_formula(int n, double alpha, double beta, double a);
double gamma3_formula(int n, double alpha, double beta);

/// Regime case splits for gamma_1..gamma_4. Requires beta >= n + 1 and, when given, a > 2.
ExponentPrediction predicted_exponents(int n, double alpha, double beta, std::optional<double> a = std::nullopt,
                                       const SphereCertificate* spheres = nullptr);

struct FitWindow {
    double d_min = 0.0;
    double d_max = 0.0;
};

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double standard_error = 0.0;
    FitWindow window;
    std::size_t samples = 0;
    Vec boundary_point;
    Vec direction;
    /// Usable (d, |u|) pairs entering the fit.
    std::vector<double> d;
    std::vector<double> abs_u;
    /// Slopes for the windows [2 d_min, d_max] and [d_min, d_max / 2].
    std::vector<double> variant_slopes;

    nlohmann::json to_json() const;
};

using ScalarField = std::function<double(const Vec&)>;

/// Least-squares fit of log|u| against log d over `count` geometric samples
/// z + d * direction with d in the window. Needs >= 8 samples with u < -1e-12.
DecayFit fit_decay(const ScalarField& u, const Vec& z, const Vec& direction, const FitWindow& window,
                   std::size_t count = 24);

/// Grid solution: default window [4h, 0.1 diam], direction = inward normal at z.
DecayFit fit_boundary_exponent(const DiscreteSolution& solution, const ConvexDomain& domain, const Vec& z,
                               std::optional<FitWindow> window = std::nullopt, std::size_t count = 24);

/// Radial profile: samples u(R - d), default window [tol^(1/2), 0.1 R].
DecayFit fit_boundary_exponent(const RadialProfile& profile, std::optional<FitWindow> window = std::nullopt,
                               std::size_t count = 24);

struct Consistency {
    bool contradiction = false;
    /// (slope - predicted) / standard_error.
    double z_score = 0.0;
    std::string verdict;
};

/// One-sided: contradiction iff slope < predicted - sigmas * se.
Consistency check_upper_bound(const DecayFit& fit, double predicted, double sigmas = 3.0);
/// Two-sided (ball case): contradiction iff |slope - predicted| > max(sigmas * se, abs_tol).
Consistency check_two_sided(const DecayFit& fit, double predicted, double sigmas = 3.0, double abs_tol = 0.0);

struct HolderReport {
    bool hypothesis_ok = true;
    bool passed = false;
    /// Largest |u(x)| / (M d_x^gamma) over the nodes.
    double hypothesis_ratio = 0.0;
    /// Largest |u(x1) - u(x2)| / (M (1 + diam^gamma) |x1 - x2|^gamma).
    double worst_ratio = 0.0;
    std::size_t pairs = 0;
    Vec worst_a;
    Vec worst_b;

    nlohmann::json to_json() const;
};

/// Checks |u| <= M d^gamma at all points, then the Holder bound
/// |u(x1) - u(x2)| <= M (1 + diam^gamma) |x1 - x2|^gamma + 1e-8 on random pairs.
HolderReport holder_reduction_check(const std::vector<Vec>& points, const std::vector<double>& values,
                                    const std::vector<double>& distances, double diameter, double gamma, double M,
                                    std::size_t n_pairs = 10000, std::uint64_t seed = 1);
HolderReport holder_reduction_check(const DiscreteSolution& solution, double gamma, double M,
                                    std::size_t n_pairs = 10000, std::uint64_t seed = 1);

/// sup |u| / d^gamma over the nodes.
double holder_constant(const DiscreteSolution& solution, double gamma);

struct SandwichReport {
    bool passed = false;
    double C = 3.0;
    double h = 0.0;
    /// max (W_sub - u) / h and max (u - W_super) / h, floored at 0.
    double sub_violation = 0.0;
    double super_violation = 0.0;
    std::size_t sub_samples = 0;
    std::size_t super_samples = 0;
    Vec worst_point;

    nlohmann::json to_json() const;
};

/// u >= W_sub - C h at the nodes inside the sub-barrier's region and, with a
/// super-barrier, u <= W_super + C h inside its ball. Refuses uncertified barriers.
SandwichReport sandwich_check(const DiscreteSolution& solution, const Barrier& sub,
                              const BarrierCertificate& sub_certificate, const Barrier* super = nullptr,
                              const BarrierCertificate* super_certificate = nullptr, double C = 3.0);

}  // namespace dmalab
