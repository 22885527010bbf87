#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dmalab/geometry.hpp"
#include "dmalab/rhs.hpp"

namespace dmalab {

enum class BarrierSide { Sub, Super };

std::string to_string(BarrierSide side);

struct BarrierEval {
    double value = 0.0;
    Vec gradient;
    Mat hessian;
    double det = 0.0;
};

/// Common interface of the three families. Evaluation is in world
/// coordinates; each family keeps the rigid motion it was placed with.
class Barrier {
public:
    virtual ~Barrier() = default;

    virtual std::string family() const = 0;
    virtual BarrierSide side() const = 0;
    virtual int dimension() const = 0;

    virtual BarrierEval evaluate(const Vec& x) const = 0;
    virtual double value(const Vec& x) const = 0;
    /// Extended-precision value, used by the finite-difference oracle.
    virtual long double value_extended(const std::vector<long double>& x) const = 0;
    /// Open region where the closed forms are smooth.
    virtual bool in_region(const Vec& x) const = 0;
    /// Lower bound for the distance from x to the singular set.
    virtual double singular_distance(const Vec& x) const = 0;
    /// Flags raised while choosing constants (e.g. regime-boundary cases).
    virtual std::vector<std::string> flags() const { return {}; }

    virtual nlohmann::json to_json() const = 0;
};

/// W = -M x_n^gamma sqrt(N^2 l^2 - r^2) in the frame at a boundary point.
class EdgeBarrier final : public Barrier {
public:
    int n = 2;
    double alpha = 0.0;
    /// Exponent actually used (after capping) and the one requested.
    double beta = 3.0;
    double beta_requested = 3.0;
    double A = 1.0;  ///< coefficient after capping
    double M = 1.0;
    int N = 1;
    double gamma = 0.5;
    double l = 1.0;
    LocalFrame frame;

    std::string family() const override { return "edge"; }
    BarrierSide side() const override { return BarrierSide::Sub; }
    int dimension() const override { return n; }

    BarrierEval evaluate_local(const Vec& p) const;
    BarrierEval evaluate(const Vec& x) const override;
    double value(const Vec& x) const override;
    long double value_extended(const std::vector<long double>& x) const override;
    bool in_region(const Vec& x) const override;
    double singular_distance(const Vec& x) const override;
    std::vector<std::string> flags() const override;
    nlohmann::json to_json() const override;

    /// |W| on the frame axis at height d: M N l d^gamma.
    double axis_magnitude(double d) const;
};

enum class CuspRegime { Step2, Step3 };

std::string to_string(CuspRegime regime);

/// Second-derivative data in the (r, x_n) variables.
struct CuspParts {
    double Wr = 0.0;
    double Wn = 0.0;
    double Wrr = 0.0;
    double Wnn = 0.0;
    double Wrn = 0.0;
    double I1 = 0.0;
    double I2 = 0.0;
    double I3 = 0.0;
};

struct CuspEval : BarrierEval {
    CuspParts parts;
};

/// W = -[(x_n/eps)^(2/a) - |x'|^2]^(1/b) in the frame at the cusp apex.
class CuspBarrier final : public Barrier {
public:
    int n = 2;
    double alpha = 0.0;
    double beta = 3.0;
    double beta_requested = 3.0;
    double A = 1.0;
    double a = 3.0;
    double b = 1.0;
    double eps = 1.0;
    double eta = 1.0;
    double delta = 0.1;
    CuspRegime regime = CuspRegime::Step3;
    bool on_regime_boundary = false;
    LocalFrame frame;

    std::string family() const override { return "cusp"; }
    BarrierSide side() const override { return BarrierSide::Sub; }
    int dimension() const override { return n; }

    CuspEval evaluate_local(const Vec& p) const;
    BarrierEval evaluate(const Vec& x) const override;
    CuspEval evaluate_with_parts(const Vec& x) const;
    double value(const Vec& x) const override;
    long double value_extended(const std::vector<long double>& x) const override;
    bool in_region(const Vec& x) const override;
    double singular_distance(const Vec& x) const override;
    std::vector<std::string> flags() const override;
    nlohmann::json to_json() const override;

    /// sigma(a, b, delta) of the Step-3 estimate.
    double sigma() const;
    /// |W| on the axis at height d: (d/eps)^(2/(ab)).
    double axis_magnitude(double d) const;
};

/// W = -M (R^2 - |x - y0|^2)^b.
class SphereBarrier final : public Barrier {
public:
    int n = 2;
    double alpha = 0.0;
    double beta = 3.0;
    double A = 1.0;
    double M = 1.0;
    double b = 1.0;
    double R = 1.0;
    Vec center;
    BarrierSide kind = BarrierSide::Sub;
    /// Set when b was taken from a user target (middle regime).
    bool from_target = false;

    std::string family() const override { return "sphere"; }
    BarrierSide side() const override { return kind; }
    int dimension() const override { return n; }

    BarrierEval evaluate(const Vec& x) const override;
    double value(const Vec& x) const override;
    long double value_extended(const std::vector<long double>& x) const override;
    bool in_region(const Vec& x) const override;
    double singular_distance(const Vec& x) const override;
    std::vector<std::string> flags() const override;
    nlohmann::json to_json() const override;

    /// |W| at distance d from the sphere along a radius: M (2R - d)^b d^b.
    double axis_magnitude(double d) const;
};

/// Largest beta for which the fractional exponents of each family are below 1.
double edge_beta_limit(int n, double alpha);
double cusp_beta_limit(int n, double alpha, double a);
/// The cusp Step-2/Step-3 threshold (2 alpha + 2)/(beta - n + 1).
double cusp_regime_threshold(int n, double alpha, double beta);

/// Edge-barrier recipe. When beta reaches the limit a target exponent must be
/// supplied; beta is then lowered to realise it and A adjusted accordingly.
EdgeBarrier edge_barrier_params(int n, double alpha, double beta, double A, double l,
                                std::optional<double> gamma_target = std::nullopt);

/// `l` bounds the boundary distance on the domain; it only matters when
/// beta is capped.
CuspBarrier cusp_barrier_params(int n, double alpha, double beta, double A, double a, double eta,
                                std::optional<double> gamma_target = std::nullopt, double l = 1.0);

/// kind = Sub: exterior-sphere sub-barrier; kind = Super: interior-sphere super-barrier.
/// The middle regime alpha + n <= beta < alpha + n + 1 needs gamma_target.
SphereBarrier sphere_barrier_params(int n, double alpha, double beta, double A, double R, BarrierSide kind,
                                    std::optional<double> gamma_target = std::nullopt);

/// Exponent bookkeeping: each vanishes for the recipe's b.
double cusp_step2_exponent(int n, double alpha, double beta, double a, double b);
double cusp_step3_exponent(int n, double alpha, double beta, double a, double b);
double sphere_exponent(int n, double alpha, double beta, double b);
/// Cusp b from the vanishing-exponent condition.
double cusp_exponent_b(int n, double alpha, double beta, double a);

struct BarrierCertificate {
    std::string family;
    BarrierSide side = BarrierSide::Sub;
    bool passed = false;
    bool inequality_ok = false;
    bool boundary_ok = false;
    bool covers_domain = true;
    double min_H = 0.0;
    double max_H = 0.0;
    Vec worst_point;
    std::size_t samples = 0;
    std::size_t boundary_samples = 0;
    double max_boundary_value = 0.0;
    std::vector<std::string> flags;

    nlohmann::json to_json() const;
};

/// Samples the domain (or, for a super-barrier, its ball) and checks
/// H[W] = det D^2 W / F(x, W) >= 1 - 1e-9 (sub) or <= 1 + 1e-9 (super),
/// plus W <= 0 on sampled boundary points.
BarrierCertificate verify_subsolution(const Barrier& barrier, const PowerLawRHS& F, const ConvexDomain& domain,
                                      std::size_t n_samples = 10000);

struct FdCheck {
    double max_rel_error = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
    Vec worst_point;
};

/// Closed-form det D^2 W against the determinant of the central-difference Hessian.
FdCheck hessian_fd_check(const Barrier& barrier, const std::vector<Vec>& points, double h);

}  // namespace dmalab
