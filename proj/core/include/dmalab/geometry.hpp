#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dmalab/sampling.hpp"

namespace dmalab {

/// {x : normal . x <= offset}; `normal` is stored with unit length.
struct HalfSpace {
    Vec normal;
    double offset = 0.0;
};

/// Closed ball constraint |x - center| <= radius.
struct BallConstraint {
    Vec center;
    double radius = 1.0;
};

/// Cusp constraint x_n >= eta |x'|^a with apex at the origin and axis e_n.
struct CuspConstraint {
    double eta = 1.0;
    double a = 2.0;
};

using Constraint = std::variant<HalfSpace, BallConstraint, CuspConstraint>;

enum class ShapeKind { Ball, Box, Polygon, Intersection, Cusp };

std::string to_string(ShapeKind kind);

struct NearestPoint {
    Vec point;
    double distance = 0.0;
};

/// A bounded convex region given as an intersection of exactly computable
/// primitives. All queries are pure and the object is immutable once built.
class ConvexDomain {
public:
    static ConvexDomain ball(Vec center, double radius);
    static ConvexDomain box(Vec lower, Vec upper);
    /// Convex polygon; vertices in either orientation, no repeated points.
    static ConvexDomain polygon(const std::vector<Eigen::Vector2d>& vertices);
    static ConvexDomain intersection(int dim, std::vector<HalfSpace> halfspaces,
                                     std::vector<BallConstraint> balls);
    /// {x_n >= eta |x'|^a} intersected with the box [lower, upper].
    static ConvexDomain cusp(int dim, double eta, double a, Vec lower, Vec upper);

    int dimension() const noexcept { return dim_; }
    ShapeKind kind() const noexcept { return kind_; }
    double diameter() const noexcept { return diam_; }
    const Vec& bounds_lower() const noexcept { return lower_; }
    const Vec& bounds_upper() const noexcept { return upper_; }
    const std::vector<Constraint>& constraints() const noexcept { return constraints_; }
    const std::vector<Eigen::Vector2d>& polygon_vertices() const noexcept { return vertices_; }
    /// Point well inside the domain used as the origin for ray casting.
    const Vec& reference_point() const noexcept { return reference_; }

    /// Geometric tolerance: 1e-9 * diam.
    double tolerance() const noexcept { return 1e-9 * diam_; }

    bool contains(const Vec& x) const;
    bool contains(const Vec& x, double tol) const;

    /// dist(x, boundary); throws DomainMembershipError outside the closed domain.
    double distance_to_boundary(const Vec& x) const;
    /// Same as distance_to_boundary without the membership check (negative outside).
    double signed_distance(const Vec& x) const;

    /// Closest boundary point, ties broken lexicographically.
    NearestPoint nearest_boundary_point(const Vec& y) const;

    /// Largest t >= 0 with x + t*dir in the closed domain (dir of unit length).
    double ray_exit(const Vec& x, const Vec& dir) const;

    /// Inward unit normals of the constraints active at boundary point z.
    std::vector<Vec> active_inward_normals(const Vec& z) const;
    /// Normalised sum of the active inward normals (bisector at corners).
    Vec inward_normal(const Vec& z) const;
    bool on_boundary(const Vec& z) const;

    /// Boundary points obtained by casting `count` rays from the reference
    /// point, followed by the exactly computed corner points.
    std::vector<Vec> boundary_samples(std::size_t count) const;
    /// Corner points: polygon vertices, box vertices, or (in 2D) pairwise
    /// intersections of constraint boundaries.
    const std::vector<Vec>& feature_points() const noexcept { return features_; }
    /// Halton points of the bounding box strictly inside the domain.
    std::vector<Vec> interior_samples(std::size_t count, std::uint64_t offset = 0) const;

private:
    ConvexDomain() = default;
    void finalize();
    void compute_features();
    double constraint_gap(const Constraint& c, const Vec& x) const;
    Vec constraint_foot(const Constraint& c, const Vec& x) const;
    double constraint_exit(const Constraint& c, const Vec& x, const Vec& dir) const;
    Vec constraint_inward_normal(const Constraint& c, const Vec& z) const;

    int dim_ = 2;
    ShapeKind kind_ = ShapeKind::Intersection;
    std::vector<Constraint> constraints_;
    std::vector<Eigen::Vector2d> vertices_;
    std::vector<Vec> features_;
    Vec lower_;
    Vec upper_;
    Vec reference_;
    double diam_ = 0.0;
};

/// Rigid motion x -> R (x - z) taking a boundary point z to the origin and a
/// chosen inward direction to the positive x_n axis.
struct LocalFrame {
    Vec origin;
    Mat rotation;
    Vec source_boundary;
    Vec source_interior;

    static LocalFrame identity(int dim);
    /// Frame with origin z whose n-th axis points along `direction`.
    static LocalFrame from_direction(const Vec& z, const Vec& direction);

    int dimension() const { return static_cast<int>(origin.size()); }
    Vec to_local(const Vec& x) const { return rotation * (x - origin); }
    Vec to_world(const Vec& p) const { return origin + rotation.transpose() * p; }
    /// Axis direction e_n expressed in world coordinates.
    Vec axis() const { return rotation.row(rotation.rows() - 1).transpose(); }
};

/// Frame at boundary point z whose positive x_n axis passes through y,
/// where |y - z| = dist(y, boundary).
LocalFrame local_frame_at(const ConvexDomain& domain, const Vec& z, const Vec& y);

enum class CertificateStatus { Certified, Refuted, Indeterminate };

std::string to_string(CertificateStatus status);

/// Sampled (a, eta) certificate at one boundary point or at all of them.
struct AEtaCertificate {
    double a = 2.0;
    double eta = 0.0;
    std::optional<Vec> point;  ///< empty means "all sampled boundary points"
    CertificateStatus status = CertificateStatus::Indeterminate;
    std::string reason;
    std::size_t samples = 0;
    /// Boundary point at which the smallest eta was observed.
    Vec worst_point;
};

struct AEtaOptions {
    std::size_t n_samples = 4096;
    /// Overrides the inward-normal bisector as frame axis.
    std::optional<Vec> direction;
};

AEtaCertificate certify_a_eta(const ConvexDomain& domain, const Vec& z, double a,
                              const AEtaOptions& options = {});

/// Certificate for every sampled boundary point simultaneously.
AEtaCertificate certify_a_eta_domain(const ConvexDomain& domain, double a,
                                     std::size_t n_points = 128,
                                     const AEtaOptions& options = {});

struct SphereWitness {
    Vec boundary_point;
    Vec center;
};

struct SphereCertificate {
    std::optional<double> exterior_radius;
    std::optional<double> interior_radius;
    std::vector<SphereWitness> exterior_witnesses;
    std::vector<SphereWitness> interior_witnesses;
    /// Boundary point responsible for a missing or limiting radius.
    std::optional<Vec> exterior_obstruction;
    std::optional<Vec> interior_obstruction;
};

struct SphereOptions {
    std::size_t n_points = 256;
    std::size_t n_containment = 2048;
};

SphereCertificate sphere_conditions(const ConvexDomain& domain, const SphereOptions& options = {});

}  // namespace dmalab
