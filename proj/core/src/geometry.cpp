#include "dmalab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/tools/minima.hpp>

#include "dmalab/errors.hpp"

namespace dmalab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool lex_less(const Vec& a, const Vec& b) {
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        if (a[k] < b[k]) return true;
        if (a[k] > b[k]) return false;
    }
    return false;
}

// |x'| and x_n for the cusp constraint (axis e_n, apex at the origin).
double transverse_norm(const Vec& x) { return x.head(x.size() - 1).norm(); }

struct CuspFoot {
    double s = 0.0;
    double distance = 0.0;
};

// Closest point of the profile curve {(s, eta s^a) : s >= 0} to (rho, z).
CuspFoot cusp_profile_foot(double rho, double z, double eta, double a) {
    auto curve = [&](double s) { return eta * std::pow(s, a); };
    auto f = [&](double s) {
        const double dr = s - rho;
        const double dz = curve(s) - z;
        return dr * dr + dz * dz;
    };
    const double d_vertical = std::abs(curve(rho) - z);
    const double d_apex = std::hypot(rho, z);
    const double d0 = std::min(d_vertical, d_apex);
    const double lo = std::max(0.0, rho - d0);
    double hi = rho + d0;
    if (z + d0 > 0.0) hi = std::min(hi, std::pow((z + d0) / eta, 1.0 / a));
    hi = std::max(hi, lo);

    CuspFoot best{0.0, d_apex};
    if (f(rho) < best.distance * best.distance) best = {rho, d_vertical};

    constexpr int kScan = 64;
    std::vector<double> values(kScan + 1);
    const double step = (hi - lo) / kScan;
    for (int i = 0; i <= kScan; ++i) values[static_cast<std::size_t>(i)] = f(lo + step * i);

    auto refine = [&](double s) {
        // Newton on f'(s) = 0 polishes the bracketed minimiser to full precision.
        for (int it = 0; it < 30 && s > 0.0; ++it) {
            const double c = curve(s);
            const double c1 = eta * a * std::pow(s, a - 1.0);
            const double c2 = a > 1.0 ? eta * a * (a - 1.0) * std::pow(s, a - 2.0) : 0.0;
            const double g = 2.0 * (s - rho) + 2.0 * (c - z) * c1;
            const double hss = 2.0 + 2.0 * c1 * c1 + 2.0 * (c - z) * c2;
            if (!(hss > 0.0)) break;
            const double next = std::max(0.0, s - g / hss);
            if (std::abs(next - s) <= 1e-16 * std::max(1.0, s)) {
                s = next;
                break;
            }
            s = next;
        }
        return s;
    };

    for (int i = 0; i <= kScan; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const bool left_ok = i == 0 || values[ui] <= values[ui - 1];
        const bool right_ok = i == kScan || values[ui] <= values[ui + 1];
        if (!(left_ok && right_ok)) continue;
        const double a_lo = std::max(lo, lo + step * (i - 1));
        const double a_hi = std::min(hi, lo + step * (i + 1));
        auto [s_min, f_min] = boost::math::tools::brent_find_minima(f, a_lo, a_hi, 52);
        (void)f_min;
        s_min = refine(s_min);
        const double dist = std::hypot(s_min - rho, curve(s_min) - z);
        if (dist < best.distance) best = {s_min, dist};
    }
    return best;
}

}  // namespace

std::string to_string(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::Ball: return "ball";
        case ShapeKind::Box: return "box";
        case ShapeKind::Polygon: return "polygon";
        case ShapeKind::Intersection: return "intersection";
        case ShapeKind::Cusp: return "cusp";
    }
    return "unknown";
}

std::string to_string(CertificateStatus status) {
    switch (status) {
        case CertificateStatus::Certified: return "certified";
        case CertificateStatus::Refuted: return "refuted";
        case CertificateStatus::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Construction

ConvexDomain ConvexDomain::ball(Vec center, double radius) {
    if (center.size() < 2) throw ParameterError("ball: dimension must be at least 2");
    if (!(radius > 0.0)) throw ParameterError("ball: radius must be positive");
    ConvexDomain d;
    d.dim_ = static_cast<int>(center.size());
    d.kind_ = ShapeKind::Ball;
    d.lower_ = center.array() - radius;
    d.upper_ = center.array() + radius;
    d.reference_ = center;
    d.constraints_.emplace_back(BallConstraint{std::move(center), radius});
    d.diam_ = 2.0 * radius;
    d.finalize();
    return d;
}

ConvexDomain ConvexDomain::box(Vec lower, Vec upper) {
    if (lower.size() < 2 || lower.size() != upper.size()) {
        throw ParameterError("box: corners must have the same dimension >= 2");
    }
    if (((upper - lower).array() <= 0.0).any()) throw ParameterError("box: empty box");
    ConvexDomain d;
    d.dim_ = static_cast<int>(lower.size());
    d.kind_ = ShapeKind::Box;
    for (int k = 0; k < d.dim_; ++k) {
        Vec e = Vec::Zero(d.dim_);
        e[k] = 1.0;
        d.constraints_.emplace_back(HalfSpace{-e, -lower[k]});
        d.constraints_.emplace_back(HalfSpace{e, upper[k]});
    }
    d.lower_ = lower;
    d.upper_ = upper;
    d.reference_ = 0.5 * (lower + upper);
    d.diam_ = (upper - lower).norm();
    d.finalize();
    return d;
}

ConvexDomain ConvexDomain::polygon(const std::vector<Eigen::Vector2d>& vertices) {
    const std::size_t m = vertices.size();
    if (m < 3) throw ParameterError("polygon: need at least three vertices");
    double area2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& p = vertices[i];
        const auto& q = vertices[(i + 1) % m];
        area2 += p.x() * q.y() - q.x() * p.y();
    }
    if (std::abs(area2) < 1e-14) throw ParameterError("polygon: degenerate (zero area)");
    const double orientation = area2 > 0.0 ? 1.0 : -1.0;

    ConvexDomain d;
    d.dim_ = 2;
    d.kind_ = ShapeKind::Polygon;
    d.vertices_ = vertices;
    for (std::size_t i = 0; i < m; ++i) {
        const Eigen::Vector2d p = vertices[i];
        const Eigen::Vector2d q = vertices[(i + 1) % m];
        const Eigen::Vector2d r = vertices[(i + 2) % m];
        const Eigen::Vector2d e = q - p;
        const double turn = e.x() * (r - q).y() - e.y() * (r - q).x();
        if (turn * orientation < -1e-12 * e.squaredNorm()) {
            throw ParameterError("polygon: vertices are not in convex position");
        }
        // Outward normal of a counter-clockwise edge is (e_y, -e_x).
        Eigen::Vector2d n(e.y() * orientation, -e.x() * orientation);
        n.normalize();
        Vec normal(2);
        normal << n.x(), n.y();
        d.constraints_.emplace_back(HalfSpace{normal, n.dot(p)});
    }
    d.lower_ = Vec::Constant(2, kInf);
    d.upper_ = Vec::Constant(2, -kInf);
    Vec centroid = Vec::Zero(2);
    for (const auto& v : vertices) {
        d.lower_[0] = std::min(d.lower_[0], v.x());
        d.lower_[1] = std::min(d.lower_[1], v.y());
        d.upper_[0] = std::max(d.upper_[0], v.x());
        d.upper_[1] = std::max(d.upper_[1], v.y());
        centroid[0] += v.x();
        centroid[1] += v.y();
    }
    d.reference_ = centroid / static_cast<double>(m);
    double diam = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) diam = std::max(diam, (vertices[i] - vertices[j]).norm());
    }
    d.diam_ = diam;
    d.finalize();
    return d;
}

ConvexDomain ConvexDomain::intersection(int dim, std::vector<HalfSpace> halfspaces,
                                        std::vector<BallConstraint> balls) {
    if (dim < 2) throw ParameterError("intersection: dimension must be at least 2");
    ConvexDomain d;
    d.dim_ = dim;
    d.kind_ = ShapeKind::Intersection;
    d.lower_ = Vec::Constant(dim, -kInf);
    d.upper_ = Vec::Constant(dim, kInf);
    for (auto& hs : halfspaces) {
        if (hs.normal.size() != dim) throw ParameterError("intersection: half-space dimension mismatch");
        const double norm = hs.normal.norm();
        if (!(norm > 0.0)) throw ParameterError("intersection: zero half-space normal");
        hs.normal /= norm;
        hs.offset /= norm;
        for (int k = 0; k < dim; ++k) {
            Vec rest = hs.normal;
            rest[k] = 0.0;
            if (rest.norm() > 1e-14) continue;
            if (hs.normal[k] > 0.0) d.upper_[k] = std::min(d.upper_[k], hs.offset / hs.normal[k]);
            if (hs.normal[k] < 0.0) d.lower_[k] = std::max(d.lower_[k], hs.offset / hs.normal[k]);
        }
        d.constraints_.emplace_back(hs);
    }
    for (auto& b : balls) {
        if (b.center.size() != dim) throw ParameterError("intersection: ball dimension mismatch");
        if (!(b.radius > 0.0)) throw ParameterError("intersection: ball radius must be positive");
        d.lower_ = d.lower_.cwiseMax((b.center.array() - b.radius).matrix());
        d.upper_ = d.upper_.cwiseMin((b.center.array() + b.radius).matrix());
        d.constraints_.emplace_back(b);
    }
    if (!d.lower_.allFinite() || !d.upper_.allFinite()) {
        throw ParameterError("intersection: region is not bounded by its balls or axis-aligned half-spaces");
    }
    if (((d.upper_ - d.lower_).array() <= 0.0).any()) throw ParameterError("intersection: empty region");
    d.diam_ = (d.upper_ - d.lower_).norm();
    d.reference_ = 0.5 * (d.lower_ + d.upper_);
    // Average of interior Halton points: inside by convexity.
    Vec sum = Vec::Zero(dim);
    std::size_t hits = 0;
    for (std::uint64_t i = 0; i < 20000 && hits < 4096; ++i) {
        Vec p = d.lower_ + halton_point(i, dim).cwiseProduct(d.upper_ - d.lower_);
        bool inside = true;
        for (const auto& c : d.constraints_) {
            if (d.constraint_gap(c, p) <= 0.0) {
                inside = false;
                break;
            }
        }
        if (inside) {
            sum += p;
            ++hits;
        }
    }
    if (hits == 0) throw ParameterError("intersection: region has empty interior");
    d.reference_ = sum / static_cast<double>(hits);
    d.finalize();
    return d;
}

ConvexDomain ConvexDomain::cusp(int dim, double eta, double a, Vec lower, Vec upper) {
    if (dim < 2 || lower.size() != dim || upper.size() != dim) {
        throw ParameterError("cusp: box corners must match the dimension (>= 2)");
    }
    if (!(eta > 0.0)) throw ParameterError("cusp: eta must be positive");
    if (!(a >= 1.0)) throw ParameterError("cusp: exponent a must be >= 1");
    if (((upper - lower).array() <= 0.0).any()) throw ParameterError("cusp: empty box");
    ConvexDomain d = box(lower, upper);
    d.kind_ = ShapeKind::Cusp;
    d.constraints_.emplace_back(CuspConstraint{eta, a});
    Vec axis_point = Vec::Zero(dim);
    const double bottom = std::max(0.0, lower[dim - 1]);
    axis_point[dim - 1] = 0.5 * (bottom + upper[dim - 1]);
    if (!d.contains(axis_point, 0.0) || d.signed_distance(axis_point) <= 0.0) {
        throw ParameterError("cusp: the box must contain a segment of the positive x_n axis");
    }
    // Move the reference point towards the bulk of the region.
    Vec sum = Vec::Zero(dim);
    std::size_t hits = 0;
    for (std::uint64_t i = 0; i < 20000 && hits < 2048; ++i) {
        Vec p = lower + halton_point(i, dim).cwiseProduct(upper - lower);
        if (d.contains(p, 0.0)) {
            sum += p;
            ++hits;
        }
    }
    d.reference_ = hits > 0 ? Vec(sum / static_cast<double>(hits)) : axis_point;
    d.finalize();
    return d;
}

void ConvexDomain::finalize() {
    compute_features();
    if (kind_ == ShapeKind::Intersection || kind_ == ShapeKind::Cusp) {
        auto samples = boundary_samples(dim_ == 2 ? 2048 : 4096);
        double diam = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            for (std::size_t j = i + 1; j < samples.size(); ++j) {
                diam = std::max(diam, (samples[i] - samples[j]).squaredNorm());
            }
        }
        diam_ = std::sqrt(diam);
    }
}

void ConvexDomain::compute_features() {
    features_.clear();
    if (kind_ == ShapeKind::Polygon) {
        for (const auto& v : vertices_) {
            Vec p(2);
            p << v.x(), v.y();
            features_.push_back(p);
        }
        return;
    }
    if (kind_ == ShapeKind::Box) {
        const std::uint64_t count = std::uint64_t{1} << dim_;
        for (std::uint64_t mask = 0; mask < count; ++mask) {
            Vec p(dim_);
            for (int k = 0; k < dim_; ++k) p[k] = (mask >> k) & 1U ? upper_[k] : lower_[k];
            features_.push_back(p);
        }
        return;
    }
    if (dim_ != 2 || kind_ == ShapeKind::Ball) return;

    // Pairwise boundary intersections in 2D, found by scanning one boundary
    // curve against the level function of the other and bisecting sign changes.
    const double span = (upper_ - lower_).norm();
    auto level = [](const Constraint& c, const Vec& x) {
        return std::visit(Overloaded{
                              [&](const HalfSpace& h) { return h.offset - h.normal.dot(x); },
                              [&](const BallConstraint& b) { return b.radius - (x - b.center).norm(); },
                              [&](const CuspConstraint& q) { return x[1] - q.eta * std::pow(std::abs(x[0]), q.a); },
                          },
                          c);
    };
    auto curve = [&](const Constraint& c, double t) {
        Vec p(2);
        std::visit(Overloaded{
                       [&](const HalfSpace& h) {
                           const Vec base = h.normal * h.offset;
                           p << base[0] - h.normal[1] * t, base[1] + h.normal[0] * t;
                       },
                       [&](const BallConstraint& b) {
                           p << b.center[0] + b.radius * std::cos(t), b.center[1] + b.radius * std::sin(t);
                       },
                       [&](const CuspConstraint& q) { p << t, q.eta * std::pow(std::abs(t), q.a); },
                   },
                   c);
        return p;
    };
    auto range = [&](const Constraint& c) -> std::pair<double, double> {
        return std::visit(Overloaded{
                              [&](const HalfSpace& h) {
                                  const double reach = (h.normal * h.offset - reference_).norm() + 2.0 * span;
                                  return std::pair{-reach, reach};
                              },
                              [&](const BallConstraint&) { return std::pair{0.0, 2.0 * std::numbers::pi}; },
                              [&](const CuspConstraint&) {
                                  const double reach = std::max(std::abs(lower_[0]), std::abs(upper_[0])) + span;
                                  return std::pair{-reach, reach};
                              },
                          },
                          c);
    };
    const double tol = 1e-9 * span;
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
        for (std::size_t j = 0; j < constraints_.size(); ++j) {
            if (i == j) continue;
            const auto [t0, t1] = range(constraints_[i]);
            constexpr int kScan = 8192;
            const double dt = (t1 - t0) / kScan;
            double prev = level(constraints_[j], curve(constraints_[i], t0));
            for (int s = 1; s <= kScan; ++s) {
                const double t = t0 + dt * s;
                const double cur = level(constraints_[j], curve(constraints_[i], t));
                if ((prev < 0.0) != (cur < 0.0)) {
                    double lo = t - dt;
                    double hi = t;
                    const bool lo_neg = prev < 0.0;
                    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        if (mid <= lo || mid >= hi) break;
                        const bool mid_neg = level(constraints_[j], curve(constraints_[i], mid)) < 0.0;
                        (mid_neg == lo_neg ? lo : hi) = mid;
                    }
                    Vec p = curve(constraints_[i], 0.5 * (lo + hi));
                    if (contains(p, tol)) {
                        const bool duplicate = std::any_of(features_.begin(), features_.end(), [&](const Vec& q) {
                            return (q - p).norm() < 1e3 * tol;
                        });
                        if (!duplicate) features_.push_back(p);
                    }
                }
                prev = cur;
            }
        }
    }
    std::sort(features_.begin(), features_.end(), lex_less);
}

// ---------------------------------------------------------------------------
// Per-constraint primitives

double ConvexDomain::constraint_gap(const Constraint& c, const Vec& x) const {
    return std::visit(Overloaded{
                          [&](const HalfSpace& h) { return h.offset - h.normal.dot(x); },
                          [&](const BallConstraint& b) { return b.radius - (x - b.center).norm(); },
                          [&](const CuspConstraint& q) {
                              const double rho = transverse_norm(x);
                              const double z = x[x.size() - 1];
                              const CuspFoot foot = cusp_profile_foot(rho, z, q.eta, q.a);
                              const bool inside = z >= q.eta * std::pow(rho, q.a);
                              return inside ? foot.distance : -foot.distance;
                          },
                      },
                      c);
}

Vec ConvexDomain::constraint_foot(const Constraint& c, const Vec& x) const {
    return std::visit(Overloaded{
                          [&](const HalfSpace& h) -> Vec { return x + (h.offset - h.normal.dot(x)) * h.normal; },
                          [&](const BallConstraint& b) -> Vec {
                              Vec r = x - b.center;
                              const double norm = r.norm();
                              if (norm < 1e-300) {
                                  Vec p = b.center;
                                  p[0] -= b.radius;
                                  return p;
                              }
                              return b.center + (b.radius / norm) * r;
                          },
                          [&](const CuspConstraint& q) -> Vec {
                              const int n = static_cast<int>(x.size());
                              const double rho = transverse_norm(x);
                              const double z = x[n - 1];
                              const CuspFoot foot = cusp_profile_foot(rho, z, q.eta, q.a);
                              Vec p = Vec::Zero(n);
                              if (rho > 0.0) {
                                  p.head(n - 1) = (foot.s / rho) * x.head(n - 1);
                              } else {
                                  p[0] = -foot.s;
                              }
                              p[n - 1] = q.eta * std::pow(foot.s, q.a);
                              return p;
                          },
                      },
                      c);
}

double ConvexDomain::constraint_exit(const Constraint& c, const Vec& x, const Vec& dir) const {
    return std::visit(
        Overloaded{
            [&](const HalfSpace& h) {
                const double nd = h.normal.dot(dir);
                if (nd <= 1e-15) return kInf;
                return std::max(0.0, h.offset - h.normal.dot(x)) / nd;
            },
            [&](const BallConstraint& b) {
                const Vec r = x - b.center;
                const double half_b = r.dot(dir);
                const double cterm = r.squaredNorm() - b.radius * b.radius;
                const double disc = std::max(0.0, half_b * half_b - cterm);
                const double root = std::sqrt(disc);
                // Larger root of t^2 + 2 half_b t + cterm = 0, computed stably.
                if (half_b <= 0.0) return std::max(0.0, -half_b + root);
                return cterm < 0.0 ? std::max(0.0, -cterm / (half_b + root)) : 0.0;
            },
            [&](const CuspConstraint& q) {
                const int n = static_cast<int>(x.size());
                auto g = [&](double t) {
                    const Vec p = x + t * dir;
                    return p[n - 1] - q.eta * std::pow(p.head(n - 1).norm(), q.a);
                };
                const double reach = 4.0 * (upper_ - lower_).norm() + (x - reference_).norm();
                if (g(reach) >= 0.0) return kInf;
                // g is concave along the ray: locate its peak, then the crossing after it.
                double lo = 0.0;
                double hi = reach;
                for (int it = 0; it < 200; ++it) {
                    const double m1 = lo + (hi - lo) / 3.0;
                    const double m2 = hi - (hi - lo) / 3.0;
                    if (g(m1) < g(m2)) lo = m1; else hi = m2;
                    if (hi - lo <= 1e-15 * reach) break;
                }
                double a0 = 0.5 * (lo + hi);
                if (g(a0) < 0.0) return 0.0;
                double b0 = reach;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (a0 + b0);
                    if (mid <= a0 || mid >= b0) break;
                    (g(mid) >= 0.0 ? a0 : b0) = mid;
                }
                return a0;
            },
        },
        c);
}

Vec ConvexDomain::constraint_inward_normal(const Constraint& c, const Vec& z) const {
    return std::visit(Overloaded{
                          [&](const HalfSpace& h) -> Vec { return -h.normal; },
                          [&](const BallConstraint& b) -> Vec { return (b.center - z).normalized(); },
                          [&](const CuspConstraint& q) -> Vec {
                              const int n = static_cast<int>(z.size());
                              const double rho = transverse_norm(z);
                              Vec g = Vec::Zero(n);
                              g[n - 1] = 1.0;
                              if (rho > 0.0) {
                                  g.head(n - 1) = -q.eta * q.a * std::pow(rho, q.a - 2.0) * z.head(n - 1);
                              }
                              return g.normalized();
                          },
                      },
                      c);
}

// ---------------------------------------------------------------------------
// Queries

bool ConvexDomain::contains(const Vec& x) const { return contains(x, tolerance()); }

bool ConvexDomain::contains(const Vec& x, double tol) const {
    if (x.size() != dim_) return false;
    for (const auto& c : constraints_) {
        const double level = std::visit(
            Overloaded{
                [&](const HalfSpace& h) { return h.offset - h.normal.dot(x); },
                [&](const BallConstraint& b) { return b.radius - (x - b.center).norm(); },
                [&](const CuspConstraint& q) { return x[dim_ - 1] - q.eta * std::pow(transverse_norm(x), q.a); },
            },
            c);
        if (level < -tol) return false;
    }
    return true;
}

double ConvexDomain::signed_distance(const Vec& x) const {
    double d = kInf;
    for (const auto& c : constraints_) d = std::min(d, constraint_gap(c, x));
    return d;
}

double ConvexDomain::distance_to_boundary(const Vec& x) const {
    if (x.size() != dim_) throw ParameterError("distance_to_boundary: dimension mismatch");
    if (!contains(x)) throw DomainMembershipError("distance_to_boundary: point lies outside the domain");
    return std::max(0.0, signed_distance(x));
}

bool ConvexDomain::on_boundary(const Vec& z) const {
    return contains(z) && std::abs(signed_distance(z)) <= 10.0 * tolerance();
}

NearestPoint ConvexDomain::nearest_boundary_point(const Vec& y) const {
    const double d = distance_to_boundary(y);
    if (d <= 1e-12 * std::max(1.0, diam_)) return {y, 0.0};
    const double tie = 1e-12 * std::max(1.0, diam_);
    std::optional<Vec> best;
    for (const auto& c : constraints_) {
        if (constraint_gap(c, y) > d + tie) continue;
        Vec foot = constraint_foot(c, y);
        if (!contains(foot)) continue;
        if (!best || lex_less(foot, *best)) best = std::move(foot);
    }
    if (!best) throw Error("nearest_boundary_point: no admissible foot point found");
    return {*best, d};
}

double ConvexDomain::ray_exit(const Vec& x, const Vec& dir) const {
    double t = kInf;
    for (const auto& c : constraints_) t = std::min(t, constraint_exit(c, x, dir));
    return t;
}

std::vector<Vec> ConvexDomain::active_inward_normals(const Vec& z) const {
    std::vector<Vec> normals;
    const double tol = 10.0 * tolerance();
    for (const auto& c : constraints_) {
        if (std::abs(constraint_gap(c, z)) > tol) continue;
        Vec nu = constraint_inward_normal(c, z);
        const bool duplicate = std::any_of(normals.begin(), normals.end(),
                                           [&](const Vec& m) { return (m - nu).norm() < 1e-12; });
        if (!duplicate) normals.push_back(std::move(nu));
    }
    return normals;
}

Vec ConvexDomain::inward_normal(const Vec& z) const {
    const auto normals = active_inward_normals(z);
    if (normals.empty()) throw DomainMembershipError("inward_normal: point is not on the boundary");
    Vec sum = Vec::Zero(dim_);
    for (const auto& n : normals) sum += n;
    if (sum.norm() < 1e-14) throw Error("inward_normal: active normals cancel");
    return sum.normalized();
}

std::vector<Vec> ConvexDomain::boundary_samples(std::size_t count) const {
    std::vector<Vec> out;
    out.reserve(count + features_.size());
    for (std::size_t k = 0; k < count; ++k) {
        const Vec dir = unit_direction(k, count, dim_);
        const double t = ray_exit(reference_, dir);
        out.push_back(reference_ + t * dir);
    }
    out.insert(out.end(), features_.begin(), features_.end());
    return out;
}

std::vector<Vec> ConvexDomain::interior_samples(std::size_t count, std::uint64_t offset) const {
    std::vector<Vec> out;
    out.reserve(count);
    const double min_gap = 1e-12 * std::max(1.0, diam_);
    const std::uint64_t limit = offset + 200 * static_cast<std::uint64_t>(count) + 1000;
    for (std::uint64_t i = offset; i < limit && out.size() < count; ++i) {
        Vec p = lower_ + halton_point(i, dim_).cwiseProduct(upper_ - lower_);
        if (!contains(p, 0.0)) continue;
        if (signed_distance(p) <= min_gap) continue;
        out.push_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Frames

LocalFrame LocalFrame::identity(int dim) {
    LocalFrame f;
    f.origin = Vec::Zero(dim);
    f.rotation = Mat::Identity(dim, dim);
    f.source_boundary = f.origin;
    f.source_interior = Vec::Zero(dim);
    f.source_interior[dim - 1] = 1.0;
    return f;
}

LocalFrame LocalFrame::from_direction(const Vec& z, const Vec& direction) {
    const int n = static_cast<int>(z.size());
    if (n < 2 || direction.size() != n) throw ParameterError("LocalFrame: dimension mismatch");
    const double norm = direction.norm();
    if (!(norm > 0.0)) throw DegenerateFrameError("LocalFrame: zero axis direction");
    const Vec v = direction / norm;
    Vec en = Vec::Zero(n);
    en[n - 1] = 1.0;
    Mat q = Mat::Identity(n, n);
    const Vec w = v - en;
    if (w.norm() > 1e-15) {
        // Householder reflection v -> e_n, then flip the first row so det = +1.
        q -= 2.0 * (w * w.transpose()) / w.squaredNorm();
        q.row(0) *= -1.0;
    }
    LocalFrame f;
    f.origin = z;
    f.rotation = q;
    f.source_boundary = z;
    f.source_interior = z + v;
    return f;
}

LocalFrame local_frame_at(const ConvexDomain& domain, const Vec& z, const Vec& y) {
    if (z.size() != domain.dimension() || y.size() != domain.dimension()) {
        throw ParameterError("local_frame_at: dimension mismatch");
    }
    const double sep = (y - z).norm();
    if (sep <= 1e-15 * std::max(1.0, domain.diameter())) {
        throw DegenerateFrameError("local_frame_at: boundary point and interior point coincide");
    }
    if (!domain.on_boundary(z)) throw DomainMembershipError("local_frame_at: z is not a boundary point");
    const double dy = domain.distance_to_boundary(y);
    if (!(dy > 0.0)) throw DomainMembershipError("local_frame_at: y is not an interior point");
    if (std::abs(sep - dy) > 1e-9 * std::max(1.0, domain.diameter())) {
        throw ParameterError("local_frame_at: |y - z| differs from dist(y, boundary)");
    }
    LocalFrame f = LocalFrame::from_direction(z, y - z);
    f.source_interior = y;
    return f;
}

// ---------------------------------------------------------------------------
// (a, eta) certification

namespace {

struct FrameSample {
    double transverse = 0.0;
    double height = 0.0;
};

FrameSample frame_coordinates(const LocalFrame& frame, const Vec& x) {
    const Vec p = frame.to_local(x);
    const auto n = p.size();
    return {p.head(n - 1).norm(), p[n - 1]};
}

// Boundary points approaching z from a tangential direction, one per scale.
std::vector<Vec> approach_sequence(const ConvexDomain& domain, const Vec& z, const Vec& tangent,
                                   int first_scale, int last_scale) {
    std::vector<Vec> out;
    const Vec& c0 = domain.reference_point();
    for (int k = first_scale; k <= last_scale; ++k) {
        const double s = domain.diameter() * std::ldexp(1.0, -k);
        const Vec p = z + s * tangent;
        Vec dir = p - c0;
        const double norm = dir.norm();
        if (!(norm > 0.0)) continue;
        dir /= norm;
        out.push_back(c0 + domain.ray_exit(c0, dir) * dir);
    }
    return out;
}

std::vector<Vec> tangent_probes(const LocalFrame& frame) {
    const int n = frame.dimension();
    std::vector<Vec> probes;
    for (int j = 0; j + 1 < n; ++j) {
        const Vec t = frame.rotation.row(j).transpose();
        probes.push_back(t);
        probes.push_back(-t);
    }
    for (int i = 0; i + 1 < n; ++i) {
        for (int j = i + 1; j + 1 < n; ++j) {
            const Vec ti = frame.rotation.row(i).transpose();
            const Vec tj = frame.rotation.row(j).transpose();
            for (double si : {-1.0, 1.0}) {
                for (double sj : {-1.0, 1.0}) probes.push_back((si * ti + sj * tj).normalized());
            }
        }
    }
    return probes;
}

}  // namespace

AEtaCertificate certify_a_eta(const ConvexDomain& domain, const Vec& z, double a, const AEtaOptions& options) {
    if (!(a >= 1.0)) throw ParameterError("certify_a_eta: exponent a must be >= 1");
    if (!domain.on_boundary(z)) throw DomainMembershipError("certify_a_eta: z is not a boundary point");

    const Vec axis = options.direction ? Vec(options.direction->normalized()) : domain.inward_normal(z);
    const LocalFrame frame = LocalFrame::from_direction(z, axis);
    const double diam = domain.diameter();
    const double flat_height = 1e-12 * diam;
    const double flat_reach = 0.05 * diam;
    const double min_transverse = 1e-9 * diam;
    const double resolved_height = 1e-12 * diam;

    AEtaCertificate cert;
    cert.a = a;
    cert.point = z;
    cert.worst_point = z;

    double eta = kInf;
    auto consider = [&](const Vec& x) -> bool {
        const FrameSample s = frame_coordinates(frame, x);
        ++cert.samples;
        if (s.height <= flat_height && s.transverse > flat_reach) {
            cert.status = CertificateStatus::Refuted;
            cert.reason = "flat boundary portion through the point";
            cert.eta = 0.0;
            cert.worst_point = x;
            return false;
        }
        if (s.transverse <= min_transverse) return true;
        const double ratio = s.height / std::pow(s.transverse, a);
        if (ratio < eta) {
            eta = ratio;
            cert.worst_point = x;
        }
        return true;
    };

    for (const auto& x : domain.boundary_samples(options.n_samples)) {
        if (!consider(x)) return cert;
    }
    for (const auto& x : domain.interior_samples(256)) {
        if (!consider(x)) return cert;
    }

    // Local approach to z: the ratio must not degenerate as |x'| -> 0.
    constexpr int kFirstScale = 1;
    constexpr int kLastScale = 18;
    constexpr std::size_t kTail = 8;
    for (const auto& tangent : tangent_probes(frame)) {
        const auto seq = approach_sequence(domain, z, tangent, kFirstScale, kLastScale);
        std::vector<double> log_t;
        std::vector<double> log_r;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            if (!consider(seq[i])) return cert;
            const FrameSample s = frame_coordinates(frame, seq[i]);
            // Below this height the ray exit is resolved only to rounding.
            if (s.transverse <= min_transverse || s.height <= resolved_height) continue;
            log_t.push_back(std::log(s.transverse));
            log_r.push_back(std::log(s.height / std::pow(s.transverse, a)));
        }
        if (log_t.size() > kTail) {
            log_t.erase(log_t.begin(), log_t.end() - kTail);
            log_r.erase(log_r.begin(), log_r.end() - kTail);
        }
        if (log_t.size() >= 3) {
            const double mt = std::accumulate(log_t.begin(), log_t.end(), 0.0) / log_t.size();
            const double mr = std::accumulate(log_r.begin(), log_r.end(), 0.0) / log_r.size();
            double sxy = 0.0;
            double sxx = 0.0;
            for (std::size_t i = 0; i < log_t.size(); ++i) {
                sxy += (log_t[i] - mt) * (log_r[i] - mr);
                sxx += (log_t[i] - mt) * (log_t[i] - mt);
            }
            const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
            if (slope > 0.1) {
                cert.status = CertificateStatus::Refuted;
                cert.reason = "x_n / |x'|^a tends to zero approaching the point";
                cert.eta = 0.0;
                cert.worst_point = seq.back();
                return cert;
            }
        }
    }

    if (!std::isfinite(eta)) {
        cert.status = CertificateStatus::Indeterminate;
        cert.reason = "no sample with nonzero transverse offset";
        return cert;
    }
    if (!(eta > 0.0)) {
        cert.status = CertificateStatus::Refuted;
        cert.reason = "sample below the tangent plane";
        cert.eta = 0.0;
        return cert;
    }
    cert.eta = eta;
    cert.status = CertificateStatus::Certified;
    return cert;
}

AEtaCertificate certify_a_eta_domain(const ConvexDomain& domain, double a, std::size_t n_points,
                                     const AEtaOptions& options) {
    if (!(a >= 1.0)) throw ParameterError("certify_a_eta_domain: exponent a must be >= 1");
    AEtaCertificate total;
    total.a = a;
    total.eta = kInf;
    total.status = CertificateStatus::Certified;
    AEtaOptions local = options;
    local.direction.reset();
    for (const auto& z : domain.boundary_samples(n_points)) {
        AEtaCertificate c = certify_a_eta(domain, z, a, local);
        total.samples += c.samples;
        if (c.status == CertificateStatus::Refuted) {
            total.status = CertificateStatus::Refuted;
            total.reason = c.reason;
            total.eta = 0.0;
            total.worst_point = z;
            return total;
        }
        if (c.status == CertificateStatus::Indeterminate) {
            total.status = CertificateStatus::Indeterminate;
            total.reason = c.reason;
            total.worst_point = z;
            continue;
        }
        if (c.eta < total.eta) {
            total.eta = c.eta;
            total.worst_point = z;
        }
    }
    if (!std::isfinite(total.eta)) total.eta = 0.0;
    return total;
}

// ---------------------------------------------------------------------------
// Sphere conditions

namespace {

// Smallest radius R with the domain inside B(z + R nu, R); +inf if impossible.
double exterior_radius_along(const Vec& z, const Vec& nu, const std::vector<Vec>& samples, double min_sep) {
    double r = 0.0;
    for (const auto& x : samples) {
        const Vec dx = x - z;
        const double len = dx.norm();
        if (len <= min_sep) continue;
        const double along = nu.dot(dx);
        if (along <= 1e-10 * len) return kInf;
        r = std::max(r, dx.squaredNorm() / (2.0 * along));
    }
    return r;
}

}  // namespace

SphereCertificate sphere_conditions(const ConvexDomain& domain, const SphereOptions& options) {
    SphereCertificate cert;
    const double diam = domain.diameter();
    const double min_sep = 1e-9 * diam;
    const auto points = domain.boundary_samples(options.n_points);
    const auto containment = domain.boundary_samples(options.n_containment);

    double exterior = 0.0;
    bool exterior_ok = true;
    std::vector<std::pair<Vec, Vec>> exterior_axes;
    double interior = kInf;
    std::vector<std::pair<Vec, Vec>> interior_axes;

    for (const auto& z : points) {
        const auto normals = domain.active_inward_normals(z);
        if (normals.empty()) continue;

        // Exterior: minimise over the normal cone (pairwise blends of active normals).
        double best = kInf;
        Vec best_nu = normals.front();
        auto try_nu = [&](const Vec& nu) {
            const double r = exterior_radius_along(z, nu, containment, min_sep);
            if (r < best) {
                best = r;
                best_nu = nu;
            }
        };
        for (const auto& nu : normals) try_nu(nu);
        for (std::size_t i = 0; i < normals.size(); ++i) {
            for (std::size_t j = i + 1; j < normals.size(); ++j) {
                constexpr int kBlend = 64;
                for (int k = 1; k < kBlend; ++k) {
                    const double lam = static_cast<double>(k) / kBlend;
                    const Vec nu = ((1.0 - lam) * normals[i] + lam * normals[j]).normalized();
                    try_nu(nu);
                }
                // Golden refinement of the blend parameter around the best blend.
                double lo = 0.0;
                double hi = 1.0;
                auto radius_at = [&](double lam) {
                    const Vec nu = ((1.0 - lam) * normals[i] + lam * normals[j]).normalized();
                    return exterior_radius_along(z, nu, containment, min_sep);
                };
                for (int it = 0; it < 60; ++it) {
                    const double m1 = lo + (hi - lo) * 0.381966011250105;
                    const double m2 = lo + (hi - lo) * 0.618033988749895;
                    if (radius_at(m1) <= radius_at(m2)) hi = m2; else lo = m1;
                }
                try_nu(((1.0 - 0.5 * (lo + hi)) * normals[i] + 0.5 * (lo + hi) * normals[j]).normalized());
            }
        }
        if (!std::isfinite(best)) {
            if (exterior_ok) cert.exterior_obstruction = z;
            exterior_ok = false;
        } else {
            if (best > exterior) {
                exterior = best;
                if (exterior_ok) cert.exterior_obstruction = z;
            }
            exterior_axes.emplace_back(z, best_nu);
        }

        // Interior: corners admit no tangent ball.
        double r_star = 0.0;
        if (normals.size() == 1) {
            const Vec& nu = normals.front();
            const double slack = 1e-12 * std::max(1.0, diam);
            double lo = 0.0;
            double hi = diam;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const Vec c = z + mid * nu;
                const bool ok = domain.contains(c, 0.0) && domain.signed_distance(c) >= mid - slack;
                (ok ? lo : hi) = mid;
            }
            r_star = lo;
            interior_axes.emplace_back(z, nu);
        }
        if (r_star < interior) {
            interior = r_star;
            cert.interior_obstruction = z;
        }
    }

    if (exterior_ok && !exterior_axes.empty()) {
        cert.exterior_radius = exterior;
        cert.exterior_obstruction.reset();
        for (const auto& [z, nu] : exterior_axes) cert.exterior_witnesses.push_back({z, z + exterior * nu});
    }
    if (std::isfinite(interior) && interior > 1e-6 * diam) {
        cert.interior_radius = interior;
        cert.interior_obstruction.reset();
        for (const auto& [z, nu] : interior_axes) cert.interior_witnesses.push_back({z, z + interior * nu});
    }
    return cert;
}

}  // namespace dmalab
