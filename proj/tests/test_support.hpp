#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "dmalab/geometry.hpp"

namespace testing {

using dmalab::ConvexDomain;
using dmalab::Vec;

inline Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

inline std::shared_ptr<const ConvexDomain> unit_disk() {
    return std::make_shared<const ConvexDomain>(ConvexDomain::ball(Vec::Zero(2), 1.0));
}

inline std::shared_ptr<const ConvexDomain> unit_square() {
    return std::make_shared<const ConvexDomain>(ConvexDomain::box(Vec::Zero(2), Vec::Ones(2)));
}

// Independent distance oracle for a convex polygon: min over edges of point-segment distance.
inline double polygon_distance(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& p) {
    double best = INFINITY;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Eigen::Vector2d a = poly[i];
        const Eigen::Vector2d b = poly[(i + 1) % poly.size()];
        const double t = std::clamp((p - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
        best = std::min(best, (a + t * (b - a) - p).norm());
    }
    return best;
}

inline Vec uniform_in_box(std::mt19937_64& rng, const Vec& lo, const Vec& hi) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec x(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) x[i] = lo[i] + u(rng) * (hi[i] - lo[i]);
    return x;
}

inline Vec uniform_in_domain(std::mt19937_64& rng, const ConvexDomain& d) {
    for (;;) {
        Vec x = uniform_in_box(rng, d.bounds_lower(), d.bounds_upper());
        if (d.signed_distance(x) > 0.0) return x;
    }
}

}  // namespace testing
