#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "dmalab/geometry.hpp"

namespace dmalab::detail {

/// Minimum of f on [lo, hi]: uniform grid, then Brent inside the best cell.
/// Returns (argmin, min).
template <class F>
std::pair<double, double> grid_minimize(F f, double lo, double hi, int count = 10000) {
    double best_x = lo;
    double best_f = f(lo);
    int best_i = 0;
    const double step = (hi - lo) / count;
    for (int i = 1; i <= count; ++i) {
        const double x = i == count ? hi : lo + step * i;
        const double v = f(x);
        if (v < best_f) {
            best_f = v;
            best_x = x;
            best_i = i;
        }
    }
    const double a = std::max(lo, lo + step * (best_i - 1));
    const double b = std::min(hi, lo + step * (best_i + 1));
    if (b > a) {
        const auto [x, v] = boost::math::tools::brent_find_minima(f, a, b, 50);
        if (v < best_f) {
            best_f = v;
            best_x = x;
        }
    }
    return {best_x, best_f};
}

/// Frame image p = Q (x - z) in extended precision.
inline std::vector<long double> to_local_extended(const LocalFrame& frame, const std::vector<long double>& x) {
    const auto n = static_cast<Eigen::Index>(x.size());
    std::vector<long double> shifted(x.size());
    for (Eigen::Index j = 0; j < n; ++j) shifted[j] = x[j] - static_cast<long double>(frame.origin[j]);
    std::vector<long double> p(x.size(), 0.0L);
    for (Eigen::Index i = 0; i < n; ++i) {
        long double s = 0.0L;
        for (Eigen::Index j = 0; j < n; ++j) s += static_cast<long double>(frame.rotation(i, j)) * shifted[j];
        p[i] = s;
    }
    return p;
}

/// Pulls gradient and Hessian from frame coordinates back to world coordinates.
inline void pull_back(const LocalFrame& frame, Vec& gradient, Mat& hessian) {
    gradient = frame.rotation.transpose() * gradient;
    hessian = frame.rotation.transpose() * hessian * frame.rotation;
}

}  // namespace dmalab::detail
