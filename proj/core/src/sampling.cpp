#include "dmalab/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace dmalab {

namespace {

constexpr std::array<unsigned, 12> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

}  // namespace

double radical_inverse(std::uint64_t index, unsigned base) {
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= base;
    }
    return result;
}

Vec halton_point(std::uint64_t index, int dim) {
    if (dim < 1 || dim > static_cast<int>(kPrimes.size())) {
        throw std::invalid_argument("halton_point: unsupported dimension");
    }
    Vec p(dim);
    for (int k = 0; k < dim; ++k) {
        p[k] = radical_inverse(index + 1, kPrimes[static_cast<std::size_t>(k)]);
    }
    return p;
}

Vec unit_direction(std::uint64_t index, std::size_t count, int dim) {
    if (dim == 2) {
        const double theta = 2.0 * std::numbers::pi * (static_cast<double>(index) + 0.5) /
                             static_cast<double>(count);
        Vec d(2);
        d << std::cos(theta), std::sin(theta);
        return d;
    }
    static const boost::math::normal_distribution<double> normal;
    Vec h = halton_point(index, dim);
    Vec d(dim);
    for (int k = 0; k < dim; ++k) {
        const double p = std::clamp(h[k], 1e-12, 1.0 - 1e-12);
        d[k] = boost::math::quantile(normal, p);
    }
    const double norm = d.norm();
    if (norm < 1e-14) {
        d.setZero();
        d[dim - 1] = 1.0;
        return d;
    }
    return d / norm;
}

}  // namespace dmalab
