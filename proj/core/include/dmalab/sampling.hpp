#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace dmalab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Radical inverse of `index` in base `base` (van der Corput sequence).
double radical_inverse(std::uint64_t index, unsigned base);

/// Point `index` of the Halton sequence in [0,1)^dim.
Vec halton_point(std::uint64_t index, int dim);

/// Deterministic unit vector number `index` in R^dim.
///
/// In two dimensions the directions are equally spaced angles
/// 2*pi*(index + 1/2)/count. Otherwise a Halton point is pushed through the
/// inverse normal CDF and normalised.
Vec unit_direction(std::uint64_t index, std::size_t count, int dim);

}  // namespace dmalab
