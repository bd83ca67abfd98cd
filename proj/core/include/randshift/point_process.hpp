#pragma once

#include <cstdint>

#include "randshift/geometry.hpp"
#include "randshift/random_field.hpp"

namespace randshift {

/// Homogeneous Poisson process on the window; locations i.i.d. uniform
/// (rejection sampling from the bounding box for polygons).
MarkedPointPattern simulate_poisson(double intensity, const Window& window,
                                    std::uint64_t seed);

/// Cox process driven by exp(log_intensity): per grid cell a Poisson count
/// with mean exp(log_intensity at the cell center) * cell area, points
/// placed uniformly within the cell and thinned by window containment.
MarkedPointPattern simulate_cox(const CovariateField& log_intensity,
                                const Window& window, std::uint64_t seed);

}  // namespace randshift
