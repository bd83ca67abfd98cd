#pragma once

#include <span>

#include "randshift/geometry.hpp"

namespace randshift {

struct VariogramFit {
  double sill = 0.0;   // sigma-hat^2 > 0
  double scale = 0.0;  // phi-hat > 0, exponential family
};

/// Weighted least squares fit of the exponential semivariogram
/// gamma(h) = sill * (1 - exp(-h/scale)) to the binned empirical
/// semivariogram of `values` observed at the pattern's points. Pairs up to
/// t_max apart enter 15 equal-width bins weighted by pair count; the scale
/// is found by golden section with the sill profiled in closed form.
VariogramFit fit_exponential_variogram(const MarkedPointPattern& pattern,
                                       std::span<const double> values, double t_max);

/// t_max defaulted to a quarter of the shorter window side.
VariogramFit fit_exponential_variogram(const MarkedPointPattern& pattern,
                                       std::span<const double> values);

}  // namespace randshift
