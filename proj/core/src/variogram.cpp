#include "randshift/variogram.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "randshift/errors.hpp"

namespace randshift {

namespace {

constexpr int kBins = 15;
constexpr int kMinNonemptyBins = 5;

struct BinnedVariogram {
  std::vector<double> centers;
  std::vector<double> gamma;
  std::vector<double> weights;  // pair counts
};

BinnedVariogram bin_empirical_variogram(const MarkedPointPattern& pattern,
                                        std::span<const double> values, double t_max) {
  const std::size_t n = pattern.size();
  const double bin_width = t_max / kBins;
  std::vector<double> sq_sums(kBins, 0.0);
  std::vector<long> counts(kBins, 0);
  const std::vector<Point>& pts = pattern.points();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = pts[i].x - pts[j].x;
      const double dy = pts[i].y - pts[j].y;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d >= t_max) continue;
      const int bin = std::min(static_cast<int>(d / bin_width), kBins - 1);
      const double diff = values[i] - values[j];
      sq_sums[bin] += diff * diff;
      counts[bin] += 1;
    }
  }
  BinnedVariogram out;
  for (int b = 0; b < kBins; ++b) {
    if (counts[b] == 0) continue;
    out.centers.push_back((b + 0.5) * bin_width);
    out.gamma.push_back(sq_sums[b] / (2.0 * static_cast<double>(counts[b])));
    out.weights.push_back(static_cast<double>(counts[b]));
  }
  return out;
}

// Sill minimizing the weighted residual for a fixed scale.
double profiled_sill(const BinnedVariogram& v, double scale) {
  double num = 0.0, den = 0.0;
  for (std::size_t b = 0; b < v.centers.size(); ++b) {
    const double g = 1.0 - std::exp(-v.centers[b] / scale);
    num += v.weights[b] * v.gamma[b] * g;
    den += v.weights[b] * g * g;
  }
  return den > 0.0 ? num / den : 0.0;
}

double objective(const BinnedVariogram& v, double scale) {
  const double sill = profiled_sill(v, scale);
  double sse = 0.0;
  for (std::size_t b = 0; b < v.centers.size(); ++b) {
    const double fitted = sill * (1.0 - std::exp(-v.centers[b] / scale));
    const double r = v.gamma[b] - fitted;
    sse += v.weights[b] * r * r;
  }
  return sse;
}

}  // namespace

VariogramFit fit_exponential_variogram(const MarkedPointPattern& pattern,
                                       std::span<const double> values, double t_max) {
  const std::size_t n = pattern.size();
  if (values.size() != n) throw DataError("sample-length-mismatch");
  if (n < 20) throw DataError("insufficient-points: variogram fit needs n >= 20");
  if (!(t_max > 0.0)) throw DataError("fit-failure: t_max must be positive");

  const BinnedVariogram binned = bin_empirical_variogram(pattern, values, t_max);
  if (binned.centers.size() < kMinNonemptyBins) {
    throw DataError("fit-failure: fewer than 5 nonempty variogram bins");
  }

  // Golden section search for the scale on [t_max/100, 2*t_max].
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = t_max / 100.0;
  double hi = 2.0 * t_max;
  double x1 = hi - golden * (hi - lo);
  double x2 = lo + golden * (hi - lo);
  double f1 = objective(binned, x1);
  double f2 = objective(binned, x2);
  for (int iter = 0; iter < 80; ++iter) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = objective(binned, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = objective(binned, x2);
    }
  }
  const double scale = 0.5 * (lo + hi);
  const double sill = profiled_sill(binned, scale);
  if (!(sill > 0.0)) throw DataError("fit-failure: nonpositive sill (constant values?)");
  return VariogramFit{sill, scale};
}

VariogramFit fit_exponential_variogram(const MarkedPointPattern& pattern,
                                       std::span<const double> values) {
  const double t_max = 0.25 * std::min(pattern.window().width(), pattern.window().height());
  return fit_exponential_variogram(pattern, values, t_max);
}

}  // namespace randshift
