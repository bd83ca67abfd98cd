#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "randshift/geometry.hpp"

namespace randshift {

enum class CorrelationFamily { exponential, spherical };

/// Isotropic correlation model c(r). The spherical family has bounded
/// support: c(r) = 0 exactly for r >= scale.
struct CorrelationModel {
  CorrelationFamily family = CorrelationFamily::exponential;
  double scale = 0.2;  // phi > 0
};

/// c(r) for r >= 0; c(0) = 1.
double correlation(const CorrelationModel& model, double r);

struct FieldSpec {
  double mean = 0.0;
  double variance = 1.0;  // sigma^2 >= 0
  CorrelationModel correlation;
};

/// Regular grid of square cells. Values are attached to cell centers;
/// row 0 is the northmost row (matching the ASCII grid format).
struct GridGeometry {
  double x0 = 0.0;       // west edge
  double y0 = 0.0;       // south edge
  double cell_size = 0.0;
  int ncols = 0;
  int nrows = 0;

  double x_center(int col) const { return x0 + (col + 0.5) * cell_size; }
  double y_center(int row) const { return y0 + (nrows - row - 0.5) * cell_size; }
  double width() const { return ncols * cell_size; }
  double height() const { return nrows * cell_size; }

  /// Smallest grid of square cells covering the rectangle with at most
  /// `cells_on_long_side` cells along its longer side.
  static GridGeometry cover(const Rectangle& box, int cells_on_long_side);

  /// Grid covering the rectangle with the given cell size.
  static GridGeometry with_cell_size(const Rectangle& box, double cell_size);

  bool operator==(const GridGeometry&) const = default;
};

/// Gridded realization of a spatial field, evaluated anywhere on the grid
/// by bilinear interpolation among the four surrounding cell centers.
class CovariateField {
 public:
  CovariateField(GridGeometry geometry, std::vector<double> values);

  const GridGeometry& geometry() const { return geometry_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double value_at(int col, int row) const {
    return values_[static_cast<std::size_t>(row) * geometry_.ncols + col];
  }

  /// Bilinear interpolation; exact cell-center queries return the stored
  /// value. Throws for u outside the grid.
  double eval(Point u) const;

 private:
  GridGeometry geometry_;
  std::vector<double> values_;
};

double eval_field(const CovariateField& field, Point u);

/// Stationary Gaussian random field realization at the grid cell centers,
/// simulated exactly by FFT circulant embedding on an enlarged torus.
/// Deterministic given the seed.
CovariateField simulate_grf(const FieldSpec& spec, const GridGeometry& geometry,
                            std::uint64_t seed);

/// Two independent realizations from one complex FFT (the real and
/// imaginary parts of the transformed white noise). The first field is
/// bit-identical to simulate_grf(spec, geometry, seed).
std::pair<CovariateField, CovariateField> simulate_grf_pair(const FieldSpec& spec,
                                                            const GridGeometry& geometry,
                                                            std::uint64_t seed);

struct FieldTransform {
  enum class Kind {
    linear_combination,  // offset + sum_k weights[k] * Z_k(u)
    square,              // Z(u)^2
    affine_square,       // offset + scale * Z(u)^2
  };
  Kind kind = Kind::linear_combination;
  std::vector<double> weights;  // linear_combination only
  double offset = 0.0;
  double scale = 1.0;  // affine_square only
};

/// Pointwise transform on a shared grid.
CovariateField transform_fields(std::span<const CovariateField> inputs,
                                const FieldTransform& transform);

}  // namespace randshift
