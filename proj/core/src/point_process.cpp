#include "randshift/point_process.hpp"

#include <cmath>

#include "randshift/errors.hpp"
#include "randshift/rng.hpp"

namespace randshift {

MarkedPointPattern simulate_poisson(double intensity, const Window& window,
                                    std::uint64_t seed) {
  if (!(intensity > 0.0)) throw DataError("poisson-intensity-nonpositive");
  Rng rng(seed);
  const long count = rng.poisson(intensity * window.area());
  const Rectangle box = window.bounding_box();
  std::vector<Point> points;
  points.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    Point p;
    do {
      p.x = box.x0 + rng.uniform() * (box.x1 - box.x0);
      p.y = box.y0 + rng.uniform() * (box.y1 - box.y0);
    } while (!window.contains(p));
    points.push_back(p);
  }
  return MarkedPointPattern(std::move(points), window);
}

MarkedPointPattern simulate_cox(const CovariateField& log_intensity,
                                const Window& window, std::uint64_t seed) {
  const GridGeometry& g = log_intensity.geometry();
  const Rectangle box = window.bounding_box();
  if (g.x0 > box.x0 + 1e-9 * g.cell_size || g.y0 > box.y0 + 1e-9 * g.cell_size ||
      g.x0 + g.width() < box.x1 - 1e-9 * g.cell_size ||
      g.y0 + g.height() < box.y1 - 1e-9 * g.cell_size) {
    throw DataError("cox-grid-does-not-cover-window");
  }
  for (double v : log_intensity.values()) {
    if (std::isnan(v) || std::isinf(v)) throw DataError("cox-log-intensity-not-finite");
  }
  Rng rng(seed);
  const double cell_area = g.cell_size * g.cell_size;
  std::vector<Point> points;
  for (int row = 0; row < g.nrows; ++row) {
    const double y_top = g.y0 + (g.nrows - row) * g.cell_size;
    for (int col = 0; col < g.ncols; ++col) {
      const double mean = std::exp(log_intensity.value_at(col, row)) * cell_area;
      const long count = rng.poisson(mean);
      const double x_left = g.x0 + col * g.cell_size;
      for (long k = 0; k < count; ++k) {
        const Point p{x_left + rng.uniform() * g.cell_size,
                      y_top - rng.uniform() * g.cell_size};
        if (window.contains(p)) points.push_back(p);
      }
    }
  }
  return MarkedPointPattern(std::move(points), window);
}

}  // namespace randshift
