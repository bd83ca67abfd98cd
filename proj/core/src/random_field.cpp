#include "randshift/random_field.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "randshift/errors.hpp"
#include "randshift/rng.hpp"

namespace randshift {

double correlation(const CorrelationModel& model, double r) {
  if (r < 0.0) throw DataError("correlation-negative-distance");
  const double s = r / model.scale;
  switch (model.family) {
    case CorrelationFamily::exponential:
      return std::exp(-s);
    case CorrelationFamily::spherical:
      if (s >= 1.0) return 0.0;
      return 1.0 - 1.5 * s + 0.5 * s * s * s;
  }
  throw DataError("correlation-unknown-family");
}

GridGeometry GridGeometry::cover(const Rectangle& box, int cells_on_long_side) {
  if (cells_on_long_side < 2) throw DataError("grid-too-small");
  const double w = box.x1 - box.x0;
  const double h = box.y1 - box.y0;
  const double cell = std::max(w, h) / cells_on_long_side;
  return with_cell_size(box, cell);
}

GridGeometry GridGeometry::with_cell_size(const Rectangle& box, double cell_size) {
  if (!(cell_size > 0.0)) throw DataError("grid-cell-size-nonpositive");
  GridGeometry g;
  g.x0 = box.x0;
  g.y0 = box.y0;
  g.cell_size = cell_size;
  g.ncols = static_cast<int>(std::ceil((box.x1 - box.x0) / cell_size - 1e-9));
  g.nrows = static_cast<int>(std::ceil((box.y1 - box.y0) / cell_size - 1e-9));
  g.ncols = std::max(g.ncols, 1);
  g.nrows = std::max(g.nrows, 1);
  return g;
}

CovariateField::CovariateField(GridGeometry geometry, std::vector<double> values)
    : geometry_(geometry), values_(std::move(values)) {
  if (geometry_.ncols < 1 || geometry_.nrows < 1) throw DataError("field-empty-grid");
  if (values_.size() != static_cast<std::size_t>(geometry_.ncols) * geometry_.nrows) {
    throw DataError("field-values-size-mismatch");
  }
  for (double v : values_) {
    if (std::isnan(v) || std::isinf(v)) throw DataError("field-values-not-finite");
  }
}

double CovariateField::eval(Point u) const {
  const GridGeometry& g = geometry_;
  const double slack = 1e-9 * g.cell_size;
  if (u.x < g.x0 - slack || u.x > g.x0 + g.width() + slack || u.y < g.y0 - slack ||
      u.y > g.y0 + g.height() + slack) {
    throw DataError("field-eval-out-of-range");
  }
  // Continuous cell-center coordinates; the half-cell margin next to the
  // grid edge extrapolates constantly from the outermost centers.
  double fc = (u.x - g.x0) / g.cell_size - 0.5;
  double fr = (g.y0 + g.height() - u.y) / g.cell_size - 0.5;
  fc = std::clamp(fc, 0.0, static_cast<double>(g.ncols - 1));
  fr = std::clamp(fr, 0.0, static_cast<double>(g.nrows - 1));
  const int c0 = std::min(static_cast<int>(fc), g.ncols - 1);
  const int r0 = std::min(static_cast<int>(fr), g.nrows - 1);
  const int c1 = std::min(c0 + 1, g.ncols - 1);
  const int r1 = std::min(r0 + 1, g.nrows - 1);
  const double wx = fc - c0;
  const double wy = fr - r0;
  const double top = (1.0 - wx) * value_at(c0, r0) + wx * value_at(c1, r0);
  const double bottom = (1.0 - wx) * value_at(c0, r1) + wx * value_at(c1, r1);
  return (1.0 - wy) * top + wy * bottom;
}

double eval_field(const CovariateField& field, Point u) { return field.eval(u); }

namespace {

// FFTW's planner is not thread-safe; executions of independent plans are.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int next_fast_size(int n) {
  for (int candidate = n;; ++candidate) {
    int left = candidate;
    for (int f : {2, 3, 5}) {
      while (left % f == 0) left /= f;
    }
    if (left == 1) return candidate;
  }
}

struct EmbeddingKey {
  int ne_cols, ne_rows;
  double cell_size;
  CorrelationFamily family;
  double scale;

  bool operator<(const EmbeddingKey& o) const {
    return std::tie(ne_cols, ne_rows, cell_size, family, scale) <
           std::tie(o.ne_cols, o.ne_rows, o.cell_size, o.family, o.scale);
  }
};

// Noise amplitudes sqrt(lambda_k / L) for a unit-variance field, or nullptr
// when the embedding at this size is not positive semidefinite.
std::shared_ptr<const std::vector<double>> embedding_amplitudes(const EmbeddingKey& key) {
  static std::mutex cache_mutex;
  static std::map<EmbeddingKey, std::shared_ptr<const std::vector<double>>> cache;
  {
    std::lock_guard lock(cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  const int nc = key.ne_cols;
  const int nr = key.ne_rows;
  const std::size_t total = static_cast<std::size_t>(nc) * nr;
  const CorrelationModel model{key.family, key.scale};

  fftw_complex* buf;
  {
    std::lock_guard lock(planner_mutex());
    buf = fftw_alloc_complex(total);
  }
  for (int row = 0; row < nr; ++row) {
    const int wrap_r = std::min(row, nr - row);
    for (int col = 0; col < nc; ++col) {
      const int wrap_c = std::min(col, nc - col);
      const double dist =
          key.cell_size * std::hypot(static_cast<double>(wrap_c), static_cast<double>(wrap_r));
      const std::size_t idx = static_cast<std::size_t>(row) * nc + col;
      buf[idx][0] = correlation(model, dist);
      buf[idx][1] = 0.0;
    }
  }
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(nr, nc, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);

  double max_eig = 0.0;
  for (std::size_t i = 0; i < total; ++i) max_eig = std::max(max_eig, buf[i][0]);
  const double tolerance = 1e-8 * max_eig;
  bool psd = true;
  auto amplitudes = std::make_shared<std::vector<double>>(total);
  for (std::size_t i = 0; i < total; ++i) {
    double eig = buf[i][0];
    if (eig < 0.0) {
      if (eig < -tolerance) {
        psd = false;
        break;
      }
      eig = 0.0;
    }
    (*amplitudes)[i] = std::sqrt(eig / static_cast<double>(total));
  }
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(buf);
  }

  std::shared_ptr<const std::vector<double>> result = psd ? amplitudes : nullptr;
  std::lock_guard lock(cache_mutex);
  cache.emplace(key, result);
  return result;
}

}  // namespace

std::pair<CovariateField, CovariateField> simulate_grf_pair(const FieldSpec& spec,
                                                            const GridGeometry& geometry,
                                                            std::uint64_t seed) {
  if (geometry.ncols < 2 || geometry.nrows < 2) throw DataError("grid-too-small");
  if (spec.variance < 0.0) throw DataError("field-variance-negative");

  const std::size_t cells = static_cast<std::size_t>(geometry.ncols) * geometry.nrows;
  if (spec.variance == 0.0) {
    std::vector<double> constant(cells, spec.mean);
    CovariateField f1(geometry, constant);
    CovariateField f2(geometry, std::move(constant));
    return {std::move(f1), std::move(f2)};
  }

  // Embedding torus: twice the grid per axis, enlarged by 2 and then 4 if
  // the covariance does not embed positive semidefinitely.
  std::shared_ptr<const std::vector<double>> amplitudes;
  int ne_cols = 0, ne_rows = 0;
  for (int factor : {2, 4, 8}) {
    ne_cols = next_fast_size(factor * geometry.ncols);
    ne_rows = next_fast_size(factor * geometry.nrows);
    amplitudes = embedding_amplitudes(
        {ne_cols, ne_rows, geometry.cell_size, spec.correlation.family, spec.correlation.scale});
    if (amplitudes) break;
  }
  if (!amplitudes) {
    throw NumericError("simulation-failure: circulant embedding not positive semidefinite");
  }

  const std::size_t total = static_cast<std::size_t>(ne_cols) * ne_rows;
  fftw_complex* buf;
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    buf = fftw_alloc_complex(total);
    plan = fftw_plan_dft_2d(ne_rows, ne_cols, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }

  Rng rng(seed);
  for (std::size_t i = 0; i < total; ++i) {
    const double amp = (*amplitudes)[i];
    buf[i][0] = amp * rng.normal();
    buf[i][1] = amp * rng.normal();
  }
  fftw_execute(plan);

  // Real and imaginary parts are two independent unit-variance fields.
  const double sigma = std::sqrt(spec.variance);
  std::vector<double> values1(cells), values2(cells);
  for (int row = 0; row < geometry.nrows; ++row) {
    for (int col = 0; col < geometry.ncols; ++col) {
      const std::size_t src = static_cast<std::size_t>(row) * ne_cols + col;
      const std::size_t dst = static_cast<std::size_t>(row) * geometry.ncols + col;
      values1[dst] = spec.mean + sigma * buf[src][0];
      values2[dst] = spec.mean + sigma * buf[src][1];
    }
  }
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(buf);
  }
  return {CovariateField(geometry, std::move(values1)),
          CovariateField(geometry, std::move(values2))};
}

CovariateField simulate_grf(const FieldSpec& spec, const GridGeometry& geometry,
                            std::uint64_t seed) {
  return simulate_grf_pair(spec, geometry, seed).first;
}

CovariateField transform_fields(std::span<const CovariateField> inputs,
                                const FieldTransform& transform) {
  if (inputs.empty()) throw DataError("transform-no-inputs");
  const GridGeometry& g = inputs[0].geometry();
  for (const CovariateField& f : inputs) {
    if (!(f.geometry() == g)) throw DataError("transform-grid-mismatch");
  }
  const std::size_t cells = inputs[0].values().size();
  std::vector<double> out(cells, 0.0);
  switch (transform.kind) {
    case FieldTransform::Kind::linear_combination: {
      if (transform.weights.size() != inputs.size()) {
        throw DataError("transform-weights-size-mismatch");
      }
      for (double w : transform.weights) {
        if (std::isnan(w) || std::isinf(w)) throw DataError("transform-weights-not-finite");
      }
      for (std::size_t i = 0; i < cells; ++i) {
        double acc = transform.offset;
        for (std::size_t k = 0; k < inputs.size(); ++k) {
          acc += transform.weights[k] * inputs[k].values()[i];
        }
        out[i] = acc;
      }
      break;
    }
    case FieldTransform::Kind::square: {
      if (inputs.size() != 1) throw DataError("transform-square-wants-one-input");
      for (std::size_t i = 0; i < cells; ++i) {
        const double v = inputs[0].values()[i];
        out[i] = v * v;
      }
      break;
    }
    case FieldTransform::Kind::affine_square: {
      if (inputs.size() != 1) throw DataError("transform-square-wants-one-input");
      for (std::size_t i = 0; i < cells; ++i) {
        const double v = inputs[0].values()[i];
        out[i] = transform.offset + transform.scale * v * v;
      }
      break;
    }
  }
  return CovariateField(g, std::move(out));
}

}  // namespace randshift
