#include "randshift/models.hpp"

#include <cmath>
#include <optional>

#include "randshift/errors.hpp"
#include "randshift/point_process.hpp"
#include "randshift/rng.hpp"

namespace randshift {

namespace {

constexpr double kHalfRoot2 = 0.70710678118654752440;  // 1/sqrt(2)
constexpr double kBaseLogIntensity = 4.5;

CovariateField linear(std::initializer_list<const CovariateField*> fields,
                      std::initializer_list<double> weights, double offset = 0.0) {
  std::vector<CovariateField> inputs;
  inputs.reserve(fields.size());
  for (const CovariateField* f : fields) inputs.push_back(*f);
  FieldTransform t;
  t.kind = FieldTransform::Kind::linear_combination;
  t.weights.assign(weights);
  t.offset = offset;
  return transform_fields(inputs, t);
}

CovariateField squared(const CovariateField& field) {
  FieldTransform t;
  t.kind = FieldTransform::Kind::square;
  return transform_fields(std::span<const CovariateField>(&field, 1), t);
}

CovariateField affine_square(const CovariateField& field, double scale, double offset) {
  FieldTransform t;
  t.kind = FieldTransform::Kind::affine_square;
  t.scale = scale;
  t.offset = offset;
  return transform_fields(std::span<const CovariateField>(&field, 1), t);
}

}  // namespace

ModelId parse_model_id(const std::string& name) {
  for (int i = 1; i <= 12; ++i) {
    if (name == "M" + std::to_string(i)) return static_cast<ModelId>(i);
  }
  throw DataError("unknown-model-id: " + name);
}

std::string model_id_name(ModelId id) {
  return "M" + std::to_string(static_cast<int>(id));
}

DependenceTruth model_truth(ModelId id) {
  switch (id) {
    case ModelId::M1: return {false, false, false};
    case ModelId::M2: return {false, true, false};
    case ModelId::M3: return {false, false, true};
    case ModelId::M4: return {true, false, false};
    case ModelId::M5: return {true, false, true};
    case ModelId::M6: return {true, true, false};
    case ModelId::M7: return {false, true, true};
    case ModelId::M8: return {true, true, true};
    case ModelId::M9: return {false, false, true};
    case ModelId::M10: return {false, false, true};
    case ModelId::M11: return {true, false, false};
    case ModelId::M12: return {true, false, false};
  }
  throw DataError("unknown-model-id");
}

GeneratedScene generate_model(const ModelSpec& spec) {
  const GridGeometry geometry =
      GridGeometry::cover(Rectangle{0.0, 1.0, 0.0, 1.0}, 128);
  return generate_model(spec, geometry);
}

GeneratedScene generate_model(const ModelSpec& spec, const GridGeometry& geometry) {
  if (spec.alpha < 0.0 || spec.alpha > 1.0) throw DataError("model-alpha-out-of-range");
  const double alpha = spec.alpha;
  const double a = kHalfRoot2;

  // All four base fields are simulated for every model so that a common
  // seed yields comparable scenes across models.
  FieldSpec base;
  base.mean = 0.0;
  base.variance = 1.0;
  base.correlation = {CorrelationFamily::exponential, 0.2};
  auto [z1, z2] = simulate_grf_pair(base, geometry, Rng::derive(spec.seed, {1}));
  auto [z3, z4] = simulate_grf_pair(base, geometry, Rng::derive(spec.seed, {2}));

  // The alpha-parametrized intensities of the squared-field models carry a
  // +log(1+2*alpha)/2 term standardizing the mean intensity to exp(5).
  const double square_shift = kBaseLogIntensity + 0.5 * std::log1p(2.0 * alpha);

  std::optional<CovariateField> log_intensity, mark_field, covariate;
  switch (spec.id) {
    case ModelId::M1:
      log_intensity = linear({&z1}, {1.0}, kBaseLogIntensity);
      mark_field = linear({&z2}, {1.0});
      covariate = linear({&z3}, {1.0});
      break;
    case ModelId::M2:
      log_intensity = linear({&z1}, {1.0}, kBaseLogIntensity);
      mark_field = linear({&z2, &z3}, {a, a});
      covariate = linear({&z2, &z4}, {a, a});
      break;
    case ModelId::M3:
      log_intensity = linear({&z1, &z3}, {a, a}, kBaseLogIntensity);
      mark_field = linear({&z2}, {1.0});
      covariate = linear({&z3}, {1.0});
      break;
    case ModelId::M4:
      log_intensity = linear({&z1, &z2}, {a, a}, kBaseLogIntensity);
      mark_field = linear({&z2}, {1.0});
      covariate = linear({&z3}, {1.0});
      break;
    case ModelId::M5:
      log_intensity = linear({&z2, &z3}, {a, a}, kBaseLogIntensity);
      mark_field = linear({&z2}, {1.0});
      covariate = linear({&z3}, {1.0});
      break;
    case ModelId::M6:
      log_intensity = linear({&z1, &z2}, {a, a}, kBaseLogIntensity);
      mark_field = linear({&z2, &z4}, {a, a});
      covariate = linear({&z3, &z4}, {a, a});
      break;
    case ModelId::M7:
      log_intensity = linear({&z1, &z3}, {a, a}, kBaseLogIntensity);
      mark_field = linear({&z2, &z4}, {a, a});
      covariate = linear({&z3, &z4}, {a, a});
      break;
    case ModelId::M8:
      log_intensity = linear({&z1, &z2}, {a, a}, kBaseLogIntensity);
      mark_field = linear({&z1, &z3}, {a, a});
      covariate = linear({&z2, &z3}, {a, a});
      break;
    case ModelId::M9: {
      CovariateField mix = linear({&z3, &z1}, {alpha, std::sqrt(1.0 - alpha * alpha)});
      log_intensity = linear({&mix}, {1.0}, kBaseLogIntensity);
      mark_field = linear({&z2}, {1.0});
      covariate = linear({&z3}, {1.0});
      break;
    }
    case ModelId::M10: {
      CovariateField sq = affine_square(z3, -alpha, square_shift);
      log_intensity = linear({&sq, &z1}, {1.0, 1.0});
      mark_field = squared(z2);
      covariate = squared(z3);
      break;
    }
    case ModelId::M11: {
      CovariateField mix = linear({&z2, &z1}, {alpha, std::sqrt(1.0 - alpha * alpha)});
      log_intensity = linear({&mix}, {1.0}, kBaseLogIntensity);
      mark_field = linear({&z2}, {1.0});
      covariate = linear({&z3}, {1.0});
      break;
    }
    case ModelId::M12: {
      CovariateField sq = affine_square(z2, -alpha, square_shift);
      log_intensity = linear({&sq, &z1}, {1.0, 1.0});
      mark_field = squared(z2);
      covariate = squared(z3);
      break;
    }
  }
  if (!log_intensity) throw DataError("unknown-model-id");

  const Window window = Window::rectangle(geometry.x0, geometry.x0 + geometry.width(),
                                          geometry.y0, geometry.y0 + geometry.height());
  MarkedPointPattern unmarked =
      simulate_cox(*log_intensity, window, Rng::derive(spec.seed, {3}));

  NumericMarks marks;
  marks.values.reserve(unmarked.size());
  for (const Point& p : unmarked.points()) {
    marks.values.push_back(mark_field->eval(p));
  }
  MarkedPointPattern pattern(unmarked.points(), std::move(marks), window);
  return GeneratedScene{std::move(pattern), std::move(*covariate), model_truth(spec.id)};
}

}  // namespace randshift
