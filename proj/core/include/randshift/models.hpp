#pragma once

#include <cstdint>
#include <string>

#include "randshift/geometry.hpp"
#include "randshift/random_field.hpp"

namespace randshift {

enum class ModelId : int {
  M1 = 1, M2, M3, M4, M5, M6, M7, M8,   // overall study
  M9, M10,                              // preferential sampling, alpha-parametrized
  M11, M12,                             // dependent marking, alpha-parametrized
};

ModelId parse_model_id(const std::string& name);      // "M1".."M12"
std::string model_id_name(ModelId id);

/// One generative model with its parameter, fully determining the
/// distribution of (points, marks, covariate) on the unit square.
struct ModelSpec {
  ModelId id = ModelId::M1;
  double alpha = 0.0;  // in [0,1]; used by M9..M12, ignored otherwise
  std::uint64_t seed = 0;
};

/// True pairwise dependence flags of a model (the "+" entries of its
/// structure string).
struct DependenceTruth {
  bool points_marks = false;
  bool marks_covariate = false;
  bool points_covariate = false;
};

DependenceTruth model_truth(ModelId id);

struct GeneratedScene {
  MarkedPointPattern pattern;  // numeric marks
  CovariateField covariate;
  DependenceTruth truth;
};

/// Simulates the four base fields, builds the model's intensity, mark and
/// covariate fields, draws the Cox pattern and reads marks off the mark
/// field at the points. Deterministic per (id, alpha, seed).
GeneratedScene generate_model(const ModelSpec& spec);
GeneratedScene generate_model(const ModelSpec& spec, const GridGeometry& geometry);

}  // namespace randshift
