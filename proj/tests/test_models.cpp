#include <cmath>

#include "doctest.h"
#include "randshift/errors.hpp"
#include "randshift/models.hpp"
#include "randshift/rng.hpp"
#include "randshift/statistics.hpp"

using namespace randshift;

TEST_CASE("models: id parsing and truth flags") {
  CHECK(parse_model_id("M1") == ModelId::M1);
  CHECK(parse_model_id("M12") == ModelId::M12);
  CHECK_THROWS_AS(parse_model_id("M13"), DataError);
  CHECK_THROWS_AS(parse_model_id("m1"), DataError);

  CHECK_FALSE(model_truth(ModelId::M1).points_marks);
  CHECK(model_truth(ModelId::M2).marks_covariate);
  CHECK(model_truth(ModelId::M5).points_marks);
  CHECK(model_truth(ModelId::M5).points_covariate);
  CHECK_FALSE(model_truth(ModelId::M5).marks_covariate);
  CHECK(model_truth(ModelId::M8).marks_covariate);
}

TEST_CASE("models: alpha is validated") {
  CHECK_THROWS_AS(generate_model({ModelId::M9, 1.5, 1}), DataError);
}

TEST_CASE("models: same seed reproduces the scene exactly") {
  const GeneratedScene a = generate_model({ModelId::M6, 0.0, 20240808});
  const GeneratedScene b = generate_model({ModelId::M6, 0.0, 20240808});
  REQUIRE(a.pattern.size() == b.pattern.size());
  for (std::size_t i = 0; i < a.pattern.size(); ++i) {
    CHECK(a.pattern.points()[i].x == b.pattern.points()[i].x);
    CHECK(a.pattern.numeric_marks()[i] == b.pattern.numeric_marks()[i]);
  }
  CHECK(a.covariate.values() == b.covariate.values());
}

TEST_CASE("models: scenes carry numeric marks on the covariate window") {
  const GeneratedScene scene = generate_model({ModelId::M2, 0.0, 5});
  CHECK(scene.pattern.has_numeric_marks());
  CHECK(scene.pattern.window().is_rectangle());
  CHECK(scene.covariate.geometry().ncols == 128);
  CHECK(scene.truth.marks_covariate);
}

TEST_CASE("models: M1 marks are independent of the covariate [slow]") {
  // independence oracle: mean Kendall correlation across scenes ~ 0
  const int n_scenes = 500;
  double tau_sum = 0;
  for (int i = 0; i < n_scenes; ++i) {
    const GeneratedScene scene = generate_model({ModelId::M1, 0.0, Rng::derive(1, {(std::uint64_t)i})});
    std::vector<double> at_points;
    at_points.reserve(scene.pattern.size());
    for (const Point& p : scene.pattern.points()) at_points.push_back(scene.covariate.eval(p));
    tau_sum += stat_kendall(scene.pattern.numeric_marks(), at_points);
  }
  CHECK(std::abs(tau_sum / n_scenes) <= 0.03);
}

TEST_CASE("models: M9 at alpha 0 has covariate independent of points [slow]") {
  const int n_scenes = 500;
  double mean_sum = 0;
  for (int i = 0; i < n_scenes; ++i) {
    const GeneratedScene scene =
        generate_model({ModelId::M9, 0.0, Rng::derive(2, {(std::uint64_t)i})});
    mean_sum += stat_mean_at_points(scene.pattern, scene.covariate);
  }
  CHECK(std::abs(mean_sum / n_scenes) <= 0.03);
}

TEST_CASE("models: mark fields have the prescribed marginal variance [slow]") {
  // Gaussian marks have variance 1, squared-field marks variance 2
  auto mark_variance = [](ModelId id, double alpha, std::uint64_t seed_base, int n_scenes) {
    double s = 0, ss = 0;
    long n = 0;
    for (int i = 0; i < n_scenes; ++i) {
      const GeneratedScene scene =
          generate_model({id, alpha, Rng::derive(seed_base, {(std::uint64_t)i})});
      for (double m : scene.pattern.numeric_marks()) {
        s += m;
        ss += m * m;
        ++n;
      }
    }
    const double mean = s / static_cast<double>(n);
    return ss / static_cast<double>(n) - mean * mean;
  };
  CHECK(mark_variance(ModelId::M3, 0.0, 31, 150) == doctest::Approx(1.0).epsilon(0.10));
  CHECK(mark_variance(ModelId::M10, 0.4, 32, 150) == doctest::Approx(2.0).epsilon(0.10));
}

TEST_CASE("models: marginal point intensity is shared across models [slow]") {
  // all models standardize the mean count to exp(5) * |W|
  const double expected = std::exp(5.0);
  for (auto [id, alpha] : {std::pair{ModelId::M2, 0.0}, {ModelId::M5, 0.0},
                           {ModelId::M9, 0.6}, {ModelId::M11, 0.6}, {ModelId::M12, 0.6}}) {
    long total = 0;
    const int n_scenes = 500;
    for (int i = 0; i < n_scenes; ++i) {
      total += static_cast<long>(
          generate_model({id, alpha, Rng::derive(40 + static_cast<int>(id), {(std::uint64_t)i})})
              .pattern.size());
    }
    CHECK(static_cast<double>(total) / n_scenes == doctest::Approx(expected).epsilon(0.04));
  }
}
