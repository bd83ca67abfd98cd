#include <cmath>
#include <vector>

#include "doctest.h"
#include "randshift/errors.hpp"
#include "randshift/models.hpp"
#include "randshift/rng.hpp"
#include "randshift/shift_test.hpp"

using namespace randshift;

namespace {

CovariateField gradient_field(int cells = 32) {
  const GridGeometry g = GridGeometry::cover(Rectangle{0, 1, 0, 1}, cells);
  std::vector<double> values(static_cast<std::size_t>(g.ncols) * g.nrows);
  for (int row = 0; row < g.nrows; ++row) {
    for (int col = 0; col < g.ncols; ++col) {
      values[static_cast<std::size_t>(row) * g.ncols + col] = g.x_center(col);
    }
  }
  return CovariateField(g, std::move(values));
}

MarkedPointPattern pattern_with_x_marks(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> pts;
  NumericMarks marks;
  for (int i = 0; i < n; ++i) {
    const Point p{rng.uniform(), rng.uniform()};
    pts.push_back(p);
    marks.values.push_back(p.x);
  }
  return MarkedPointPattern(std::move(pts), std::move(marks),
                            Window::rectangle(0, 1, 0, 1));
}

}  // namespace

TEST_CASE("draw_shift: disc support and determinism") {
  const ShiftDistribution disc = ShiftDistribution::disc(0.3);
  for (int i = 1; i <= 200; ++i) {
    const ShiftVector v = draw_shift(disc, 42, i);
    CHECK(v.dx * v.dx + v.dy * v.dy <= 0.3 * 0.3);
  }
  const ShiftVector a = draw_shift(disc, 42, 7);
  const ShiftVector b = draw_shift(disc, 42, 7);
  CHECK(a.dx == b.dx);
  CHECK(a.dy == b.dy);
  const ShiftVector c = draw_shift(disc, 42, 8);
  CHECK((a.dx != c.dx || a.dy != c.dy));
}

TEST_CASE("draw_shift: disc draws are centered [slow]") {
  const double radius = 0.8;
  const ShiftDistribution disc = ShiftDistribution::disc(radius);
  double sx = 0, sy = 0;
  const int n = 100000;
  for (int i = 1; i <= n; ++i) {
    const ShiftVector v = draw_shift(disc, 31337, i);
    sx += v.dx;
    sy += v.dy;
  }
  CHECK(std::abs(sx / n) <= 0.01 * radius);
  CHECK(std::abs(sy / n) <= 0.01 * radius);
}

TEST_CASE("variance_correct: hand values") {
  const std::vector<double> t{1.0, 2.0, 3.0};
  const std::vector<long> n{4, 4, 4};
  const std::vector<double> s = variance_correct(t, n);
  CHECK(s[0] == doctest::Approx(-2.0));
  CHECK(s[1] == doctest::Approx(0.0));
  CHECK(s[2] == doctest::Approx(2.0));

  // with equal counts the |S| ranking equals the |T - mean| ranking
  const std::vector<double> t2{0.3, -1.2, 0.9, 0.1};
  const std::vector<long> n2{7, 7, 7, 7};
  const std::vector<double> s2 = variance_correct(t2, n2);
  const double mean = (0.3 - 1.2 + 0.9 + 0.1) / 4.0;
  for (std::size_t i = 0; i < t2.size(); ++i) {
    for (std::size_t j = 0; j < t2.size(); ++j) {
      CHECK((std::abs(s2[i]) < std::abs(s2[j])) ==
            (std::abs(t2[i] - mean) < std::abs(t2[j] - mean)));
    }
  }

  CHECK_THROWS_AS(variance_correct(t, std::vector<long>{4, 4}), DataError);
  CHECK_THROWS_AS(variance_correct(t, std::vector<long>{4, 0, 4}), DataError);
}

TEST_CASE("mc_pvalue: rank conventions") {
  CHECK(mc_pvalue(std::vector{9.0, 1.0, 2.0, 3.0}) == doctest::Approx(0.25));
  CHECK(mc_pvalue(std::vector{0.5, 1.0, 2.0, 3.0}) == doctest::Approx(1.0));
  CHECK(mc_pvalue(std::vector{5.0, 5.0, 1.0, 2.0}) == doctest::Approx(0.5));  // tie extreme
  CHECK_THROWS_AS(mc_pvalue(std::vector{1.0}), DataError);
}

TEST_CASE("bonferroni_combine: capping and validation") {
  CHECK(bonferroni_combine(std::vector{0.02, 0.5, 0.9}) == doctest::Approx(0.06));
  CHECK(bonferroni_combine(std::vector{0.33}) == doctest::Approx(0.33));
  CHECK(bonferroni_combine(std::vector{0.5, 0.6}) == 1.0);
  CHECK_THROWS_AS(bonferroni_combine(std::vector<double>{}), DataError);
  CHECK_THROWS_AS(bonferroni_combine(std::vector{0.0, 0.5}), DataError);
}

TEST_CASE("run_shift_test: config validation") {
  const MarkedPointPattern pattern = pattern_with_x_marks(30, 1);
  const CovariateField field = gradient_field();

  TestConfig too_few;
  too_few.n_shifts = 3;
  CHECK_THROWS_AS(run_shift_test(pattern, field, too_few), DataError);

  TestConfig low_min;
  low_min.min_points = 2;
  CHECK_THROWS_AS(run_shift_test(pattern, field, low_min), DataError);

  std::vector<Point> tri_pts{{0.2, 0.2}, {0.3, 0.3}, {0.2, 0.4}, {0.1, 0.1}, {0.15, 0.3},
                             {0.25, 0.2}, {0.1, 0.4}, {0.3, 0.1}, {0.12, 0.22}, {0.2, 0.3}};
  NumericMarks tri_marks{std::vector<double>(10, 1.0)};
  const MarkedPointPattern on_triangle(tri_pts, tri_marks,
                                       Window::polygon({{0, 0}, {1, 0}, {0, 1}}));
  TestConfig torus;
  torus.correction = Correction::torus;
  torus.statistic = StatisticKind::mean_at_points;
  CHECK_THROWS_WITH_AS(run_shift_test(on_triangle, field, torus),
                       doctest::Contains("torus-unsupported"), DataError);
}

TEST_CASE("run_shift_test: perfectly dependent data is most extreme under torus") {
  // marks equal the x coordinate and the field is the x gradient: T_0 = 1;
  // a wrap keeps tau = 1 only when no point falls in the wrapped strip, so
  // the p-value composes mc_pvalue exactly over the tied replicates
  const MarkedPointPattern pattern = pattern_with_x_marks(60, 2);
  TestConfig config;
  config.n_shifts = 199;
  config.correction = Correction::torus;
  config.statistic = StatisticKind::kendall;
  config.seed = 11;
  const TestResult result = run_shift_test(pattern, gradient_field(), config);
  CHECK(result.t0 == doctest::Approx(1.0));
  long ties = 0;
  for (double t : result.replicates) {
    CHECK(t <= 1.0);
    if (t == result.t0) ++ties;
  }
  CHECK(result.p_value == doctest::Approx((1.0 + ties) / 200.0));
  CHECK(result.p_value <= 0.05);
  CHECK(result.replicates.size() == 199);
  CHECK(result.standardized.empty());
}

TEST_CASE("run_shift_test: torus keeps counts, variance crops") {
  const GeneratedScene scene = generate_model({ModelId::M1, 0.0, 321});
  TestConfig config;
  config.n_shifts = 39;
  config.statistic = StatisticKind::kendall;
  config.seed = 5;

  config.correction = Correction::torus;
  const TestResult torus = run_shift_test(scene.pattern, scene.covariate, config);
  for (long n : torus.retained) CHECK(n == static_cast<long>(scene.pattern.size()));

  config.correction = Correction::variance;
  const TestResult variance = run_shift_test(scene.pattern, scene.covariate, config);
  CHECK(variance.retained[0] == static_cast<long>(scene.pattern.size()));
  for (long n : variance.retained) CHECK(n <= variance.retained[0]);
  CHECK(variance.standardized.size() == 40);
}

TEST_CASE("run_shift_test: torus and variance agree when nothing is cropped") {
  // points confined to the window center with shifts too small to crop
  Rng rng(55);
  std::vector<Point> pts;
  NumericMarks marks;
  for (int i = 0; i < 25; ++i) {
    pts.push_back({0.45 + 0.1 * rng.uniform(), 0.45 + 0.1 * rng.uniform()});
    marks.values.push_back(rng.normal());
  }
  const MarkedPointPattern pattern(pts, marks, Window::rectangle(0, 1, 0, 1));

  TestConfig config;
  config.n_shifts = 99;
  config.statistic = StatisticKind::kendall;
  config.shift = ShiftDistribution::disc(0.04);
  config.seed = 2024;

  config.correction = Correction::torus;
  const TestResult torus = run_shift_test(pattern, gradient_field(), config);
  config.correction = Correction::variance;
  const TestResult variance = run_shift_test(pattern, gradient_field(), config);

  CHECK(torus.p_value == variance.p_value);
  CHECK(torus.t0 == variance.t0);
  for (std::size_t i = 0; i < torus.replicates.size(); ++i) {
    CHECK(torus.replicates[i] == variance.replicates[i]);
    CHECK(variance.retained[i] == static_cast<long>(pattern.size()));
  }
}

TEST_CASE("run_shift_test: deterministic given the seed") {
  const GeneratedScene scene = generate_model({ModelId::M2, 0.0, 777});
  TestConfig config;
  config.n_shifts = 59;
  config.statistic = StatisticKind::pearson;
  config.seed = 31;
  const TestResult a = run_shift_test(scene.pattern, scene.covariate, config);
  const TestResult b = run_shift_test(scene.pattern, scene.covariate, config);
  CHECK(a.p_value == b.p_value);
  CHECK(a.replicates == b.replicates);
  CHECK(a.standardized == b.standardized);
}

TEST_CASE("run_shift_test: impossible crops raise a degenerate-shift error") {
  Rng rng(8);
  std::vector<Point> pts;
  NumericMarks marks;
  for (int i = 0; i < 10; ++i) {
    pts.push_back({0.005 * rng.uniform(), 0.005 * rng.uniform()});
    marks.values.push_back(rng.normal());
  }
  const MarkedPointPattern corner(pts, marks, Window::rectangle(0, 1, 0, 1));
  TestConfig config;
  config.n_shifts = 19;
  config.statistic = StatisticKind::kendall;
  config.shift = ShiftDistribution::disc(50.0);  // nearly every shift empties W
  config.seed = 3;
  CHECK_THROWS_WITH_AS(run_shift_test(corner, gradient_field(), config),
                       doctest::Contains("degenerate-shift"), DataError);
}

TEST_CASE("multitype_pmc_test: two types give a single difference component") {
  const GeneratedScene scene = generate_model({ModelId::M1, 0.0, 4242});
  Rng rng(9);
  CategoricalMarks cm;
  cm.level_count = 2;
  for (std::size_t i = 0; i < scene.pattern.size(); ++i) {
    cm.levels.push_back(rng.uniform() < 0.5 ? 1 : 2);
  }
  const MarkedPointPattern labeled(scene.pattern.points(), cm, scene.pattern.window());

  TestConfig config;
  config.n_shifts = 99;
  config.seed = 12;
  const EnvelopeResult result = multitype_pmc_test(labeled, scene.covariate, config);
  CHECK(result.t0.size() == 1);
  CHECK(result.p_value > 0.0);
  CHECK(result.p_value <= 1.0);

  config.correction = Correction::torus;
  CHECK_THROWS_WITH_AS(multitype_pmc_test(labeled, scene.covariate, config),
                       doctest::Contains("unsupported"), DataError);
}

TEST_CASE("multitype_pmc_test: types split by covariate level are detected") {
  // covariate bump at the center: type 2 sits on the bump, type 1 in the
  // low outskirts; any shift moves the type-2 cluster off the bump
  const GridGeometry g = GridGeometry::cover(Rectangle{0, 1, 0, 1}, 64);
  std::vector<double> bump(static_cast<std::size_t>(g.ncols) * g.nrows);
  for (int row = 0; row < g.nrows; ++row) {
    for (int col = 0; col < g.ncols; ++col) {
      const double dx = g.x_center(col) - 0.5;
      const double dy = g.y_center(row) - 0.5;
      bump[static_cast<std::size_t>(row) * g.ncols + col] =
          std::exp(-(dx * dx + dy * dy) / (2 * 0.12 * 0.12));
    }
  }
  const CovariateField field(g, std::move(bump));

  Rng rng(14);
  std::vector<Point> pts;
  CategoricalMarks cm;
  cm.level_count = 2;
  for (int i = 0; i < 45; ++i) {
    // ring points (low covariate), then bump points (high covariate)
    const double angle = rng.uniform() * 6.283185307;
    const double radius = 0.38 + 0.08 * rng.uniform();
    pts.push_back({0.5 + radius * std::cos(angle), 0.5 + radius * std::sin(angle)});
    cm.levels.push_back(1);
    pts.push_back({0.5 + 0.1 * (rng.uniform() - 0.5), 0.5 + 0.1 * (rng.uniform() - 0.5)});
    cm.levels.push_back(2);
  }
  const MarkedPointPattern pattern(pts, cm, Window::rectangle(0, 1, 0, 1));
  TestConfig config;
  config.n_shifts = 999;
  config.seed = 77;
  const EnvelopeResult result = multitype_pmc_test(pattern, field, config);
  CHECK(result.p_value <= 0.01);
}

TEST_CASE("multitype_pmc_test: random labels hold the nominal level [slow]") {
  // null oracle: M1 scenes with labels independent of everything
  const int n_scenes = 300;
  int rejections = 0;
  for (int s = 0; s < n_scenes; ++s) {
    const GeneratedScene scene =
        generate_model({ModelId::M1, 0.0, Rng::derive(60, {(std::uint64_t)s})});
    Rng rng(Rng::derive(61, {(std::uint64_t)s}));
    CategoricalMarks cm;
    cm.level_count = 2;
    for (std::size_t i = 0; i < scene.pattern.size(); ++i) {
      cm.levels.push_back(rng.uniform() < 0.5 ? 1 : 2);
    }
    const MarkedPointPattern labeled(scene.pattern.points(), cm, scene.pattern.window());
    TestConfig config;
    config.n_shifts = 199;
    config.seed = Rng::derive(62, {(std::uint64_t)s});
    if (multitype_pmc_test(labeled, scene.covariate, config).p_value <= 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / n_scenes;
  CHECK(rate >= 0.02);
  CHECK(rate <= 0.09);
}

TEST_CASE("run_multicovariate_test: vector of means against several fields") {
  const GeneratedScene scene = generate_model({ModelId::M1, 0.0, 31415});
  const GeneratedScene other = generate_model({ModelId::M1, 0.0, 92653});
  std::vector<CovariateField> fields{scene.covariate, other.covariate};

  TestConfig config;
  config.n_shifts = 99;
  config.seed = 4;
  const EnvelopeResult result = run_multicovariate_test(scene.pattern, fields, config);
  CHECK(result.t0.size() == 2);
  CHECK(result.replicates.size() == 99);
  CHECK(result.p_value >= 1.0 / 100.0);

  const EnvelopeResult again = run_multicovariate_test(scene.pattern, fields, config);
  CHECK(result.p_value == again.p_value);
}
