#include "randshift/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "randshift/errors.hpp"

namespace randshift {

namespace {

int sign_of(double diff) { return (diff > 0.0) - (diff < 0.0); }

double mean_of(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

}  // namespace

double stat_mean_at_points(const MarkedPointPattern& pattern, const CovariateField& field) {
  if (pattern.size() == 0) throw DataError("insufficient-points: empty pattern");
  double sum = 0.0;
  for (const Point& p : pattern.points()) sum += field.eval(p);
  return sum / static_cast<double>(pattern.size());
}

double stat_sample_cov(std::span<const double> marks,
                       std::span<const double> covariate_values) {
  const std::size_t n = marks.size();
  if (n != covariate_values.size()) throw DataError("sample-length-mismatch");
  if (n < 2) throw DataError("insufficient-points: covariance needs n >= 2");
  const double m_bar = mean_of(marks);
  const double z_bar = mean_of(covariate_values);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += (marks[i] - m_bar) * (covariate_values[i] - z_bar);
  }
  return acc / static_cast<double>(n - 1);
}

double stat_pearson(std::span<const double> marks,
                    std::span<const double> covariate_values) {
  const std::size_t n = marks.size();
  if (n != covariate_values.size()) throw DataError("sample-length-mismatch");
  if (n < 3) throw DataError("insufficient-points: pearson needs n >= 3");
  const double m_bar = mean_of(marks);
  const double z_bar = mean_of(covariate_values);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dm = marks[i] - m_bar;
    const double dz = covariate_values[i] - z_bar;
    sxy += dm * dz;
    sxx += dm * dm;
    syy += dz * dz;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("degenerate-sample: constant values");
  return sxy / (std::sqrt(sxx) * std::sqrt(syy));
}

namespace {

// Both Kendall paths accumulate the integer sum over ordered pairs of
// sgn(m_i - m_j) * sgn(z_i - z_j), so they agree bit-exactly after the
// common division by n(n-1).
long long kendall_pair_sum_reference(std::span<const double> m, std::span<const double> z) {
  const std::size_t n = m.size();
  long long sum = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sum += sign_of(m[i] - m[j]) * sign_of(z[i] - z[j]);
    }
  }
  return 2 * sum;
}

// Counts strict inversions (left > right) by merge sort.
long long count_inversions(std::vector<double>& values, std::vector<double>& scratch,
                           std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long inversions = count_inversions(values, scratch, lo, mid) +
                         count_inversions(values, scratch, mid, hi);
  std::size_t left = lo, right = mid, out = lo;
  while (left < mid && right < hi) {
    if (values[right] < values[left]) {
      inversions += static_cast<long long>(mid - left);
      scratch[out++] = values[right++];
    } else {
      scratch[out++] = values[left++];
    }
  }
  while (left < mid) scratch[out++] = values[left++];
  while (right < hi) scratch[out++] = values[right++];
  std::copy(scratch.begin() + lo, scratch.begin() + hi, values.begin() + lo);
  return inversions;
}

template <typename Iter, typename Equal>
long long tie_pair_count(Iter begin, Iter end, Equal equal) {
  long long pairs = 0;
  for (Iter run = begin; run != end;) {
    Iter next = run + 1;
    while (next != end && equal(*run, *next)) ++next;
    const long long len = next - run;
    pairs += len * (len - 1) / 2;
    run = next;
  }
  return pairs;
}

// Knight's algorithm: sort by (m, z), count z-inversions by merge sort,
// and correct for ties. With C concordant, D discordant pairs:
//   C - D = total - ties_m - ties_z + ties_both - 2 * inversions.
long long kendall_pair_sum_fast(std::span<const double> m, std::span<const double> z) {
  const std::size_t n = m.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (m[a] != m[b]) return m[a] < m[b];
    return z[a] < z[b];
  });

  std::vector<std::pair<double, double>> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = {m[order[i]], z[order[i]]};

  const long long total = static_cast<long long>(n) * (n - 1) / 2;
  const long long ties_m = tie_pair_count(
      sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first == b.first; });
  const long long ties_both =
      tie_pair_count(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a == b; });

  std::vector<double> z_sorted(n), scratch(n);
  for (std::size_t i = 0; i < n; ++i) z_sorted[i] = sorted[i].second;
  const long long inversions = count_inversions(z_sorted, scratch, 0, n);
  // z_sorted is now ordered; tied-z pairs come from the full multiset.
  const long long ties_z = tie_pair_count(z_sorted.begin(), z_sorted.end(),
                                          [](double a, double b) { return a == b; });

  const long long concordant_minus_discordant =
      total - ties_m - ties_z + ties_both - 2 * inversions;
  return 2 * concordant_minus_discordant;
}

}  // namespace

double stat_kendall_reference(std::span<const double> marks,
                              std::span<const double> covariate_values) {
  const std::size_t n = marks.size();
  if (n != covariate_values.size()) throw DataError("sample-length-mismatch");
  if (n < 2) throw DataError("insufficient-points: kendall needs n >= 2");
  return static_cast<double>(kendall_pair_sum_reference(marks, covariate_values)) /
         (static_cast<double>(n) * static_cast<double>(n - 1));
}

double stat_kendall_fast(std::span<const double> marks,
                         std::span<const double> covariate_values) {
  const std::size_t n = marks.size();
  if (n != covariate_values.size()) throw DataError("sample-length-mismatch");
  if (n < 2) throw DataError("insufficient-points: kendall needs n >= 2");
  return static_cast<double>(kendall_pair_sum_fast(marks, covariate_values)) /
         (static_cast<double>(n) * static_cast<double>(n - 1));
}

double stat_kendall(std::span<const double> marks,
                    std::span<const double> covariate_values) {
  if (marks.size() >= 512) return stat_kendall_fast(marks, covariate_values);
  return stat_kendall_reference(marks, covariate_values);
}

std::vector<double> normal_scores(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw DataError("insufficient-points: normal scores need n >= 2");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double average_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = average_rank;
    i = j;
  }

  const boost::math::normal_distribution<double> standard_normal;
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = boost::math::quantile(standard_normal,
                                      (ranks[i] - 0.5) / static_cast<double>(n));
  }
  return scores;
}

ConditionalMarkMeanEvaluator::ConditionalMarkMeanEvaluator(const MarkedPointPattern& pattern,
                                                           std::span<const double> t_grid,
                                                           double bandwidth)
    : n_points_(pattern.size()),
      t_grid_(t_grid.begin(), t_grid.end()),
      bandwidth_(bandwidth) {
  if (n_points_ < 2) throw DataError("insufficient-points: conditional mark mean needs n >= 2");
  if (t_grid_.empty()) throw DataError("estimation-error: empty t grid");
  for (std::size_t j = 0; j < t_grid_.size(); ++j) {
    if (t_grid_[j] <= 0.0 || (j > 0 && t_grid_[j] <= t_grid_[j - 1])) {
      throw DataError("estimation-error: t grid must be increasing and positive");
    }
  }
  if (!(bandwidth_ > 0.0)) throw DataError("estimation-error: bandwidth must be positive");

  const std::size_t grid_size = t_grid_.size();
  denominator_.assign(grid_size, 0.0);
  const std::vector<Point>& pts = pattern.points();
  const double t_min = t_grid_.front();
  const double t_max = t_grid_.back();

  for (std::size_t i = 0; i + 1 < n_points_; ++i) {
    for (std::size_t j = i + 1; j < n_points_; ++j) {
      const double dx = pts[i].x - pts[j].x;
      const double dy = pts[i].y - pts[j].y;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d < t_min - bandwidth_ || d > t_max + bandwidth_) continue;
      const auto lo = std::lower_bound(t_grid_.begin(), t_grid_.end(), d - bandwidth_);
      for (auto it = lo; it != t_grid_.end() && *it < d + bandwidth_; ++it) {
        const double u = (*it - d) / bandwidth_;
        const double k = 0.75 * (1.0 - u * u);
        if (k <= 0.0) continue;
        const std::uint32_t g = static_cast<std::uint32_t>(it - t_grid_.begin());
        contributions_.push_back({g, static_cast<std::uint32_t>(i),
                                  static_cast<std::uint32_t>(j), k});
        // Ordered pairs (x,y) and (y,x) both contribute.
        denominator_[g] += 2.0 * k;
      }
    }
  }
  bool any_defined = false;
  for (double d : denominator_) any_defined = any_defined || d > 0.0;
  if (!any_defined) throw DataError("estimation-error: all grid entries undefined");
}

ConditionalMarkMean ConditionalMarkMeanEvaluator::evaluate(std::span<const double> marks) const {
  if (marks.size() != n_points_) throw DataError("sample-length-mismatch");
  const std::size_t grid_size = t_grid_.size();
  std::vector<double> numerator(grid_size, 0.0);
  for (const Contribution& c : contributions_) {
    numerator[c.grid_index] += c.weight * (marks[c.point_i] + marks[c.point_j]);
  }
  ConditionalMarkMean result;
  result.t_grid = t_grid_;
  result.values.resize(grid_size, 0.0);
  result.defined.resize(grid_size, false);
  result.bandwidth = bandwidth_;
  for (std::size_t g = 0; g < grid_size; ++g) {
    if (denominator_[g] > 0.0) {
      result.values[g] = numerator[g] / denominator_[g];
      result.defined[g] = true;
    }
  }
  return result;
}

ConditionalMarkMean estimate_conditional_mark_mean(const MarkedPointPattern& pattern,
                                                   std::span<const double> marks,
                                                   std::span<const double> t_grid,
                                                   double bandwidth) {
  return ConditionalMarkMeanEvaluator(pattern, t_grid, bandwidth).evaluate(marks);
}

double schlather_statistic(const ConditionalMarkMean& estimate, double mark_mean) {
  const std::size_t grid_size = estimate.t_grid.size();
  if (grid_size == 0) throw DataError("estimation-error: empty estimate");
  double dt;
  if (grid_size > 1) {
    dt = (estimate.t_grid.back() - estimate.t_grid.front()) /
         static_cast<double>(grid_size - 1);
  } else {
    dt = estimate.t_grid.front();
  }
  double acc = 0.0;
  bool any_defined = false;
  for (std::size_t g = 0; g < grid_size; ++g) {
    if (!estimate.defined[g]) continue;
    const double dev = estimate.values[g] - mark_mean;
    acc += dev * dev;
    any_defined = true;
  }
  if (!any_defined) throw DataError("estimation-error: no defined grid entries");
  return std::sqrt(dt * acc);
}

std::vector<double> multitype_means(const MarkedPointPattern& pattern,
                                    const CovariateField& field) {
  if (!pattern.has_categorical_marks()) {
    throw DataError("multitype-needs-categorical-marks");
  }
  const CategoricalMarks& cm = pattern.categorical_marks();
  const int types = cm.level_count;
  std::vector<double> sums(static_cast<std::size_t>(types), 0.0);
  std::vector<long> counts(static_cast<std::size_t>(types), 0);
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const std::size_t level = static_cast<std::size_t>(cm.levels[i] - 1);
    sums[level] += field.eval(pattern.points()[i]);
    counts[level] += 1;
  }
  std::vector<double> means(static_cast<std::size_t>(types));
  for (int t = 0; t < types; ++t) {
    if (counts[static_cast<std::size_t>(t)] == 0) {
      throw DataError("insufficient-points: no points of type " + std::to_string(t + 1));
    }
    means[static_cast<std::size_t>(t)] =
        sums[static_cast<std::size_t>(t)] / static_cast<double>(counts[static_cast<std::size_t>(t)]);
  }
  return means;
}

std::vector<double> multitype_mean_diffs(const MarkedPointPattern& pattern,
                                         const CovariateField& field) {
  const std::vector<double> means = multitype_means(pattern, field);
  const std::size_t types = means.size();
  std::vector<double> diffs;
  diffs.reserve(types * (types - 1) / 2);
  for (std::size_t i = 0; i < types; ++i) {
    for (std::size_t j = i + 1; j < types; ++j) {
      diffs.push_back(means[i] - means[j]);
    }
  }
  return diffs;
}

std::vector<double> multicovariate_means(const MarkedPointPattern& pattern,
                                         std::span<const CovariateField> fields) {
  if (fields.empty()) throw DataError("multicovariate-needs-fields");
  std::vector<double> means;
  means.reserve(fields.size());
  for (const CovariateField& f : fields) {
    means.push_back(stat_mean_at_points(pattern, f));
  }
  return means;
}

}  // namespace randshift
