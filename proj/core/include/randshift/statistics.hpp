#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "randshift/geometry.hpp"
#include "randshift/random_field.hpp"

namespace randshift {

enum class StatisticKind {
  mean_at_points,
  covariance,
  pearson,
  kendall,
  schlather_e,
  multitype_mean_diffs,
  multicovariate_means,
};

/// Sample mean of the field values at the pattern's points.
double stat_mean_at_points(const MarkedPointPattern& pattern, const CovariateField& field);

/// Unbiased sample covariance (n-1 divisor).
double stat_sample_cov(std::span<const double> marks, std::span<const double> covariate_values);

/// Pearson correlation; requires n >= 3 and both samples non-constant.
double stat_pearson(std::span<const double> marks, std::span<const double> covariate_values);

/// Kendall tau-a over ordered pairs with divisor n(n-1); ties contribute 0.
/// Dispatches to the merge-sort path for large n; both paths compute the
/// same integer pair sum and agree bit-exactly.
double stat_kendall(std::span<const double> marks, std::span<const double> covariate_values);

/// Reference O(n^2) implementation (normative).
double stat_kendall_reference(std::span<const double> marks,
                              std::span<const double> covariate_values);

/// Accelerated O(n log n) implementation.
double stat_kendall_fast(std::span<const double> marks,
                         std::span<const double> covariate_values);

/// Marginal transform to normal scores: value i -> standard normal
/// quantile of (rank_i - 0.5)/n, ties sharing the average rank.
std::vector<double> normal_scores(std::span<const double> values);

struct ConditionalMarkMean {
  std::vector<double> t_grid;
  std::vector<double> values;      // E-hat(t); meaningful where defined
  std::vector<bool> defined;       // false where the kernel support is empty
  double bandwidth = 0.0;
};

/// Precomputed pair-kernel weights for estimating the conditional mean
/// mark at interpoint distance t (Epanechnikov kernel) over an increasing
/// positive grid. The geometry part is mark-independent, so one evaluator
/// serves many mark vectors on the same pattern.
class ConditionalMarkMeanEvaluator {
 public:
  ConditionalMarkMeanEvaluator(const MarkedPointPattern& pattern,
                               std::span<const double> t_grid, double bandwidth);

  ConditionalMarkMean evaluate(std::span<const double> marks) const;

 private:
  struct Contribution {
    std::uint32_t grid_index;
    std::uint32_t point_i;
    std::uint32_t point_j;
    double weight;
  };
  std::size_t n_points_;
  std::vector<double> t_grid_;
  double bandwidth_;
  std::vector<Contribution> contributions_;
  std::vector<double> denominator_;
};

/// Kernel estimate of the conditional mean mark at interpoint distance t.
ConditionalMarkMean estimate_conditional_mark_mean(const MarkedPointPattern& pattern,
                                                   std::span<const double> marks,
                                                   std::span<const double> t_grid,
                                                   double bandwidth);

/// l2-type deviation of E-hat from the constant mark mean:
/// sqrt(dt * sum over defined grid entries of (E-hat(t) - mark_mean)^2).
double schlather_statistic(const ConditionalMarkMean& estimate, double mark_mean);

/// Per-type means of the covariate at points, differenced over all type
/// pairs in the order (1-2, 1-3, ..., (M-1)-M).
std::vector<double> multitype_mean_diffs(const MarkedPointPattern& pattern,
                                         const CovariateField& field);

/// Per-type means (no differencing); helper for the multitype test.
std::vector<double> multitype_means(const MarkedPointPattern& pattern,
                                    const CovariateField& field);

/// Component k = stat_mean_at_points against field k.
std::vector<double> multicovariate_means(const MarkedPointPattern& pattern,
                                         std::span<const CovariateField> fields);

}  // namespace randshift
