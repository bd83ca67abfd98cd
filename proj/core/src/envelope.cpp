#include "randshift/envelope.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "randshift/errors.hpp"

namespace randshift {

EnvelopeResult global_envelope_test(std::span<const double> observed,
                                    const std::vector<std::vector<double>>& replicates,
                                    double level) {
  const std::size_t dims = observed.size();
  const std::size_t n_reps = replicates.size();
  if (dims == 0) throw DataError("envelope-empty-statistic");
  if (n_reps < 19) throw DataError("envelope-too-few-replicates");
  for (const std::vector<double>& r : replicates) {
    if (r.size() != dims) throw DataError("envelope-dimension-mismatch");
  }
  const std::size_t total = n_reps + 1;  // function 0 is the data

  auto value_of = [&](std::size_t fn, std::size_t k) {
    return fn == 0 ? observed[k] : replicates[fn - 1][k];
  };

  // Two-sided pointwise ranks per component.
  std::vector<std::vector<long>> ranks(total, std::vector<long>(dims));
  std::vector<double> column(total);
  for (std::size_t k = 0; k < dims; ++k) {
    for (std::size_t fn = 0; fn < total; ++fn) column[fn] = value_of(fn, k);
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t fn = 0; fn < total; ++fn) {
      const double v = column[fn];
      const long below =
          std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
      const long above =
          sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), v);
      ranks[fn][k] = std::min(below, above);
    }
  }

  // Ascending-sorted rank vectors, ordered lexicographically.
  for (std::vector<long>& r : ranks) std::sort(r.begin(), r.end());
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });

  // Measure = number of functions at least as extreme (ties share it).
  std::vector<long> erl(total, 0);
  std::size_t pos = 0;
  while (pos < total) {
    std::size_t end = pos + 1;
    while (end < total && ranks[order[end]] == ranks[order[pos]]) ++end;
    for (std::size_t i = pos; i < end; ++i) erl[order[i]] = static_cast<long>(end);
    pos = end;
  }

  long at_least_as_extreme = 0;
  for (std::size_t fn = 1; fn < total; ++fn) {
    if (erl[fn] <= erl[0]) ++at_least_as_extreme;
  }

  EnvelopeResult result;
  result.t0.assign(observed.begin(), observed.end());
  result.erl = std::move(erl);
  result.level = level;
  result.replicates = replicates;
  result.p_value = static_cast<double>(1 + at_least_as_extreme) / static_cast<double>(total);

  const std::size_t n_reject =
      static_cast<std::size_t>(level * static_cast<double>(total));
  result.lower.assign(dims, std::numeric_limits<double>::infinity());
  result.upper.assign(dims, -std::numeric_limits<double>::infinity());
  for (std::size_t i = n_reject; i < total; ++i) {
    const std::size_t fn = order[i];
    for (std::size_t k = 0; k < dims; ++k) {
      result.lower[k] = std::min(result.lower[k], value_of(fn, k));
      result.upper[k] = std::max(result.upper[k], value_of(fn, k));
    }
  }
  return result;
}

}  // namespace randshift
