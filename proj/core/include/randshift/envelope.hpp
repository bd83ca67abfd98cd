#pragma once

#include <span>
#include <vector>

namespace randshift {

struct EnvelopeResult {
  std::vector<double> t0;     // observed vector statistic
  std::vector<double> lower;  // componentwise envelope at the given level
  std::vector<double> upper;
  std::vector<long> erl;      // extreme-rank-length measure per function,
                              // erl[0] for the data; smaller = more extreme
  double p_value = 1.0;
  double level = 0.05;
  std::vector<std::vector<double>> replicates;  // the tested vectors T_1..T_N
  std::vector<long> retained;                   // n_0..n_N, filled by shift engines
};

/// Global envelope test using the extreme-rank-length ordering. For each
/// component the two-sided pointwise rank of a function is
/// min(#{values <= own}, #{values >= own}) among all N+1 functions; each
/// function is then summarized by its ascending-sorted rank vector, and
/// functions are ordered lexicographically (small early ranks = extreme).
/// The measure reported per function counts how many functions are at
/// least as extreme, so ties are conservative. Envelope bounds are the
/// componentwise min/max over the functions not rejected at `level`.
EnvelopeResult global_envelope_test(std::span<const double> observed,
                                    const std::vector<std::vector<double>>& replicates,
                                    double level = 0.05);

}  // namespace randshift
