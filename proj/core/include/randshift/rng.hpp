#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace randshift {

/// Deterministic random stream. All stochastic code in this library draws
/// from Rng instead of <random> distributions, so that results are
/// bit-identical across platforms, standard libraries and thread counts.
///
/// Streams are derived, never split: a consumer with master seed s gives
/// replicate i the stream Rng(derive(s, {i})). Consuming a variable number
/// of draws in one stream never affects any other stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; generates pairs, caches the spare.
  double normal();

  /// Poisson count with arbitrary mean >= 0 (exact; large means are split
  /// into sums of smaller ones to avoid exp underflow).
  long poisson(double mean);

  /// Mixes a path of integers into a master seed. Derivations with
  /// different paths give statistically independent streams.
  static std::uint64_t derive(std::uint64_t master,
                              std::initializer_list<std::uint64_t> path);

  /// FNV-1a of a label, for deriving streams keyed by strings.
  static std::uint64_t hash_label(std::string_view label);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace randshift
