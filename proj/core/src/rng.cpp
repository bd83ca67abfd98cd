#include "randshift/rng.hpp"

#include <cmath>

namespace randshift {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  spare_ = radius * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return radius * std::cos(kTwoPi * u2);
}

long Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  // Knuth inversion is exact but multiplies uniforms down to exp(-mean),
  // which underflows for large means; split into independent chunks.
  long count = 0;
  while (mean > 30.0) {
    double chunk = 30.0;
    const double limit = std::exp(-chunk);
    double prod = 1.0;
    long k = -1;
    do {
      prod *= uniform_pos();
      ++k;
    } while (prod > limit);
    count += k;
    mean -= chunk;
  }
  const double limit = std::exp(-mean);
  double prod = 1.0;
  long k = -1;
  do {
    prod *= uniform_pos();
    ++k;
  } while (prod > limit);
  return count + k;
}

std::uint64_t Rng::derive(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t part : path) {
    h = splitmix64(h ^ splitmix64(part));
  }
  return h;
}

std::uint64_t Rng::hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace randshift
