#pragma once

#include <stdexcept>
#include <string>

namespace randshift {

/// Invalid or inconsistent inputs: bad windows, malformed files, empty
/// patterns, unsupported correction/window combinations, stale caches.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failures: non-PSD circulant embeddings, failed factorizations.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace randshift
