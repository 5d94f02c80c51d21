#ifndef EBMEDIT_COMMON_HPP
#define EBMEDIT_COMMON_HPP

#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ebmedit {

// Base for every error raised by the library. Subclasses let callers (the CLI,
// the HTTP layer) map failures onto exit codes and status codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what, std::vector<std::string> details = {})
      : Error(what), details_(std::move(details)) {}
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  std::vector<std::string> details_;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

class TrainError : public Error {
 public:
  using Error::Error;
};

class EditError : public Error {
 public:
  using Error::Error;
};

// Row-major dense 2-D table. Used for interaction score matrices, their
// per-cell weights, discrepancy maps and replacement masks.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  T& operator()(std::size_t m, std::size_t n) {
    assert(m < rows_ && n < cols_);
    return values_[m * cols_ + n];
  }
  const T& operator()(std::size_t m, std::size_t n) const {
    assert(m < rows_ && n < cols_);
    return values_[m * cols_ + n];
  }

  std::vector<T>& values() noexcept { return values_; }
  const std::vector<T>& values() const noexcept { return values_; }

  bool same_shape(const Grid& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> values_;
};

// Logistic link, stable for large |s|.
inline double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

// Binary log-loss of a single logit against label y, without forming p.
inline double log_loss_from_logit(double s, int y) {
  // log(1 + exp(-|s|)) + max(s, 0) - y*s
  const double soft = std::log1p(std::exp(-std::abs(s))) + (s > 0.0 ? s : 0.0);
  return soft - (y ? s : 0.0);
}

// Deterministic random helpers. std::mt19937_64 output is fixed by the
// standard; the distributions in <random> are not, so these are written out.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    assert(n > 0);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// FNV-1a, used for run-manifest input hashes and model fingerprints.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Shortest text that round-trips a double exactly.
inline std::string format_double(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace ebmedit

#endif  // EBMEDIT_COMMON_HPP
