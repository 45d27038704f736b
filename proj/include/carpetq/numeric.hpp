// Numeric policy shared by all modules: log-space accumulation, the
// comparison rule for strict/non-strict window inequalities, exact
// rational arithmetic for small-integer-ratio inputs, and error types.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace carpetq {

using Rational = boost::multiprecision::cpp_rational;

// ---------------------------------------------------------------------------
// Errors. The CLI maps these onto exit codes 2/3/4.

enum class CarpetError {
  TooFewColumns,
  EmptyColumn,
  BadColumnRange,
  BadCellRange,
  A1,  // sum b_j > 1 or d_m > 1 - b_m
  A2,  // b_j + d_j > d_{j+1}
  A3,  // sum a_ij > 1, or a_ij >= b_j, or last cell leaves [0,1]
  A4,  // a_ij + c_ij > c_{i+1,j}
  NonPositiveProbability,
  ProbabilitySum,
  EmptyCellSet,
  NotBedfordMcMullen,
};

inline const char* to_string(CarpetError e) {
  switch (e) {
    case CarpetError::TooFewColumns: return "too_few_columns";
    case CarpetError::EmptyColumn: return "empty_column";
    case CarpetError::BadColumnRange: return "bad_column_range";
    case CarpetError::BadCellRange: return "bad_cell_range";
    case CarpetError::A1: return "A1";
    case CarpetError::A2: return "A2";
    case CarpetError::A3: return "A3";
    case CarpetError::A4: return "A4";
    case CarpetError::NonPositiveProbability: return "non_positive_probability";
    case CarpetError::ProbabilitySum: return "probability_sum";
    case CarpetError::EmptyCellSet: return "empty_cell_set";
    case CarpetError::NotBedfordMcMullen: return "not_bedford_mcmullen";
  }
  return "unknown";
}

class ValidationError : public std::runtime_error {
 public:
  ValidationError(CarpetError code, std::string msg)
      : std::runtime_error(std::move(msg)), code_(code) {}
  CarpetError code() const { return code_; }

 private:
  CarpetError code_;
};

class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(std::uint64_t partial, std::string what = "enumeration budget exceeded")
      : std::runtime_error(std::move(what)), partial_(partial) {}
  std::uint64_t partial_count() const { return partial_; }

 private:
  std::uint64_t partial_;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Budget {
  std::uint64_t max_words = 5'000'000;
};

// ---------------------------------------------------------------------------
// Comparison policy. All window predicates pair a non-strict with a strict
// inequality; on accumulated log-products we use an absolute tolerance and
// resolve ties in favor of the non-strict side, so a float tie can neither
// duplicate nor drop a completion.

inline constexpr double kCmpEps = 1e-12;

// a >= b up to eps (ties count as >=).
inline bool log_geq(double a, double b, double eps = kCmpEps) { return a >= b - eps; }
// a > b beyond eps (ties do not count as >).
inline bool log_gt(double a, double b, double eps = kCmpEps) { return a > b + eps; }
inline bool log_lt(double a, double b, double eps = kCmpEps) { return a < b - eps; }

// ---------------------------------------------------------------------------
// Streaming log-sum-exp: accumulates log(sum exp(x_i)) without overflow.

class LogSumExp {
 public:
  void add(double logx) {
    if (std::isinf(logx) && logx < 0) return;
    if (n_ == 0 || logx > max_) {
      if (n_ > 0) sum_ = sum_ * std::exp(max_ - logx) + 1.0;
      else sum_ = 1.0;
      max_ = logx;
    } else {
      sum_ += std::exp(logx - max_);
    }
    ++n_;
  }
  double value() const {
    if (n_ == 0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
  }
  std::uint64_t count() const { return n_; }

 private:
  double max_ = 0.0;
  double sum_ = 0.0;
  std::uint64_t n_ = 0;
};

// Merge two values already in log space.
inline double log_add(double a, double b) {
  if (std::isinf(a) && a < 0) return b;
  if (std::isinf(b) && b < 0) return a;
  double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// ---------------------------------------------------------------------------
// Exact rationals for parameter files whose entries are small-integer ratios.

inline std::optional<Rational> parse_rational(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      // Integer or decimal string; decimals become exact over a power of ten.
      auto dot = s.find('.');
      if (dot == std::string::npos) return Rational(boost::multiprecision::cpp_int(s));
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      std::size_t frac = s.size() - dot - 1;
      boost::multiprecision::cpp_int den = 1;
      for (std::size_t i = 0; i < frac; ++i) den *= 10;
      return Rational(boost::multiprecision::cpp_int(digits), den);
    }
    boost::multiprecision::cpp_int num(s.substr(0, slash));
    boost::multiprecision::cpp_int den(s.substr(slash + 1));
    if (den == 0) return std::nullopt;
    return Rational(num, den);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Rational rational_pow(Rational base, long e) {
  Rational out = 1;
  bool inv = e < 0;
  unsigned long n = inv ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
  while (n) {
    if (n & 1) out *= base;
    base *= base;
    n >>= 1;
  }
  if (inv) out = Rational(1) / out;
  return out;
}

// ---------------------------------------------------------------------------
// Counter-based RNG: stateless mixing of (seed, index, step) so that parallel
// or re-ordered generation is bit-stable.

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct CounterRng {
  std::uint64_t key;
  std::uint64_t ctr = 0;
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key(mix64(seed ^ mix64(stream * 0xda942042e4dd58b5ULL + 1))) {}
  std::uint64_t next_u64() { return mix64(key ^ mix64(++ctr * 0x9e3779b97f4a7c15ULL)); }
  // Uniform in [0,1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }
};

// FNV-1a, used for reproducibility headers.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace carpetq
