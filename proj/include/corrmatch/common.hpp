#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace corrmatch {

inline constexpr const char* kVersion = "0.1.0";

// Error hierarchy. The CLI maps these onto exit codes:
//   ConfigError -> 2, NumericError -> 4, everything else -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract configuration (bad key, bad value).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input data or violated data contract.
class DataError : public Error {
 public:
  using Error::Error;
};

// Input too small/empty for the requested operation.
class DegenerateInputError : public DataError {
 public:
  using DataError::DataError;
};

// Dimension/length mismatch between two coupled objects.
class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

// Identifier not present in a required table.
class LookupError : public DataError {
 public:
  using DataError::DataError;
};

// Step indices arrived out of order.
class OrderingError : public DataError {
 public:
  using DataError::DataError;
};

// API used against its state contract (stale cache, unfrozen stats, ...).
class StateError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf or divergence in a numeric computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * M_PI;
  a = std::fmod(a + M_PI, kTwoPi);
  if (a <= 0.0) a += kTwoPi;
  return a - M_PI;
}

inline double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Population variance (divide by N).
inline double population_variance(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) {
    const double d = x - m;
    s += d * d;
  }
  return s / static_cast<double>(v.size());
}

// Pearson correlation; 0 when either side is (numerically) constant.
inline double pearson(std::span<const double> a, std::span<const double> b) {
  const size_t n = std::min(a.size(), b.size());
  if (n < 2) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa < 1e-12 || sbb < 1e-12) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

// splitmix64; used to derive independent deterministic RNG streams.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic substream seed from a base seed and a stream tag.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 0x51ab5e3adULL));
}

}  // namespace corrmatch
