#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace foodrec {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Image channel plane, height x width, row-major to match raster storage.
using ImagePlane = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// CLI exit-code contract: 0 success, 1 usage, 2 data/schema, 3 training, 4 prediction.
enum class ErrorCode : int { usage = 1, data = 2, training = 3, prediction = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

#define FOODREC_DEFINE_ERROR(NAME, CODE)                                  \
  class NAME : public Error {                                             \
   public:                                                                \
    explicit NAME(const std::string& what) : Error(ErrorCode::CODE, what) {} \
  }

FOODREC_DEFINE_ERROR(UsageError, usage);
FOODREC_DEFINE_ERROR(IoError, data);
FOODREC_DEFINE_ERROR(FormatError, data);
FOODREC_DEFINE_ERROR(SchemaError, data);
FOODREC_DEFINE_ERROR(ParseError, data);
FOODREC_DEFINE_ERROR(DomainError, data);
FOODREC_DEFINE_ERROR(NotFoundError, data);
FOODREC_DEFINE_ERROR(DetectionError, data);
FOODREC_DEFINE_ERROR(SamplingError, data);
FOODREC_DEFINE_ERROR(ProtocolError, data);
FOODREC_DEFINE_ERROR(FitError, training);
FOODREC_DEFINE_ERROR(TrainingError, training);
FOODREC_DEFINE_ERROR(StratificationError, training);
FOODREC_DEFINE_ERROR(PredictionError, prediction);

#undef FOODREC_DEFINE_ERROR

// SplitMix64. Deterministic across platforms, unlike <random> distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0,n). Rejection sampling keeps it unbiased.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Uniform integer in [lo,hi] inclusive.
  int next_int(int lo, int hi) {
    return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Standard normal via Box-Muller.
  double next_normal() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[next_below(i)]);
    }
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const Mat& m, std::uint64_t h = 1469598103934665603ull) {
  return fnv1a(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()), h);
}

}  // namespace foodrec
