#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace wgp {

/// Raised when inputs violate a documented precondition (bad files, size
/// mismatches, out-of-range parameters). Maps to CLI exit code 2.
class invalid_input : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on numerical failure (loss of positive definiteness, non-finite
/// values). Maps to CLI exit code 3.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent sub-seed for stream `stream` of a master seed. Used so that
/// parallel work items draw from decoupled generators regardless of thread
/// count.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
}

/// Deterministic random generator. The engine is mt19937_64 (bit-exact by
/// the standard); the distributions are coded here rather than taken from
/// <random> because the standard leaves their algorithms unspecified and we
/// promise bit-identical streams across platforms and library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * u2);
    has_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang squeeze; shape < 1 uses the boost
  /// Gamma(shape+1) * U^{1/shape}.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw invalid_input("gamma shape must be positive");
    if (shape < 1.0) {
      const double u = std::max(uniform(), 1e-300);
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = std::max(uniform(), 1e-300);
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Standard normal quantile (inverse CDF). Acklam's rational approximation
/// followed by one Halley step; absolute error below 1e-13 on (1e-300, 1).
double normal_quantile(double p);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Items must
/// be independent and write to disjoint state; the partition is static so
/// results do not depend on scheduling. Exceptions are rethrown in the
/// calling thread.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace wgp
