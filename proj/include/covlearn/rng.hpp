#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace covlearn {

/// splitmix64 finalizer; used to derive independent stream seeds from a base
/// seed and a stream index without correlated low bits.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic random stream. Draws go through fixed arithmetic on raw
/// mt19937_64 outputs instead of std::uniform_real_distribution /
/// std::normal_distribution, whose outputs vary across standard library
/// implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  RngStream(std::uint64_t base, std::uint64_t stream)
      : engine_(mix_seed(base, stream)) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller. Consumes exactly two uniforms per call
  /// and caches nothing, so the draw count is a pure function of the call
  /// count.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) {
      u1 = uniform();
    }
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [lo, hi] inclusive via rejection-free scaling of a
  /// 53-bit uniform; bias is < 2^-40 for the ranges used here.
  int uniform_int(int lo, int hi) {
    const double u = uniform();
    int v = lo + static_cast<int>(u * static_cast<double>(hi - lo + 1));
    return v > hi ? hi : v;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace covlearn
