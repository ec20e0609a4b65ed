#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace aircran {

/**
 * Deterministic random stream. mt19937_64 plus explicit Box-Muller so that
 * sequences do not depend on the standard library's distribution
 * implementations. Parallel workers derive independent streams with
 * derive_seed.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (second draw cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Circularly-symmetric complex normal with total variance `variance`.
  std::complex<double> cnormal(double variance = 1.0) {
    double s = std::sqrt(variance / 2.0);
    double re = normal();
    double im = normal();
    return {s * re, s * im};
  }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 mix; used to derive well-separated per-task seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(base ^ 0x6a09e667f3bcc909ULL);
  s = mix64(s ^ a);
  s = mix64(s ^ b);
  return mix64(s ^ c);
}

}  // namespace aircran
