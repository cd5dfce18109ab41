#pragma once

#include <cmath>
#include <cstdint>
#include <random>

// Deterministic random utilities.
//
// All randomness in the library flows through Rng, which wraps std::mt19937_64
// (bit-exact across platforms by the C++ standard) and converts raw 64-bit
// draws to doubles / Gaussians itself.  std::uniform_real_distribution and
// std::normal_distribution are deliberately avoided: their output is
// implementation-defined, which would break byte-identical reproducibility of
// simulated corpora and trained models across standard libraries.

namespace leape {

// SplitMix64 (Steele, Lea, Flood 2014): used to derive independent
// sub-streams from one user-facing seed.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derive a child seed from (base, tag).  Distinct tags give uncorrelated
// streams; used to partition seeds per shell / per sample / per epoch.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  std::uint64_t s = base ^ (0x9E3779B97F4A7C15ull * (tag + 1));
  std::uint64_t first = splitmix64_next(s);
  return first ^ splitmix64_next(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1): 53 random mantissa bits.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1]: safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform_in(double a, double b) { return a + (b - a) * uniform(); }

  // Uniform integer in [0, n): rejection-free modulo is fine here because n
  // is always tiny relative to 2^64 (bias < 2^-40 for n < 2^24).
  std::uint64_t index(std::uint64_t n) { return eng_() % n; }

  // Standard normal via Box-Muller (explicit, for cross-platform determinism).
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;  // 2*pi
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace leape
