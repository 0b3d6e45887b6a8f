#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace alfa {

// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream domains derived from one base seed.
enum class StreamDomain : std::uint64_t {
  modification = 0x6d6f646966790000ULL,
  run = 0x72756e0000000000ULL,
  bootstrap = 0x626f6f7400000000ULL,
  generation = 0x67656e0000000000ULL,
};

// Seed for stream (domain, major, minor). For a fixed base seed and domain
// the map (major, minor) -> seed is injective as long as both indices fit in
// 32 bits: the key is packed losslessly and mix64 is a bijection.
constexpr std::uint64_t derive_seed(std::uint64_t base, StreamDomain domain,
                                    std::uint64_t major,
                                    std::uint64_t minor = 0) noexcept {
  const std::uint64_t key = (major << 32) | (minor & 0xffffffffULL);
  return mix64(mix64(base ^ static_cast<std::uint64_t>(domain)) ^ key);
}

// Deterministic random source. Only the raw 64-bit engine output is taken
// from the standard library; every derived draw is computed here so results
// are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1).
  double uniform_open() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  bool coin() { return (next() >> 63) != 0; }

  // Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace alfa
