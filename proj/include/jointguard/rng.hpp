#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace jointguard {

// Seeded 64-bit generator. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; the real-valued mappings below are
// spelled out here (instead of std::*_distribution, which are
// implementation-defined) so streams reproduce across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on [low, high).
  double uniform(double low, double high) { return low + (high - low) * uniform01(); }

  // Uniform integer on [low, high]; the modulo bias is below 2^-40 for the
  // ranges used here.
  std::uint64_t uniform_int(std::uint64_t low, std::uint64_t high) {
    return low + engine_() % (high - low + 1);
  }

  // Exponential with the given rate, by inversion.
  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace jointguard
