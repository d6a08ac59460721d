#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lio {

// Deterministic Gaussian/uniform source on top of mt19937_64. The standard
// engine is bit-portable; the standard distributions are not, so uniforms
// are built from raw 53-bit draws and normals via Box-Muller.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  double uniform() {  // [0, 1)
    return (engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  // Independent substream; streams may be generated in any order without
  // affecting each other.
  Rng substream(std::uint64_t stream_id) const {
    return Rng(mix(seed_, stream_id));
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream_id) {
    // splitmix64 step
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace lio
