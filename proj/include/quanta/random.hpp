#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace quanta {

/// Default master seed used by every randomized operation and the CLI.
inline constexpr std::uint64_t kDefaultSeed = 20160301;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded random stream. Draws are produced from raw engine bits (not from
/// the implementation-defined std distributions) so that a (seed, stream)
/// pair gives the same numbers with every standard library.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Independent substream for replicate `index` of a computation seeded
  /// with `master`. Substreams do not depend on evaluation order.
  static Rng substream(std::uint64_t master, std::uint64_t index) {
    return Rng(splitmix64(master ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t limit = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= limit) return r % n;
    }
  }

  /// Standard normal via Box-Muller (one value per call, the pair's
  /// second value is cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace quanta
