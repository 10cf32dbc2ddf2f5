#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace vexrisk {

/// Seeded generator producing the same stream on every platform.
/// std::mt19937_64 output is pinned by the standard; the distributions in
/// <random> are not, so uniforms are derived from the raw bits directly.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
  }

  /// Strictly positive weights summing to one.
  std::vector<double> probability_vector(std::size_t n, double floor = 0.05) {
    std::vector<double> w(n);
    double sum = 0.0;
    for (auto& wi : w) {
      wi = floor + uniform();
      sum += wi;
    }
    for (auto& wi : w) wi /= sum;
    return w;
  }

  std::uint64_t raw() { return gen_(); }

private:
  std::mt19937_64 gen_;
};

}  // namespace vexrisk
