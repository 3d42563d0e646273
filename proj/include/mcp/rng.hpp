#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mcp {

/// Stateless counter-based generator: every draw is a pure function of
/// (seed, stream, counter, slot), so parallel and serial sample loops
/// produce bit-identical values regardless of scheduling.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ull))) {}

  /// Uniform in [0, 1).
  double uniform(std::uint64_t counter, std::uint64_t slot) const {
    return to_unit(word(counter, slot, 1));
  }

  double uniform(std::uint64_t counter, std::uint64_t slot, double a, double b) const {
    return a + (b - a) * uniform(counter, slot);
  }

  /// Standard normal (Box-Muller); slot namespaces are independent of
  /// uniform's.
  double normal(std::uint64_t counter, std::uint64_t slot) const {
    const double u1 = 1.0 - to_unit(word(counter, 2 * slot, 2));      // (0, 1]
    const double u2 = to_unit(word(counter, 2 * slot + 1, 2));
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  std::uint64_t word(std::uint64_t counter, std::uint64_t slot,
                     std::uint64_t tag) const {
    return mix(key_ ^ mix(counter * 0x9e3779b97f4a7c15ull + slot * 0xc2b2ae3d27d4eb4full +
                          tag * 0x165667b19e3779f9ull));
  }
  static double to_unit(std::uint64_t w) {
    return static_cast<double>(w >> 11) * 0x1.0p-53;
  }

  std::uint64_t key_;
};

}  // namespace mcp
