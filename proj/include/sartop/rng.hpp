#ifndef SARTOP_RNG_HPP_
#define SARTOP_RNG_HPP_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace sartop {

/// Seeded random source used by every sampling and initialization routine.
///
/// The engine is std::mt19937_64 (fully specified by the standard); all
/// derived draws (uniform, normal, index, shuffle) are implemented here
/// instead of via std::*_distribution so that equal seeds produce equal
/// streams regardless of the standard library in use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal();

  /// Uniform index in [0, n), unbiased (rejection sampling). n must be > 0.
  std::size_t index(std::size_t n);

  /// Fisher-Yates shuffle driven by index().
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  /// Derives an independent stream seed from (seed, stream tag).
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

}  // namespace sartop

#endif  // SARTOP_RNG_HPP_
