#ifndef BITKILN_RNG_HPP
#define BITKILN_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace bitkiln {

/// Seeded generator with portable bounded draws. std::shuffle and the
/// standard distributions are implementation-defined, so everything that
/// must reproduce byte-identically across toolchains goes through this.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t nextU64() { return engine_(); }

  /// Uniform integer in [0, bound), unbiased via rejection. bound > 0.
  uint64_t below(uint64_t bound) {
    const uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const uint64_t r = nextU64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double unitDouble() { return (nextU64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unitDouble() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Seeded FNV-1a with a final mix; stable across platforms.
uint64_t seededHash(uint64_t seed, std::string_view bytes);

/// Fisher-Yates with Rng draws (deterministic for a given seed).
template <class T>
void shuffleVector(std::vector<T>& items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace bitkiln

#endif  // BITKILN_RNG_HPP
