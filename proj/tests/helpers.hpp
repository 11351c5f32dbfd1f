// Shared test oracles: reference bit operations on uncompressed words,
// reflected Gray sequences, randomized bitmap generators, and a
// chi-square tail probability. Everything here is independent of the
// compressed implementations it checks.
#ifndef BITKILN_TESTS_HELPERS_HPP
#define BITKILN_TESTS_HELPERS_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bitkiln/rng.hpp"

namespace testutil {

// --- uncompressed reference bitset -----------------------------------

struct RawBits {
  std::vector<uint32_t> words;
  uint64_t bits = 0;

  static RawBits zeros(uint64_t bits) {
    return RawBits{std::vector<uint32_t>((bits + 31) / 32, 0u), bits};
  }

  void set(uint64_t i) { words[i / 32] |= 1u << (i % 32); }

  bool get(uint64_t i) const { return (words[i / 32] >> (i % 32)) & 1u; }

  std::vector<uint64_t> positions() const {
    std::vector<uint64_t> out;
    for (uint64_t i = 0; i < bits; ++i) {
      if (get(i)) out.push_back(i);
    }
    return out;
  }

  bool operator==(const RawBits&) const = default;
};

inline RawBits rawOp(char op, const RawBits& a, const RawBits& b) {
  RawBits out = RawBits::zeros(a.bits);
  for (size_t i = 0; i < out.words.size(); ++i) {
    switch (op) {
      case '&':
        out.words[i] = a.words[i] & b.words[i];
        break;
      case '|':
        out.words[i] = a.words[i] | b.words[i];
        break;
      case '^':
        out.words[i] = a.words[i] ^ b.words[i];
        break;
      case '-':  // and-not
        out.words[i] = a.words[i] & ~b.words[i];
        break;
    }
  }
  if (out.bits % 32 != 0 && !out.words.empty()) {
    out.words.back() &= (1u << (out.bits % 32)) - 1;
  }
  return out;
}

// String like "1000010": character i is row i.
inline RawBits rawFromString(const std::string& s) {
  RawBits out = RawBits::zeros(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1') out.set(i);
  }
  return out;
}

// --- randomized bitmap generators -------------------------------------

// Independent bits at the given density.
inline RawBits randomDense(bitkiln::Rng& rng, uint64_t bits, double density) {
  RawBits out = RawBits::zeros(bits);
  for (uint64_t i = 0; i < bits; ++i) {
    if (rng.unitDouble() < density) out.set(i);
  }
  return out;
}

// Alternating 0-runs, 1-runs, and noisy stretches; exercises the marker
// machinery harder than iid bits.
inline RawBits randomRuns(bitkiln::Rng& rng, uint64_t bits) {
  RawBits out = RawBits::zeros(bits);
  uint64_t i = 0;
  while (i < bits) {
    const uint64_t len = 1 + rng.below(1 + rng.below(4096));
    const uint64_t mode = rng.below(3);  // 0 = zeros, 1 = ones, 2 = noise
    for (uint64_t j = 0; j < len && i < bits; ++j, ++i) {
      if (mode == 1 || (mode == 2 && rng.below(2) == 1)) out.set(i);
    }
  }
  return out;
}

// --- reflected Gray sequences ------------------------------------------

// j-th code of the L-bit reflected Gray sequence, element 0 first.
inline std::vector<uint8_t> grayCodeRow(uint32_t L, uint64_t j) {
  const uint64_t g = j ^ (j >> 1);
  std::vector<uint8_t> row(L);
  for (uint32_t b = 0; b < L; ++b) {
    row[b] = static_cast<uint8_t>((g >> (L - 1 - b)) & 1u);
  }
  return row;
}

// --- chi-square --------------------------------------------------------

// Regularized lower incomplete gamma P(a, x) by series / continued
// fraction (Numerical Recipes style).
inline double gammaP(double a, double x) {
  if (x < 0.0 || a <= 0.0) return 0.0;
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-14) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-14) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

// P(chi2 with df degrees of freedom exceeds x).
inline double chiSquareTail(double x, double df) {
  return 1.0 - gammaP(df / 2.0, x / 2.0);
}

}  // namespace testutil

#endif  // BITKILN_TESTS_HELPERS_HPP
