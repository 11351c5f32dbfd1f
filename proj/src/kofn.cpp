#include "bitkiln/kofn.hpp"

#include <algorithm>
#include <stdexcept>

#include "bitkiln/errors.hpp"
#include "bitkiln/gray.hpp"

namespace bitkiln {

uint64_t binomialCapped(uint64_t n, uint64_t k, uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // C(n-k+i, i) stays integral at every step of the product.
  unsigned __int128 r = 1;
  for (uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r >= cap) return cap;
  }
  return static_cast<uint64_t>(r);
}

uint32_t bitmapsNeeded(uint64_t cardinality, uint32_t k) {
  if (k == 0) throw std::invalid_argument("bitmapsNeeded: k must be >= 1");
  if (cardinality <= 1) return k;
  if (k == 1) {
    if (cardinality > UINT32_MAX) {
      throw std::invalid_argument("bitmapsNeeded: cardinality too large");
    }
    return static_cast<uint32_t>(cardinality);
  }
  uint64_t n = k;
  while (binomialCapped(n, k, cardinality) < cardinality) ++n;
  return static_cast<uint32_t>(n);
}

std::optional<uint32_t> maxAllowedK(uint64_t cardinality) {
  if (cardinality <= 5) return 1;
  if (cardinality <= 21) return 2;
  if (cardinality <= 85) return 3;
  return std::nullopt;
}

uint32_t effectiveK(uint32_t requestedK, uint64_t cardinality) {
  const uint32_t k = std::max(requestedK, 1u);
  const auto cap = maxAllowedK(cardinality);
  return cap ? std::min(k, *cap) : k;
}

std::string AttributeCode::bitRow(uint32_t bitmapCount) const {
  std::string row(bitmapCount, '0');
  for (const uint32_t p : positions) row[p] = '1';
  return row;
}

std::string_view allocationName(Allocation a) {
  return a == Allocation::Alphabetic ? "alpha" : "gray";
}

Allocation allocationFromName(std::string_view name) {
  if (name == "alpha" || name == "alphabetic") return Allocation::Alphabetic;
  if (name == "gray") return Allocation::Gray;
  throw std::invalid_argument("unknown allocation strategy: " +
                              std::string(name));
}

std::vector<AttributeCode> enumerateCodesLex(uint32_t bitmapCount, uint32_t k,
                                             uint64_t limit) {
  std::vector<AttributeCode> codes;
  if (limit == 0 || k == 0 || k > bitmapCount) return codes;
  std::vector<uint32_t> current(k);
  for (uint32_t i = 0; i < k; ++i) current[i] = i;
  for (;;) {
    codes.push_back(AttributeCode{current});
    if (codes.size() == limit) break;
    // Successor: bump the rightmost position that still has room, then
    // restack everything after it.
    uint32_t i = k;
    while (i > 0 && current[i - 1] == bitmapCount - (k - i) - 1) --i;
    if (i == 0) break;  // {N-k .. N-1} was the last subset
    ++current[i - 1];
    for (uint32_t j = i; j < k; ++j) current[j] = current[j - 1] + 1;
  }
  return codes;
}

ColumnDictionary ColumnDictionary::allocate(std::vector<std::string> values,
                                            uint32_t k, uint32_t bitmapCount,
                                            Allocation strategy,
                                            uint64_t grayCeiling) {
  if (k == 0 || k > bitmapCount) {
    throw std::invalid_argument("allocate: need 1 <= k <= bitmapCount");
  }
  for (size_t i = 1; i < values.size(); ++i) {
    if (!(values[i - 1] < values[i])) {
      throw std::invalid_argument("allocate: values not strictly ascending");
    }
  }
  const uint64_t capacity =
      binomialCapped(bitmapCount, k, UINT64_MAX);
  if (values.size() > capacity) {
    throw std::invalid_argument(
        "allocate: cardinality exceeds C(bitmapCount, k)");
  }

  ColumnDictionary dict;
  dict.k_ = k;
  dict.bitmapCount_ = bitmapCount;
  dict.strategy_ = strategy;
  if (strategy == Allocation::Alphabetic) {
    dict.codes_ = enumerateCodesLex(bitmapCount, k, values.size());
  } else {
    if (capacity > grayCeiling) {
      throw std::invalid_argument(
          "allocate: gray allocation would materialize more than the "
          "configured ceiling of codes");
    }
    auto all = enumerateCodesLex(bitmapCount, k, capacity);
    std::sort(all.begin(), all.end(),
              [](const AttributeCode& a, const AttributeCode& b) {
                return compareGrayCodePositions(a.positions, b.positions) ==
                       std::strong_ordering::less;
              });
    all.resize(values.size());
    dict.codes_ = std::move(all);
  }
  dict.rankOf_.reserve(values.size());
  for (size_t i = 0; i < values.size(); ++i) dict.rankOf_.emplace(values[i], i);
  dict.values_ = std::move(values);
  return dict;
}

const AttributeCode* ColumnDictionary::findCode(const std::string& value) const {
  const auto it = rankOf_.find(value);
  return it == rankOf_.end() ? nullptr : &codes_[it->second];
}

const AttributeCode& ColumnDictionary::codeOf(const std::string& value) const {
  const AttributeCode* code = findCode(value);
  if (code == nullptr) throw UnknownValueError(value);
  return *code;
}

}  // namespace bitkiln
