#ifndef BITKILN_KOFN_HPP
#define BITKILN_KOFN_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bitkiln {

/// Largest candidate set the Gray allocation will materialize and sort.
constexpr uint64_t kDefaultGrayCeiling = 1ull << 24;

/// min(C(n, k), cap); never overflows.
uint64_t binomialCapped(uint64_t n, uint64_t k, uint64_t cap);

/// Smallest N >= k with C(N, k) >= cardinality.
uint32_t bitmapsNeeded(uint64_t cardinality, uint32_t k);

/// Cardinality heuristic: columns with at most 5 distinct values are
/// limited to 1-of-N, at most 21 to 2-of-N, at most 85 to 3-of-N. Larger
/// columns are uncapped (nullopt).
std::optional<uint32_t> maxAllowedK(uint64_t cardinality);

uint32_t effectiveK(uint32_t requestedK, uint64_t cardinality);

/// One attribute value's code: exactly k bitmap positions out of N.
struct AttributeCode {
  std::vector<uint32_t> positions;  // strictly ascending, size k

  /// Renders as an N-character row of '0'/'1', position 0 leftmost.
  std::string bitRow(uint32_t bitmapCount) const;

  bool operator==(const AttributeCode&) const = default;
};

enum class Allocation { Alphabetic, Gray };

std::string_view allocationName(Allocation a);
Allocation allocationFromName(std::string_view name);

/// k-subsets of {0..N-1} in ascending lexicographic order of their
/// position tuples, at most `limit` of them.
std::vector<AttributeCode> enumerateCodesLex(uint32_t bitmapCount, uint32_t k,
                                             uint64_t limit);

/// Immutable value-to-code mapping for one column. Values are kept in
/// byte-wise ascending order; codes come from the chosen enumeration
/// (alphabetic: lexicographic subsets; gray: all C(N,k) codes sorted by
/// the Gray comparator). Safe for concurrent reads once built.
class ColumnDictionary {
 public:
  ColumnDictionary() = default;

  /// `values` must be strictly ascending and fit in C(bitmapCount, k).
  /// Gray allocation refuses candidate sets larger than grayCeiling.
  static ColumnDictionary allocate(std::vector<std::string> values, uint32_t k,
                                   uint32_t bitmapCount, Allocation strategy,
                                   uint64_t grayCeiling = kDefaultGrayCeiling);

  size_t size() const { return values_.size(); }
  uint32_t k() const { return k_; }
  uint32_t bitmapCount() const { return bitmapCount_; }
  Allocation strategy() const { return strategy_; }
  const std::vector<std::string>& values() const { return values_; }
  const AttributeCode& codeAt(size_t rank) const { return codes_[rank]; }

  /// Exact-byte lookup; throws UnknownValueError when absent.
  const AttributeCode& codeOf(const std::string& value) const;
  /// Exact-byte lookup; nullptr when absent.
  const AttributeCode* findCode(const std::string& value) const;

 private:
  std::vector<std::string> values_;
  std::vector<AttributeCode> codes_;
  std::unordered_map<std::string, size_t> rankOf_;
  uint32_t k_ = 0;
  uint32_t bitmapCount_ = 0;
  Allocation strategy_ = Allocation::Alphabetic;
};

}  // namespace bitkiln

#endif  // BITKILN_KOFN_HPP
