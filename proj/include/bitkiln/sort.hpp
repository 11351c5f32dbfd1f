#ifndef BITKILN_SORT_HPP
#define BITKILN_SORT_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "bitkiln/kofn.hpp"
#include "bitkiln/table.hpp"

namespace bitkiln {

enum class SortStrategy { None, Lexicographic, Gray, Grouping, Shuffle };

std::string_view sortStrategyName(SortStrategy s);
SortStrategy sortStrategyFromName(std::string_view name);

/// How to reorder a fact table before indexing. columnOrder lists the
/// key columns by priority (empty = natural order); blockCount = 1 means
/// one full sort; seed drives grouping and shuffle.
struct SortPlan {
  SortStrategy strategy = SortStrategy::None;
  std::vector<size_t> columnOrder;
  uint64_t blockCount = 1;
  uint64_t seed = 0;
};

struct SortOptions {
  /// Row bytes held in memory before the lexicographic sort spills
  /// sorted runs to disk and merges them in a second pass.
  uint64_t memoryBudgetBytes = 256ull << 20;
  std::filesystem::path tempDir;  // empty = system temp directory
};

/// Permutation of column indices ordered by distinct-value count; ties
/// keep the original column order.
std::vector<size_t> orderColumnsByCardinality(
    std::span<const uint64_t> cardinalities, bool ascending);

/// Full sort of the table under plan.strategy. Gray needs the per-column
/// dictionaries (codes are compared, not values). All strategies are
/// stable: equal rows keep their input order, and every strategy
/// preserves the row multiset.
FactTable sortTable(const FactTable& table, const SortPlan& plan,
                    const std::vector<ColumnDictionary>* dicts = nullptr,
                    const SortOptions& options = {});

/// Splits into blockCount contiguous blocks of near-equal row count,
/// sorts each block independently, and concatenates without merging.
FactTable blockSort(const FactTable& table, const SortPlan& plan,
                    const std::vector<ColumnDictionary>* dicts = nullptr,
                    const SortOptions& options = {});

/// File-to-file variant. A full lexicographic sort streams through the
/// external two-pass path (sorted runs, then one merge pass with only
/// sequential reads); other strategies and block sorts load one block at
/// a time.
void sortFile(const std::filesystem::path& input,
              const std::filesystem::path& output, char delimiter,
              const SortPlan& plan,
              const std::vector<ColumnDictionary>* dicts = nullptr,
              const SortOptions& options = {});

/// Gray sort key of one row: per-column code bits concatenated in key
/// order. Exposed for tests.
std::vector<uint8_t> grayRowKey(const std::vector<std::string>& row,
                                std::span<const size_t> columnOrder,
                                const std::vector<ColumnDictionary>& dicts);

}  // namespace bitkiln

#endif  // BITKILN_SORT_HPP
