#ifndef BITKILN_HISTOGRAM_HPP
#define BITKILN_HISTOGRAM_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bitkiln/table.hpp"

namespace bitkiln {

/// Per-column value counts from the first indexing pass. The ordered map
/// keeps values in byte-wise ascending order, which is exactly the order
/// the dictionaries allocate codes in.
struct Histogram {
  std::vector<std::map<std::string, uint64_t>> columns;
  uint64_t rows = 0;

  std::vector<uint64_t> cardinalities() const {
    std::vector<uint64_t> out;
    out.reserve(columns.size());
    for (const auto& c : columns) out.push_back(c.size());
    return out;
  }

  bool operator==(const Histogram&) const = default;
};

Histogram buildHistogram(RowSource& source);

/// Sidecar lives beside the table as "<table>.hist": a header line, then
/// one line per (column, count, value), tab separated, values escaped.
std::filesystem::path histogramSidecar(const std::filesystem::path& table);
void saveHistogram(const Histogram& histogram,
                   const std::filesystem::path& path);
Histogram loadHistogram(const std::filesystem::path& path);

/// Loads the sidecar when present, otherwise scans the table and
/// persists one so re-indexing skips pass 1.
Histogram ensureHistogram(const std::filesystem::path& table, char delimiter);

}  // namespace bitkiln

#endif  // BITKILN_HISTOGRAM_HPP
