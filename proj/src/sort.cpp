#include "bitkiln/sort.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "bitkiln/errors.hpp"
#include "bitkiln/gray.hpp"
#include "bitkiln/rng.hpp"

namespace bitkiln {

namespace fs = std::filesystem;

std::string_view sortStrategyName(SortStrategy s) {
  switch (s) {
    case SortStrategy::None:
      return "none";
    case SortStrategy::Lexicographic:
      return "lex";
    case SortStrategy::Gray:
      return "gray";
    case SortStrategy::Grouping:
      return "group";
    case SortStrategy::Shuffle:
      return "shuffle";
  }
  return "none";
}

SortStrategy sortStrategyFromName(std::string_view name) {
  if (name == "none") return SortStrategy::None;
  if (name == "lex" || name == "lexicographic") return SortStrategy::Lexicographic;
  if (name == "gray") return SortStrategy::Gray;
  if (name == "group" || name == "grouping") return SortStrategy::Grouping;
  if (name == "shuffle") return SortStrategy::Shuffle;
  throw std::invalid_argument("unknown sort strategy: " + std::string(name));
}

std::vector<size_t> orderColumnsByCardinality(
    std::span<const uint64_t> cardinalities, bool ascending) {
  if (cardinalities.empty()) {
    throw std::invalid_argument("orderColumnsByCardinality: no histograms");
  }
  std::vector<size_t> perm(cardinalities.size());
  std::iota(perm.begin(), perm.end(), size_t{0});
  std::stable_sort(perm.begin(), perm.end(), [&](size_t a, size_t b) {
    return ascending ? cardinalities[a] < cardinalities[b]
                     : cardinalities[a] > cardinalities[b];
  });
  return perm;
}

namespace {

void validateColumnOrder(std::span<const size_t> order, size_t columns) {
  std::vector<bool> seen(columns, false);
  for (const size_t c : order) {
    if (c >= columns) {
      throw std::invalid_argument("columnOrder references missing column");
    }
    if (seen[c]) {
      throw std::invalid_argument("columnOrder repeats a column");
    }
    seen[c] = true;
  }
}

// Key columns in plan order; an empty order means all columns as given.
std::vector<size_t> keyColumns(std::span<const size_t> order, size_t columns) {
  if (!order.empty()) return {order.begin(), order.end()};
  std::vector<size_t> all(columns);
  std::iota(all.begin(), all.end(), size_t{0});
  return all;
}

int compareProjected(const std::vector<std::string>& a,
                     const std::vector<std::string>& b,
                     std::span<const size_t> keys) {
  for (const size_t c : keys) {
    const int cmp = a[c].compare(b[c]);
    if (cmp != 0) return cmp;
  }
  return 0;
}

uint64_t rowBytes(const std::vector<std::string>& row) {
  uint64_t bytes = row.size();  // delimiters + newline
  for (const auto& f : row) bytes += f.size();
  return bytes;
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const fs::path& base) {
    const fs::path root = base.empty() ? fs::temp_directory_path() : base;
    std::string tmpl = (root / "bitkiln-sort-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
      throw IoError("cannot create temp directory under " + root.string());
    }
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Two-pass external merge: sorted runs of at most the memory budget are
// spilled to disk, then merged with sequential reads only.
void externalLexSort(
    RowSource& source, char delimiter, std::span<const size_t> keys,
    const SortOptions& options,
    const std::function<void(const std::vector<std::string>&)>& emit) {
  std::vector<std::vector<std::string>> chunk;
  uint64_t chunkBytes = 0;
  std::vector<fs::path> runs;
  TempDir tempDir(options.tempDir);

  auto sortChunk = [&] {
    std::stable_sort(chunk.begin(), chunk.end(),
                     [&](const auto& a, const auto& b) {
                       return compareProjected(a, b, keys) < 0;
                     });
  };
  auto spillChunk = [&] {
    sortChunk();
    fs::path run = tempDir.path() / ("run-" + std::to_string(runs.size()));
    std::ofstream out(run, std::ios::binary);
    if (!out) throw IoError("cannot create sort run: " + run.string());
    for (const auto& row : chunk) out << joinRow(row, delimiter) << '\n';
    if (!out) throw IoError("write failed: " + run.string());
    runs.push_back(std::move(run));
    chunk.clear();
    chunkBytes = 0;
  };

  std::vector<std::string> row;
  while (source.next(row)) {
    chunkBytes += rowBytes(row);
    chunk.push_back(std::move(row));
    if (chunkBytes > options.memoryBudgetBytes) spillChunk();
  }

  if (runs.empty()) {
    sortChunk();
    for (const auto& r : chunk) emit(r);
    return;
  }
  if (!chunk.empty()) spillChunk();

  struct RunHead {
    std::vector<std::string> row;
    size_t run;
  };
  std::vector<std::ifstream> readers;
  readers.reserve(runs.size());
  for (const auto& r : runs) {
    readers.emplace_back(r, std::ios::binary);
    if (!readers.back()) throw IoError("cannot reopen sort run");
  }
  auto refill = [&](size_t runIdx, RunHead& head) {
    std::string line;
    if (!std::getline(readers[runIdx], line)) return false;
    head.row = splitRow(line, delimiter);
    head.run = runIdx;
    return true;
  };
  // Ties fall back to the run index; runs were cut in input order, so
  // the merge stays stable.
  auto headGreater = [&](const RunHead& a, const RunHead& b) {
    const int cmp = compareProjected(a.row, b.row, keys);
    if (cmp != 0) return cmp > 0;
    return a.run > b.run;
  };
  std::priority_queue<RunHead, std::vector<RunHead>, decltype(headGreater)>
      heap(headGreater);
  for (size_t i = 0; i < runs.size(); ++i) {
    RunHead head;
    if (refill(i, head)) heap.push(std::move(head));
  }
  while (!heap.empty()) {
    RunHead head = heap.top();
    heap.pop();
    emit(head.row);
    RunHead nextHead;
    if (refill(head.run, nextHead)) heap.push(std::move(nextHead));
  }
}

FactTable sortLexicographic(const FactTable& table,
                            std::span<const size_t> keys,
                            const SortOptions& options) {
  uint64_t totalBytes = 0;
  for (const auto& row : table.rows) totalBytes += rowBytes(row);
  FactTable out;
  out.delimiter = table.delimiter;
  if (totalBytes <= options.memoryBudgetBytes) {
    out.rows = table.rows;
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [&](const auto& a, const auto& b) {
                       return compareProjected(a, b, keys) < 0;
                     });
    return out;
  }
  out.rows.reserve(table.rows.size());
  TableRowSource source(table);
  externalLexSort(source, table.delimiter, keys, options,
                  [&](const std::vector<std::string>& row) {
                    out.rows.push_back(row);
                  });
  return out;
}

FactTable sortGray(const FactTable& table, std::span<const size_t> keys,
                   const std::vector<ColumnDictionary>* dicts) {
  if (dicts == nullptr || dicts->size() != table.columnCount()) {
    throw std::invalid_argument(
        "gray sort needs one dictionary per column");
  }
  std::vector<std::vector<uint8_t>> rowKeys;
  rowKeys.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    rowKeys.push_back(grayRowKey(row, keys, *dicts));
  }
  std::vector<size_t> perm(table.rows.size());
  std::iota(perm.begin(), perm.end(), size_t{0});
  std::stable_sort(perm.begin(), perm.end(), [&](size_t a, size_t b) {
    return grayRowLess(rowKeys[a], rowKeys[b]);
  });
  FactTable out;
  out.delimiter = table.delimiter;
  out.rows.reserve(table.rows.size());
  for (const size_t i : perm) out.rows.push_back(table.rows[i]);
  return out;
}

FactTable sortGrouping(const FactTable& table, uint64_t seed) {
  // Hash map keyed by full row content: identical facts end up in one
  // bucket, buckets are laid out in seeded-hash order (not sorted), rows
  // inside a bucket keep their input order.
  std::unordered_map<std::string, std::vector<size_t>> buckets;
  std::vector<std::string> serialized;
  serialized.reserve(table.rows.size());
  for (size_t i = 0; i < table.rows.size(); ++i) {
    std::string key;
    for (const auto& f : table.rows[i]) {
      key += f;
      key.push_back('\x1f');
    }
    buckets[key].push_back(i);
    serialized.push_back(std::move(key));
  }
  std::vector<const std::string*> order;
  order.reserve(buckets.size());
  for (const auto& [key, rows] : buckets) order.push_back(&key);
  std::sort(order.begin(), order.end(),
            [&](const std::string* a, const std::string* b) {
              const uint64_t ha = seededHash(seed, *a);
              const uint64_t hb = seededHash(seed, *b);
              if (ha != hb) return ha < hb;
              return *a < *b;  // collision fallback keeps groups apart
            });
  FactTable out;
  out.delimiter = table.delimiter;
  out.rows.reserve(table.rows.size());
  for (const std::string* key : order) {
    for (const size_t i : buckets[*key]) out.rows.push_back(table.rows[i]);
  }
  return out;
}

FactTable sortShuffle(const FactTable& table, uint64_t seed) {
  FactTable out;
  out.delimiter = table.delimiter;
  out.rows = table.rows;
  Rng rng(seed);
  shuffleVector(out.rows, rng);
  return out;
}

uint64_t blockSeed(uint64_t seed, uint64_t blockIndex) {
  return seed ^ (blockIndex * 0x9E3779B97F4A7C15ull);
}

}  // namespace

std::vector<uint8_t> grayRowKey(const std::vector<std::string>& row,
                                std::span<const size_t> columnOrder,
                                const std::vector<ColumnDictionary>& dicts) {
  std::vector<uint8_t> key;
  for (const size_t c : columnOrder) {
    const ColumnDictionary& dict = dicts[c];
    const AttributeCode& code = dict.codeOf(row[c]);
    const size_t base = key.size();
    key.resize(base + dict.bitmapCount(), 0);
    // Bits run from the highest bitmap position down. Alphabetic codes
    // descend in bit-row order as values ascend, so this orientation
    // makes the Gray order of a 1-of-N column coincide with the
    // lexicographic sort of the values.
    for (const uint32_t p : code.positions) {
      key[base + (dict.bitmapCount() - 1 - p)] = 1;
    }
  }
  return key;
}

FactTable sortTable(const FactTable& table, const SortPlan& plan,
                    const std::vector<ColumnDictionary>* dicts,
                    const SortOptions& options) {
  validateColumnOrder(plan.columnOrder, table.columnCount());
  const auto keys = keyColumns(plan.columnOrder, table.columnCount());
  switch (plan.strategy) {
    case SortStrategy::None: {
      FactTable out = table;
      return out;
    }
    case SortStrategy::Lexicographic:
      return sortLexicographic(table, keys, options);
    case SortStrategy::Gray:
      return sortGray(table, keys, dicts);
    case SortStrategy::Grouping:
      return sortGrouping(table, plan.seed);
    case SortStrategy::Shuffle:
      return sortShuffle(table, plan.seed);
  }
  throw std::logic_error("unreachable sort strategy");
}

FactTable blockSort(const FactTable& table, const SortPlan& plan,
                    const std::vector<ColumnDictionary>* dicts,
                    const SortOptions& options) {
  if (plan.blockCount < 1) {
    throw std::invalid_argument("blockSort: blockCount must be >= 1");
  }
  const uint64_t blocks = plan.blockCount;
  if (blocks == 1) return sortTable(table, plan, dicts, options);

  const uint64_t n = table.rows.size();
  const uint64_t base = n / blocks;
  const uint64_t extra = n % blocks;
  FactTable out;
  out.delimiter = table.delimiter;
  out.rows.reserve(n);
  uint64_t start = 0;
  for (uint64_t b = 0; b < blocks && start < n; ++b) {
    const uint64_t size = base + (b < extra ? 1 : 0);
    FactTable block;
    block.delimiter = table.delimiter;
    block.rows.assign(table.rows.begin() + static_cast<ptrdiff_t>(start),
                      table.rows.begin() + static_cast<ptrdiff_t>(start + size));
    SortPlan blockPlan = plan;
    blockPlan.blockCount = 1;
    blockPlan.seed = blockSeed(plan.seed, b);
    FactTable sorted = sortTable(block, blockPlan, dicts, options);
    for (auto& row : sorted.rows) out.rows.push_back(std::move(row));
    start += size;
  }
  return out;
}

void sortFile(const std::filesystem::path& input,
              const std::filesystem::path& output, char delimiter,
              const SortPlan& plan,
              const std::vector<ColumnDictionary>* dicts,
              const SortOptions& options) {
  if (plan.blockCount < 1) {
    throw std::invalid_argument("sortFile: blockCount must be >= 1");
  }
  if (plan.blockCount == 1 &&
      plan.strategy == SortStrategy::Lexicographic) {
    FileRowSource source(input, delimiter);
    std::vector<std::string> probe;
    size_t columns = 0;
    if (source.next(probe)) columns = probe.size();
    source.rewind();
    validateColumnOrder(plan.columnOrder, columns);
    const auto keys = keyColumns(plan.columnOrder, columns);
    std::ofstream out(output, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + output.string());
    externalLexSort(source, delimiter, keys, options,
                    [&](const std::vector<std::string>& row) {
                      out << joinRow(row, delimiter) << '\n';
                    });
    if (!out) throw IoError("write failed: " + output.string());
    return;
  }

  // Block path: count rows, then load, sort, and append one block at a
  // time.
  uint64_t rows = 0;
  {
    FileRowSource counter(input, delimiter);
    std::vector<std::string> row;
    while (counter.next(row)) ++rows;
  }
  const uint64_t blocks = plan.blockCount;
  const uint64_t base = rows / blocks;
  const uint64_t extra = rows % blocks;
  FileRowSource source(input, delimiter);
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + output.string());
  uint64_t consumed = 0;
  for (uint64_t b = 0; b < blocks && consumed < rows; ++b) {
    const uint64_t size = base + (b < extra ? 1 : 0);
    FactTable block;
    block.delimiter = delimiter;
    block.rows.reserve(size);
    std::vector<std::string> row;
    for (uint64_t i = 0; i < size; ++i) {
      if (!source.next(row)) break;
      block.rows.push_back(std::move(row));
    }
    consumed += block.rows.size();
    SortPlan blockPlan = plan;
    blockPlan.blockCount = 1;
    blockPlan.seed = blocks == 1 ? plan.seed : blockSeed(plan.seed, b);
    FactTable sorted = sortTable(block, blockPlan, dicts, options);
    for (const auto& r : sorted.rows) out << joinRow(r, delimiter) << '\n';
  }
  if (!out) throw IoError("write failed: " + output.string());
}

}  // namespace bitkiln
