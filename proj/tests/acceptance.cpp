// Acceptance suite: one self-contained check per criterion, one PASS/FAIL
// line each. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "bitkiln/gen.hpp"
#include "bitkiln/gray.hpp"
#include "bitkiln/index.hpp"
#include "bitkiln/kofn.hpp"
#include "bitkiln/query.hpp"
#include "bitkiln/rng.hpp"
#include "bitkiln/sort.hpp"
#include "helpers.hpp"

using namespace bitkiln;
using testutil::RawBits;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> g_errors;

void expect(bool ok, const std::string& what) {
  if (!ok && g_errors.size() < 16) g_errors.push_back(what);
  if (!ok && g_errors.size() == 16) g_errors.push_back("...");
}

fs::path scratchDir() {
  const fs::path dir =
      fs::temp_directory_path() / "bitkiln-acceptance";
  fs::create_directories(dir);
  return dir;
}

fs::path buildFrom(const FactTable& table, const BuildConfig& config,
                   const std::string& name, BuildTrace* trace = nullptr) {
  const fs::path path = scratchDir() / name;
  TableRowSource source(table);
  Histogram histogram = buildHistogram(source);
  buildIndex(source, histogram, config, path, trace);
  return path;
}

uint64_t indexWords(const fs::path& path) {
  return IndexReader::open(path).stats().totalCompressedWords;
}

// ---------------------------------------------------------------- 1 + 2

uint64_t g_sizeBoundViolations = 0;
uint64_t g_bitmapsChecked = 0;

void checkSizeBound(const EwahBitmap& bm) {
  const uint64_t n = bm.uncompressedWords();
  if (bm.sizeInWords() > n + 1 + n / (1ull << 15)) ++g_sizeBoundViolations;
  ++g_bitmapsChecked;
}

void criterionEwahOracle() {
  bitkiln::Rng rng(0xEA43);
  const double low = std::log(1e-4);
  const double high = std::log(0.9);
  uint64_t mismatches = 0;
  auto generate = [&](uint64_t bits, double density) {
    RawBits raw = RawBits::zeros(bits);
    if (density < 0.05) {
      const uint64_t target = static_cast<uint64_t>(
          std::llround(static_cast<double>(bits) * density));
      for (uint64_t i = 0; i < target; ++i) raw.set(rng.below(bits));
    } else {
      for (uint64_t i = 0; i < bits; ++i) {
        if (rng.unitDouble() < density) raw.set(i);
      }
    }
    return raw;
  };
  for (int i = 0; i < 10000; ++i) {
    const uint64_t bits = rng.below(100001);
    const double da = std::exp(low + rng.unitDouble() * (high - low));
    const double db = std::exp(low + rng.unitDouble() * (high - low));
    const RawBits a = bits == 0 ? RawBits::zeros(0) : generate(bits, da);
    const RawBits b = bits == 0 ? RawBits::zeros(0) : generate(bits, db);
    const EwahBitmap ca = EwahBitmap::fromWords(a.words, a.bits);
    const EwahBitmap cb = EwahBitmap::fromWords(b.words, b.bits);
    checkSizeBound(ca);
    checkSizeBound(cb);
    if (RawBits{ca.toWords(), ca.bitLength()} != a) ++mismatches;
    if (RawBits{cb.toWords(), cb.bitLength()} != b) ++mismatches;
    const std::pair<BoolOp, char> ops[] = {{BoolOp::And, '&'},
                                           {BoolOp::Or, '|'},
                                           {BoolOp::Xor, '^'},
                                           {BoolOp::AndNot, '-'}};
    for (const auto& [op, symbol] : ops) {
      const EwahBitmap got = logicalBinary(op, ca, cb);
      checkSizeBound(got);
      if (RawBits{got.toWords(), got.bitLength()} !=
          testutil::rawOp(symbol, a, b)) {
        ++mismatches;
      }
    }
  }
  expect(mismatches == 0,
         "round-trip or logical-op mismatches: " + std::to_string(mismatches));
}

void criterionSizeBound() {
  // Violations are accumulated over every bitmap criterion 1 generated.
  expect(g_bitmapsChecked >= 60000,
         "criterion 1 did not generate its bitmaps");
  expect(g_sizeBoundViolations == 0,
         "size-bound violations: " + std::to_string(g_sizeBoundViolations));
}

// -------------------------------------------------------------------- 3

void criterionGrayOrder() {
  for (uint32_t L = 8; L <= 16; ++L) {
    std::vector<std::vector<uint8_t>> rows;
    rows.reserve(1ull << L);
    for (uint64_t v = 0; v < (1ull << L); ++v) {
      std::vector<uint8_t> row(L);
      for (uint32_t b = 0; b < L; ++b) {
        row[b] = static_cast<uint8_t>((v >> (L - 1 - b)) & 1u);
      }
      rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), grayRowLess);
    bool sequenceOk = true;
    bool hammingOk = true;
    for (uint64_t j = 0; j < rows.size(); ++j) {
      if (rows[j] != testutil::grayCodeRow(L, j)) sequenceOk = false;
      if (j > 0) {
        int distance = 0;
        for (uint32_t b = 0; b < L; ++b) {
          distance += rows[j][b] != rows[j - 1][b];
        }
        if (distance != 1) hammingOk = false;
      }
    }
    expect(sequenceOk, "L=" + std::to_string(L) +
                           ": sort does not reproduce the reflected Gray "
                           "sequence");
    expect(hammingOk, "L=" + std::to_string(L) +
                          ": consecutive Hamming distance differs from 1");
  }
}

// -------------------------------------------------------------------- 4

void criterionToyTable() {
  FactTable t;
  t.rows = {{"1", "1", "1"}, {"2", "2", "1"}, {"3", "1", "2"}, {"4", "1", "1"},
            {"5", "1", "3"}, {"1", "2", "1"}, {"6", "2", "1"}};
  const auto path = buildFrom(t, BuildConfig{}, "toy.idx");
  const IndexReader reader = IndexReader::open(path);

  const std::vector<std::vector<std::string>> expected = {
      {"1000010", "0100000", "0010000", "0001000", "0000100", "0000001"},
      {"1011100", "0100011"},
      {"1101011", "0010000", "0000100"}};
  for (size_t c = 0; c < expected.size(); ++c) {
    for (size_t id = 0; id < expected[c].size(); ++id) {
      std::string got(7, '0');
      reader.loadBitmap(c, id).forEachSetBit(
          [&](uint64_t p) { got[p] = '1'; });
      expect(got == expected[c][id],
             "bitmap d" + std::to_string(c) + "/" + std::to_string(id) +
                 " = " + got + ", want " + expected[c][id]);
    }
  }
  const QueryResult r = evaluate(reader, parseQuery("d1=2 & d0=1"));
  expect(r.count == 1 && r.rowIds == std::vector<uint64_t>{5},
         "Autobus AND Montreal must select exactly the sixth fact");
  fs::remove(path);
}

// -------------------------------------------------------------------- 5

void criterionAllocation() {
  std::vector<std::string> values = {"v1", "v2", "v3", "v4", "v5", "v6"};
  const auto dict =
      ColumnDictionary::allocate(values, 2, 4, Allocation::Alphabetic);
  const std::vector<std::string> expected = {"1100", "1010", "1001",
                                             "0110", "0101", "0011"};
  for (size_t i = 0; i < expected.size(); ++i) {
    expect(dict.codeAt(i).bitRow(4) == expected[i],
           "code " + std::to_string(i) + " = " + dict.codeAt(i).bitRow(4) +
               ", want " + expected[i]);
  }
  expect(bitmapsNeeded(6, 2) == 4, "bitmapsNeeded(6,2) != 4");
  expect(bitmapsNeeded(2000000, 2) == 2001, "bitmapsNeeded(2e6,2) != 2001");
}

// ---------------------------------------------------------------- 6 + 7

FactTable benefitTable() { return genUniform(100000, 1, 1, 3, 0xB17C); }

void criterionSortBenefit() {
  const FactTable table = benefitTable();
  TableRowSource source(table);
  const Histogram histogram = buildHistogram(source);
  const auto asc = orderColumnsByCardinality(histogram.cardinalities(), true);

  BuildConfig config;
  config.k = 2;
  const SortPlan lex{SortStrategy::Lexicographic, asc, 1, 0};
  const SortPlan shuffle{SortStrategy::Shuffle, {}, 1, 0xF00D};
  const uint64_t sorted =
      indexWords(buildFrom(sortTable(table, lex), config, "bench-lex.idx"));
  const uint64_t shuffled = indexWords(
      buildFrom(sortTable(table, shuffle), config, "bench-shuf.idx"));
  const double ratio =
      static_cast<double>(sorted) / static_cast<double>(shuffled);
  char line[160];
  std::snprintf(line, sizeof line,
                "lex/shuffled words = %llu/%llu = %.3f (need <= 0.7)",
                static_cast<unsigned long long>(sorted),
                static_cast<unsigned long long>(shuffled), ratio);
  expect(ratio <= 0.7, line);
}

void criterionBlockMonotonicity() {
  const FactTable table = benefitTable();
  TableRowSource source(table);
  const Histogram histogram = buildHistogram(source);
  const auto asc = orderColumnsByCardinality(histogram.cardinalities(), true);

  BuildConfig config;
  config.k = 2;
  std::vector<uint64_t> sizes;
  for (const uint64_t blocks : {1ull, 5ull, 10ull, 500ull}) {
    SortPlan plan{SortStrategy::Lexicographic, asc, blocks, 0};
    sizes.push_back(indexWords(
        buildFrom(blockSort(table, plan), config,
                  "blocks-" + std::to_string(blocks) + ".idx")));
  }
  // "Infinitely many blocks": no sort at all.
  sizes.push_back(indexWords(buildFrom(table, config, "blocks-none.idx")));

  for (size_t i = 1; i < sizes.size(); ++i) {
    expect(sizes[i - 1] <= sizes[i],
           "sizes not non-decreasing at step " + std::to_string(i) + ": " +
               std::to_string(sizes[i - 1]) + " > " +
               std::to_string(sizes[i]));
  }
  const double gap =
      static_cast<double>(sizes[0]) / static_cast<double>(sizes[3]);
  char line[160];
  std::snprintf(line, sizeof line,
                "full sort %llu vs 500 blocks %llu: ratio %.3f (need <= 0.8)",
                static_cast<unsigned long long>(sizes[0]),
                static_cast<unsigned long long>(sizes[3]), gap);
  expect(gap <= 0.8, line);
}

// -------------------------------------------------------------------- 8

std::vector<uint64_t> scanExpr(const FactTable& t, const QueryExpr& e) {
  switch (e.kind) {
    case QueryExpr::Kind::Equality: {
      const size_t c = std::stoull(e.column.substr(1));
      std::vector<uint64_t> out;
      for (size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r][c] == e.value) out.push_back(r);
      }
      return out;
    }
    default: {
      const auto l = scanExpr(t, *e.lhs);
      const auto r = scanExpr(t, *e.rhs);
      std::vector<uint64_t> out;
      if (e.kind == QueryExpr::Kind::And) {
        std::set_intersection(l.begin(), l.end(), r.begin(), r.end(),
                              std::back_inserter(out));
      } else {
        std::set_union(l.begin(), l.end(), r.begin(), r.end(),
                       std::back_inserter(out));
      }
      return out;
    }
  }
}

void criterionQueryOracle() {
  const FactTable table = genUniform(10000, 2, 2, 2, 0x5EED);
  BuildConfig config;
  config.k = 2;
  config.partitionBytes = 256 * 1024;
  const auto path = buildFrom(table, config, "query-oracle.idx");
  const IndexReader reader = IndexReader::open(path);

  bitkiln::Rng rng(0xACE);
  auto randomLeaf = [&] {
    const size_t c = rng.below(table.columnCount());
    const auto& dict = reader.header().columns[c].dictionary;
    return QueryExpr::equality("d" + std::to_string(c),
                               dict.values()[rng.below(dict.values().size())]);
  };
  std::function<QueryExpr(int)> randomExpr = [&](int leaves) {
    if (leaves <= 1) return randomLeaf();
    const int left = 1 + static_cast<int>(rng.below(leaves - 1));
    return QueryExpr::boolean(rng.below(2) == 0 ? QueryExpr::Kind::And
                                                : QueryExpr::Kind::Or,
                              randomExpr(left), randomExpr(leaves - left));
  };

  auto leafAccounting = [&](const QueryExpr& e, auto&& self,
                            uint64_t& requested,
                            std::set<std::pair<size_t, uint32_t>>& distinct)
      -> void {
    if (e.kind == QueryExpr::Kind::Equality) {
      const size_t c = reader.columnIndexOf(e.column);
      const auto& code = reader.header().columns[c].dictionary.codeOf(e.value);
      requested += code.positions.size();
      for (const uint32_t p : code.positions) distinct.emplace(c, p);
      return;
    }
    self(*e.lhs, self, requested, distinct);
    self(*e.rhs, self, requested, distinct);
  };

  uint64_t mismatches = 0;
  uint64_t accountingErrors = 0;
  for (int i = 0; i < 500; ++i) {
    const QueryExpr expr = randomExpr(1 + static_cast<int>(rng.below(6)));
    QueryStats stats;
    const QueryResult got = evaluate(reader, expr, &stats);
    if (got.rowIds != scanExpr(table, expr)) ++mismatches;

    uint64_t requested = 0;
    std::set<std::pair<size_t, uint32_t>> distinct;
    leafAccounting(expr, leafAccounting, requested, distinct);
    if (stats.bitmapsRequested != requested ||
        stats.bitmapsLoaded != distinct.size() ||
        stats.bitmapsLoaded > stats.bitmapsRequested) {
      ++accountingErrors;
    }
  }
  expect(mismatches == 0,
         "expressions disagreeing with the full scan: " +
             std::to_string(mismatches));
  expect(accountingErrors == 0,
         "queries whose bitmap loads break the per-leaf accounting: " +
             std::to_string(accountingErrors));
  fs::remove(path);
}

// -------------------------------------------------------------------- 9

void criterionGrayLexEquivalences() {
  bitkiln::Rng rng(0x6A7);
  auto oneHotDicts = [](const FactTable& t) {
    std::vector<ColumnDictionary> dicts;
    for (size_t c = 0; c < t.columnCount(); ++c) {
      std::set<std::string> distinct;
      for (const auto& row : t.rows) distinct.insert(row[c]);
      std::vector<std::string> values(distinct.begin(), distinct.end());
      const auto n = static_cast<uint32_t>(values.size());
      dicts.push_back(ColumnDictionary::allocate(std::move(values), 1, n,
                                                 Allocation::Alphabetic));
    }
    return dicts;
  };

  // Single column: the Gray sort must equal the lexicographic sort.
  for (uint32_t card = 1; card <= 6; ++card) {
    FactTable t;
    for (uint32_t v = 0; v < card; ++v) {
      for (uint64_t copies = 1 + rng.below(3); copies > 0; --copies) {
        t.rows.push_back({std::string(1, static_cast<char>('a' + v))});
      }
    }
    shuffleVector(t.rows, rng);
    const auto dicts = oneHotDicts(t);
    const FactTable gray =
        sortTable(t, SortPlan{SortStrategy::Gray, {}, 1, 0}, &dicts);
    const FactTable lex =
        sortTable(t, SortPlan{SortStrategy::Lexicographic, {}, 1, 0});
    expect(gray == lex, "single column, card " + std::to_string(card) +
                            ": gray sort differs from lex sort");
  }

  // Two columns: Gray equals lex with the second column's order reversed.
  for (uint32_t c1 = 2; c1 <= 6; ++c1) {
    for (uint32_t c2 = 2; c2 <= 6; ++c2) {
      FactTable t;
      for (uint32_t a = 0; a < c1; ++a) {
        for (uint32_t b = 0; b < c2; ++b) {
          const std::vector<std::string> row = {
              std::string(1, static_cast<char>('a' + a)),
              std::string(1, static_cast<char>('a' + b))};
          t.rows.push_back(row);
          if (rng.below(3) == 0) t.rows.push_back(row);
        }
      }
      shuffleVector(t.rows, rng);
      const auto dicts = oneHotDicts(t);
      const FactTable gray =
          sortTable(t, SortPlan{SortStrategy::Gray, {}, 1, 0}, &dicts);
      FactTable want = t;
      std::stable_sort(want.rows.begin(), want.rows.end(),
                       [](const auto& x, const auto& y) {
                         if (x[0] != y[0]) return x[0] < y[0];
                         return x[1] > y[1];
                       });
      expect(gray == want,
             "columns " + std::to_string(c1) + "x" + std::to_string(c2) +
                 ": gray sort is not lex with the second column reversed");
    }
  }
}

// ------------------------------------------------------------------- 10

void criterionColumnOrder() {
  bitkiln::Rng rng(0xC01);
  BuildConfig config;  // k = 1

  auto sizedBuild = [&](const FactTable& t, bool ascending,
                        const std::string& name) {
    TableRowSource source(t);
    const Histogram histogram = buildHistogram(source);
    const auto order =
        orderColumnsByCardinality(histogram.cardinalities(), ascending);
    const SortPlan plan{SortStrategy::Lexicographic, order, 1, 0};
    return indexWords(buildFrom(sortTable(t, plan), config, name));
  };

  // A: the large column has frequent values (64 occurrences each), so
  // sorting by it first pays off.
  FactTable frequent;
  for (int i = 0; i < 64000; ++i) {
    frequent.rows.push_back({std::to_string(1000 + rng.below(1000)),
                             std::to_string(rng.below(4)),
                             std::to_string(rng.below(8))});
  }
  const uint64_t aDesc = sizedBuild(frequent, false, "order-a-desc.idx");
  const uint64_t aAsc = sizedBuild(frequent, true, "order-a-asc.idx");
  expect(aDesc < aAsc, "frequent-values table: descending order (" +
                           std::to_string(aDesc) +
                           ") must beat ascending (" + std::to_string(aAsc) +
                           ")");

  // B: the large column is near-unique, so it cannot benefit from the
  // sort and only starves the small columns.
  FactTable unique;
  for (int i = 0; i < 32000; ++i) {
    unique.rows.push_back({std::to_string(100000 + i),
                           std::to_string(rng.below(4)),
                           std::to_string(rng.below(8))});
  }
  const uint64_t bDesc = sizedBuild(unique, false, "order-b-desc.idx");
  const uint64_t bAsc = sizedBuild(unique, true, "order-b-asc.idx");
  expect(bAsc < bDesc, "near-unique table: ascending order (" +
                           std::to_string(bAsc) +
                           ") must beat descending (" + std::to_string(bDesc) +
                           ")");
}

// ---------------------------------------------------------------- main

struct Criterion {
  int id;
  const char* title;
  void (*fn)();
  double timeLimitSeconds;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "EWAH oracle suite (10^4 cases, round trip + AND/OR/XOR/ANDNOT)",
       criterionEwahOracle, 60.0},
      {2, "EWAH size bound on every generated bitmap", criterionSizeBound,
       60.0},
      {3, "Gray comparator reproduces reflected Gray for L=8..16",
       criterionGrayOrder, 0.0},
      {4, "toy-table fidelity (one-hot bitmaps + sixth-fact query)",
       criterionToyTable, 0.0},
      {5, "allocation fidelity (2-of-4 code order, bitmapsNeeded)",
       criterionAllocation, 0.0},
      {6, "sort benefit: lex-sorted index <= 0.7x shuffled",
       criterionSortBenefit, 120.0},
      {7, "block-sort monotonicity and 20% full-sort advantage",
       criterionBlockMonotonicity, 300.0},
      {8, "query oracle: 500 expressions vs full scan + load accounting",
       criterionQueryOracle, 0.0},
      {9, "gray/lex equivalences on exhaustive small tables",
       criterionGrayLexEquivalences, 0.0},
      {10, "column-order effect on constructed instances",
       criterionColumnOrder, 0.0},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    g_errors.clear();
    const auto start = std::chrono::steady_clock::now();
    try {
      c.fn();
    } catch (const std::exception& e) {
      expect(false, std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (c.timeLimitSeconds > 0.0 && seconds > c.timeLimitSeconds) {
      expect(false, "runtime " + std::to_string(seconds) +
                        "s exceeds limit " +
                        std::to_string(c.timeLimitSeconds) + "s");
    }
    const bool pass = g_errors.empty();
    std::printf("[%2d/10] %s — %s (%.1fs)\n", c.id, pass ? "PASS" : "FAIL",
                c.title, seconds);
    for (const auto& e : g_errors) std::printf("        %s\n", e.c_str());
    if (!pass) ++failed;
  }
  std::error_code ec;
  fs::remove_all(scratchDir(), ec);
  if (failed != 0) {
    std::printf("%d criterion(s) failed\n", failed);
    return 1;
  }
  std::printf("all 10 criteria passed\n");
  return 0;
}
