// bitkiln: command-line front end for the bitmap index engine.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bitkiln/errors.hpp"
#include "bitkiln/gen.hpp"
#include "bitkiln/histogram.hpp"
#include "bitkiln/index.hpp"
#include "bitkiln/query.hpp"
#include "bitkiln/sort.hpp"
#include "bitkiln/table.hpp"

namespace fs = std::filesystem;
using namespace bitkiln;

namespace {

struct CommonOpts {
  uint32_t k = 1;
  std::string allocation = "alpha";
  std::string sort = "none";
  uint64_t blocks = 1;
  std::string columnOrder = "none";
  uint64_t partitionBytes = 256ull << 20;
  std::string delimiter = ",";
  uint64_t seed = 0;
  uint64_t memoryBytes = 256ull << 20;
};

char delimiterChar(const std::string& opt) {
  if (opt.size() != 1) {
    throw CLI::ValidationError("--delimiter must be a single character");
  }
  return opt[0];
}

std::vector<size_t> resolveColumnOrder(const std::string& spec,
                                       const Histogram& histogram) {
  if (spec == "none") return {};
  if (spec == "asc" || spec == "desc") {
    return orderColumnsByCardinality(histogram.cardinalities(), spec == "asc");
  }
  if (spec.rfind("given:", 0) == 0) {
    std::vector<size_t> order;
    std::string field;
    std::istringstream in(spec.substr(6));
    while (std::getline(in, field, ',')) {
      order.push_back(std::stoull(field));
    }
    return order;
  }
  throw std::invalid_argument(
      "--column-order must be one of asc, desc, none, given:<perm>");
}

std::vector<ColumnDictionary> dictionariesFor(const Histogram& histogram,
                                              const CommonOpts& opts) {
  BuildConfig config;
  config.k = opts.k;
  config.allocation = allocationFromName(opts.allocation);
  std::vector<ColumnDictionary> dicts;
  for (auto& codec : makeColumnCodecs(histogram, config)) {
    dicts.push_back(std::move(codec.dictionary));
  }
  return dicts;
}

SortPlan planFor(const CommonOpts& opts, const Histogram& histogram) {
  SortPlan plan;
  plan.strategy = sortStrategyFromName(opts.sort);
  plan.columnOrder = resolveColumnOrder(opts.columnOrder, histogram);
  plan.blockCount = opts.blocks;
  plan.seed = opts.seed;
  return plan;
}

// Outputs to delete when a command dies halfway through.
std::vector<fs::path> g_partialOutputs;

void removePartialOutputs() {
  for (const auto& p : g_partialOutputs) {
    std::error_code ec;
    fs::remove(p, ec);
  }
}

int runSort(const std::string& input, const std::string& output,
            const CommonOpts& opts) {
  const char delim = delimiterChar(opts.delimiter);
  const Histogram histogram = ensureHistogram(input, delim);
  const SortPlan plan = planFor(opts, histogram);
  SortOptions options;
  options.memoryBudgetBytes = opts.memoryBytes;
  g_partialOutputs.push_back(output);
  if (plan.strategy == SortStrategy::Gray) {
    const auto dicts = dictionariesFor(histogram, opts);
    sortFile(input, output, delim, plan, &dicts, options);
  } else {
    sortFile(input, output, delim, plan, nullptr, options);
  }
  return 0;
}

int runIndex(const std::string& input, const std::string& output,
             const CommonOpts& opts) {
  const char delim = delimiterChar(opts.delimiter);
  const Histogram histogram = ensureHistogram(input, delim);
  const SortPlan plan = planFor(opts, histogram);
  BuildConfig config;
  config.k = opts.k;
  config.allocation = allocationFromName(opts.allocation);
  config.partitionBytes = opts.partitionBytes;

  g_partialOutputs.push_back(output);
  if (plan.strategy == SortStrategy::None) {
    FileRowSource source(input, delim);
    buildIndex(source, histogram, config, output);
    return 0;
  }
  const fs::path sorted = output + ".sorted.tmp";
  g_partialOutputs.push_back(sorted);
  SortOptions options;
  options.memoryBudgetBytes = opts.memoryBytes;
  if (plan.strategy == SortStrategy::Gray) {
    const auto dicts = dictionariesFor(histogram, opts);
    sortFile(input, sorted, delim, plan, &dicts, options);
  } else {
    sortFile(input, sorted, delim, plan, nullptr, options);
  }
  FileRowSource source(sorted, delim);
  buildIndex(source, histogram, config, output);
  std::error_code ec;
  fs::remove(sorted, ec);
  return 0;
}

int runQuery(const std::string& indexPath, const std::string& expression,
             bool printRows) {
  const IndexReader reader = IndexReader::open(indexPath);
  const QueryExpr expr = parseQuery(expression);
  QueryStats stats;
  const QueryResult result = evaluate(reader, expr, &stats);
  if (stats.unknownValue) {
    std::cerr << "warning: query names a value absent from the index\n";
  }
  std::cout << result.count << '\n';
  if (printRows) {
    for (const uint64_t id : result.rowIds) std::cout << id << '\n';
  }
  return 0;
}

int runStats(const std::string& indexPath) {
  const IndexReader reader = IndexReader::open(indexPath);
  const IndexStatsReport report = reader.stats();
  const auto& columns = reader.header().columns;
  std::cout << "column,bitmap,compressed_words,uncompressed_words,"
               "compression_factor,set_bits\n";
  std::ostream& out = std::cout;
  out.precision(6);
  for (const auto& b : report.bitmaps) {
    out << columns[b.column].name << ',' << b.bitmapId << ','
        << b.compressedWords << ',' << b.uncompressedWords << ',' << b.factor
        << ',' << b.setBits << '\n';
  }
  for (const auto& c : report.columns) {
    out << c.name << ',' << "all" << ',' << c.compressedWords << ','
        << c.uncompressedWords << ',' << c.factor << ',' << c.setBits << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bitkiln: sorted, EWAH-compressed bitmap indexes for "
               "delimited fact tables"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string input, output, expression;
  bool printRows = false;
  uint64_t rows = 0;
  uint32_t independentDims = 1, dependentDims = 0, r = 1, dims = 1;
  uint32_t valueRange = 1000;
  double zipfS = 1.0;

  auto addCodecFlags = [&](CLI::App* cmd) {
    cmd->add_option("--k", opts.k, "bitmaps set per value (k-of-N encoding)")
        ->envname("BITKILN_K")
        ->check(CLI::Range(1u, 32u));
    cmd->add_option("--allocation", opts.allocation,
                    "code allocation: alpha or gray")
        ->envname("BITKILN_ALLOCATION")
        ->check(CLI::IsMember({"alpha", "gray"}));
  };
  auto addSortFlags = [&](CLI::App* cmd) {
    cmd->add_option("--sort", opts.sort,
                    "row order: lex, gray, group, shuffle, none")
        ->envname("BITKILN_SORT")
        ->check(CLI::IsMember({"lex", "gray", "group", "shuffle", "none"}));
    cmd->add_option("--blocks", opts.blocks,
                    "sort in this many independent blocks (1 = full sort)")
        ->envname("BITKILN_BLOCKS")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--column-order", opts.columnOrder,
                    "sort key order: asc, desc, none, given:<i,j,...>")
        ->envname("BITKILN_COLUMN_ORDER");
    cmd->add_option("--memory-bytes", opts.memoryBytes,
                    "row bytes sorted in memory before spilling runs")
        ->envname("BITKILN_MEMORY_BYTES");
  };
  auto addSeed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opts.seed, "seed for every random choice")
        ->envname("BITKILN_SEED");
  };
  auto addDelimiter = [&](CLI::App* cmd) {
    cmd->add_option("--delimiter", opts.delimiter, "field separator")
        ->envname("BITKILN_DELIMITER");
  };

  CLI::App* sortCmd =
      app.add_subcommand("sort", "sort a delimited fact table");
  sortCmd->add_option("input", input)->required();
  sortCmd->add_option("output", output)->required();
  addSortFlags(sortCmd);
  addCodecFlags(sortCmd);
  addSeed(sortCmd);
  addDelimiter(sortCmd);

  CLI::App* indexCmd =
      app.add_subcommand("index", "sort (optionally) and build an index");
  indexCmd->add_option("input", input)->required();
  indexCmd->add_option("output", output)->required();
  addSortFlags(indexCmd);
  addCodecFlags(indexCmd);
  addSeed(indexCmd);
  addDelimiter(indexCmd);
  indexCmd
      ->add_option("--partition-bytes", opts.partitionBytes,
                   "horizontal partition budget in bytes")
      ->envname("BITKILN_PARTITION_BYTES")
      ->check(CLI::PositiveNumber);

  CLI::App* queryCmd =
      app.add_subcommand("query", "evaluate col=value & | expressions");
  queryCmd->add_option("index", input)->required();
  queryCmd->add_option("expression", expression)->required();
  queryCmd->add_flag("--print-rows", printRows, "also print matching row ids");

  CLI::App* statsCmd =
      app.add_subcommand("stats", "per-bitmap compression stats as CSV");
  statsCmd->add_option("index", input)->required();

  CLI::App* genUniformCmd = app.add_subcommand(
      "gen-uniform", "generate a uniform table with dependent columns");
  genUniformCmd->add_option("output", output)->required();
  genUniformCmd->add_option("--rows", rows)->required();
  genUniformCmd->add_option("--independent", independentDims,
                            "independent dimensions");
  genUniformCmd->add_option("--dependent", dependentDims,
                            "dependent dimensions");
  genUniformCmd->add_option("--r", r, "cardinality growth factor (1 or 2)")
      ->check(CLI::Range(1u, 2u));
  addSeed(genUniformCmd);
  addDelimiter(genUniformCmd);

  CLI::App* genZipfCmd =
      app.add_subcommand("gen-zipf", "generate a Zipf-distributed table");
  genZipfCmd->add_option("output", output)->required();
  genZipfCmd->add_option("--rows", rows)->required();
  genZipfCmd->add_option("--dims", dims)->check(CLI::PositiveNumber);
  genZipfCmd->add_option("--s", zipfS, "Zipf exponent");
  genZipfCmd->add_option("--value-range", valueRange,
                         "values drawn from 1..range")
      ->check(CLI::PositiveNumber);
  addSeed(genZipfCmd);
  addDelimiter(genZipfCmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sortCmd->parsed()) return runSort(input, output, opts);
    if (indexCmd->parsed()) return runIndex(input, output, opts);
    if (queryCmd->parsed()) return runQuery(input, expression, printRows);
    if (statsCmd->parsed()) return runStats(input);
    if (genUniformCmd->parsed()) {
      g_partialOutputs.push_back(output);
      FactTable table =
          genUniform(rows, independentDims, r, dependentDims, opts.seed);
      table.delimiter = delimiterChar(opts.delimiter);
      writeFactTable(table, output);
      return 0;
    }
    if (genZipfCmd->parsed()) {
      g_partialOutputs.push_back(output);
      FactTable table = genZipf(rows, dims, zipfS, valueRange, opts.seed);
      table.delimiter = delimiterChar(opts.delimiter);
      writeFactTable(table, output);
      return 0;
    }
  } catch (const std::exception& e) {
    removePartialOutputs();
    std::cerr << "bitkiln: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
