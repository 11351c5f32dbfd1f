#include "bitkiln/query.hpp"

#include <map>
#include <stdexcept>
#include <utility>

#include "bitkiln/errors.hpp"

namespace bitkiln {

QueryExpr QueryExpr::equality(std::string column, std::string value) {
  QueryExpr e;
  e.kind = Kind::Equality;
  e.column = std::move(column);
  e.value = std::move(value);
  return e;
}

QueryExpr QueryExpr::boolean(Kind kind, QueryExpr lhs, QueryExpr rhs) {
  QueryExpr e;
  e.kind = kind;
  e.lhs = std::make_unique<QueryExpr>(std::move(lhs));
  e.rhs = std::make_unique<QueryExpr>(std::move(rhs));
  return e;
}

size_t QueryExpr::leafCount() const {
  if (kind == Kind::Equality) return 1;
  return lhs->leafCount() + rhs->leafCount();
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  QueryExpr parse() {
    QueryExpr e = parseOr();
    skipSpace();
    if (pos_ != text_.size()) {
      throw std::invalid_argument("query: trailing input at position " +
                                  std::to_string(pos_));
    }
    return e;
  }

 private:
  void skipSpace() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t')) {
      ++pos_;
    }
  }

  bool eat(char c) {
    skipSpace();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  QueryExpr parseOr() {
    QueryExpr e = parseAnd();
    while (eat('|')) {
      e = QueryExpr::boolean(QueryExpr::Kind::Or, std::move(e), parseAnd());
    }
    return e;
  }

  QueryExpr parseAnd() {
    QueryExpr e = parseFactor();
    while (eat('&')) {
      e = QueryExpr::boolean(QueryExpr::Kind::And, std::move(e), parseFactor());
    }
    return e;
  }

  QueryExpr parseFactor() {
    if (eat('(')) {
      QueryExpr e = parseOr();
      if (!eat(')')) throw std::invalid_argument("query: missing ')'");
      return e;
    }
    const std::string column = token("column name");
    skipSpace();
    if (!eat('=')) throw std::invalid_argument("query: expected '='");
    const std::string value = token("value");
    return QueryExpr::equality(column, value);
  }

  std::string token(const char* what) {
    skipSpace();
    const size_t start = pos_;
    while (pos_ < text_.size() && !isReserved(text_[pos_])) ++pos_;
    if (pos_ == start) {
      throw std::invalid_argument(std::string("query: expected ") + what +
                                  " at position " + std::to_string(start));
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  static bool isReserved(char c) {
    return c == ' ' || c == '\t' || c == '&' || c == '|' || c == '(' ||
           c == ')' || c == '=';
  }

  std::string_view text_;
  size_t pos_ = 0;
};

using BitmapCache = std::map<std::pair<size_t, uint64_t>, EwahBitmap>;

const EwahBitmap& cachedBitmap(const IndexReader& reader, BitmapCache& cache,
                               size_t column, uint64_t bitmapId,
                               QueryStats* stats) {
  const auto key = std::make_pair(column, bitmapId);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, reader.loadBitmap(column, bitmapId)).first;
    if (stats != nullptr) ++stats->bitmapsLoaded;
  }
  return it->second;
}

EwahBitmap zeroBitmap(uint64_t bits) {
  EwahBitmap bm;
  bm.appendCleanRun(false, static_cast<int64_t>(bits / 32));
  if (bits % 32 != 0) {
    bm.appendPartialWord(0u, static_cast<uint32_t>(bits % 32));
  }
  return bm;
}

EwahBitmap equalityOnColumn(const IndexReader& reader, BitmapCache& cache,
                            size_t column, const std::string& value,
                            QueryStats* stats) {
  const ColumnCodecInfo& info = reader.header().columns[column];
  const AttributeCode* code = info.dictionary.findCode(value);
  if (code == nullptr) {
    // Equality with an unindexed constant is a legitimate query; it just
    // selects nothing.
    if (stats != nullptr) stats->unknownValue = true;
    return zeroBitmap(reader.rows());
  }
  if (stats != nullptr) stats->bitmapsRequested += code->positions.size();
  EwahBitmap result =
      cachedBitmap(reader, cache, column, code->positions[0], stats);
  for (size_t i = 1; i < code->positions.size(); ++i) {
    result = logicalBinary(
        BoolOp::And, result,
        cachedBitmap(reader, cache, column, code->positions[i], stats));
  }
  return result;
}

EwahBitmap evaluateNode(const IndexReader& reader, BitmapCache& cache,
                        const QueryExpr& expr, QueryStats* stats) {
  switch (expr.kind) {
    case QueryExpr::Kind::Equality: {
      const size_t column = reader.columnIndexOf(expr.column);
      return equalityOnColumn(reader, cache, column, expr.value, stats);
    }
    case QueryExpr::Kind::And:
    case QueryExpr::Kind::Or: {
      EwahBitmap lhs = evaluateNode(reader, cache, *expr.lhs, stats);
      EwahBitmap rhs = evaluateNode(reader, cache, *expr.rhs, stats);
      return logicalBinary(
          expr.kind == QueryExpr::Kind::And ? BoolOp::And : BoolOp::Or, lhs,
          rhs);
    }
  }
  throw std::logic_error("unreachable query node");
}

}  // namespace

QueryExpr parseQuery(std::string_view text) { return Parser(text).parse(); }

EwahBitmap equalityBitmap(const IndexReader& reader, const std::string& column,
                          const std::string& value, QueryStats* stats) {
  BitmapCache cache;
  return equalityOnColumn(reader, cache, reader.columnIndexOf(column), value,
                          stats);
}

QueryResult evaluate(const IndexReader& reader, const QueryExpr& expr,
                     QueryStats* stats) {
  BitmapCache cache;
  QueryStats localStats;
  const EwahBitmap root = evaluateNode(reader, cache, expr, &localStats);
  QueryResult result;
  result.rowIds = root.setPositions();
  result.count = result.rowIds.size();
  result.unknownValue = localStats.unknownValue;
  if (stats != nullptr) *stats = localStats;
  return result;
}

}  // namespace bitkiln
