#ifndef BITKILN_QUERY_HPP
#define BITKILN_QUERY_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "bitkiln/ewah.hpp"
#include "bitkiln/index.hpp"

namespace bitkiln {

/// Boolean combination of equality predicates over indexed columns.
struct QueryExpr {
  enum class Kind { Equality, And, Or };

  Kind kind = Kind::Equality;
  std::string column;  // Equality only
  std::string value;   // Equality only
  std::unique_ptr<QueryExpr> lhs;
  std::unique_ptr<QueryExpr> rhs;

  static QueryExpr equality(std::string column, std::string value);
  static QueryExpr boolean(Kind kind, QueryExpr lhs, QueryExpr rhs);

  size_t leafCount() const;
};

/// Parses `col=value` leaves combined with `&` and `|` (with `&` binding
/// tighter) and parentheses; whitespace insensitive. Throws
/// std::invalid_argument on syntax errors.
QueryExpr parseQuery(std::string_view text);

/// Per-evaluation accounting: bitmapsRequested counts k per equality
/// leaf; bitmapsLoaded counts actual reads, i.e. distinct (column,
/// bitmap) pairs, since repeats hit the per-query cache.
struct QueryStats {
  uint64_t bitmapsRequested = 0;
  uint64_t bitmapsLoaded = 0;
  bool unknownValue = false;
};

struct QueryResult {
  std::vector<uint64_t> rowIds;  // ascending, < rows
  uint64_t count = 0;
  bool unknownValue = false;
};

/// AND of the k bitmaps named by the value's code (one load when k = 1).
/// A value missing from the dictionary yields an all-zero bitmap and
/// sets the warning flag; an unknown column is a hard error.
EwahBitmap equalityBitmap(const IndexReader& reader, const std::string& column,
                          const std::string& value,
                          QueryStats* stats = nullptr);

/// Evaluates the expression bottom-up on compressed bitmaps, decompressing
/// to row ids only at the root. Bitmaps are cached per call, keyed by
/// (column, bitmapId).
QueryResult evaluate(const IndexReader& reader, const QueryExpr& expr,
                     QueryStats* stats = nullptr);

}  // namespace bitkiln

#endif  // BITKILN_QUERY_HPP
