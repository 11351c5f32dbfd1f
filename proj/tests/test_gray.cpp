#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "bitkiln/gray.hpp"
#include "bitkiln/kofn.hpp"
#include "bitkiln/rng.hpp"
#include "helpers.hpp"

using namespace bitkiln;

namespace {

std::vector<uint8_t> bits(const std::string& s) {
  std::vector<uint8_t> row;
  for (const char c : s) row.push_back(c == '1' ? 1 : 0);
  return row;
}

std::string str(const std::vector<uint8_t>& row) {
  std::string s;
  for (const uint8_t b : row) s.push_back(b ? '1' : '0');
  return s;
}

}  // namespace

TEST_CASE("all 3-bit rows sort into the reflected Gray sequence") {
  std::vector<std::vector<uint8_t>> rows;
  for (int v = 0; v < 8; ++v) {
    rows.push_back(bits({v & 4 ? '1' : '0', v & 2 ? '1' : '0',
                         v & 1 ? '1' : '0'}));
  }
  std::sort(rows.begin(), rows.end(), grayRowLess);
  std::vector<std::string> got;
  for (const auto& r : rows) got.push_back(str(r));
  CHECK(got == std::vector<std::string>{"000", "001", "011", "010", "110",
                                        "111", "101", "100"});
}

TEST_CASE("one-hot rows order like plain bit-string order") {
  // With a single leading one the prefix parity is always even, so the
  // comparison degenerates to lexicographic bit order.
  std::vector<std::vector<uint8_t>> rows;
  for (int i = 0; i < 6; ++i) {
    std::vector<uint8_t> r(6, 0);
    r[i] = 1;
    rows.push_back(r);
  }
  auto sorted = rows;
  std::sort(sorted.begin(), sorted.end(), grayRowLess);
  auto lex = rows;
  std::sort(lex.begin(), lex.end());
  CHECK(sorted == lex);
}

TEST_CASE("equal rows compare equal; length mismatch throws") {
  const auto row = bits("0110");
  CHECK(compareRowsGray(row, row) == std::strong_ordering::equal);
  CHECK_THROWS_AS(compareRowsGray(bits("01"), bits("011")),
                  std::invalid_argument);
  CHECK_THROWS_AS(compareGrayCodePositions(std::vector<uint32_t>{1},
                                           std::vector<uint32_t>{1, 2}),
                  std::invalid_argument);
}

TEST_CASE("comparator is a strict total order on random triples") {
  bitkiln::Rng rng(123);
  auto randomRow = [&](size_t len) {
    std::vector<uint8_t> r(len);
    for (auto& b : r) b = static_cast<uint8_t>(rng.below(2));
    return r;
  };
  for (int trial = 0; trial < 3000; ++trial) {
    const size_t len = 1 + rng.below(12);
    const auto a = randomRow(len);
    const auto b = randomRow(len);
    const auto c = randomRow(len);
    // Antisymmetry.
    const auto ab = compareRowsGray(a, b);
    const auto ba = compareRowsGray(b, a);
    if (ab == std::strong_ordering::equal) {
      CHECK(a == b);
      CHECK(ba == std::strong_ordering::equal);
    } else {
      CHECK((ab == std::strong_ordering::less) !=
            (ba == std::strong_ordering::less));
    }
    // Transitivity.
    if (compareRowsGray(a, b) != std::strong_ordering::greater &&
        compareRowsGray(b, c) != std::strong_ordering::greater) {
      CHECK(compareRowsGray(a, c) != std::strong_ordering::greater);
    }
  }
}

TEST_CASE("position-list comparator agrees with the row comparator") {
  bitkiln::Rng rng(456);
  for (int trial = 0; trial < 2000; ++trial) {
    const uint32_t n = 2 + static_cast<uint32_t>(rng.below(14));
    const uint32_t k = 1 + static_cast<uint32_t>(rng.below(n));
    auto randomCode = [&] {
      std::vector<uint32_t> all(n);
      for (uint32_t i = 0; i < n; ++i) all[i] = i;
      shuffleVector(all, rng);
      std::vector<uint32_t> code(all.begin(), all.begin() + k);
      std::sort(code.begin(), code.end());
      return code;
    };
    const auto p = randomCode();
    const auto q = randomCode();
    const auto viaRows =
        compareRowsGray(bits(AttributeCode{p}.bitRow(n)),
                        bits(AttributeCode{q}.bitRow(n)));
    CHECK(compareGrayCodePositions(p, q) == viaRows);
  }
}

TEST_CASE("sorting every 10-bit row gives Hamming distance one") {
  const uint32_t L = 10;
  std::vector<std::vector<uint8_t>> rows;
  rows.reserve(1u << L);
  for (uint32_t v = 0; v < (1u << L); ++v) {
    std::vector<uint8_t> r(L);
    for (uint32_t b = 0; b < L; ++b) r[b] = (v >> (L - 1 - b)) & 1u;
    rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end(), grayRowLess);
  for (uint32_t j = 0; j < rows.size(); ++j) {
    CHECK(rows[j] == testutil::grayCodeRow(L, j));
    if (j > 0) {
      int distance = 0;
      for (uint32_t b = 0; b < L; ++b) distance += rows[j][b] != rows[j - 1][b];
      CHECK(distance == 1);
    }
  }
}
