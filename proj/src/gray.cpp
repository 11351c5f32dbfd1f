#include "bitkiln/gray.hpp"

#include <stdexcept>

namespace bitkiln {

std::strong_ordering compareRowsGray(std::span<const uint8_t> a,
                                     std::span<const uint8_t> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("compareRowsGray: rows differ in length");
  }
  bool oddPrefix = false;
  for (size_t i = 0; i < a.size(); ++i) {
    const bool abit = a[i] != 0;
    const bool bbit = b[i] != 0;
    if (abit != bbit) {
      return (abit == oddPrefix) ? std::strong_ordering::less
                                 : std::strong_ordering::greater;
    }
    oddPrefix ^= abit;
  }
  return std::strong_ordering::equal;
}

std::strong_ordering compareGrayCodePositions(std::span<const uint32_t> a,
                                              std::span<const uint32_t> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(
        "compareGrayCodePositions: codes differ in weight");
  }
  size_t i = 0;
  while (i < a.size() && a[i] == b[i]) ++i;
  if (i == a.size()) return std::strong_ordering::equal;
  // The shared prefix holds exactly i ones; the first differing bit sits
  // at min(a[i], b[i]) and belongs to the side with the smaller position.
  const bool oddPrefix = (i % 2) == 1;
  const bool aHasOne = a[i] < b[i];
  return (aHasOne == oddPrefix) ? std::strong_ordering::less
                                : std::strong_ordering::greater;
}

}  // namespace bitkiln
