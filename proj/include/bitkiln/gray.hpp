#ifndef BITKILN_GRAY_HPP
#define BITKILN_GRAY_HPP

#include <compare>
#include <cstdint>
#include <span>

namespace bitkiln {

/// Gray-code order over bit rows of equal length: at the first index j
/// where the rows differ, the smaller row is the one whose bit equals
/// the parity of ones in the shared prefix (1 when odd, 0 when even).
/// Sorting every row of a given length by this comparator yields the
/// reflected Gray sequence. Throws std::invalid_argument on length
/// mismatch.
std::strong_ordering compareRowsGray(std::span<const uint8_t> a,
                                     std::span<const uint8_t> b);

inline bool grayRowLess(std::span<const uint8_t> a,
                        std::span<const uint8_t> b) {
  return compareRowsGray(a, b) == std::strong_ordering::less;
}

/// Same order computed directly on k-subsets given as strictly ascending
/// position lists (the rows' set-bit positions). Equivalent to rendering
/// both subsets as bit rows and calling compareRowsGray; O(k) instead of
/// O(row length).
std::strong_ordering compareGrayCodePositions(std::span<const uint32_t> a,
                                              std::span<const uint32_t> b);

}  // namespace bitkiln

#endif  // BITKILN_GRAY_HPP
