#ifndef BITKILN_EWAH_HPP
#define BITKILN_EWAH_HPP

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bitkiln {

/// EWAH marker-word codec. A marker packs three fields into 32 bits:
/// bit 0 is the clean-word type (0 = all-zero words, 1 = all-one words),
/// bits 1-16 count the clean words of that type, and bits 17-31 count the
/// literal (dirty) words that follow the marker in the stream.
namespace ewah {

constexpr uint32_t kWordBits = 32;
constexpr uint32_t kMaxCleanRun = (1u << 16) - 1;
constexpr uint32_t kMaxDirtyCount = (1u << 15) - 1;

constexpr uint32_t makeMarker(bool cleanType, uint32_t cleanRun,
                              uint32_t dirtyCount) {
  return (cleanType ? 1u : 0u) | (cleanRun << 1) | (dirtyCount << 17);
}

constexpr bool markerCleanType(uint32_t marker) { return (marker & 1u) != 0; }

constexpr uint32_t markerCleanRun(uint32_t marker) {
  return (marker >> 1) & kMaxCleanRun;
}

constexpr uint32_t markerDirtyCount(uint32_t marker) { return marker >> 17; }

}  // namespace ewah

/// Size accounting for one bitmap, in 32-bit words.
struct SizeStats {
  uint64_t compressedWords = 0;    // markers + literals actually stored
  uint64_t uncompressedWords = 0;  // ceil(bitLength / 32)
  uint64_t setBits = 0;
  uint64_t dirtyWords = 0;

  // 1 - C/N; an empty bitmap reports 0 rather than 0/0.
  double compressionFactor() const {
    if (uncompressedWords == 0) return 0.0;
    return 1.0 - static_cast<double>(compressedWords) /
                     static_cast<double>(uncompressedWords);
  }
};

enum class BoolOp { And, Or, Xor, AndNot };

/// Word-visit accounting for a logical operation: number of compressed
/// words (markers and literals) read from the two inputs. Literal words
/// skipped arithmetically under an absorbing clean run are not visited.
struct LogicalOpCost {
  uint64_t wordVisits = 0;
};

/// Compressed bitset built from alternating marker and literal words.
///
/// The word stream always begins with a marker, even when the bitmap is
/// empty. Appends keep the stream canonical: clean words extend the last
/// marker whenever possible, and a fresh marker is emitted only when a
/// counter saturates or the run/dirty phase alternates. A bitmap under
/// construction has a single owner; once complete it is immutable and
/// safe to read from any number of threads.
class EwahBitmap {
 public:
  EwahBitmap() : words_{ewah::makeMarker(false, 0, 0)} {}

  /// Compresses a packed bit sequence. `words` holds bits LSB-first
  /// (row r lives in word r/32, bit r%32); padding past bitLength is
  /// ignored.
  static EwahBitmap fromWords(std::span<const uint32_t> words,
                              uint64_t bitLength);
  static EwahBitmap fromBits(const std::vector<bool>& bits);

  /// Adopts an already-compressed word stream (as produced by rawWords())
  /// whose coverage must match bitLength exactly. Used when reading
  /// bitmaps back from storage; throws std::invalid_argument on a
  /// malformed stream.
  static EwahBitmap fromEncodedWords(std::vector<uint32_t> words,
                                     uint64_t bitLength);

  /// Appends wordCount clean words of the given bit value in amortized
  /// constant time. Throws std::invalid_argument on negative counts and
  /// std::logic_error when the bitmap ends in a partial word.
  void appendCleanRun(bool bitValue, int64_t wordCount);

  /// Appends one 32-bit word; clean words are folded into the run
  /// machinery, dirty words are stored in extenso.
  void appendLiteral(uint32_t word);

  /// Appends the low `bitCount` bits of `word` (1..32) as a final ragged
  /// tail. Bits at and above bitCount must be zero.
  void appendPartialWord(uint32_t word, uint32_t bitCount);

  /// Appends another bitmap's whole content; this bitmap must be
  /// word-aligned.
  void appendBitmap(const EwahBitmap& tail);

  uint64_t bitLength() const { return bitLength_; }
  uint64_t setBitCount() const { return setBits_; }
  uint64_t sizeInWords() const { return words_.size(); }
  uint64_t uncompressedWords() const { return (bitLength_ + 31) / 32; }
  const std::vector<uint32_t>& rawWords() const { return words_; }

  uint64_t dirtyWordCount() const;
  /// Count of non-zero words in the uncompressed view: all-one clean
  /// words plus literals.
  uint64_t nonZeroWords() const;
  SizeStats sizeStats() const;

  std::vector<uint32_t> toWords() const;
  std::vector<bool> toBits() const;

  /// Calls fn(position) for every set bit in ascending order.
  template <class Fn>
  void forEachSetBit(Fn&& fn) const;
  std::vector<uint64_t> setPositions() const;

  bool get(uint64_t position) const;

  /// Structural well-formedness check used by tests: marker chain
  /// consistent, word coverage exact, literals dirty, runs maximal,
  /// padding zero.
  bool checkInvariants(std::string* why = nullptr) const;

  bool operator==(const EwahBitmap& other) const {
    return bitLength_ == other.bitLength_ && words_ == other.words_;
  }

  friend EwahBitmap logicalBinary(BoolOp op, const EwahBitmap& b1,
                                  const EwahBitmap& b2, LogicalOpCost* cost);

 private:
  friend class EwahRunDecoder;

  void newMarker();
  void requireAligned(const char* op) const;
  void setExactBitLength(uint64_t bits);

  std::vector<uint32_t> words_;
  size_t lastMarker_ = 0;
  uint64_t bitLength_ = 0;
  uint64_t setBits_ = 0;
};

/// Computes op(b1, b2) on the compressed form. Both inputs must have the
/// same bitLength (no implicit padding); the result is truncated to it.
/// Running time is proportional to the compressed sizes traversed, never
/// to the bit length.
EwahBitmap logicalBinary(BoolOp op, const EwahBitmap& b1,
                         const EwahBitmap& b2, LogicalOpCost* cost = nullptr);

template <class Fn>
void EwahBitmap::forEachSetBit(Fn&& fn) const {
  uint64_t wordBase = 0;  // bit index of the current word
  size_t pos = 0;
  while (pos < words_.size()) {
    const uint32_t marker = words_[pos++];
    const uint32_t run = ewah::markerCleanRun(marker);
    if (ewah::markerCleanType(marker)) {
      const uint64_t end = wordBase + uint64_t{run} * 32;
      for (uint64_t p = wordBase; p < end && p < bitLength_; ++p) fn(p);
    }
    wordBase += uint64_t{run} * 32;
    for (uint32_t d = ewah::markerDirtyCount(marker); d > 0; --d) {
      uint32_t w = words_[pos++];
      while (w != 0) {
        const unsigned bit = std::countr_zero(w);
        const uint64_t p = wordBase + bit;
        if (p < bitLength_) fn(p);
        w &= w - 1;
      }
      wordBase += 32;
    }
  }
}

}  // namespace bitkiln

#endif  // BITKILN_EWAH_HPP
