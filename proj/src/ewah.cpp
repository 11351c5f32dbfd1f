#include "bitkiln/ewah.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <stdexcept>

namespace bitkiln {

using namespace ewah;

void EwahBitmap::requireAligned(const char* op) const {
  if (bitLength_ % kWordBits != 0) {
    throw std::logic_error(std::string(op) +
                           ": bitmap ends in a partial word");
  }
}

void EwahBitmap::newMarker() {
  words_.push_back(makeMarker(false, 0, 0));
  lastMarker_ = words_.size() - 1;
}

void EwahBitmap::appendCleanRun(bool bitValue, int64_t wordCount) {
  if (wordCount < 0) {
    throw std::invalid_argument("appendCleanRun: negative word count");
  }
  requireAligned("appendCleanRun");
  uint64_t left = static_cast<uint64_t>(wordCount);
  bitLength_ += left * kWordBits;
  if (bitValue) setBits_ += left * kWordBits;
  while (left > 0) {
    uint32_t marker = words_[lastMarker_];
    const bool extendable =
        markerDirtyCount(marker) == 0 &&
        (markerCleanRun(marker) == 0 || markerCleanType(marker) == bitValue) &&
        markerCleanRun(marker) < kMaxCleanRun;
    if (!extendable) {
      newMarker();
      marker = words_[lastMarker_];
    }
    const uint32_t run = markerCleanRun(marker);
    const uint32_t take =
        static_cast<uint32_t>(std::min<uint64_t>(left, kMaxCleanRun - run));
    words_[lastMarker_] = makeMarker(bitValue, run + take, 0);
    left -= take;
  }
}

void EwahBitmap::appendLiteral(uint32_t word) {
  if (word == 0u) {
    appendCleanRun(false, 1);
    return;
  }
  if (word == ~0u) {
    appendCleanRun(true, 1);
    return;
  }
  requireAligned("appendLiteral");
  const uint32_t marker = words_[lastMarker_];
  if (markerDirtyCount(marker) == kMaxDirtyCount) newMarker();
  words_[lastMarker_] += 1u << 17;  // dirtyCount++
  words_.push_back(word);
  bitLength_ += kWordBits;
  setBits_ += std::popcount(word);
}

void EwahBitmap::appendPartialWord(uint32_t word, uint32_t bitCount) {
  if (bitCount == 0) return;
  if (bitCount > kWordBits) {
    throw std::invalid_argument("appendPartialWord: more than 32 bits");
  }
  if (bitCount < kWordBits && (word >> bitCount) != 0) {
    throw std::invalid_argument("appendPartialWord: padding bits set");
  }
  appendLiteral(word);
  bitLength_ -= kWordBits - bitCount;
}

void EwahBitmap::appendBitmap(const EwahBitmap& tail) {
  requireAligned("appendBitmap");
  const auto& words = tail.words_;
  const uint64_t fullWords = tail.bitLength_ / kWordBits;
  const uint32_t tailBits = static_cast<uint32_t>(tail.bitLength_ % kWordBits);
  uint64_t emitted = 0;
  size_t pos = 0;
  auto emitWord = [&](bool clean, bool type, uint32_t literal) {
    if (emitted < fullWords) {
      if (clean) {
        appendCleanRun(type, 1);
      } else {
        appendLiteral(literal);
      }
    } else {
      appendPartialWord(clean ? (type ? (1u << tailBits) - 1 : 0u) : literal,
                        tailBits);
    }
    ++emitted;
  };
  while (pos < words.size()) {
    const uint32_t marker = words[pos++];
    const uint32_t run = markerCleanRun(marker);
    const bool type = markerCleanType(marker);
    // Whole runs short-circuit through the run machinery; only a ragged
    // final word needs the word-at-a-time path.
    if (emitted + run <= fullWords) {
      appendCleanRun(type, run);
      emitted += run;
    } else {
      for (uint32_t i = 0; i < run; ++i) emitWord(true, type, 0);
    }
    for (uint32_t d = markerDirtyCount(marker); d > 0; --d) {
      emitWord(false, false, words[pos++]);
    }
  }
}

EwahBitmap EwahBitmap::fromWords(std::span<const uint32_t> words,
                                 uint64_t bitLength) {
  const uint64_t needed = (bitLength + kWordBits - 1) / kWordBits;
  if (words.size() < needed) {
    throw std::invalid_argument("fromWords: word buffer shorter than length");
  }
  EwahBitmap bm;
  const uint64_t fullWords = bitLength / kWordBits;
  for (uint64_t i = 0; i < fullWords; ++i) bm.appendLiteral(words[i]);
  const uint32_t tailBits = static_cast<uint32_t>(bitLength % kWordBits);
  if (tailBits != 0) {
    const uint32_t mask = (1u << tailBits) - 1;
    bm.appendPartialWord(words[fullWords] & mask, tailBits);
  }
  return bm;
}

EwahBitmap EwahBitmap::fromEncodedWords(std::vector<uint32_t> words,
                                        uint64_t bitLength) {
  if (words.empty()) {
    throw std::invalid_argument("fromEncodedWords: missing leading marker");
  }
  uint64_t covered = 0;
  uint64_t setBits = 0;
  size_t pos = 0;
  size_t lastMarker = 0;
  while (pos < words.size()) {
    lastMarker = pos;
    const uint32_t marker = words[pos++];
    covered += markerCleanRun(marker);
    if (markerCleanType(marker)) {
      setBits += uint64_t{markerCleanRun(marker)} * kWordBits;
    }
    for (uint32_t d = markerDirtyCount(marker); d > 0; --d) {
      if (pos >= words.size()) {
        throw std::invalid_argument(
            "fromEncodedWords: marker promises missing literals");
      }
      setBits += std::popcount(words[pos++]);
    }
    covered += markerDirtyCount(marker);
  }
  if (covered != (bitLength + kWordBits - 1) / kWordBits) {
    throw std::invalid_argument(
        "fromEncodedWords: word coverage does not match bit length");
  }
  EwahBitmap bm;
  bm.words_ = std::move(words);
  bm.lastMarker_ = lastMarker;
  bm.bitLength_ = bitLength;
  bm.setBits_ = setBits;
  return bm;
}

EwahBitmap EwahBitmap::fromBits(const std::vector<bool>& bits) {
  std::vector<uint32_t> words((bits.size() + kWordBits - 1) / kWordBits, 0u);
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) words[i / kWordBits] |= 1u << (i % kWordBits);
  }
  return fromWords(words, bits.size());
}

uint64_t EwahBitmap::dirtyWordCount() const {
  uint64_t dirty = 0;
  size_t pos = 0;
  while (pos < words_.size()) {
    const uint32_t d = markerDirtyCount(words_[pos]);
    dirty += d;
    pos += 1 + d;
  }
  return dirty;
}

uint64_t EwahBitmap::nonZeroWords() const {
  uint64_t count = 0;
  size_t pos = 0;
  while (pos < words_.size()) {
    const uint32_t marker = words_[pos];
    if (markerCleanType(marker)) count += markerCleanRun(marker);
    count += markerDirtyCount(marker);
    pos += 1 + markerDirtyCount(marker);
  }
  return count;
}

SizeStats EwahBitmap::sizeStats() const {
  return SizeStats{words_.size(), uncompressedWords(), setBits_,
                   dirtyWordCount()};
}

std::vector<uint32_t> EwahBitmap::toWords() const {
  std::vector<uint32_t> out;
  out.reserve(uncompressedWords());
  size_t pos = 0;
  while (pos < words_.size()) {
    const uint32_t marker = words_[pos++];
    const uint32_t fill = markerCleanType(marker) ? ~0u : 0u;
    out.insert(out.end(), markerCleanRun(marker), fill);
    for (uint32_t d = markerDirtyCount(marker); d > 0; --d) {
      out.push_back(words_[pos++]);
    }
  }
  // Mask padding in a ragged final word so callers see exact content.
  const uint32_t tailBits = static_cast<uint32_t>(bitLength_ % kWordBits);
  if (tailBits != 0 && !out.empty()) out.back() &= (1u << tailBits) - 1;
  assert(out.size() == uncompressedWords());
  return out;
}

std::vector<bool> EwahBitmap::toBits() const {
  const auto words = toWords();
  std::vector<bool> bits(bitLength_, false);
  for (uint64_t i = 0; i < bitLength_; ++i) {
    bits[i] = (words[i / kWordBits] >> (i % kWordBits)) & 1u;
  }
  return bits;
}

std::vector<uint64_t> EwahBitmap::setPositions() const {
  std::vector<uint64_t> out;
  out.reserve(setBits_);
  forEachSetBit([&](uint64_t p) { out.push_back(p); });
  return out;
}

bool EwahBitmap::get(uint64_t position) const {
  if (position >= bitLength_) return false;
  bool value = false;
  uint64_t wordBase = 0;
  size_t pos = 0;
  const uint64_t target = position / kWordBits;
  while (pos < words_.size()) {
    const uint32_t marker = words_[pos++];
    const uint32_t run = markerCleanRun(marker);
    if (target < wordBase + run) return markerCleanType(marker);
    wordBase += run;
    const uint32_t dirty = markerDirtyCount(marker);
    if (target < wordBase + dirty) {
      const uint32_t w = words_[pos + (target - wordBase)];
      return (w >> (position % kWordBits)) & 1u;
    }
    wordBase += dirty;
    pos += dirty;
  }
  return value;
}

bool EwahBitmap::checkInvariants(std::string* why) const {
  auto fail = [&](const std::string& message) {
    if (why != nullptr) *why = message;
    return false;
  };
  if (words_.empty()) return fail("no leading marker word");
  uint64_t coveredWords = 0;
  uint64_t setBits = 0;
  size_t pos = 0;
  uint32_t prevMarker = 0;
  bool first = true;
  while (pos < words_.size()) {
    const uint32_t marker = words_[pos++];
    const uint32_t run = markerCleanRun(marker);
    const uint32_t dirty = markerDirtyCount(marker);
    if (run == 0 && dirty == 0 && words_.size() != 1) {
      return fail("empty marker in non-empty stream");
    }
    if (!first) {
      // A marker is only legal when its predecessor could not absorb it.
      const bool prevOpenRun = markerDirtyCount(prevMarker) == 0;
      if (prevOpenRun && run > 0 &&
          markerCleanType(prevMarker) == markerCleanType(marker) &&
          markerCleanRun(prevMarker) < kMaxCleanRun) {
        return fail("non-maximal clean run");
      }
      if (dirty > 0 && run == 0 &&
          markerDirtyCount(prevMarker) < kMaxDirtyCount) {
        return fail("dirty words split across markers");
      }
    }
    if (markerCleanType(marker)) setBits += uint64_t{run} * kWordBits;
    coveredWords += run;
    for (uint32_t d = 0; d < dirty; ++d) {
      if (pos >= words_.size()) return fail("marker promises missing words");
      const uint32_t w = words_[pos++];
      if (w == 0u || w == ~0u) return fail("clean word stored as literal");
      setBits += std::popcount(w);
    }
    coveredWords += dirty;
    prevMarker = marker;
    first = false;
  }
  if (coveredWords != uncompressedWords()) {
    return fail("word coverage does not match bit length");
  }
  const uint32_t tailBits = static_cast<uint32_t>(bitLength_ % kWordBits);
  if (tailBits != 0) {
    // Recover the stored (unmasked) final word to check its padding.
    uint32_t storedTail = 0;
    size_t rawPos = 0;
    while (rawPos < words_.size()) {
      const uint32_t marker = words_[rawPos++];
      if (markerCleanRun(marker) > 0) {
        storedTail = markerCleanType(marker) ? ~0u : 0u;
      }
      for (uint32_t d = markerDirtyCount(marker); d > 0; --d) {
        storedTail = words_[rawPos++];
      }
    }
    if ((storedTail >> tailBits) != 0) {
      return fail("padding bits beyond bitLength are set");
    }
  }
  if (setBits != setBits_) return fail("cached set-bit count is stale");
  return true;
}

void EwahBitmap::setExactBitLength(uint64_t bits) {
  assert((bits + kWordBits - 1) / kWordBits == bitLength_ / kWordBits ||
         bits == bitLength_);
  bitLength_ = bits;
}

namespace {

// Streaming view of a compressed bitmap as (clean run, dirty span)
// segments. Reading a marker or a literal counts one word visit; words
// skipped arithmetically are free.
class EwahRunDecoder {
 public:
  EwahRunDecoder(const EwahBitmap& bm, LogicalOpCost* cost)
      : words_(bm.rawWords()), cost_(cost) {
    advance();
  }

  uint64_t cleanLeft() const { return cleanLeft_; }
  bool cleanType() const { return cleanType_; }
  uint32_t dirtyLeft() const { return dirtyLeft_; }
  bool done() const {
    return cleanLeft_ == 0 && dirtyLeft_ == 0 && pos_ >= words_.size();
  }

  void consumeClean(uint64_t n) {
    cleanLeft_ -= n;
    advance();
  }

  uint32_t readDirty() {
    visit();
    const uint32_t w = words_[pos_++];
    --dirtyLeft_;
    advance();
    return w;
  }

  void skipDirty(uint32_t n) {
    pos_ += n;
    dirtyLeft_ -= n;
    advance();
  }

 private:
  void visit() {
    if (cost_ != nullptr) ++cost_->wordVisits;
  }

  void advance() {
    while (cleanLeft_ == 0 && dirtyLeft_ == 0 && pos_ < words_.size()) {
      visit();
      const uint32_t marker = words_[pos_++];
      cleanLeft_ = ewah::markerCleanRun(marker);
      cleanType_ = ewah::markerCleanType(marker);
      dirtyLeft_ = ewah::markerDirtyCount(marker);
    }
  }

  const std::vector<uint32_t>& words_;
  LogicalOpCost* cost_;
  size_t pos_ = 0;
  uint64_t cleanLeft_ = 0;
  bool cleanType_ = false;
  uint32_t dirtyLeft_ = 0;
};

bool combineBits(BoolOp op, bool x, bool y) {
  switch (op) {
    case BoolOp::And:
      return x && y;
    case BoolOp::Or:
      return x || y;
    case BoolOp::Xor:
      return x != y;
    case BoolOp::AndNot:
      return x && !y;
  }
  return false;
}

uint32_t combineWords(BoolOp op, uint32_t x, uint32_t y) {
  switch (op) {
    case BoolOp::And:
      return x & y;
    case BoolOp::Or:
      return x | y;
    case BoolOp::Xor:
      return x ^ y;
    case BoolOp::AndNot:
      return x & ~y;
  }
  return 0;
}

// Resolves a clean run on one side against literals on the other.
// `cleanOnLeft` keeps AndNot oriented. When the clean type absorbs the
// op the other side's literals are skipped without being read.
void emitCleanVersusDirty(BoolOp op, bool cleanOnLeft, bool type, uint64_t n,
                          EwahRunDecoder& dirtySide, EwahBitmap& out) {
  const bool whenZero = cleanOnLeft ? combineBits(op, type, false)
                                    : combineBits(op, false, type);
  const bool whenOne = cleanOnLeft ? combineBits(op, type, true)
                                   : combineBits(op, true, type);
  if (whenZero == whenOne) {
    out.appendCleanRun(whenZero, static_cast<int64_t>(n));
    dirtySide.skipDirty(static_cast<uint32_t>(n));
    return;
  }
  const bool complement = whenZero;  // f(t, y) == !y
  for (uint64_t i = 0; i < n; ++i) {
    const uint32_t w = dirtySide.readDirty();
    out.appendLiteral(complement ? ~w : w);
  }
}

}  // namespace

EwahBitmap logicalBinary(BoolOp op, const EwahBitmap& b1, const EwahBitmap& b2,
                         LogicalOpCost* cost) {
  if (b1.bitLength() != b2.bitLength()) {
    std::ostringstream msg;
    msg << "logicalBinary: length mismatch (" << b1.bitLength() << " vs "
        << b2.bitLength() << ")";
    throw std::invalid_argument(msg.str());
  }
  EwahRunDecoder left(b1, cost);
  EwahRunDecoder right(b2, cost);
  EwahBitmap out;
  uint64_t remaining = b1.uncompressedWords();
  while (remaining > 0) {
    assert(!left.done() && !right.done());
    if (left.cleanLeft() > 0 && right.cleanLeft() > 0) {
      const uint64_t n =
          std::min({left.cleanLeft(), right.cleanLeft(), remaining});
      out.appendCleanRun(combineBits(op, left.cleanType(), right.cleanType()),
                         static_cast<int64_t>(n));
      left.consumeClean(n);
      right.consumeClean(n);
      remaining -= n;
    } else if (left.cleanLeft() > 0) {
      const uint64_t n = std::min<uint64_t>(
          {left.cleanLeft(), right.dirtyLeft(), remaining});
      emitCleanVersusDirty(op, true, left.cleanType(), n, right, out);
      left.consumeClean(n);
      remaining -= n;
    } else if (right.cleanLeft() > 0) {
      const uint64_t n =
          std::min<uint64_t>({right.cleanLeft(), left.dirtyLeft(), remaining});
      emitCleanVersusDirty(op, false, right.cleanType(), n, left, out);
      right.consumeClean(n);
      remaining -= n;
    } else {
      out.appendLiteral(combineWords(op, left.readDirty(), right.readDirty()));
      remaining -= 1;
    }
  }
  out.setExactBitLength(b1.bitLength());
  return out;
}

}  // namespace bitkiln
