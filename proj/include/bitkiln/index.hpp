#ifndef BITKILN_INDEX_HPP
#define BITKILN_INDEX_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bitkiln/ewah.hpp"
#include "bitkiln/histogram.hpp"
#include "bitkiln/kofn.hpp"
#include "bitkiln/table.hpp"

namespace bitkiln {

inline constexpr char kIndexMagic[4] = {'B', 'K', 'L', 'N'};
inline constexpr uint8_t kIndexVersion = 1;

/// Codec of one indexed column: its dictionary plus where its bitmaps
/// sit in the global bitmap id space.
struct ColumnCodecInfo {
  std::string name;
  uint64_t cardinality = 0;
  uint32_t k = 0;
  uint32_t bitmapCount = 0;
  Allocation allocation = Allocation::Alphabetic;
  ColumnDictionary dictionary;
  uint64_t firstBitmapId = 0;
};

/// One horizontal partition: a contiguous row range stored as an offset
/// table (4 bytes per bitmap, offsets relative to the partition start)
/// followed by the serialized bitmaps. payloadOffset is relative to the
/// start of the payload area (the byte right after the header).
struct PartitionInfo {
  uint64_t rowStart = 0;
  uint64_t rowCount = 0;
  uint64_t payloadOffset = 0;
  uint64_t byteSize = 0;
};

struct IndexHeader {
  uint64_t rows = 0;
  uint32_t wordBits = 32;
  std::vector<ColumnCodecInfo> columns;
  std::vector<PartitionInfo> partitions;

  uint64_t totalBitmaps() const {
    uint64_t total = 0;
    for (const auto& c : columns) total += c.bitmapCount;
    return total;
  }
};

struct BuildConfig {
  uint32_t k = 1;
  Allocation allocation = Allocation::Alphabetic;
  uint64_t partitionBytes = 256ull << 20;
  uint64_t grayCeiling = kDefaultGrayCeiling;
  /// Optional column names; defaults to d0, d1, ...
  std::vector<std::string> columnNames;
};

/// Construction accounting for the complexity and write-pattern checks:
/// rowCodeTouches counts per-row bitmap naming events (at most k per
/// column per row), finalizeTouches the per-partition catch-up sweeps
/// (L per partition), and monotoneWrites stays true while every byte
/// lands at a strictly increasing file offset.
struct BuildTrace {
  uint64_t rowCodeTouches = 0;
  uint64_t finalizeTouches = 0;
  uint64_t maxRowTouches = 0;
  uint64_t partitionCount = 0;
  uint64_t bytesWritten = 0;
  bool monotoneWrites = true;
};

/// Chooses the per-column encoding for a histogram: effective k under
/// the cardinality heuristic, minimal bitmap count, dictionary, and
/// global bitmap id ranges.
std::vector<ColumnCodecInfo> makeColumnCodecs(const Histogram& histogram,
                                              const BuildConfig& config);

/// Second indexing pass: streams rows once, appending to all bitmaps of
/// one partition at a time, and writes the index file append-only. The
/// histogram must describe exactly the rows being streamed.
void buildIndex(RowSource& source, const Histogram& histogram,
                const BuildConfig& config, const std::filesystem::path& out,
                BuildTrace* trace = nullptr);

struct BitmapStats {
  size_t column = 0;
  uint64_t bitmapId = 0;
  uint64_t compressedWords = 0;    // stored words across partitions
  uint64_t uncompressedWords = 0;  // ceil(rows / 32)
  uint64_t setBits = 0;
  double factor = 0.0;  // 1 - C/N, 0 for an empty index
};

struct ColumnTotals {
  size_t column = 0;
  std::string name;
  uint64_t bitmapCount = 0;
  uint64_t compressedWords = 0;
  uint64_t uncompressedWords = 0;
  uint64_t setBits = 0;
  double factor = 0.0;
};

struct IndexStatsReport {
  std::vector<BitmapStats> bitmaps;
  std::vector<ColumnTotals> columns;
  uint64_t totalCompressedWords = 0;
  uint64_t totalUncompressedWords = 0;
};

/// Read handle over one index file. The header is parsed eagerly; bitmap
/// payloads are fetched on demand with positioned reads, so concurrent
/// loadBitmap calls need no coordination.
class IndexReader {
 public:
  IndexReader(IndexReader&& other) noexcept;
  IndexReader& operator=(IndexReader&& other) noexcept;
  IndexReader(const IndexReader&) = delete;
  IndexReader& operator=(const IndexReader&) = delete;
  ~IndexReader();

  static IndexReader open(const std::filesystem::path& path);

  const IndexHeader& header() const { return header_; }
  uint64_t rows() const { return header_.rows; }
  size_t columnIndexOf(const std::string& name) const;

  /// Concatenates the bitmap's segments across partitions in row order.
  /// Only the offset-table entries and the requested segments are read.
  EwahBitmap loadBitmap(size_t column, uint64_t bitmapId) const;

  IndexStatsReport stats() const;

  struct IoCounters {
    uint64_t bytesRead = 0;
    uint64_t readCalls = 0;
  };
  const IoCounters& ioCounters() const { return io_; }
  void resetIoCounters() const { io_ = IoCounters{}; }

 private:
  IndexReader() = default;

  void readAt(uint64_t offset, void* buffer, size_t size) const;
  uint32_t readU32(uint64_t offset) const;
  void forEachSegment(
      uint64_t globalBitmapId,
      const std::function<void(EwahBitmap&&, const PartitionInfo&)>& fn) const;

  int fd_ = -1;
  uint64_t fileSize_ = 0;
  uint64_t payloadStart_ = 0;
  IndexHeader header_;
  std::unordered_map<std::string, size_t> columnByName_;
  mutable IoCounters io_;
};

}  // namespace bitkiln

#endif  // BITKILN_INDEX_HPP
