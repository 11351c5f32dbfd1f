#include <algorithm>
#include <cassert>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "bitkiln/errors.hpp"
#include "bitkiln/index.hpp"

namespace bitkiln {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void putU32(std::string& out, uint32_t v) {
  char b[4];
  b[0] = static_cast<char>(v & 0xFF);
  b[1] = static_cast<char>((v >> 8) & 0xFF);
  b[2] = static_cast<char>((v >> 16) & 0xFF);
  b[3] = static_cast<char>((v >> 24) & 0xFF);
  out.append(b, 4);
}

void putU64(std::string& out, uint64_t v) {
  putU32(out, static_cast<uint32_t>(v & 0xFFFFFFFFu));
  putU32(out, static_cast<uint32_t>(v >> 32));
}

// Append-only sink that records every write offset; a single seek-back
// would flip monotone to false.
class AppendWriter {
 public:
  explicit AppendWriter(const fs::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open for writing: " + path.string());
  }

  void write(const char* data, size_t size) {
    out_.write(data, static_cast<std::streamsize>(size));
    if (!out_) throw IoError("write failed: " + path_.string());
    const uint64_t at = static_cast<uint64_t>(out_.tellp());
    if (at != offset_ + size) monotone_ = false;
    offset_ = at;
  }

  void write(const std::string& data) { write(data.data(), data.size()); }

  uint64_t offset() const { return offset_; }
  bool monotone() const { return monotone_; }
  void close() { out_.close(); }

 private:
  fs::path path_;
  std::ofstream out_;
  uint64_t offset_ = 0;
  bool monotone_ = true;
};

// Removes a file on destruction unless dismissed.
class FileGuard {
 public:
  explicit FileGuard(fs::path path) : path_(std::move(path)) {}
  ~FileGuard() {
    if (armed_) {
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }
  void dismiss() { armed_ = false; }

 private:
  fs::path path_;
  bool armed_ = true;
};

json headerJson(uint64_t rows, const std::vector<ColumnCodecInfo>& columns,
                const std::vector<PartitionInfo>& partitions) {
  json meta;
  meta["rows"] = rows;
  meta["word_bits"] = 32;
  json cols = json::array();
  for (const auto& c : columns) {
    json col;
    col["name"] = c.name;
    col["cardinality"] = c.cardinality;
    col["k"] = c.k;
    col["bitmaps"] = c.bitmapCount;
    col["allocation"] = std::string(allocationName(c.allocation));
    col["values"] = c.dictionary.values();
    cols.push_back(std::move(col));
  }
  meta["columns"] = std::move(cols);
  json parts = json::array();
  for (const auto& p : partitions) {
    json part;
    part["row_start"] = p.rowStart;
    part["rows"] = p.rowCount;
    part["offset"] = p.payloadOffset;
    part["bytes"] = p.byteSize;
    parts.push_back(std::move(part));
  }
  meta["partitions"] = std::move(parts);
  return meta;
}

}  // namespace

std::vector<ColumnCodecInfo> makeColumnCodecs(const Histogram& histogram,
                                              const BuildConfig& config) {
  std::vector<ColumnCodecInfo> columns;
  columns.reserve(histogram.columns.size());
  uint64_t nextBitmapId = 0;
  for (size_t c = 0; c < histogram.columns.size(); ++c) {
    const auto& counts = histogram.columns[c];
    ColumnCodecInfo info;
    info.name = c < config.columnNames.size() ? config.columnNames[c]
                                              : "d" + std::to_string(c);
    info.cardinality = counts.size();
    info.k = effectiveK(config.k, info.cardinality);
    info.bitmapCount = bitmapsNeeded(info.cardinality, info.k);
    info.allocation = config.allocation;
    std::vector<std::string> values;
    values.reserve(counts.size());
    for (const auto& [value, count] : counts) values.push_back(value);
    info.dictionary =
        ColumnDictionary::allocate(std::move(values), info.k, info.bitmapCount,
                                   info.allocation, config.grayCeiling);
    info.firstBitmapId = nextBitmapId;
    nextBitmapId += info.bitmapCount;
    columns.push_back(std::move(info));
  }
  return columns;
}

void buildIndex(RowSource& source, const Histogram& histogram,
                const BuildConfig& config, const fs::path& out,
                BuildTrace* trace) {
  source.rewind();
  const auto columns = makeColumnCodecs(histogram, config);
  const size_t d = columns.size();
  uint64_t totalBitmaps = 0;
  for (const auto& c : columns) totalBitmaps += c.bitmapCount;
  const uint64_t L = totalBitmaps;

  BuildTrace localTrace;
  const fs::path payloadPath = out.string() + ".payload.tmp";
  FileGuard payloadGuard(payloadPath);
  FileGuard outGuard(out);
  AppendWriter payload(payloadPath);

  std::vector<EwahBitmap> bitmaps(L);
  std::vector<uint32_t> pending(L, 0u);
  std::vector<uint64_t> touchedInBlock(L, UINT64_MAX);
  std::vector<uint64_t> touchedList;
  std::vector<PartitionInfo> partitions;

  // Serialized size estimate of the open partition: offset table plus a
  // word-count prefix and the words of every bitmap.
  uint64_t partitionWords = L;  // every bitmap starts as one marker word
  uint64_t partitionRowStart = 0;
  uint64_t rowIndex = 0;

  auto appendTracked = [&](uint64_t gid, auto&& fn) {
    const uint64_t before = bitmaps[gid].sizeInWords();
    fn(bitmaps[gid]);
    partitionWords += bitmaps[gid].sizeInWords() - before;
  };

  auto flushBlock = [&](uint64_t blockWordsInPartition) {
    for (const uint64_t gid : touchedList) {
      appendTracked(gid, [&](EwahBitmap& bm) {
        const uint64_t have = bm.bitLength() / 32;
        bm.appendCleanRun(false,
                          static_cast<int64_t>(blockWordsInPartition - 1 - have));
        bm.appendLiteral(pending[gid]);
      });
      pending[gid] = 0;
    }
    touchedList.clear();
  };

  auto closePartition = [&] {
    const uint64_t rowsLocal = rowIndex - partitionRowStart;
    if (rowsLocal == 0) return;
    const uint64_t fullWords = rowsLocal / 32;
    const uint32_t tailBits = static_cast<uint32_t>(rowsLocal % 32);
    for (uint64_t gid = 0; gid < L; ++gid) {
      appendTracked(gid, [&](EwahBitmap& bm) {
        const uint64_t have = bm.bitLength() / 32;
        bm.appendCleanRun(false, static_cast<int64_t>(fullWords - have));
        if (tailBits != 0) bm.appendPartialWord(pending[gid], tailBits);
      });
      pending[gid] = 0;
      ++localTrace.finalizeTouches;
    }
    touchedList.clear();

    // Offset table first (4 bytes per bitmap, relative to the partition
    // start), then the bitmaps: word count prefix plus raw words.
    std::string blob;
    uint64_t rel = 4 * L;
    std::string offsets;
    offsets.reserve(4 * L);
    std::string payloadBytes;
    for (uint64_t gid = 0; gid < L; ++gid) {
      if (rel > UINT32_MAX) {
        throw std::invalid_argument(
            "buildIndex: partition exceeds 4 GiB; lower partitionBytes");
      }
      putU32(offsets, static_cast<uint32_t>(rel));
      const auto& words = bitmaps[gid].rawWords();
      putU32(payloadBytes, static_cast<uint32_t>(words.size()));
      for (const uint32_t w : words) putU32(payloadBytes, w);
      rel += 4 + 4 * words.size();
    }
    blob = offsets + payloadBytes;

    PartitionInfo info;
    info.rowStart = partitionRowStart;
    info.rowCount = rowsLocal;
    info.payloadOffset = payload.offset();
    info.byteSize = blob.size();
    payload.write(blob);
    partitions.push_back(info);

    bitmaps.assign(L, EwahBitmap());
    partitionWords = L;
    partitionRowStart = rowIndex;
  };

  std::vector<std::string> row;
  while (source.next(row)) {
    if (row.size() != d) {
      throw IoError("buildIndex: row width does not match histogram");
    }
    const uint64_t blockId = rowIndex / 32;
    const uint32_t bitInWord = static_cast<uint32_t>(rowIndex % 32);
    uint64_t rowTouches = 0;
    for (size_t c = 0; c < d; ++c) {
      const AttributeCode* code = columns[c].dictionary.findCode(row[c]);
      if (code == nullptr) {
        throw std::invalid_argument(
            "buildIndex: value absent from histogram (table changed since "
            "pass 1): column " +
            columns[c].name + " value \"" + row[c] + "\"");
      }
      for (const uint32_t p : code->positions) {
        const uint64_t gid = columns[c].firstBitmapId + p;
        pending[gid] |= 1u << bitInWord;
        if (touchedInBlock[gid] != blockId) {
          touchedInBlock[gid] = blockId;
          touchedList.push_back(gid);
        }
        ++rowTouches;
      }
    }
    localTrace.rowCodeTouches += rowTouches;
    localTrace.maxRowTouches = std::max(localTrace.maxRowTouches, rowTouches);
    ++rowIndex;
    if (rowIndex % 32 == 0) {
      flushBlock((rowIndex - partitionRowStart) / 32);
      const uint64_t estimate = 8 * L + 4 * partitionWords;
      if (estimate >= config.partitionBytes) closePartition();
    }
  }
  // Trailing rows of an unfinished block are flushed as a ragged tail
  // inside closePartition.
  closePartition();
  payload.close();

  localTrace.partitionCount = partitions.size();

  const json meta = headerJson(rowIndex, columns, partitions);
  const std::string metaText = meta.dump();

  AppendWriter file(out);
  std::string head;
  head.append(kIndexMagic, 4);
  head.push_back(static_cast<char>(kIndexVersion));
  putU64(head, metaText.size());
  file.write(head);
  file.write(metaText);
  {
    std::ifstream in(payloadPath, std::ios::binary);
    if (!in) throw IoError("cannot reopen payload: " + payloadPath.string());
    std::vector<char> buffer(1 << 20);
    while (in) {
      in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
      const std::streamsize got = in.gcount();
      if (got > 0) file.write(buffer.data(), static_cast<size_t>(got));
    }
  }
  file.close();

  localTrace.bytesWritten = file.offset();
  localTrace.monotoneWrites = file.monotone() && payload.monotone();
  if (trace != nullptr) *trace = localTrace;
  outGuard.dismiss();
}

}  // namespace bitkiln
