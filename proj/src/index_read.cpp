#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cstring>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "bitkiln/errors.hpp"
#include "bitkiln/index.hpp"

namespace bitkiln {

using nlohmann::json;

namespace {

uint64_t decodeU64(const unsigned char* b) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

}  // namespace

IndexReader::IndexReader(IndexReader&& other) noexcept { *this = std::move(other); }

IndexReader& IndexReader::operator=(IndexReader&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
    fileSize_ = other.fileSize_;
    payloadStart_ = other.payloadStart_;
    header_ = std::move(other.header_);
    columnByName_ = std::move(other.columnByName_);
    io_ = other.io_;
  }
  return *this;
}

IndexReader::~IndexReader() {
  if (fd_ >= 0) ::close(fd_);
}

void IndexReader::readAt(uint64_t offset, void* buffer, size_t size) const {
  size_t got = 0;
  while (got < size) {
    const ssize_t n = ::pread(fd_, static_cast<char*>(buffer) + got,
                              size - got, static_cast<off_t>(offset + got));
    if (n < 0) throw IoError("index read failed");
    if (n == 0) {
      throw IndexFormatError(IndexFormatError::Kind::Truncated,
                             "index file ends inside a requested read");
    }
    got += static_cast<size_t>(n);
  }
  io_.bytesRead += size;
  ++io_.readCalls;
}

uint32_t IndexReader::readU32(uint64_t offset) const {
  unsigned char b[4];
  readAt(offset, b, 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

IndexReader IndexReader::open(const std::filesystem::path& path) {
  IndexReader reader;
  reader.fd_ = ::open(path.c_str(), O_RDONLY);
  if (reader.fd_ < 0) throw IoError("cannot open index: " + path.string());
  struct stat st {};
  if (::fstat(reader.fd_, &st) != 0) {
    throw IoError("cannot stat index: " + path.string());
  }
  reader.fileSize_ = static_cast<uint64_t>(st.st_size);

  if (reader.fileSize_ < 4) {
    throw IndexFormatError(IndexFormatError::Kind::Truncated,
                           "index file shorter than its magic");
  }
  char magic[4];
  reader.readAt(0, magic, 4);
  if (std::memcmp(magic, kIndexMagic, 4) != 0) {
    throw IndexFormatError(IndexFormatError::Kind::CorruptHeader,
                           "bad magic bytes");
  }
  if (reader.fileSize_ < 5) {
    throw IndexFormatError(IndexFormatError::Kind::Truncated,
                           "index file ends before the version byte");
  }
  unsigned char version = 0;
  reader.readAt(4, &version, 1);
  if (version != kIndexVersion) {
    throw IndexFormatError(IndexFormatError::Kind::VersionMismatch,
                           "unsupported index version " +
                               std::to_string(int{version}));
  }
  if (reader.fileSize_ < 13) {
    throw IndexFormatError(IndexFormatError::Kind::Truncated,
                           "index file ends inside the header length");
  }
  unsigned char lenBytes[8];
  reader.readAt(5, lenBytes, 8);
  const uint64_t metaLen = decodeU64(lenBytes);
  if (13 + metaLen > reader.fileSize_) {
    throw IndexFormatError(IndexFormatError::Kind::Truncated,
                           "index file ends inside the metadata block");
  }

  std::string metaText(metaLen, '\0');
  if (metaLen > 0) reader.readAt(13, metaText.data(), metaLen);
  reader.payloadStart_ = 13 + metaLen;

  json meta;
  try {
    meta = json::parse(metaText);
  } catch (const json::exception& e) {
    throw IndexFormatError(IndexFormatError::Kind::CorruptHeader,
                           std::string("unparseable metadata: ") + e.what());
  }
  try {
    IndexHeader header;
    header.rows = meta.at("rows").get<uint64_t>();
    header.wordBits = meta.at("word_bits").get<uint32_t>();
    if (header.wordBits != 32) {
      throw IndexFormatError(IndexFormatError::Kind::CorruptHeader,
                             "unsupported word size");
    }
    uint64_t nextBitmapId = 0;
    for (const auto& col : meta.at("columns")) {
      ColumnCodecInfo info;
      info.name = col.at("name").get<std::string>();
      info.cardinality = col.at("cardinality").get<uint64_t>();
      info.k = col.at("k").get<uint32_t>();
      info.bitmapCount = col.at("bitmaps").get<uint32_t>();
      info.allocation =
          allocationFromName(col.at("allocation").get<std::string>());
      auto values = col.at("values").get<std::vector<std::string>>();
      if (values.size() != info.cardinality) {
        throw IndexFormatError(IndexFormatError::Kind::CorruptHeader,
                               "dictionary size disagrees with cardinality");
      }
      // Codes are a pure function of (values, k, N, strategy); rebuild
      // them instead of storing every code.
      info.dictionary =
          ColumnDictionary::allocate(std::move(values), info.k,
                                     info.bitmapCount, info.allocation,
                                     UINT64_MAX);
      info.firstBitmapId = nextBitmapId;
      nextBitmapId += info.bitmapCount;
      header.columns.push_back(std::move(info));
    }
    uint64_t coveredRows = 0;
    uint64_t expectedOffset = 0;
    for (const auto& part : meta.at("partitions")) {
      PartitionInfo info;
      info.rowStart = part.at("row_start").get<uint64_t>();
      info.rowCount = part.at("rows").get<uint64_t>();
      info.payloadOffset = part.at("offset").get<uint64_t>();
      info.byteSize = part.at("bytes").get<uint64_t>();
      if (info.rowStart != coveredRows || info.payloadOffset != expectedOffset) {
        throw IndexFormatError(IndexFormatError::Kind::CorruptHeader,
                               "partition directory is not contiguous");
      }
      if (reader.payloadStart_ + info.payloadOffset + info.byteSize >
          reader.fileSize_) {
        throw IndexFormatError(IndexFormatError::Kind::Truncated,
                               "partition extends past end of file");
      }
      coveredRows += info.rowCount;
      expectedOffset += info.byteSize;
      header.partitions.push_back(info);
    }
    if (coveredRows != header.rows) {
      throw IndexFormatError(IndexFormatError::Kind::CorruptHeader,
                             "partition rows do not sum to the row count");
    }
    reader.header_ = std::move(header);
  } catch (const json::exception& e) {
    throw IndexFormatError(IndexFormatError::Kind::CorruptHeader,
                           std::string("malformed metadata: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IndexFormatError(IndexFormatError::Kind::CorruptHeader,
                           std::string("inconsistent metadata: ") + e.what());
  }
  for (size_t c = 0; c < reader.header_.columns.size(); ++c) {
    reader.columnByName_.emplace(reader.header_.columns[c].name, c);
  }
  reader.resetIoCounters();
  return reader;
}

size_t IndexReader::columnIndexOf(const std::string& name) const {
  const auto it = columnByName_.find(name);
  if (it == columnByName_.end()) throw UnknownColumnError(name);
  return it->second;
}

void IndexReader::forEachSegment(
    uint64_t globalBitmapId,
    const std::function<void(EwahBitmap&&, const PartitionInfo&)>& fn) const {
  for (const PartitionInfo& part : header_.partitions) {
    const uint64_t partStart = payloadStart_ + part.payloadOffset;
    const uint64_t rel = readU32(partStart + 4 * globalBitmapId);
    if (rel + 4 > part.byteSize) {
      throw IndexFormatError(IndexFormatError::Kind::CorruptHeader,
                             "bitmap offset outside its partition");
    }
    const uint32_t wordCount = readU32(partStart + rel);
    if (rel + 4 + 4ull * wordCount > part.byteSize) {
      throw IndexFormatError(IndexFormatError::Kind::CorruptHeader,
                             "bitmap payload outside its partition");
    }
    std::vector<uint32_t> words(wordCount);
    if (wordCount > 0) {
      std::vector<unsigned char> raw(4ull * wordCount);
      readAt(partStart + rel + 4, raw.data(), raw.size());
      for (uint32_t i = 0; i < wordCount; ++i) {
        words[i] = static_cast<uint32_t>(raw[4 * i]) |
                   (static_cast<uint32_t>(raw[4 * i + 1]) << 8) |
                   (static_cast<uint32_t>(raw[4 * i + 2]) << 16) |
                   (static_cast<uint32_t>(raw[4 * i + 3]) << 24);
      }
    }
    EwahBitmap segment;
    try {
      segment = EwahBitmap::fromEncodedWords(std::move(words), part.rowCount);
    } catch (const std::invalid_argument& e) {
      throw IndexFormatError(IndexFormatError::Kind::CorruptHeader,
                             std::string("bad bitmap encoding: ") + e.what());
    }
    fn(std::move(segment), part);
  }
}

EwahBitmap IndexReader::loadBitmap(size_t column, uint64_t bitmapId) const {
  if (column >= header_.columns.size()) {
    throw std::out_of_range("loadBitmap: column out of range");
  }
  const ColumnCodecInfo& info = header_.columns[column];
  if (bitmapId >= info.bitmapCount) {
    throw std::out_of_range("loadBitmap: bitmapId out of range");
  }
  EwahBitmap result;
  forEachSegment(info.firstBitmapId + bitmapId,
                 [&](EwahBitmap&& segment, const PartitionInfo&) {
                   result.appendBitmap(segment);
                 });
  return result;
}

IndexStatsReport IndexReader::stats() const {
  IndexStatsReport report;
  const uint64_t uncompressed = (header_.rows + 31) / 32;
  for (size_t c = 0; c < header_.columns.size(); ++c) {
    const ColumnCodecInfo& info = header_.columns[c];
    ColumnTotals totals;
    totals.column = c;
    totals.name = info.name;
    totals.bitmapCount = info.bitmapCount;
    for (uint64_t id = 0; id < info.bitmapCount; ++id) {
      BitmapStats bs;
      bs.column = c;
      bs.bitmapId = id;
      bs.uncompressedWords = uncompressed;
      EwahBitmap merged;
      forEachSegment(info.firstBitmapId + id,
                     [&](EwahBitmap&& segment, const PartitionInfo&) {
                       bs.compressedWords += segment.sizeInWords();
                       merged.appendBitmap(segment);
                     });
      bs.setBits = merged.setBitCount();
      bs.factor = uncompressed == 0
                      ? 0.0
                      : 1.0 - static_cast<double>(bs.compressedWords) /
                                  static_cast<double>(uncompressed);
      totals.compressedWords += bs.compressedWords;
      totals.uncompressedWords += bs.uncompressedWords;
      totals.setBits += bs.setBits;
      report.bitmaps.push_back(bs);
    }
    totals.factor = totals.uncompressedWords == 0
                        ? 0.0
                        : 1.0 - static_cast<double>(totals.compressedWords) /
                                    static_cast<double>(totals.uncompressedWords);
    report.totalCompressedWords += totals.compressedWords;
    report.totalUncompressedWords += totals.uncompressedWords;
    report.columns.push_back(std::move(totals));
  }
  return report;
}

}  // namespace bitkiln
