#include "bitkiln/table.hpp"

#include <sstream>

#include "bitkiln/errors.hpp"

namespace bitkiln {

std::vector<std::string> splitRow(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  size_t start = 0;
  for (;;) {
    const size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string joinRow(std::span<const std::string> fields, char delimiter) {
  std::string out;
  size_t total = fields.size();
  for (const auto& f : fields) total += f.size();
  out.reserve(total);
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i != 0) out.push_back(delimiter);
    out += fields[i];
  }
  return out;
}

FactTable readFactTable(const std::filesystem::path& path, char delimiter) {
  FactTable table;
  table.delimiter = delimiter;
  FileRowSource source(path, delimiter);
  std::vector<std::string> row;
  while (source.next(row)) table.rows.push_back(row);
  return table;
}

void writeFactTable(const FactTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const auto& row : table.rows) {
    out << joinRow(row, table.delimiter) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

FileRowSource::FileRowSource(std::filesystem::path path, char delimiter)
    : path_(std::move(path)), delimiter_(delimiter) {
  in_.open(path_, std::ios::binary);
  if (!in_) throw IoError("cannot open table: " + path_.string());
}

bool FileRowSource::next(std::vector<std::string>& row) {
  std::string line;
  if (!std::getline(in_, line)) {
    if (in_.bad()) throw IoError("read failed: " + path_.string());
    return false;
  }
  ++line_;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  row = splitRow(line, delimiter_);
  if (width_ == 0) {
    width_ = row.size();
  } else if (row.size() != width_) {
    std::ostringstream msg;
    msg << path_.string() << ":" << line_ << ": ragged row (" << row.size()
        << " fields, expected " << width_ << ")";
    throw IoError(msg.str());
  }
  return true;
}

void FileRowSource::rewind() {
  in_.clear();
  in_.seekg(0);
  if (!in_) throw IoError("rewind failed: " + path_.string());
  line_ = 0;
}

}  // namespace bitkiln
