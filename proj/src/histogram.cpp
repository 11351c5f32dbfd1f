#include "bitkiln/histogram.hpp"

#include <fstream>
#include <sstream>

#include "bitkiln/errors.hpp"

namespace bitkiln {

namespace {

std::string escapeValue(const std::string& value) {
  std::string out;
  out.reserve(value.size());
  for (const char c : value) {
    switch (c) {
      case '\\':
        out += "\\\\";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\n':
        out += "\\n";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string unescapeValue(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out.push_back(text[i]);
      continue;
    }
    if (++i >= text.size()) throw IoError("histogram: dangling escape");
    switch (text[i]) {
      case '\\':
        out.push_back('\\');
        break;
      case 't':
        out.push_back('\t');
        break;
      case 'n':
        out.push_back('\n');
        break;
      default:
        throw IoError("histogram: unknown escape");
    }
  }
  return out;
}

}  // namespace

Histogram buildHistogram(RowSource& source) {
  Histogram histogram;
  std::vector<std::string> row;
  while (source.next(row)) {
    if (histogram.columns.empty()) histogram.columns.resize(row.size());
    if (row.size() != histogram.columns.size()) {
      throw IoError("buildHistogram: ragged row");
    }
    for (size_t c = 0; c < row.size(); ++c) ++histogram.columns[c][row[c]];
    ++histogram.rows;
  }
  return histogram;
}

std::filesystem::path histogramSidecar(const std::filesystem::path& table) {
  std::filesystem::path sidecar = table;
  sidecar += ".hist";
  return sidecar;
}

void saveHistogram(const Histogram& histogram,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write histogram: " + path.string());
  out << "bitkiln-hist\t1\t" << histogram.rows << '\t'
      << histogram.columns.size() << '\n';
  for (size_t c = 0; c < histogram.columns.size(); ++c) {
    for (const auto& [value, count] : histogram.columns[c]) {
      out << c << '\t' << count << '\t' << escapeValue(value) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Histogram loadHistogram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open histogram: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("histogram: empty file");
  std::istringstream header(line);
  std::string magic;
  int version = 0;
  Histogram histogram;
  size_t columns = 0;
  header >> magic >> version >> histogram.rows >> columns;
  if (magic != "bitkiln-hist" || version != 1 || header.fail()) {
    throw IoError("histogram: bad header in " + path.string());
  }
  histogram.columns.resize(columns);
  size_t lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    const size_t t1 = line.find('\t');
    const size_t t2 = t1 == std::string::npos ? std::string::npos
                                              : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw IoError("histogram: malformed line " + std::to_string(lineNo));
    }
    const size_t column = std::stoull(line.substr(0, t1));
    const uint64_t count = std::stoull(line.substr(t1 + 1, t2 - t1 - 1));
    if (column >= columns) {
      throw IoError("histogram: column out of range at line " +
                    std::to_string(lineNo));
    }
    histogram.columns[column][unescapeValue(line.substr(t2 + 1))] = count;
  }
  return histogram;
}

Histogram ensureHistogram(const std::filesystem::path& table, char delimiter) {
  const auto sidecar = histogramSidecar(table);
  if (std::filesystem::exists(sidecar)) return loadHistogram(sidecar);
  FileRowSource source(table, delimiter);
  Histogram histogram = buildHistogram(source);
  saveHistogram(histogram, sidecar);
  return histogram;
}

}  // namespace bitkiln
