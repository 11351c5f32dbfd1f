#ifndef BITKILN_TABLE_HPP
#define BITKILN_TABLE_HPP

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bitkiln {

/// In-memory fact table: one record per row, d textual attribute values
/// per record.
struct FactTable {
  std::vector<std::vector<std::string>> rows;
  char delimiter = ',';

  size_t columnCount() const { return rows.empty() ? 0 : rows.front().size(); }
  size_t rowCount() const { return rows.size(); }

  bool operator==(const FactTable& other) const { return rows == other.rows; }
};

std::vector<std::string> splitRow(std::string_view line, char delimiter);
std::string joinRow(std::span<const std::string> fields, char delimiter);

/// Reads a delimited text file, one newline-terminated row per line.
/// Ragged rows raise IoError.
FactTable readFactTable(const std::filesystem::path& path,
                        char delimiter = ',');
void writeFactTable(const FactTable& table, const std::filesystem::path& path);

/// Forward scan over rows; rewind() restarts from the first row so the
/// two-pass index build can reuse one source.
class RowSource {
 public:
  virtual ~RowSource() = default;
  virtual bool next(std::vector<std::string>& row) = 0;
  virtual void rewind() = 0;
};

class TableRowSource : public RowSource {
 public:
  explicit TableRowSource(const FactTable& table) : table_(&table) {}
  bool next(std::vector<std::string>& row) override {
    if (index_ >= table_->rows.size()) return false;
    row = table_->rows[index_++];
    return true;
  }
  void rewind() override { index_ = 0; }

 private:
  const FactTable* table_;
  size_t index_ = 0;
};

class FileRowSource : public RowSource {
 public:
  FileRowSource(std::filesystem::path path, char delimiter);
  bool next(std::vector<std::string>& row) override;
  void rewind() override;

 private:
  std::filesystem::path path_;
  char delimiter_;
  std::ifstream in_;
  size_t line_ = 0;
  size_t width_ = 0;  // field count of the first row, 0 until seen
};

}  // namespace bitkiln

#endif  // BITKILN_TABLE_HPP
