#ifndef BITKILN_ERRORS_HPP
#define BITKILN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bitkiln {

// I/O failure (missing file, short read, failed write).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Index file cannot be used. The kind distinguishes a scrambled header
// from an unsupported version and from a file that ends too early.
class IndexFormatError : public std::runtime_error {
 public:
  enum class Kind { CorruptHeader, VersionMismatch, Truncated };

  IndexFormatError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Query references a column that is not part of the index schema.
class UnknownColumnError : public std::invalid_argument {
 public:
  explicit UnknownColumnError(const std::string& column)
      : std::invalid_argument("unknown column: " + column) {}
};

// Lookup of a value that was never allocated a code.
class UnknownValueError : public std::invalid_argument {
 public:
  explicit UnknownValueError(const std::string& value)
      : std::invalid_argument("unknown attribute value: " + value) {}
};

}  // namespace bitkiln

#endif  // BITKILN_ERRORS_HPP
