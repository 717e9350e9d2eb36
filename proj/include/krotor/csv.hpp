#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string_view>

#include "krotor/common.hpp"

namespace krotor {

/// Locale-independent 17-significant-digit representation for data rows; the
/// same input always produces the same bytes.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// Shortest representation that round-trips exactly; used for parameter
/// summaries and file names.
inline std::string format_double_short(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_value(double v) { return format_double(v); }
inline std::string format_value(int v) { return std::to_string(v); }
inline std::string format_value(long v) { return std::to_string(v); }
inline std::string format_value(long long v) { return std::to_string(v); }
inline std::string format_value(std::size_t v) { return std::to_string(v); }
inline std::string format_value(const std::string& v) { return v; }
inline std::string format_value(const char* v) { return v; }

/// CSV writer with '#'-prefixed comment headers, ',' separators, '\n' line
/// endings and fixed float formatting, so identical runs produce identical
/// bytes.
class CsvFile {
 public:
  explicit CsvFile(const std::filesystem::path& path)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open output file: " + path.string());
  }

  void comment(std::string_view line) { out_ << "# " << line << "\n"; }

  template <class... Ts>
  void row(const Ts&... vals) {
    bool first = true;
    ((out_ << (first ? "" : ","), first = false, out_ << format_value(vals)), ...);
    out_ << "\n";
  }

  void close() { out_.close(); }

 private:
  std::ofstream out_;
};

}  // namespace krotor
