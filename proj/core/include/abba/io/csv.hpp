#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace abba::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  ///< 1-based source line where each row starts
};

/// RFC 4180 parser: quoted fields may hold commas, quotes ("") and line breaks; CRLF or LF
/// endings; a UTF-8 byte-order mark is skipped. Blank lines are ignored.
/// Throws MalformedInput on an unterminated quote, stray quote, or a row whose field count
/// differs from the header.
CsvTable parse_csv(std::string_view text);

/// Quotes a field when it holds a comma, quote, CR or LF.
std::string csv_field(std::string_view value);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

/// Throws MalformedInput when the file cannot be read.
std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace abba::io
