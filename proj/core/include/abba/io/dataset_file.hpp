#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "abba/models/data.hpp"

namespace abba::io {

/// Parsed trial data with the mapping from file labels to subtrial indices.
struct DatasetFile {
  std::vector<models::SubjectRecord> records;
  /// labels[k] is the file's label for subtrial index k.
  std::vector<std::string> labels;
};

/// Reads `subtrial,treatment,baseline,y_continuous,y_binary` (columns in any order).
/// Subtrial labels are mapped to 0..K-1 in numeric order when every label is a number, else in
/// lexicographic order.
///
/// Structural problems (missing, duplicate or unknown columns, ragged rows, bad quoting) fail
/// on the first occurrence. Value problems are collected and reported together, one line per
/// offending row and field. Both throw MalformedInput.
DatasetFile parse_dataset(std::string_view text);
DatasetFile read_dataset(const std::filesystem::path& path);

/// CSV text of the records. Labels default to the 0-based subtrial index.
std::string format_dataset(const std::vector<models::SubjectRecord>& records,
                           const std::vector<std::string>& labels = {});

}  // namespace abba::io
