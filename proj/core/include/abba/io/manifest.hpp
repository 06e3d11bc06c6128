#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace abba::io {

struct InputFile {
  std::string path;
  std::string sha256;  ///< lowercase hex
};

/// Record of one CLI run: enough to re-run it and obtain byte-identical artifacts.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  /// Fully resolved options, as JSON text (an object).
  std::string config_json = "{}";
  std::uint64_t seed = 0;
  std::string engine_version;
  std::string started;  ///< ISO-8601 UTC
  std::string finished;
  std::vector<InputFile> inputs;
  /// Subtrial index -> label of the input data, when there is one.
  std::vector<std::string> subtrial_labels;
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string iso8601_utc(std::chrono::system_clock::time_point t);

std::string engine_version();

std::string format_manifest(const RunManifest& m);
/// Throws MalformedInput on invalid JSON or missing fields.
RunManifest parse_manifest(std::string_view text);

}  // namespace abba::io
