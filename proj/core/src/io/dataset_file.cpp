#include "abba/io/dataset_file.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "abba/errors.hpp"
#include "abba/io/csv.hpp"

namespace abba::io {
namespace {

constexpr std::array<std::string_view, 5> kColumns = {"subtrial", "treatment", "baseline",
                                                      "y_continuous", "y_binary"};
constexpr std::size_t kMaxReported = 20;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<int> parse_flag(std::string_view s) {
  const auto v = parse_real(s);
  if (!v || (*v != 0.0 && *v != 1.0)) return std::nullopt;
  return static_cast<int>(*v);
}

}  // namespace

DatasetFile parse_dataset(std::string_view text) {
  const CsvTable table = parse_csv(text);

  std::array<std::size_t, kColumns.size()> index{};
  index.fill(table.header.size());
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string_view name = trim(table.header[c]);
    const auto it = std::find(kColumns.begin(), kColumns.end(), name);
    if (it == kColumns.end()) throw MalformedInput("header: unknown column \"" + std::string(name) + "\"");
    const auto slot = static_cast<std::size_t>(it - kColumns.begin());
    if (index[slot] != table.header.size()) {
      throw MalformedInput("header: duplicate column \"" + std::string(name) + "\"");
    }
    index[slot] = c;
  }
  for (std::size_t s = 0; s < kColumns.size(); ++s) {
    if (index[s] == table.header.size()) {
      throw MalformedInput("header: missing column \"" + std::string(kColumns[s]) + "\"");
    }
  }
  if (table.rows.empty()) throw MalformedInput("no data rows");

  std::vector<std::string> problems;
  std::size_t problem_count = 0;
  const auto report = [&](std::size_t row, std::string_view msg) {
    ++problem_count;
    if (problems.size() < kMaxReported) problems.push_back("row " + std::to_string(row) + ": " + std::string(msg));
  };

  DatasetFile out;
  std::vector<std::string> raw_labels;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const std::size_t row = r + 1;
    models::SubjectRecord rec;
    const std::string label(trim(f[index[0]]));
    if (label.empty()) report(row, "subtrial label is empty");

    if (const auto t = parse_flag(f[index[1]])) rec.treatment = *t;
    else report(row, "treatment must be 0 or 1, got \"" + f[index[1]] + "\"");

    const auto b = parse_real(f[index[2]]);
    if (!b || !std::isfinite(*b)) report(row, "baseline must be a finite number, got \"" + f[index[2]] + "\"");
    else if (*b <= 0.0) report(row, "baseline must be positive, got " + f[index[2]]);
    else rec.baseline = *b;

    const auto y = parse_real(f[index[3]]);
    if (!y || !std::isfinite(*y)) report(row, "y_continuous must be a finite number, got \"" + f[index[3]] + "\"");
    else rec.y_continuous = *y;

    if (const auto yb = parse_flag(f[index[4]])) rec.y_binary = *yb;
    else report(row, "y_binary must be 0 or 1, got \"" + f[index[4]] + "\"");

    raw_labels.push_back(label);
    out.records.push_back(rec);
  }
  if (problem_count > 0) {
    std::ostringstream msg;
    msg << problem_count << " invalid value" << (problem_count == 1 ? "" : "s");
    for (const auto& p : problems) msg << "\n  " << p;
    if (problem_count > problems.size()) msg << "\n  ... " << problem_count - problems.size() << " more";
    throw MalformedInput(msg.str());
  }

  std::vector<std::string> labels = raw_labels;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const bool numeric = std::all_of(labels.begin(), labels.end(), [](const std::string& l) {
    const auto v = parse_real(l);
    return v && std::isfinite(*v);
  });
  if (numeric) {
    std::stable_sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
      return *parse_real(a) < *parse_real(b);
    });
  }
  std::map<std::string, int> lookup;
  for (std::size_t k = 0; k < labels.size(); ++k) lookup[labels[k]] = static_cast<int>(k);
  for (std::size_t i = 0; i < out.records.size(); ++i) out.records[i].subtrial = lookup.at(raw_labels[i]);
  out.labels = std::move(labels);
  return out;
}

DatasetFile read_dataset(const std::filesystem::path& path) {
  try {
    return parse_dataset(read_file(path));
  } catch (const MalformedInput& e) {
    throw MalformedInput(path.string() + ": " + e.what());
  }
}

std::string format_dataset(const std::vector<models::SubjectRecord>& records,
                           const std::vector<std::string>& labels) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({kColumns.begin(), kColumns.end()});
  for (const auto& r : records) {
    const auto k = static_cast<std::size_t>(r.subtrial);
    w.row({k < labels.size() ? labels[k] : std::to_string(r.subtrial), std::to_string(r.treatment),
           format_double(r.baseline), format_double(r.y_continuous), std::to_string(r.y_binary)});
  }
  return out.str();
}

}  // namespace abba::io
