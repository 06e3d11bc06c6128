#include "abba/io/scenario_file.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "abba/errors.hpp"
#include "abba/io/csv.hpp"

namespace abba::io {
namespace {

constexpr std::string_view kTableMarker = "[subtrials]";
const std::vector<std::string> kRequired = {"beta1",  "beta2",  "gamma1",
                                            "gamma2", "theta1", "theta2",
                                            "target_rr_control", "target_rr_treatment", "true_lor"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_real(std::string_view s, const std::string& where) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw MalformedInput(where + ": expected a finite number, got \"" + std::string(s) + "\"");
  }
  return v;
}

bool to_bool(std::string_view s, const std::string& where) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw MalformedInput(where + ": expected true or false, got \"" + std::string(s) + "\"");
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text) {
  ScenarioFile file;
  simlab::ScenarioSpec& spec = file.spec;
  std::size_t pos = 0, line_no = 0;
  std::vector<std::string> seen;
  bool table = false;

  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    const std::string_view line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line == kTableMarker) {
      table = true;
      break;
    }
    const std::string where = "line " + std::to_string(line_no);
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw MalformedInput(where + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      throw MalformedInput(where + ": duplicate key \"" + key + "\"");
    }
    seen.push_back(key);
    if (key == "name") {
      spec.name = std::string(value);
    } else if (key == "sigma1") {
      spec.sigma1 = to_real(value, where);
    } else if (key == "rho") {
      spec.rho = to_real(value, where);
    } else if (key == "n_per_arm") {
      const double n = to_real(value, where);
      if (n != std::floor(n)) throw MalformedInput(where + ": n_per_arm must be an integer");
      spec.n_per_arm = static_cast<int>(n);
    } else if (key == "threshold") {
      spec.rule.threshold = to_real(value, where);
    } else if (key == "direction") {
      if (value == "above") spec.rule.direction = models::Direction::Above;
      else if (value == "below") spec.rule.direction = models::Direction::Below;
      else throw MalformedInput(where + ": direction must be above or below");
    } else if (key == "require_no_failure") {
      spec.rule.success_requires_no_failure = to_bool(value, where);
    } else if (key == "calibrated") {
      spec.calibrated = to_bool(value, where);
    } else if (key == "baseline_log_mean") {
      file.baseline.log_mean = to_real(value, where);
    } else if (key == "baseline_log_sd") {
      file.baseline.log_sd = to_real(value, where);
    } else {
      throw MalformedInput(where + ": unknown key \"" + key + "\"");
    }
  }
  if (!table) throw MalformedInput("missing [subtrials] table");

  const std::size_t table_first_line = line_no + 1;
  // Comment lines inside the table are blanked so row numbers stay aligned.
  std::string body;
  for (std::size_t p = pos; p < text.size();) {
    const std::size_t nl = text.find('\n', p);
    std::string_view l = text.substr(p, nl == std::string_view::npos ? text.size() - p : nl - p);
    p = nl == std::string_view::npos ? text.size() : nl + 1;
    if (trim(l).starts_with("#")) l = {};
    body.append(l);
    body.push_back('\n');
  }
  CsvTable csv;
  try {
    csv = parse_csv(body);
  } catch (const MalformedInput& e) {
    throw MalformedInput("[subtrials] table (starting line " + std::to_string(table_first_line) + "): " + e.what());
  }
  std::vector<std::size_t> col;
  for (const auto& name : kRequired) {
    const auto it = std::find_if(csv.header.begin(), csv.header.end(),
                                 [&](const std::string& h) { return trim(h) == name; });
    if (it == csv.header.end()) throw MalformedInput("[subtrials] table: missing column " + name);
    col.push_back(static_cast<std::size_t>(it - csv.header.begin()));
  }
  const auto optional_col = [&](std::string_view name) -> std::ptrdiff_t {
    const auto it = std::find_if(csv.header.begin(), csv.header.end(),
                                 [&](const std::string& h) { return trim(h) == name; });
    return it == csv.header.end() ? -1 : it - csv.header.begin();
  };
  const std::ptrdiff_t pb1 = optional_col("initial_beta1"), pb2 = optional_col("initial_beta2");

  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& f = csv.rows[r];
    const std::string where = "line " + std::to_string(table_first_line + csv.lines[r] - 1);
    simlab::SubtrialParams p;
    p.beta = {to_real(f[col[0]], where), to_real(f[col[1]], where)};
    p.gamma = {to_real(f[col[2]], where), to_real(f[col[3]], where)};
    p.theta = {to_real(f[col[4]], where), to_real(f[col[5]], where)};
    p.target_rr_control = to_real(f[col[6]], where);
    p.target_rr_treatment = to_real(f[col[7]], where);
    p.true_lor = to_real(f[col[8]], where);
    p.initial_beta = p.beta;
    if (pb1 >= 0) p.initial_beta[0] = to_real(f[static_cast<std::size_t>(pb1)], where);
    if (pb2 >= 0) p.initial_beta[1] = to_real(f[static_cast<std::size_t>(pb2)], where);
    spec.subtrials.push_back(p);
  }
  spec.validate();
  file.baseline.validate();
  return file;
}

ScenarioFile read_scenario(const std::filesystem::path& path) {
  try {
    return parse_scenario(read_file(path));
  } catch (const MalformedInput& e) {
    throw MalformedInput(path.string() + ": " + e.what());
  }
}

std::string format_scenario(const ScenarioFile& file) {
  const simlab::ScenarioSpec& s = file.spec;
  std::ostringstream out;
  out << "name = " << s.name << "\n";
  out << "sigma1 = " << format_double(s.sigma1) << "\n";
  out << "rho = " << format_double(s.rho) << "\n";
  out << "n_per_arm = " << s.n_per_arm << "\n";
  out << "threshold = " << format_double(s.rule.threshold) << "\n";
  out << "direction = " << (s.rule.direction == models::Direction::Above ? "above" : "below") << "\n";
  out << "require_no_failure = " << (s.rule.success_requires_no_failure ? "true" : "false") << "\n";
  out << "calibrated = " << (s.calibrated ? "true" : "false") << "\n";
  out << "baseline_log_mean = " << format_double(file.baseline.log_mean) << "\n";
  out << "baseline_log_sd = " << format_double(file.baseline.log_sd) << "\n";
  out << "\n" << kTableMarker << "\n";
  out << "beta1,beta2,gamma1,gamma2,theta1,theta2,target_rr_control,target_rr_treatment,true_lor,"
         "initial_beta1,initial_beta2\n";
  for (const auto& p : s.subtrials) {
    out << format_double(p.beta[0]) << ',' << format_double(p.beta[1]) << ','
        << format_double(p.gamma[0]) << ',' << format_double(p.gamma[1]) << ','
        << format_double(p.theta[0]) << ',' << format_double(p.theta[1]) << ','
        << format_double(p.target_rr_control) << ',' << format_double(p.target_rr_treatment) << ','
        << format_double(p.true_lor) << ',' << format_double(p.initial_beta[0]) << ','
        << format_double(p.initial_beta[1]) << "\n";
  }
  return out.str();
}

}  // namespace abba::io
