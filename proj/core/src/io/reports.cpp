#include "abba/io/reports.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "abba/io/csv.hpp"

namespace abba::io {
namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

const simlab::MetricsRow* find_row(const simlab::SimulationReport& r, const std::string& model, int k) {
  for (const auto& m : r.metrics) {
    if (m.model == model && m.subtrial == k) return &m;
  }
  return nullptr;
}

}  // namespace

double percent_change(double a, double b) { return 100.0 * (a - b) / b; }

std::string format_summary_csv(const std::vector<posterior::SubtrialSummary>& rows,
                               const std::vector<std::string>& labels) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"subtrial", "lor_mean", "hdi_low", "hdi_high", "success", "draws", "lor_variance"});
  for (const auto& s : rows) {
    const auto k = static_cast<std::size_t>(s.subtrial);
    w.row({k < labels.size() ? labels[k] : std::to_string(s.subtrial + 1), format_double(s.lor_mean),
           format_double(s.lor_hdi.low), format_double(s.lor_hdi.high), s.success ? "1" : "0",
           std::to_string(s.draw_count), format_double(s.draw_variance)});
  }
  return out.str();
}

std::string format_diagnostics_csv(const std::vector<std::string>& names, const sampler::Diagnostics& d) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"parameter", "rhat", "ess_bulk"});
  for (std::size_t p = 0; p < d.rhat.size(); ++p) {
    w.row({p < names.size() ? names[p] : "p" + std::to_string(p), format_double(d.rhat[p]),
           format_double(d.ess_bulk[p])});
  }
  return out.str();
}

std::string format_sampler_csv(const sampler::PosteriorDraws& draws, int max_tree_depth) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"chain", "step_size", "divergences", "max_depth_hits", "mean_accept_stat"});
  for (std::size_t c = 0; c < draws.chains.size(); ++c) {
    const auto& ch = draws.chains[c];
    const auto div = std::count(ch.divergent.begin(), ch.divergent.end(), 1);
    const auto hits = std::count(ch.tree_depth.begin(), ch.tree_depth.end(), max_tree_depth);
    const double acc = ch.accept_stat.empty() ? 0.0
                                              : std::accumulate(ch.accept_stat.begin(), ch.accept_stat.end(), 0.0) /
                                                    static_cast<double>(ch.accept_stat.size());
    w.row({std::to_string(c + 1), format_double(ch.step_size), std::to_string(div), std::to_string(hits),
           format_double(acc)});
  }
  return out.str();
}

std::string format_replicates_csv(const std::vector<simlab::ReplicateRow>& rows) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"replicate", "subtrial", "model", "lor_mean", "hdi_low", "hdi_high", "success", "rhat_max",
         "divergences"});
  for (const auto& r : rows) {
    w.row({std::to_string(r.replicate), std::to_string(r.subtrial + 1), r.model, format_double(r.lor_mean),
           format_double(r.hdi.low), format_double(r.hdi.high), r.success ? "1" : "0",
           format_double(r.rhat_max), std::to_string(r.divergences)});
  }
  return out.str();
}

std::string format_aggregate_csv(const simlab::SimulationReport& report) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"scenario", "model", "subtrial", "replicates", "reference_lor", "bias", "bias_mcse", "precision",
         "precision_mcse", "power", "type_one_error", "rejection_mcse", "hdi_width", "hdi_width_mcse",
         "coverage", "coverage_mcse", "flagged_fits", "clamped_rates"});
  for (const auto& m : report.metrics) {
    const std::string rate = format_double(m.power.value);
    w.row({report.scenario.name, m.model, std::to_string(m.subtrial + 1), std::to_string(m.replicates),
           format_double(m.reference_lor), format_double(m.bias.value), opt(m.bias.mcse),
           format_double(m.precision.value), opt(m.precision.mcse), m.null_effect ? "" : rate,
           m.null_effect ? rate : "", opt(m.power.mcse), format_double(m.width.value), opt(m.width.mcse),
           format_double(m.coverage.value), opt(m.coverage.mcse), std::to_string(m.flagged),
           std::to_string(m.clamps)});
  }
  return out.str();
}

std::string format_comparison_csv(const simlab::SimulationReport& report) {
  static const std::vector<std::pair<std::string, std::string>> pairs = {
      {"abba", "bin"}, {"abba", "abba-strat"}, {"bin", "bin-strat"}, {"abba-strat", "bin-strat"}};
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"scenario", "model", "reference_model", "subtrial", "hdi_width", "reference_hdi_width",
         "width_change_pct", "power", "reference_power", "power_change_pct"});
  for (const auto& [a, b] : pairs) {
    for (int k = 0; k < report.scenario.K(); ++k) {
      const simlab::MetricsRow* ma = find_row(report, a, k);
      const simlab::MetricsRow* mb = find_row(report, b, k);
      if (ma == nullptr || mb == nullptr) continue;
      w.row({report.scenario.name, a, b, std::to_string(k + 1), format_double(ma->width.value),
             format_double(mb->width.value), format_double(percent_change(ma->width.value, mb->width.value)),
             format_double(ma->power.value), format_double(mb->power.value),
             mb->power.value > 0.0 ? format_double(percent_change(ma->power.value, mb->power.value)) : ""});
    }
  }
  return out.str();
}

}  // namespace abba::io
