// abba: fit basket-trial models, run simulation studies, calibrate scenarios.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "abba/errors.hpp"
#include "abba/io/csv.hpp"
#include "abba/io/dataset_file.hpp"
#include "abba/io/draws_file.hpp"
#include "abba/io/manifest.hpp"
#include "abba/io/reports.hpp"
#include "abba/io/scenario_file.hpp"
#include "abba/models/model.hpp"
#include "abba/posterior/fit.hpp"
#include "abba/posterior/lor.hpp"
#include "abba/sampler/diagnostics.hpp"
#include "abba/simlab/calibrate.hpp"
#include "abba/simlab/replicates.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kMalformed = 2, kInvalid = 3, kInit = 4, kReplicates = 5, kCalibration = 6 };

struct SamplerArgs {
  std::string preset = "desk";
  int chains = 0, warmup = -1, iter = 0, max_depth = 0;
  double target_accept = 0.0;
  std::uint64_t seed = 1;
};

void add_sampler_options(CLI::App* cmd, SamplerArgs& a) {
  cmd->add_option("--preset", a.preset, "desk, paper or smoke")->capture_default_str();
  cmd->add_option("--chains", a.chains, "override the preset's chain count");
  cmd->add_option("--warmup", a.warmup, "override warm-up iterations per chain");
  cmd->add_option("--iter", a.iter, "override retained draws per chain");
  cmd->add_option("--target-accept", a.target_accept, "step-size adaptation target");
  cmd->add_option("--max-depth", a.max_depth, "maximum tree depth");
  cmd->add_option("--seed", a.seed, "master seed")->capture_default_str();
}

abba::sampler::SamplerConfig resolve(const SamplerArgs& a) {
  auto cfg = abba::sampler::preset(a.preset);
  if (!cfg) throw abba::MalformedInput("unknown preset \"" + a.preset + "\" (valid: desk, paper, smoke)");
  if (a.chains > 0) cfg->chains = a.chains;
  if (a.warmup >= 0) cfg->warmup_iters = a.warmup;
  if (a.iter > 0) cfg->sampling_iters = a.iter;
  if (a.target_accept > 0.0) cfg->target_accept = a.target_accept;
  if (a.max_depth > 0) cfg->max_tree_depth = a.max_depth;
  cfg->seed = a.seed;
  cfg->validate();
  return *cfg;
}

ordered_json to_json(const abba::sampler::SamplerConfig& c) {
  return {{"chains", c.chains},         {"warmup_iters", c.warmup_iters},
          {"sampling_iters", c.sampling_iters}, {"target_accept", c.target_accept},
          {"max_tree_depth", c.max_tree_depth}, {"seed", c.seed}};
}

ordered_json to_json(const abba::models::PriorConfig& p) {
  return {{"beta_gamma_sd", p.beta_gamma_sd}, {"theta_sd", p.theta_sd},
          {"level2_mean_sd", p.level2_mean_sd}, {"level2_rate", p.level2_rate},
          {"level2_lower_abba", p.level2_lower_abba}, {"level2_lower_bin", p.level2_lower_bin},
          {"lkj_eta", p.lkj_eta}, {"ig_shape", p.ig_shape}, {"ig_scale", p.ig_scale}};
}

ordered_json to_json(const abba::models::ResponderRule& r) {
  return {{"threshold", r.threshold},
          {"direction", r.direction == abba::models::Direction::Above ? "above" : "below"},
          {"require_no_failure", r.success_requires_no_failure}};
}

abba::models::ModelKind parse_kind(const std::string& name) {
  const auto k = abba::models::parse_model_kind(name);
  if (!k) throw abba::MalformedInput("unknown model \"" + name + "\" (valid: abba, abba-strat, bin, bin-strat)");
  return *k;
}

abba::models::Direction parse_direction(const std::string& s) {
  if (s == "above") return abba::models::Direction::Above;
  if (s == "below") return abba::models::Direction::Below;
  throw abba::MalformedInput("direction must be above or below");
}

abba::simlab::ScenarioSpec lookup_scenario(const std::string& name) {
  if (auto s = abba::simlab::find_scenario(name)) return *s;
  std::string valid;
  for (const auto& [key, _] : abba::simlab::scenario_library()) valid += (valid.empty() ? "" : ", ") + key;
  throw abba::MalformedInput("unknown scenario \"" + name + "\" (valid: " + valid + ")");
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

abba::io::RunManifest start_manifest(const std::string& command, int argc, char** argv) {
  abba::io::RunManifest m;
  m.command = command;
  m.argv.assign(argv, argv + argc);
  m.engine_version = abba::io::engine_version();
  m.started = abba::io::iso8601_utc(std::chrono::system_clock::now());
  return m;
}

void finish_manifest(abba::io::RunManifest& m, const ordered_json& config, const fs::path& out) {
  m.config_json = config.dump();
  m.finished = abba::io::iso8601_utc(std::chrono::system_clock::now());
  abba::io::write_file(out / "manifest.json", abba::io::format_manifest(m));
}

// ---- fit --------------------------------------------------------------------------------------

struct FitArgs {
  std::string data, model = "abba", out = "fit-out", direction = "above", interval = "hdi",
              averaging = "observed";
  double threshold = std::log(20.0);
  bool any_response = false;
  SamplerArgs sampler;
  abba::models::PriorConfig priors;
};

int run_fit(const FitArgs& a, int argc, char** argv) {
  auto manifest = start_manifest("fit", argc, argv);
  const auto file = abba::io::read_dataset(a.data);
  manifest.inputs.push_back({a.data, abba::io::sha256_file(a.data)});
  manifest.subtrial_labels = file.labels;

  abba::models::ModelSpec spec;
  spec.kind = parse_kind(a.model);
  spec.priors = a.priors;
  spec.rule.threshold = a.threshold;
  spec.rule.direction = parse_direction(a.direction);
  spec.rule.success_requires_no_failure = !a.any_response;
  const auto cfg = resolve(a.sampler);
  if (a.interval != "hdi" && a.interval != "equal-tailed") throw abba::MalformedInput("--interval must be hdi or equal-tailed");
  if (a.averaging != "observed" && a.averaging != "counterfactual") {
    throw abba::MalformedInput("--averaging must be observed or counterfactual");
  }

  abba::models::Dataset data(file.records, static_cast<int>(file.labels.size()));
  for (int k = 0; k < data.subtrials(); ++k) {
    for (int t = 0; t <= 1; ++t) {
      if (data.arm_size(k, t) == 0) {
        throw abba::ValidationError("subtrial " + file.labels[static_cast<std::size_t>(k)] + ": " +
                                    (t ? "treatment" : "control") + " arm is empty");
      }
    }
  }
  spec.subtrials = data.subtrials();
  const abba::models::Model model(spec, data);

  abba::posterior::FitOptions fo;
  fo.sampler = cfg;
  const auto fit = abba::posterior::fit(model, fo);
  const auto lor = abba::posterior::log_odds_ratio_draws(
      fit, a.averaging == "observed" ? abba::posterior::ArmAveraging::Observed
                                     : abba::posterior::ArmAveraging::Counterfactual);
  std::vector<abba::posterior::SubtrialSummary> summaries;
  for (int k = 0; k < data.subtrials(); ++k) {
    auto s = abba::posterior::summarize(lor.lambda[static_cast<std::size_t>(k)], 0.95,
                                        a.interval == "hdi" ? abba::posterior::IntervalKind::Hdi
                                                            : abba::posterior::IntervalKind::EqualTailed,
                                        k);
    if (s.multimodal_warning) {
      std::cerr << "warning: subtrial " << file.labels[static_cast<std::size_t>(k)]
                << ": posterior mean lies outside the interval (multimodal draws?)\n";
    }
    summaries.push_back(s);
  }
  if (lor.clamps > 0) std::cerr << "warning: " << lor.clamps << " arm response rates were clamped\n";

  const fs::path out(a.out);
  prepare_dir(out);
  // Diagnostics on the scale the draws are saved in, so `diagnose` reproduces them.
  const auto constrained = abba::io::constrain_draws(fit.draws(), *model.layout());
  const auto diag = abba::sampler::diagnostics(constrained, cfg.max_tree_depth);
  ordered_json meta = {{"model", a.model}, {"subtrials", data.subtrials()}, {"scale", "constrained"}};
  abba::io::write_draws(out / "draws.bin", {constrained, meta.dump()});
  abba::io::write_file(out / "summary.csv", abba::io::format_summary_csv(summaries, file.labels));
  abba::io::write_file(out / "diagnostics.csv", abba::io::format_diagnostics_csv(fit.draws().names, diag));
  abba::io::write_file(out / "sampler.csv", abba::io::format_sampler_csv(fit.draws(), cfg.max_tree_depth));

  ordered_json config = {{"data", a.data},           {"model", a.model},
                         {"rule", to_json(spec.rule)}, {"priors", to_json(spec.priors)},
                         {"sampler", to_json(cfg)},  {"interval", a.interval},
                         {"averaging", a.averaging}, {"out", a.out}};
  manifest.seed = cfg.seed;
  finish_manifest(manifest, config, out);

  std::cout << abba::io::format_summary_csv(summaries, file.labels);
  const double worst = *std::max_element(diag.rhat.begin(), diag.rhat.end());
  std::cerr << "divergences: " << diag.divergences << ", max R-hat: " << worst << "\n";
  return kOk;
}

// ---- simulate ---------------------------------------------------------------------------------

struct SimulateArgs {
  std::string scenario, scenario_file, models = "abba,bin", out = "sim-out";
  std::size_t m = 100;
  std::uint64_t first = 0;
  unsigned workers = 0;
  double log_mean = 0.0, log_sd = 1.0;
  bool quiet = false;
  SamplerArgs sampler;
};

int run_simulate(const SimulateArgs& a, int argc, char** argv) {
  auto manifest = start_manifest("simulate", argc, argv);
  abba::simlab::ScenarioSpec spec;
  abba::simlab::BaselineModel baseline{a.log_mean, a.log_sd};
  if (!a.scenario_file.empty()) {
    const auto f = abba::io::read_scenario(a.scenario_file);
    spec = f.spec;
    baseline = f.baseline;
    manifest.inputs.push_back({a.scenario_file, abba::io::sha256_file(a.scenario_file)});
  } else if (!a.scenario.empty()) {
    spec = lookup_scenario(a.scenario);
  } else {
    throw abba::MalformedInput("give a scenario name or --scenario-file");
  }
  baseline.validate();

  abba::simlab::ReplicateOptions opt;
  std::stringstream list(a.models);
  for (std::string name; std::getline(list, name, ',');) {
    abba::models::ModelSpec ms;
    ms.kind = parse_kind(name);
    opt.models.push_back(ms);
  }
  opt.replicates = a.m;
  opt.first_replicate = a.first;
  opt.sampler = resolve(a.sampler);
  opt.workers = a.workers > 0 ? a.workers : abba::simlab::default_workers();
  opt.baseline = baseline;
  std::mutex io_mutex;
  if (!a.quiet) {
    opt.progress = [&](std::size_t done, std::size_t total) {
      const std::lock_guard lock(io_mutex);
      std::cerr << "\rreplicates " << done << "/" << total << std::flush;
      if (done == total) std::cerr << "\n";
    };
  }

  spec = abba::simlab::ensure_calibrated(spec, baseline);
  const auto report = abba::simlab::run_replicates(spec, opt);

  const fs::path out(a.out);
  prepare_dir(out);
  abba::io::write_file(out / "scenario.txt", abba::io::format_scenario({spec, baseline}));
  abba::io::write_file(out / "replicates.csv", abba::io::format_replicates_csv(report.rows));
  abba::io::write_file(out / "aggregate.csv", abba::io::format_aggregate_csv(report));
  abba::io::write_file(out / "comparison.csv", abba::io::format_comparison_csv(report));
  {
    std::ostringstream f;
    abba::io::CsvWriter w(f);
    w.row({"replicate", "model", "message"});
    for (const auto& x : report.failures) w.row({std::to_string(x.replicate), x.model, x.message});
    abba::io::write_file(out / "failures.csv", f.str());
  }

  ordered_json config = {{"scenario", spec.name},
                         {"scenario_file", a.scenario_file},
                         {"models", a.models},
                         {"replicates", a.m},
                         {"first_replicate", a.first},
                         {"baseline", {{"log_mean", baseline.log_mean}, {"log_sd", baseline.log_sd}}},
                         {"sampler", to_json(opt.sampler)},
                         {"out", a.out}};
  manifest.seed = opt.sampler.seed;
  finish_manifest(manifest, config, out);
  std::cout << abba::io::format_aggregate_csv(report);
  if (!report.failures.empty()) std::cerr << report.failures.size() << " fits failed (see failures.csv)\n";
  return kOk;
}

// ---- calibrate --------------------------------------------------------------------------------

struct CalibrateArgs {
  std::string scenario, scenario_file, out;
  double log_mean = 0.0, log_sd = 1.0;
  bool baseline_given = false;
  std::size_t mc_draws = 100000;
};

int run_calibrate(const CalibrateArgs& a) {
  abba::io::ScenarioFile file;
  if (!a.scenario_file.empty()) {
    file = abba::io::read_scenario(a.scenario_file);
  } else if (!a.scenario.empty()) {
    file.spec = lookup_scenario(a.scenario);
  } else {
    throw abba::MalformedInput("give a scenario name or --scenario-file");
  }
  if (a.baseline_given || a.scenario_file.empty()) file.baseline = {a.log_mean, a.log_sd};
  file.baseline.validate();

  abba::simlab::CalibrationOptions opt;
  opt.mc_draws = a.mc_draws;
  const auto result = abba::simlab::calibrate_intercepts(file.spec, file.baseline, opt);
  file.spec = abba::simlab::apply_calibration(file.spec, result);

  std::ostringstream rates;
  abba::io::CsvWriter w(rates);
  w.row({"subtrial", "beta1", "beta2", "target_rr_control", "achieved_rr_control", "target_rr_treatment",
         "achieved_rr_treatment"});
  for (std::size_t k = 0; k < result.subtrials.size(); ++k) {
    const auto& r = result.subtrials[k];
    const auto& p = file.spec.subtrials[k];
    w.row({std::to_string(k + 1), abba::io::format_double(r.beta[0]), abba::io::format_double(r.beta[1]),
           abba::io::format_double(p.target_rr_control), abba::io::format_double(r.achieved_control),
           abba::io::format_double(p.target_rr_treatment), abba::io::format_double(r.achieved_treatment)});
  }
  const std::string text = abba::io::format_scenario(file);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    abba::io::write_file(a.out, text);
    abba::io::write_file(a.out + ".rates.csv", rates.str());
  }
  std::cerr << rates.str();
  return kOk;
}

// ---- diagnose ---------------------------------------------------------------------------------

int run_diagnose(const std::string& path, const std::string& out, int max_depth) {
  const auto file = abba::io::read_draws(path);
  const auto diag = abba::sampler::diagnostics(file.draws, max_depth);
  const std::string csv = abba::io::format_diagnostics_csv(file.draws.names, diag);
  if (out.empty()) {
    std::cout << csv;
  } else {
    prepare_dir(out);
    abba::io::write_file(fs::path(out) / "diagnostics.csv", csv);
    abba::io::write_file(fs::path(out) / "sampler.csv", abba::io::format_sampler_csv(file.draws, max_depth));
  }
  std::cerr << "divergences: " << diag.divergences << ", max-depth hits: " << diag.max_depth_hits << "\n";
  return kOk;
}

// ---- scenarios --------------------------------------------------------------------------------

int run_scenarios(const std::string& show) {
  if (!show.empty()) {
    std::cout << abba::io::format_scenario({lookup_scenario(show), {}});
    return kOk;
  }
  for (const auto& [name, s] : abba::simlab::scenario_library()) {
    std::cout << name << "  K=" << s.K() << "  reference LOR:";
    for (const auto& p : s.subtrials) std::cout << ' ' << abba::io::format_double(p.true_lor);
    std::cout << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian basket-trial analysis with augmented binary endpoints"};
  app.require_subcommand(1);
  app.set_version_flag("--version", abba::io::engine_version());

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model to a trial CSV");
  fit_cmd->add_option("--data", fit.data, "CSV: subtrial,treatment,baseline,y_continuous,y_binary")->required();
  fit_cmd->add_option("--model", fit.model, "abba, abba-strat, bin or bin-strat")->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "output directory")->capture_default_str();
  fit_cmd->add_option("--threshold", fit.threshold, "responder threshold on the continuous score")->capture_default_str();
  fit_cmd->add_option("--direction", fit.direction, "responder when the score is above or below")->capture_default_str();
  fit_cmd->add_flag("--any-response", fit.any_response, "responder status ignores the failure indicator");
  fit_cmd->add_option("--interval", fit.interval, "hdi or equal-tailed")->capture_default_str();
  fit_cmd->add_option("--averaging", fit.averaging, "observed or counterfactual arm averaging")->capture_default_str();
  fit_cmd->add_option("--prior-beta-sd", fit.priors.beta_gamma_sd)->capture_default_str();
  fit_cmd->add_option("--prior-theta-sd", fit.priors.theta_sd)->capture_default_str();
  fit_cmd->add_option("--prior-mean-sd", fit.priors.level2_mean_sd)->capture_default_str();
  fit_cmd->add_option("--prior-sd-rate", fit.priors.level2_rate)->capture_default_str();
  fit_cmd->add_option("--prior-sd-floor-abba", fit.priors.level2_lower_abba)->capture_default_str();
  fit_cmd->add_option("--prior-sd-floor-bin", fit.priors.level2_lower_bin)->capture_default_str();
  fit_cmd->add_option("--lkj-eta", fit.priors.lkj_eta)->capture_default_str();
  add_sampler_options(fit_cmd, fit.sampler);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "run replicated simulations of a scenario");
  sim_cmd->add_option("scenario", sim.scenario, "library scenario, e.g. scenario4");
  sim_cmd->add_option("--scenario-file", sim.scenario_file, "scenario file (overrides the name)");
  sim_cmd->add_option("--models", sim.models, "comma-separated model list")->capture_default_str();
  sim_cmd->add_option("--m", sim.m, "number of replicates")->capture_default_str();
  sim_cmd->add_option("--first-replicate", sim.first, "index of the first replicate")->capture_default_str();
  sim_cmd->add_option("--workers", sim.workers, "worker threads (default: ABBA_WORKERS or all cores)");
  sim_cmd->add_option("--baseline-log-mean", sim.log_mean)->capture_default_str();
  sim_cmd->add_option("--baseline-log-sd", sim.log_sd)->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "output directory")->capture_default_str();
  sim_cmd->add_flag("--quiet", sim.quiet, "no progress output");
  add_sampler_options(sim_cmd, sim.sampler);

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "solve for intercepts that hit the target response rates");
  cal_cmd->add_option("scenario", cal.scenario, "library scenario");
  cal_cmd->add_option("--scenario-file", cal.scenario_file, "scenario file");
  cal_cmd->add_option("--out", cal.out, "output scenario file (default: stdout)");
  auto* lm = cal_cmd->add_option("--baseline-log-mean", cal.log_mean)->capture_default_str();
  auto* ls = cal_cmd->add_option("--baseline-log-sd", cal.log_sd)->capture_default_str();
  cal_cmd->add_option("--mc-draws", cal.mc_draws, "Monte Carlo baseline draws")->capture_default_str();

  std::string draws_path, diag_out;
  int diag_depth = 10;
  auto* diag_cmd = app.add_subcommand("diagnose", "recompute diagnostics from a saved draws file");
  diag_cmd->add_option("draws", draws_path, "draws.bin written by fit")->required();
  diag_cmd->add_option("--out", diag_out, "output directory (default: stdout)");
  diag_cmd->add_option("--max-depth", diag_depth, "tree depth counted as a max-depth hit")->capture_default_str();

  std::string show;
  auto* list_cmd = app.add_subcommand("scenarios", "list the built-in scenarios");
  list_cmd->add_option("--show", show, "print one scenario in scenario-file form");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kMalformed;
  }

  try {
    if (*fit_cmd) return run_fit(fit, argc, argv);
    if (*sim_cmd) return run_simulate(sim, argc, argv);
    if (*cal_cmd) {
      cal.baseline_given = lm->count() > 0 || ls->count() > 0;
      return run_calibrate(cal);
    }
    if (*diag_cmd) return run_diagnose(draws_path, diag_out, diag_depth);
    if (*list_cmd) return run_scenarios(show);
  } catch (const abba::MalformedInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMalformed;
  } catch (const abba::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const abba::InitializationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInit;
  } catch (const abba::ReplicateFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kReplicates;
  } catch (const abba::CalibrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCalibration;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
