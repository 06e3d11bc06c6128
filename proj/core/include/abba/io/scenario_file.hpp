#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "abba/simlab/scenario.hpp"

namespace abba::io {

/// A scenario plus the baseline distribution it was (or will be) calibrated against.
struct ScenarioFile {
  simlab::ScenarioSpec spec;
  simlab::BaselineModel baseline;
};

/// Grammar:
///
///   # comment
///   key = value                one per line: name, sigma1, rho, n_per_arm, threshold,
///                              direction (above|below), require_no_failure (true|false),
///                              calibrated (true|false), baseline_log_mean, baseline_log_sd
///   [subtrials]
///   beta1,beta2,gamma1,gamma2,theta1,theta2,target_rr_control,target_rr_treatment,true_lor[,initial_beta1,initial_beta2]
///   one CSV row per subtrial
///
/// Omitted keys take their defaults. Throws MalformedInput naming the line.
ScenarioFile parse_scenario(std::string_view text);
ScenarioFile read_scenario(const std::filesystem::path& path);
std::string format_scenario(const ScenarioFile& file);

}  // namespace abba::io
