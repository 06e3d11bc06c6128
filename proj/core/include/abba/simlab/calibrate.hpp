#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "abba/simlab/scenario.hpp"

namespace abba::simlab {

struct CalibrationOptions {
  std::size_t mc_draws = 100000;  ///< Monte Carlo baseline draws behind each achieved rate
  std::uint64_t seed = 20240611;  ///< fixed so calibration is a pure function of the scenario
  double tolerance = 0.005;       ///< both arm rates must land this close to their targets
  int restarts = 3;
  int max_iterations = 500;  ///< Nelder-Mead iterations per attempt
};

struct SubtrialCalibration {
  Pair beta{0.0, 0.0};
  double achieved_control = 0.0;
  double achieved_treatment = 0.0;
  int attempts = 0;
};

struct CalibrationResult {
  std::vector<SubtrialCalibration> subtrials;
};

/// Log-baseline draws shared by every objective evaluation (common random numbers).
std::vector<double> calibration_baselines(const BaselineModel& baseline,
                                          const CalibrationOptions& options);

/// Population responder rates (control, treatment) of one subtrial at intercepts `beta`,
/// averaged over the given log-baseline draws.
Pair achieved_rates(const ScenarioSpec& spec, const SubtrialParams& params, const Pair& beta,
                    std::span<const double> log_baselines);

/// Nelder-Mead search for the intercepts of every subtrial that reproduce the target rates.
///
/// The search starts from the scenario's current beta. For uncalibrated scenarios the start is
/// first shifted along the continuous intercept until the control rate matches, since published
/// intercepts refer to a different baseline scale. Identical subtrials are solved once.
/// Throws CalibrationError if a subtrial misses the tolerance after every restart.
CalibrationResult calibrate_intercepts(const ScenarioSpec& spec, const BaselineModel& baseline,
                                       const CalibrationOptions& options = {});

/// Copy of `spec` with the calibrated intercepts installed.
ScenarioSpec apply_calibration(ScenarioSpec spec, const CalibrationResult& result);

/// Calibrates unless `spec` is already calibrated.
ScenarioSpec ensure_calibrated(const ScenarioSpec& spec, const BaselineModel& baseline,
                               const CalibrationOptions& options = {});

}  // namespace abba::simlab
