#include "abba/simlab/calibrate.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_roots.h>

#include <cmath>
#include <memory>
#include <string>

#include "abba/errors.hpp"
#include "abba/posterior/lor.hpp"

namespace abba::simlab {
namespace {

struct Problem {
  const ScenarioSpec* spec;
  const SubtrialParams* params;
  std::span<const double> log_x;
};

double objective(const gsl_vector* v, void* data) {
  const auto* p = static_cast<const Problem*>(data);
  const Pair beta{gsl_vector_get(v, 0), gsl_vector_get(v, 1)};
  const Pair r = achieved_rates(*p->spec, *p->params, beta, p->log_x);
  const double dc = r[0] - p->params->target_rr_control;
  const double dt = r[1] - p->params->target_rr_treatment;
  return dc * dc + dt * dt;
}

struct ShiftProblem {
  const Problem* problem;
  Pair start;
};

double control_gap(double shift, void* data) {
  const auto* s = static_cast<const ShiftProblem*>(data);
  const Pair beta{s->start[0] + shift, s->start[1]};
  const Pair r = achieved_rates(*s->problem->spec, *s->problem->params, beta, s->problem->log_x);
  return r[0] - s->problem->params->target_rr_control;
}

// Moves the continuous intercept so that the control rate hits its target. Returns the start
// unchanged when the target is not bracketed.
Pair shift_start(const Problem& problem, Pair start) {
  ShiftProblem sp{&problem, start};
  gsl_function f{&control_gap, &sp};
  double lo = -20.0, hi = 20.0;
  if (control_gap(lo, &sp) * control_gap(hi, &sp) > 0.0) return start;
  std::unique_ptr<gsl_root_fsolver, decltype(&gsl_root_fsolver_free)> solver(
      gsl_root_fsolver_alloc(gsl_root_fsolver_brent), &gsl_root_fsolver_free);
  gsl_root_fsolver_set(solver.get(), &f, lo, hi);
  for (int it = 0; it < 100; ++it) {
    gsl_root_fsolver_iterate(solver.get());
    lo = gsl_root_fsolver_x_lower(solver.get());
    hi = gsl_root_fsolver_x_upper(solver.get());
    if (gsl_root_test_interval(lo, hi, 1e-6, 0.0) == GSL_SUCCESS) break;
  }
  start[0] += gsl_root_fsolver_root(solver.get());
  return start;
}

Pair nelder_mead(const Problem& problem, Pair start, double step, int max_iterations) {
  gsl_multimin_function f{&objective, 2, const_cast<Problem*>(&problem)};
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(2), &gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> ss(gsl_vector_alloc(2), &gsl_vector_free);
  gsl_vector_set(x.get(), 0, start[0]);
  gsl_vector_set(x.get(), 1, start[1]);
  gsl_vector_set_all(ss.get(), step);
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2),
      &gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(s.get(), &f, x.get(), ss.get());
  for (int it = 0; it < max_iterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), 1e-7) == GSL_SUCCESS) break;
  }
  return {gsl_vector_get(s->x, 0), gsl_vector_get(s->x, 1)};
}

bool within(const SubtrialParams& p, const Pair& r, double tol) {
  return std::abs(r[0] - p.target_rr_control) <= tol && std::abs(r[1] - p.target_rr_treatment) <= tol;
}

bool same_problem(const SubtrialParams& a, const SubtrialParams& b) {
  return a.beta == b.beta && a.gamma == b.gamma && a.theta == b.theta &&
         a.target_rr_control == b.target_rr_control && a.target_rr_treatment == b.target_rr_treatment;
}

SubtrialCalibration calibrate_one(const ScenarioSpec& spec, const SubtrialParams& params,
                                  std::span<const double> log_x, const CalibrationOptions& options,
                                  int index) {
  const Problem problem{&spec, &params, log_x};
  SubtrialCalibration out;
  Pair beta = params.beta;
  Pair rates = achieved_rates(spec, params, beta, log_x);
  // A start that is already well inside the tolerance is kept, so recalibration is idempotent.
  if (within(params, rates, 0.2 * options.tolerance)) {
    out.beta = beta;
    out.achieved_control = rates[0];
    out.achieved_treatment = rates[1];
    return out;
  }
  if (!spec.calibrated) beta = shift_start(problem, beta);

  double step = 0.25;
  for (int attempt = 0; attempt <= options.restarts; ++attempt) {
    beta = nelder_mead(problem, beta, step, options.max_iterations);
    rates = achieved_rates(spec, params, beta, log_x);
    out.attempts = attempt + 1;
    if (within(params, rates, options.tolerance)) {
      out.beta = beta;
      out.achieved_control = rates[0];
      out.achieved_treatment = rates[1];
      return out;
    }
    step *= 2.0;
  }
  throw CalibrationError("calibration of " + spec.name + " subtrial " + std::to_string(index + 1) +
                         " failed: achieved rates " + std::to_string(rates[0]) + ", " +
                         std::to_string(rates[1]) + " vs targets " +
                         std::to_string(params.target_rr_control) + ", " +
                         std::to_string(params.target_rr_treatment));
}

}  // namespace

std::vector<double> calibration_baselines(const BaselineModel& baseline,
                                          const CalibrationOptions& options) {
  numkit::Rng rng(options.seed, {0xCA11B8A7Eull});
  std::vector<double> out(options.mc_draws);
  for (double& v : out) v = baseline.sample_log(rng);
  return out;
}

Pair achieved_rates(const ScenarioSpec& spec, const SubtrialParams& params, const Pair& beta,
                    std::span<const double> log_baselines) {
  Pair sum{0.0, 0.0};
  for (double lx : log_baselines) {
    for (int t = 0; t <= 1; ++t) {
      const double mu1 = beta[0] + params.gamma[0] * lx + params.theta[0] * t;
      const double mu2 = beta[1] + params.gamma[1] * lx + params.theta[1] * t;
      sum[static_cast<std::size_t>(t)] +=
          posterior::abba_success_probability(mu1, mu2, spec.sigma1, spec.rho, spec.rule);
    }
  }
  const double n = static_cast<double>(log_baselines.size());
  return {sum[0] / n, sum[1] / n};
}

CalibrationResult calibrate_intercepts(const ScenarioSpec& spec, const BaselineModel& baseline,
                                       const CalibrationOptions& options) {
  spec.validate();
  baseline.validate();
  gsl_set_error_handler_off();
  const std::vector<double> log_x = calibration_baselines(baseline, options);
  CalibrationResult result;
  for (int k = 0; k < spec.K(); ++k) {
    const SubtrialParams& p = spec.subtrials[static_cast<std::size_t>(k)];
    bool reused = false;
    for (int j = 0; j < k; ++j) {
      if (same_problem(p, spec.subtrials[static_cast<std::size_t>(j)])) {
        result.subtrials.push_back(result.subtrials[static_cast<std::size_t>(j)]);
        reused = true;
        break;
      }
    }
    if (!reused) result.subtrials.push_back(calibrate_one(spec, p, log_x, options, k));
  }
  return result;
}

ScenarioSpec apply_calibration(ScenarioSpec spec, const CalibrationResult& result) {
  for (std::size_t k = 0; k < spec.subtrials.size(); ++k) spec.subtrials[k].beta = result.subtrials[k].beta;
  spec.calibrated = true;
  return spec;
}

ScenarioSpec ensure_calibrated(const ScenarioSpec& spec, const BaselineModel& baseline,
                               const CalibrationOptions& options) {
  if (spec.calibrated) return spec;
  return apply_calibration(spec, calibrate_intercepts(spec, baseline, options));
}

}  // namespace abba::simlab
