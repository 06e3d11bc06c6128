#include "abba/sampler/nuts.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "abba/errors.hpp"
#include "abba/sampler/adaptation.hpp"

namespace abba::sampler {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxDeltaH = 1000.0;

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void add(std::vector<double>& acc, const std::vector<double>& v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

std::vector<double> sum(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a);
  add(out, b);
  return out;
}

bool no_u_turn(const std::vector<double>& v_minus, const std::vector<double>& v_plus,
               const std::vector<double>& rho) {
  return dot(v_plus, rho) > 0.0 && dot(v_minus, rho) > 0.0;
}

struct TransitionInfo {
  double accept_stat = 0.0;
  int depth = 0;
  bool divergent = false;
};

class NutsChain {
 public:
  NutsChain(const Target& target, int max_depth, numkit::Rng& rng)
      : target_(target),
        max_depth_(max_depth),
        rng_(rng),
        inv_metric_(target.dimension, 1.0),
        z_(target.dimension) {}

  void set_position(const std::vector<double>& q) {
    z_.q = q;
    hamiltonian().update(z_);
  }

  const PhasePoint& state() const { return z_; }
  double& step_size() { return epsilon_; }
  std::vector<double>& inverse_metric() { return inv_metric_; }

  void init_stepsize();
  TransitionInfo transition();

 private:
  DiagHamiltonian hamiltonian() const { return DiagHamiltonian(target_, inv_metric_); }

  void sample_momentum(PhasePoint& z) {
    for (std::size_t i = 0; i < z.p.size(); ++i) z.p[i] = rng_.normal() / std::sqrt(inv_metric_[i]);
  }

  std::vector<double> velocity(const PhasePoint& z) const {
    std::vector<double> v(z.p.size());
    hamiltonian().velocity(z, v);
    return v;
  }

  double energy(const PhasePoint& z) const {
    const double h = hamiltonian().energy(z);
    return std::isnan(h) ? kInf : h;
  }

  bool build_tree(int depth, PhasePoint& z_propose, std::vector<double>& p_sharp_beg,
                  std::vector<double>& p_sharp_end, std::vector<double>& rho,
                  std::vector<double>& p_beg, std::vector<double>& p_end, double H0, double sign,
                  int& n_leapfrog, double& log_sum_weight, double& sum_metro_prob);

  const Target& target_;
  int max_depth_;
  numkit::Rng& rng_;
  std::vector<double> inv_metric_;
  PhasePoint z_;
  double epsilon_ = 1.0;
  bool divergent_ = false;
};

void NutsChain::init_stepsize() {
  const PhasePoint start = z_;
  const DiagHamiltonian H = hamiltonian();
  sample_momentum(z_);
  double H0 = energy(z_);
  H.leapfrog(z_, epsilon_);
  double delta = H0 - energy(z_);
  const int direction = delta > std::log(0.8) ? 1 : -1;
  for (int guard = 0; guard < 200; ++guard) {
    z_ = start;
    sample_momentum(z_);
    H0 = energy(z_);
    H.leapfrog(z_, epsilon_);
    delta = H0 - energy(z_);
    if (direction == 1 && !(delta > std::log(0.8))) break;
    if (direction == -1 && !(delta < std::log(0.8))) break;
    epsilon_ = direction == 1 ? 2.0 * epsilon_ : 0.5 * epsilon_;
    if (epsilon_ > 1e7 || epsilon_ < 1e-300) break;
  }
  epsilon_ = std::clamp(epsilon_, 1e-12, 1e7);
  z_ = start;
}

bool NutsChain::build_tree(int depth, PhasePoint& z_propose, std::vector<double>& p_sharp_beg,
                           std::vector<double>& p_sharp_end, std::vector<double>& rho,
                           std::vector<double>& p_beg, std::vector<double>& p_end, double H0,
                           double sign, int& n_leapfrog, double& log_sum_weight,
                           double& sum_metro_prob) {
  if (depth == 0) {
    hamiltonian().leapfrog(z_, sign * epsilon_);
    ++n_leapfrog;
    const double h = energy(z_);
    if (h - H0 > kMaxDeltaH) divergent_ = true;
    log_sum_weight = log_sum_exp(log_sum_weight, H0 - h);
    sum_metro_prob += H0 - h > 0.0 ? 1.0 : std::exp(H0 - h);
    z_propose = z_;
    p_sharp_beg = velocity(z_);
    p_sharp_end = p_sharp_beg;
    add(rho, z_.p);
    p_beg = z_.p;
    p_end = p_beg;
    return !divergent_;
  }

  const std::size_t dim = z_.q.size();
  double log_sum_weight_init = -kInf;
  std::vector<double> p_init_end(dim), p_sharp_init_end(dim), rho_init(dim, 0.0);
  if (!build_tree(depth - 1, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg, p_init_end,
                  H0, sign, n_leapfrog, log_sum_weight_init, sum_metro_prob)) {
    return false;
  }

  PhasePoint z_propose_final(z_);
  double log_sum_weight_final = -kInf;
  std::vector<double> p_final_beg(dim), p_sharp_final_beg(dim), rho_final(dim, 0.0);
  if (!build_tree(depth - 1, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final,
                  p_final_beg, p_end, H0, sign, n_leapfrog, log_sum_weight_final, sum_metro_prob)) {
    return false;
  }

  const double log_sum_weight_subtree = log_sum_exp(log_sum_weight_init, log_sum_weight_final);
  log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);
  if (log_sum_weight_final > log_sum_weight_subtree) {
    z_propose = z_propose_final;
  } else if (rng_.uniform() < std::exp(log_sum_weight_final - log_sum_weight_subtree)) {
    z_propose = z_propose_final;
  }

  const std::vector<double> rho_subtree = sum(rho_init, rho_final);
  add(rho, rho_subtree);
  bool persist = no_u_turn(p_sharp_beg, p_sharp_end, rho_subtree);
  persist = persist && no_u_turn(p_sharp_beg, p_sharp_final_beg, sum(rho_init, p_final_beg));
  persist = persist && no_u_turn(p_sharp_init_end, p_sharp_end, sum(rho_final, p_init_end));
  return persist;
}

TransitionInfo NutsChain::transition() {
  sample_momentum(z_);
  divergent_ = false;

  PhasePoint z_fwd(z_), z_bck(z_), z_sample(z_), z_propose(z_);
  std::vector<double> p_fwd_fwd = z_.p, p_fwd_bck = z_.p, p_bck_fwd = z_.p, p_bck_bck = z_.p;
  std::vector<double> p_sharp_fwd_fwd = velocity(z_);
  std::vector<double> p_sharp_fwd_bck = p_sharp_fwd_fwd, p_sharp_bck_fwd = p_sharp_fwd_fwd,
                      p_sharp_bck_bck = p_sharp_fwd_fwd;
  std::vector<double> rho = z_.p;
  const std::size_t dim = z_.q.size();

  double log_sum_weight = 0.0;
  const double H0 = energy(z_);
  int n_leapfrog = 0;
  double sum_metro_prob = 0.0;
  int depth = 0;

  while (depth < max_depth_) {
    std::vector<double> rho_fwd(dim, 0.0), rho_bck(dim, 0.0);
    bool valid = false;
    double log_sum_weight_subtree = -kInf;

    if (rng_.uniform() > 0.5) {
      z_ = z_fwd;
      rho_bck = rho;
      p_bck_fwd = p_fwd_bck;
      p_sharp_bck_fwd = p_sharp_fwd_bck;
      valid = build_tree(depth, z_propose, p_sharp_fwd_bck, p_sharp_fwd_fwd, rho_fwd, p_fwd_bck,
                         p_fwd_fwd, H0, 1.0, n_leapfrog, log_sum_weight_subtree, sum_metro_prob);
      z_fwd = z_;
    } else {
      z_ = z_bck;
      rho_fwd = rho;
      p_fwd_bck = p_bck_fwd;
      p_sharp_fwd_bck = p_sharp_bck_fwd;
      valid = build_tree(depth, z_propose, p_sharp_bck_fwd, p_sharp_bck_bck, rho_bck, p_bck_fwd,
                         p_bck_bck, H0, -1.0, n_leapfrog, log_sum_weight_subtree, sum_metro_prob);
      z_bck = z_;
    }
    if (!valid) break;
    ++depth;

    if (log_sum_weight_subtree > log_sum_weight) {
      z_sample = z_propose;
    } else if (rng_.uniform() < std::exp(log_sum_weight_subtree - log_sum_weight)) {
      z_sample = z_propose;
    }
    log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);

    rho = sum(rho_bck, rho_fwd);
    bool persist = no_u_turn(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
    persist = persist && no_u_turn(p_sharp_bck_bck, p_sharp_fwd_bck, sum(rho_bck, p_fwd_bck));
    persist = persist && no_u_turn(p_sharp_bck_fwd, p_sharp_fwd_fwd, sum(rho_fwd, p_bck_fwd));
    if (!persist) break;
  }

  z_ = z_sample;
  return {n_leapfrog > 0 ? sum_metro_prob / n_leapfrog : 0.0, depth, divergent_};
}

ChainDraws run_chain(const Target& target, const SamplerConfig& config,
                     const InitStrategy& strategy, numkit::Rng& rng) {
  const std::size_t dim = target.dimension;
  NutsChain chain(target, config.max_tree_depth, rng);

  // Initial point: redraw until the density and gradient are finite.
  bool found = false;
  for (int attempt = 0; attempt < strategy.max_attempts && !found; ++attempt) {
    chain.set_position(initialize(dim, strategy, rng));
    const PhasePoint& z = chain.state();
    found = std::isfinite(z.log_density) &&
            std::all_of(z.grad.begin(), z.grad.end(), [](double g) { return std::isfinite(g); });
  }
  if (!found) {
    throw InitializationError("sampler: no finite initial point after " +
                              std::to_string(strategy.max_attempts) + " attempts");
  }

  chain.init_stepsize();
  StepSizeAdaptation step(config.target_accept);
  step.set_mu(std::log(10.0 * chain.step_size()));
  step.restart();
  WindowedVarianceAdaptation metric(dim, config.warmup_iters);

  for (int it = 0; it < config.warmup_iters; ++it) {
    const TransitionInfo info = chain.transition();
    chain.step_size() = step.learn(info.accept_stat);
    if (metric.learn(chain.state().q, chain.inverse_metric())) {
      chain.init_stepsize();
      step.set_mu(std::log(10.0 * chain.step_size()));
      step.restart();
    }
  }
  if (config.warmup_iters > 0) chain.step_size() = step.complete();

  ChainDraws out;
  const auto n = static_cast<std::size_t>(config.sampling_iters);
  out.draws.reserve(n * dim);
  out.log_density.reserve(n);
  out.divergent.reserve(n);
  out.tree_depth.reserve(n);
  out.accept_stat.reserve(n);
  for (std::size_t it = 0; it < n; ++it) {
    const TransitionInfo info = chain.transition();
    const PhasePoint& z = chain.state();
    out.draws.insert(out.draws.end(), z.q.begin(), z.q.end());
    out.log_density.push_back(z.log_density);
    out.divergent.push_back(info.divergent ? 1 : 0);
    out.tree_depth.push_back(info.depth);
    out.accept_stat.push_back(info.accept_stat);
  }
  out.step_size = chain.step_size();
  out.inverse_metric = chain.inverse_metric();
  return out;
}

}  // namespace

double DiagHamiltonian::kinetic(const PhasePoint& z) const {
  double k = 0.0;
  for (std::size_t i = 0; i < z.p.size(); ++i) k += inv_metric_[i] * z.p[i] * z.p[i];
  return 0.5 * k;
}

void DiagHamiltonian::update(PhasePoint& z) const {
  z.log_density = target_.log_density_gradient(z.q, z.grad);
  if (std::isnan(z.log_density)) z.log_density = -kInf;
}

void DiagHamiltonian::leapfrog(PhasePoint& z, double eps) const {
  const std::size_t n = z.q.size();
  for (std::size_t i = 0; i < n; ++i) z.p[i] += 0.5 * eps * z.grad[i];
  for (std::size_t i = 0; i < n; ++i) z.q[i] += eps * inv_metric_[i] * z.p[i];
  update(z);
  for (std::size_t i = 0; i < n; ++i) z.p[i] += 0.5 * eps * z.grad[i];
}

void DiagHamiltonian::velocity(const PhasePoint& z, std::span<double> out) const {
  for (std::size_t i = 0; i < z.p.size(); ++i) out[i] = inv_metric_[i] * z.p[i];
}

std::vector<double> initialize(std::size_t dimension, const InitStrategy& strategy,
                               numkit::Rng& rng) {
  std::vector<double> q(dimension);
  for (double& v : q) v = rng.uniform(-strategy.radius, strategy.radius);
  for (const CoordinateRange& r : strategy.ranges) {
    for (std::size_t i = r.begin; i < std::min(r.end, dimension); ++i) q[i] = rng.uniform(r.lo, r.hi);
  }
  return q;
}

std::vector<double> PosteriorDraws::column(std::size_t param, std::size_t chain) const {
  std::vector<double> out(iterations);
  for (std::size_t it = 0; it < iterations; ++it) out[it] = at(chain, it, param);
  return out;
}

std::size_t PosteriorDraws::divergences() const {
  std::size_t n = 0;
  for (const auto& c : chains) n += static_cast<std::size_t>(std::count(c.divergent.begin(), c.divergent.end(), 1));
  return n;
}

std::size_t PosteriorDraws::max_depth_hits(int max_depth) const {
  std::size_t n = 0;
  for (const auto& c : chains) {
    n += static_cast<std::size_t>(std::count(c.tree_depth.begin(), c.tree_depth.end(), max_depth));
  }
  return n;
}

PosteriorDraws run(const Target& target, const SamplerConfig& config, const InitStrategy& strategy,
                   const RunOptions& options) {
  config.validate();
  PosteriorDraws result;
  result.dimension = target.dimension;
  result.iterations = static_cast<std::size_t>(config.sampling_iters);
  result.chains.resize(static_cast<std::size_t>(config.chains));

  std::vector<std::exception_ptr> errors(result.chains.size());
  const auto work = [&](std::size_t c) {
    try {
      numkit::Rng rng(config.seed, {options.stream, static_cast<std::uint64_t>(c)});
      result.chains[c] = run_chain(target, config, strategy, rng);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  if (options.parallel_chains && result.chains.size() > 1) {
    std::vector<std::jthread> threads;
    for (std::size_t c = 0; c < result.chains.size(); ++c) threads.emplace_back(work, c);
  } else {
    for (std::size_t c = 0; c < result.chains.size(); ++c) work(c);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return result;
}

}  // namespace abba::sampler
