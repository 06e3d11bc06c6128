#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <utility>

#include "abba/numkit/orthant.hpp"

namespace abba::numkit {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011). Each 128-bit block is a pure
/// function of (key, counter), so streams are addressed rather than advanced.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept;
};

/// 64-bit URBG over one Philox stream: key = seed, counter = (block index, stream id).
class StreamEngine {
 public:
  using result_type = std::uint64_t;

  StreamEngine(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// Folds a list of tags (replicate, model, chain, ...) into a 64-bit stream id.
std::uint64_t stream_id(std::initializer_list<std::uint64_t> tags) noexcept;

/// Caller-owned random source. Never shared between threads.
class Rng {
 public:
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags)
      : engine_(seed, stream_id(tags)) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(seed, stream) {}

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(engine_); }

  StreamEngine& engine() noexcept { return engine_; }

 private:
  StreamEngine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// One draw of (Y1, Y2) ~ MVN((mu1, mu2), cov) by Cholesky construction.
std::pair<double, double> sample_bvn(double mu1, double mu2, const Cov2& cov, Rng& rng);

}  // namespace abba::numkit
