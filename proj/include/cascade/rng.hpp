#pragma once

// Counter-based SplitMix64 streams: draw n of trial t under seed s depends only
// on (s, t, n), so trials can be evaluated in any order or in parallel.

#include <cstdint>
#include <span>
#include <vector>

namespace cascade {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Inverse-CDF sampler over a finite pmf; zero-mass bins are never returned.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> pmf);
  std::size_t operator()(CounterRng& rng) const;

 private:
  std::vector<double> cdf_;
  std::vector<std::size_t> bins_;
};

}  // namespace cascade
