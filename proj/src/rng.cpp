#include "cascade/rng.hpp"

#include <algorithm>

namespace cascade {

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGamma;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(splitmix64(splitmix64(seed) ^ (stream * kGamma + 0x632be59bd9b4e019ULL))) {}

std::uint64_t CounterRng::next_u64() noexcept { return splitmix64(key_ + kGamma * ++counter_); }

double CounterRng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

DiscreteSampler::DiscreteSampler(std::span<const double> pmf) {
  double acc = 0.0;
  for (std::size_t y = 0; y < pmf.size(); ++y) {
    if (pmf[y] <= 0.0) continue;
    acc += pmf[y];
    cdf_.push_back(acc);
    bins_.push_back(y);
  }
  for (double& c : cdf_) c /= acc;
  if (!cdf_.empty()) cdf_.back() = 1.0;
}

std::size_t DiscreteSampler::operator()(CounterRng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t k = std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
  return bins_[k];
}

}  // namespace cascade
