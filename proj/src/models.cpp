#include "cascade/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cascade {

namespace {

void check_distribution(const std::vector<double>& p, const char* name) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + " has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-10)
    throw std::invalid_argument(std::string(name) + " does not sum to 1 (sum=" +
                                std::to_string(sum) + ")");
}

}  // namespace

Belief::Belief(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0))
    throw std::invalid_argument("belief outside [0,1]: " + std::to_string(value));
}

ConditionalPmf::ConditionalPmf(std::vector<double> p0, std::vector<double> p1)
    : p0_(std::move(p0)), p1_(std::move(p1)) {
  if (p0_.size() != p1_.size())
    throw std::invalid_argument("p0 and p1 have different lengths");
  if (p0_.size() < 2) throw std::invalid_argument("a pmf needs at least 2 bins");
  check_distribution(p0_, "p0");
  check_distribution(p1_, "p1");
}

double ConditionalPmf::likelihood_ratio(std::size_t y) const {
  const double a = p1_[y];
  const double b = p0_[y];
  if (b > 0.0) return a / b;
  if (a > 0.0) return kInf;
  return std::numeric_limits<double>::quiet_NaN();
}

Belief posterior_update(Belief pi_prev, double likelihood_ratio) {
  if (std::isnan(likelihood_ratio) || likelihood_ratio < 0.0)
    throw std::invalid_argument("likelihood ratio must be nonnegative");
  return Belief(detail::posterior(pi_prev.value(), likelihood_ratio));
}

std::vector<double> evidence_pmf(const ConditionalPmf& model, Belief pi_prev) {
  const double pi = pi_prev.value();
  std::vector<double> out(model.bins());
  for (std::size_t y = 0; y < out.size(); ++y)
    out[y] = model.p1(y) * pi + model.p0(y) * (1.0 - pi);
  return out;
}

std::size_t bin_of(double score, std::span<const double> edges) {
  const std::size_t bins = edges.size() - 1;
  const double lo = edges.front();
  const double hi = edges.back();
  if (!(hi > lo)) return 0;
  if (score >= hi) return bins - 1;
  if (score <= lo) return 0;
  auto idx = static_cast<std::size_t>((score - lo) / (hi - lo) * static_cast<double>(bins));
  return std::min(idx, bins - 1);
}

EstimatedPmf estimate_pmf(std::span<const LabeledScore> samples, std::size_t bins) {
  if (bins < 2) throw std::invalid_argument("estimate_pmf needs at least 2 bins");
  std::size_t n[2] = {0, 0};
  double lo = kInf;
  double hi = -kInf;
  for (const auto& s : samples) {
    if (s.label != 0 && s.label != 1) throw std::invalid_argument("labels must be 0 or 1");
    if (!std::isfinite(s.score)) throw std::invalid_argument("scores must be finite");
    ++n[s.label];
    lo = std::min(lo, s.score);
    hi = std::max(hi, s.score);
  }
  if (n[0] == 0 || n[1] == 0)
    throw std::invalid_argument("estimate_pmf needs samples of both labels");

  std::vector<double> edges(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b)
    edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
  edges.back() = hi;

  std::vector<double> counts[2] = {std::vector<double>(bins, 1.0), std::vector<double>(bins, 1.0)};
  for (const auto& s : samples) counts[s.label][bin_of(s.score, edges)] += 1.0;
  for (int x = 0; x < 2; ++x) {
    const double total = static_cast<double>(n[x] + bins);
    for (double& c : counts[x]) c /= total;
  }
  return {ConditionalPmf(std::move(counts[0]), std::move(counts[1])), std::move(edges)};
}

std::vector<OperatingPoint> roc_pr(const ConditionalPmf& model, Belief prior) {
  const std::size_t bins = model.bins();
  const double pi = prior.value();
  std::vector<OperatingPoint> out(bins + 1);
  double tail0 = 0.0;
  double tail1 = 0.0;
  for (std::size_t b = bins + 1; b-- > 0;) {
    if (b < bins) {
      tail0 += model.p0(b);
      tail1 += model.p1(b);
    }
    OperatingPoint& op = out[b];
    op.threshold_bin = b;
    op.tpr = tail1;
    op.fpr = tail0;
    op.recall = tail1;
    const double positive = pi * tail1 + (1.0 - pi) * tail0;
    if (positive > 0.0) op.precision = pi * tail1 / positive;
  }
  return out;
}

}  // namespace cascade
