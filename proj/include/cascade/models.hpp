#pragma once

// Feature likelihood models and Bayesian belief updates.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cascade {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Posterior probability of target presence, always in [0, 1].
class Belief {
 public:
  Belief() = default;
  explicit Belief(double value);
  double value() const noexcept { return value_; }

  friend bool operator==(Belief a, Belief b) = default;

 private:
  double value_ = 0.0;
};

/// p(y | x) over L quantized feature bins for x in {0, 1}.
class ConditionalPmf {
 public:
  ConditionalPmf() = default;
  /// Validates both vectors (nonnegative, sum to 1 within 1e-10, L >= 2).
  ConditionalPmf(std::vector<double> p0, std::vector<double> p1);

  std::size_t bins() const noexcept { return p0_.size(); }
  std::span<const double> p0() const noexcept { return p0_; }
  std::span<const double> p1() const noexcept { return p1_; }
  double p0(std::size_t y) const { return p0_[y]; }
  double p1(std::size_t y) const { return p1_[y]; }

  /// False for bins with p0 = p1 = 0; those bins carry no evidence mass.
  bool in_support(std::size_t y) const { return p0_[y] > 0.0 || p1_[y] > 0.0; }

  /// p1/p0, +inf when p0 = 0 < p1. Undefined (NaN) outside the support.
  double likelihood_ratio(std::size_t y) const;

  friend bool operator==(const ConditionalPmf&, const ConditionalPmf&) = default;

 private:
  std::vector<double> p0_;
  std::vector<double> p1_;
};

namespace detail {
// Unchecked belief update used in the hot loops.
inline double posterior(double pi, double ratio) noexcept {
  if (pi <= 0.0) return 0.0;
  if (pi >= 1.0 || ratio == kInf) return 1.0;
  if (ratio <= 0.0) return 0.0;
  return 1.0 / (1.0 + (1.0 - pi) / (ratio * pi));
}
}  // namespace detail

/// Bayes update of pi_prev by a likelihood ratio (which may be +inf).
/// Throws std::invalid_argument for negative or NaN ratios.
Belief posterior_update(Belief pi_prev, double likelihood_ratio);

/// Predictive distribution of the next feature: p1[y] pi + p0[y] (1 - pi).
std::vector<double> evidence_pmf(const ConditionalPmf& model, Belief pi_prev);

struct EstimatedPmf {
  ConditionalPmf pmf;
  std::vector<double> edges;  // L + 1 equal-width edges over [min, max]
};

struct LabeledScore {
  double score;
  int label;
};

/// Bin index of a raw score for the given edges; the last bin is right-closed
/// and scores outside the edge range are clamped into the end bins.
std::size_t bin_of(double score, std::span<const double> edges);

/// Equal-width histogram estimate with add-one smoothing per bin.
/// Throws std::invalid_argument when either label is missing or bins < 2.
EstimatedPmf estimate_pmf(std::span<const LabeledScore> samples, std::size_t bins);

struct OperatingPoint {
  std::size_t threshold_bin;  // declare positive iff y >= threshold_bin
  double tpr;
  double fpr;
  std::optional<double> precision;  // absent when no mass is declared positive
  double recall;
};

/// One operating point for every threshold bin 0..L.
std::vector<OperatingPoint> roc_pr(const ConditionalPmf& model, Belief prior);

}  // namespace cascade
