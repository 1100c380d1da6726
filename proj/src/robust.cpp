#include "cascade/robust.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cascade/errors.hpp"

namespace cascade {

namespace {

constexpr double kRatioFloor = 1e-300;
constexpr double kRatioCeil = 1e300;
constexpr int kBisectionSteps = 200;
constexpr double kResidualTarget = 1e-14;
constexpr double kResidualAccept = 1e-9;

struct Coeffs {
  double a, b;    // 1 - eps0, 1 - eps1
  double v1, w1;  // low branch mixing weights
  double v2, w2;  // high branch mixing weights
  bool low_ok, high_ok;

  explicit Coeffs(const UncertaintyParams& u)
      : a(1.0 - u.eps0),
        b(1.0 - u.eps1),
        v1((u.eps1 + u.nu1) / (1.0 - u.eps1)),
        w1(u.nu0 / (1.0 - u.eps0)),
        v2((u.eps0 + u.nu0) / (1.0 - u.eps0)),
        w2(u.nu1 / (1.0 - u.eps1)),
        low_ok(v1 > 0.0 || w1 > 0.0),
        high_ok(v2 > 0.0 || w2 > 0.0) {}
};

struct BinMass {
  double q0, q1;
};

BinMass transform_bin(double p0, double p1, double ratio, double lo, double hi,
                      const Coeffs& c) {
  if (c.low_ok && ratio < lo) {
    const double q0 = c.a / (c.v1 + c.w1 * lo) * (c.v1 * p0 + c.w1 * p1);
    return {q0, lo * q0};
  }
  if (c.high_ok && ratio > hi) {
    const double q0 = c.a / (c.w2 + c.v2 * hi) * (c.w2 * p0 + c.v2 * p1);
    return {q0, hi * q0};
  }
  return {c.a * p0, c.b * p1};
}

std::pair<double, double> residuals(const ConditionalPmf& m, const Coeffs& c, double lo,
                                    double hi) {
  double s0 = 0.0;
  double s1 = 0.0;
  for (std::size_t y = 0; y < m.bins(); ++y) {
    if (!m.in_support(y)) continue;
    const BinMass q = transform_bin(m.p0(y), m.p1(y), m.likelihood_ratio(y), lo, hi, c);
    s0 += q.q0;
    s1 += q.q1;
  }
  return {s0 - 1.0, s1 - 1.0};
}

double clamp_ratio(double r) { return std::clamp(r, kRatioFloor, kRatioCeil); }

// Root of a monotone function of a positive ratio, bisected in log space.
// `increasing` selects the sign convention of f on [lo, hi].
template <class F>
double bisect_log(F&& f, double lo, double hi, bool increasing) {
  double llo = std::log(clamp_ratio(lo));
  double lhi = std::log(clamp_ratio(hi));
  for (int it = 0; it < kBisectionSteps && lhi - llo > 0.0; ++it) {
    const double mid = 0.5 * (llo + lhi);
    if (mid <= llo || mid >= lhi) break;
    const double v = f(std::exp(mid));
    if (std::abs(v) <= kResidualTarget) return std::exp(mid);
    if ((v < 0.0) == increasing) llo = mid;
    else lhi = mid;
  }
  return std::exp(0.5 * (llo + lhi));
}

}  // namespace

void UncertaintyParams::validate() const {
  for (double v : {eps0, eps1, nu0, nu1})
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("uncertainty parameters must lie in [0,1]");
  if (!(eps0 < 1.0 && eps1 < 1.0))
    throw std::invalid_argument("eps0 and eps1 must be below 1");
}

std::pair<double, double> normalization_residuals(const ConditionalPmf& nominal,
                                                  const UncertaintyParams& u, double lo,
                                                  double hi) {
  u.validate();
  return residuals(nominal, Coeffs(u), lo, hi);
}

Breakpoints solve_breakpoints(const ConditionalPmf& nominal, const UncertaintyParams& u) {
  u.validate();
  double lmin = kInf;
  double lmax = 0.0;
  for (std::size_t y = 0; y < nominal.bins(); ++y) {
    if (!nominal.in_support(y)) continue;
    const double r = nominal.likelihood_ratio(y);
    lmin = std::min(lmin, r);
    lmax = std::max(lmax, r);
  }
  // An uninformative model cannot be made less informative.
  if (u.is_zero() || lmin == lmax) return {lmin, lmax};

  const Coeffs c(u);
  {
    auto [r0, r1] = residuals(nominal, c, lmin, lmax);
    if (std::abs(r0) <= kResidualTarget && std::abs(r1) <= kResidualTarget) return {lmin, lmax};
  }

  // Lower breakpoint for a given upper one: the H1 residual rises with lo.
  auto inner = [&](double hi) {
    if (!c.low_ok) return lmin;
    auto f = [&](double lo) { return residuals(nominal, c, lo, hi).second; };
    const double lo_end = std::max(lmin, kRatioFloor);
    const double hi_end = std::min(hi, kRatioCeil);
    if (lo_end >= hi_end) return lmin;
    if (f(lo_end) >= 0.0) return lmin;
    if (f(hi_end) <= 0.0) return hi;
    return bisect_log(f, lo_end, hi_end, true);
  };

  double hi = lmax;
  if (c.high_ok) {
    // H0 residual along the inner solution falls as the upper breakpoint grows.
    auto g = [&](double h) { return residuals(nominal, c, inner(h), h).first; };
    const double lo_end = std::max(lmin, kRatioFloor);
    const double hi_end = std::min(lmax, kRatioCeil);
    const double g_lo = g(lo_end);
    const double g_hi = g(hi_end);
    if (std::abs(g_hi) <= kResidualTarget) hi = hi_end;
    else if (g_lo < 0.0 || g_hi > 0.0)
      throw SolverError("degenerate uncertainty: no breakpoints normalize both densities");
    else hi = bisect_log(g, lo_end, hi_end, false);
  }
  const double lo = inner(hi);
  auto [r0, r1] = residuals(nominal, c, lo, hi);
  if (!(std::abs(r0) <= kResidualAccept && std::abs(r1) <= kResidualAccept))
    throw SolverError("degenerate uncertainty: breakpoint residuals " + std::to_string(r0) +
                      ", " + std::to_string(r1));
  return {lo, hi};
}

ConditionalPmf robustify(const ConditionalPmf& nominal, const UncertaintyParams& u,
                         const Breakpoints& b) {
  u.validate();
  if (u.is_zero()) return nominal;
  const Coeffs c(u);
  std::vector<double> q0(nominal.bins(), 0.0);
  std::vector<double> q1(nominal.bins(), 0.0);
  for (std::size_t y = 0; y < nominal.bins(); ++y) {
    if (!nominal.in_support(y)) continue;
    const BinMass q =
        transform_bin(nominal.p0(y), nominal.p1(y), nominal.likelihood_ratio(y), b.lo, b.hi, c);
    q0[y] = q.q0;
    q1[y] = q.q1;
  }
  try {
    return ConditionalPmf(std::move(q0), std::move(q1));
  } catch (const std::invalid_argument& e) {
    throw SolverError(std::string("least-favorable densities not normalized: ") + e.what());
  }
}

std::pair<Belief, Belief> posterior_bounds(Belief pi_prev, const Breakpoints& b) {
  return {posterior_update(pi_prev, b.lo), posterior_update(pi_prev, b.hi)};
}

StageModel make_stage(ConditionalPmf nominal, UncertaintyParams u, double cost_mJ,
                      bool final_stage) {
  if (!(cost_mJ >= 0.0) || !std::isfinite(cost_mJ))
    throw std::invalid_argument("stage cost must be finite and nonnegative");
  if (final_stage) u = {};
  StageModel s;
  s.uncertainty = u;
  s.breakpoints = solve_breakpoints(nominal, u);
  s.robust = robustify(nominal, u, s.breakpoints);
  s.nominal = std::move(nominal);
  s.cost_mJ = cost_mJ;
  return s;
}

}  // namespace cascade
