#include "cascade/sim.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <thread>

#include "cascade/rng.hpp"
#include "dp_detail.hpp"

namespace cascade {

namespace {

struct StageDraw {
  std::array<DiscreteSampler, 2> sampler;  // indexed by target value
  std::vector<double> ratio;               // least-favorable ratio per bin
};

StageDraw make_draw(const StageModel& s) {
  StageDraw d;
  d.sampler[0] = DiscreteSampler(s.nominal.p0());
  d.sampler[1] = DiscreteSampler(s.nominal.p1());
  d.ratio.resize(s.robust.bins());
  for (std::size_t y = 0; y < s.robust.bins(); ++y)
    d.ratio[y] = s.robust.in_support(y) ? s.robust.likelihood_ratio(y) : 1.0;
  return d;
}

struct Context {
  const SystemModel& sys;
  const SystemSolution& sol;
  std::vector<StageDraw> primary;    // stage i at [i - 1]
  std::vector<StageDraw> secondary;
  std::vector<std::vector<double>> shared_ratio;

  Context(const SystemModel& s, const SystemSolution& so) : sys(s), sol(so) {
    for (std::size_t i = 1; i <= s.stage_count(); ++i) {
      primary.push_back(make_draw(s.primary.stage(i)));
      secondary.push_back(make_draw(s.secondary.stage(i)));
      shared_ratio.push_back(make_draw(s.shared[i - 1]).ratio);
    }
  }
};

TrialOutcome execute(const Context& c, std::uint64_t seed, std::uint64_t trial) {
  const SystemModel& sys = c.sys;
  const std::size_t K = sys.stage_count();
  const PrimaryPolicy& pol1 = c.sol.primary.policy;
  const SecondaryPolicy& pol2 = c.sol.secondary.policy;
  CounterRng rng(seed, trial);

  TrialOutcome o;
  o.trial = trial;
  o.x1 = rng.bernoulli(sys.primary.prior) ? 1 : 0;
  o.x2 = sys.coupling == Coupling::Twin ? o.x1 : (rng.bernoulli(sys.secondary.prior) ? 1 : 0);

  // Primary runs first; the secondary only ever reads features it extracted.
  std::vector<std::size_t> y1(K + 1, 0);
  std::vector<double> belief1(K + 1, sys.primary.prior);
  o.actions1.push_back(Action::Primary);
  o.energy1_mJ = sys.primary.stage(1).cost_mJ;
  double pi = sys.primary.prior;
  for (std::size_t i = 1; i <= K; ++i) {
    const StageDraw& d = c.primary[i - 1];
    y1[i] = d.sampler[o.x1](rng);
    pi = detail::posterior(pi, d.ratio[y1[i]]);
    belief1[i] = pi;
    const Action a = pol1.decide(i, pi);
    o.actions1.push_back(a);
    if (a != Action::Primary) {
      o.xhat1 = a == Action::Positive ? 1 : 0;
      o.stop1 = i;
      break;
    }
    o.energy1_mJ += sys.primary.stage(i + 1).cost_mJ;
  }

  double pi2 = sys.secondary.prior;
  bool sharing = true;
  Action act = pol2.stage0;
  o.actions2.push_back(act);
  for (std::size_t i = 1; i <= K; ++i) {
    if (act == Action::Primary) {
      pi2 = detail::posterior(pi2, c.shared_ratio[i - 1][y1[i]]);
    } else {
      const StageDraw& d = c.secondary[i - 1];
      pi2 = detail::posterior(pi2, d.ratio[d.sampler[o.x2](rng)]);
      o.energy2_mJ += sys.secondary.stage(i).cost_mJ;
      sharing = false;
    }
    const bool avail = i < K && sharing && o.actions1.size() > i &&
                       o.actions1[i] == Action::Primary;
    act = avail ? pol2.decide_with(i, pi2, belief1[i]) : pol2.decide_without(i, pi2);
    o.actions2.push_back(act);
    if (act == Action::Stop || act == Action::Positive) {
      o.xhat2 = act == Action::Positive ? 1 : 0;
      o.stop2 = i;
      break;
    }
  }
  return o;
}

// Welford accumulators merged pairwise (Chan et al.), so the reduction tree
// and therefore the result do not depend on thread scheduling.
constexpr std::size_t kQuantities = 9;

struct Moments {
  double n = 0.0;
  std::array<double, kQuantities> mean{};
  std::array<double, kQuantities> m2{};

  void add(const std::array<double, kQuantities>& x) {
    n += 1.0;
    for (std::size_t q = 0; q < kQuantities; ++q) {
      const double delta = x[q] - mean[q];
      mean[q] += delta / n;
      m2[q] += delta * (x[q] - mean[q]);
    }
  }

  static Moments merge(const Moments& a, const Moments& b) {
    if (a.n == 0.0) return b;
    if (b.n == 0.0) return a;
    Moments r;
    r.n = a.n + b.n;
    for (std::size_t q = 0; q < kQuantities; ++q) {
      const double delta = b.mean[q] - a.mean[q];
      r.mean[q] = a.mean[q] + delta * (b.n / r.n);
      r.m2[q] = a.m2[q] + b.m2[q] + delta * delta * (a.n * b.n / r.n);
    }
    return r;
  }

  Estimate estimate(std::size_t q) const {
    Estimate e;
    e.mean = mean[q];
    e.stderr_ = n > 1.0 ? std::sqrt(m2[q] / (n - 1.0) / n) : 0.0;
    return e;
  }
};

Moments reduce(std::vector<Moments>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return Moments::merge(reduce(parts, lo, mid), reduce(parts, mid, hi));
}

constexpr std::uint64_t kChunk = 8192;

}  // namespace

TrialOutcome run_trial(const SystemModel& system, const SystemSolution& solution,
                       std::uint64_t seed, std::uint64_t trial) {
  const Context c(system, solution);
  return execute(c, seed, trial);
}

SimResult simulate(const SystemModel& system, const SystemSolution& solution,
                   const SimOptions& options) {
  system.validate();
  const Context c(system, solution);
  const double lambda = solution.lambda;
  const double cm1 = system.primary.miss_cost, ca1 = system.primary.fa_cost;
  const double cm2 = system.secondary.miss_cost, ca2 = system.secondary.fa_cost;

  const std::uint64_t n = std::max<std::uint64_t>(options.trials, 1);
  const std::size_t chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
  std::vector<Moments> parts(chunks);
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t k = next++; k < chunks; k = next++) {
      Moments m;
      const std::uint64_t end = std::min<std::uint64_t>(n, (k + 1) * kChunk);
      for (std::uint64_t t = k * kChunk; t < end; ++t) {
        const TrialOutcome o = execute(c, options.seed, t);
        const double miss1 = (o.x1 == 1 && o.xhat1 == 0) ? cm1 : 0.0;
        const double fa1 = (o.x1 == 0 && o.xhat1 == 1) ? ca1 : 0.0;
        const double miss2 = (o.x2 == 1 && o.xhat2 == 0) ? cm2 : 0.0;
        const double fa2 = (o.x2 == 0 && o.xhat2 == 1) ? ca2 : 0.0;
        m.add({miss1, fa1, o.energy1_mJ, miss1 + fa1 + lambda * o.energy1_mJ, miss2, fa2,
               o.energy2_mJ, miss2 + fa2 + lambda * o.energy2_mJ,
               o.energy1_mJ + o.energy2_mJ});
      }
      parts[k] = m;
    }
  };

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  const Moments all = reduce(parts, 0, parts.size());

  SimResult r;
  r.trials = n;
  r.seed = options.seed;
  r.lambda = lambda;
  r.primary = {all.estimate(0), all.estimate(1), all.estimate(2), all.estimate(3)};
  r.secondary = {all.estimate(4), all.estimate(5), all.estimate(6), all.estimate(7)};
  r.energy_mJ = all.estimate(8);
  return r;
}

TwinReport twin_experiment(const AppConfig& base, double lambda, std::span<const double> priors,
                           const Grid& grid, const SolveOptions& options) {
  SolveOptions ablated = options;
  ablated.allow_sharing = false;

  std::vector<AppConfig> apps;
  std::vector<PrimarySolution> primaries;
  std::vector<RiskBreakdown> primary_risk;
  for (double p : priors) {
    AppConfig a = base;
    a.prior = p;
    primaries.push_back(optimize_primary(a, lambda, grid, options));
    SystemModel sys = make_twin(a);
    SystemSolution s{lambda, primaries.back(), {}};
    s.secondary = optimize_secondary(sys.primary, sys.secondary, sys.shared,
                                     s.primary.policy, lambda, grid, grid, ablated);
    primary_risk.push_back(eval_policy_risk(sys, s).primary);
    apps.push_back(std::move(a));
  }

  TwinReport report;
  report.lambda = lambda;
  report.grid_size = grid.size();
  for (std::size_t row = 0; row < priors.size(); ++row) {
    TwinRow r;
    r.prior = priors[row];
    r.E1 = primary_risk[row].resource_mJ;
    r.miss1 = primary_risk[row].miss;
    r.fa1 = primary_risk[row].false_alarm;
    r.risk1 = primaries[row].tables.v0;
    const double w = 1.0 / static_cast<double>(priors.size());
    for (std::size_t q = 0; q < priors.size(); ++q) {
      SystemModel sys = make_twin(apps[q]);
      sys.secondary.prior = priors[row];
      SystemSolution s{lambda, primaries[q], {}};
      s.secondary = optimize_secondary(sys.primary, sys.secondary, sys.shared, s.primary.policy,
                                       lambda, grid, grid, options);
      const RiskBreakdown sh = eval_policy_risk(sys, s).secondary;
      SystemSolution a{lambda, primaries[q], {}};
      a.secondary = optimize_secondary(sys.primary, sys.secondary, sys.shared, a.primary.policy,
                                       lambda, grid, grid, ablated);
      const RiskBreakdown ab = eval_policy_risk(sys, a).secondary;
      r.E2 += w * sh.resource_mJ;
      r.detect2_shared += w * (sh.miss + sh.false_alarm);
      r.risk2_shared += w * s.secondary.tables.v0;
      r.E2_ablated += w * ab.resource_mJ;
      r.detect2_ablated += w * (ab.miss + ab.false_alarm);
      r.risk2_ablated += w * a.secondary.tables.v0;
    }
    r.saving = r.E2 > 0.0 ? r.E1 / r.E2 : kInf;
    report.rows.push_back(r);
  }
  return report;
}

}  // namespace cascade
