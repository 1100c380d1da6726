#include <algorithm>
#include <cmath>
#include <string>

#include "cascade/errors.hpp"
#include "cascade/sim.hpp"
#include "dp_detail.hpp"

namespace cascade {

namespace {

using detail::Kernel;
using detail::posterior;

void check_limits(const SystemModel& sys, const OracleLimits& limits) {
  sys.validate();
  if (sys.stage_count() > limits.max_stages)
    throw EnumerationCapError("instance has " + std::to_string(sys.stage_count()) +
                              " stages; the enumeration cap is " +
                              std::to_string(limits.max_stages));
  auto bins_ok = [&](const AppConfig& a) {
    for (const auto& s : a.stages)
      if (s.nominal.bins() > limits.max_bins) return false;
    return true;
  };
  if (!bins_ok(sys.primary) || !bins_ok(sys.secondary))
    throw EnumerationCapError("feature alphabet exceeds the enumeration cap of " +
                              std::to_string(limits.max_bins) + " bins");
}

// Per-stage kernels of the whole system, stage i at [i - 1].
struct Kernels {
  std::vector<Kernel> primary;
  std::vector<Kernel> own;
  std::vector<Kernel> shared;
  std::vector<std::vector<double>> shared_col_ratio;  // primary ratio of each shared bin

  explicit Kernels(const SystemModel& s) {
    for (std::size_t i = 1; i <= s.stage_count(); ++i) {
      primary.emplace_back(s.primary.stage(i).robust);
      own.emplace_back(s.secondary.stage(i).robust);
      shared.emplace_back(s.shared[i - 1].robust);
      std::vector<double> r;
      for (std::size_t y : shared.back().bins)
        r.push_back(s.primary.stage(i).robust.likelihood_ratio(y));
      shared_col_ratio.push_back(std::move(r));
    }
  }
};

// ----------------------------------------------------- primary enumeration

struct OutcomeNode {
  double belief;
  double m0;
  double m1;
  std::vector<std::size_t> children;
};

struct OutcomeTree {
  std::vector<OutcomeNode> nodes;
  std::vector<std::size_t> roots;  // stage-1 nodes
  std::vector<std::size_t> stage;  // stage of each node
};

OutcomeTree build_primary_tree(const AppConfig& app, const std::vector<Kernel>& k) {
  OutcomeTree t;
  const std::size_t K = app.stage_count();
  auto grow = [&](auto&& self, std::size_t i, double pi, double m0, double m1) -> std::size_t {
    const std::size_t id = t.nodes.size();
    t.nodes.push_back({pi, m0, m1, {}});
    t.stage.push_back(i);
    if (i < K) {
      const Kernel& kk = k[i];
      for (std::size_t y = 0; y < kk.size(); ++y) {
        const std::size_t c = self(self, i + 1, posterior(pi, kk.ratio[y]), m0 * kk.p0[y],
                                   m1 * kk.p1[y]);
        t.nodes[id].children.push_back(c);
      }
    }
    return id;
  };
  const Kernel& k1 = k[0];
  for (std::size_t y = 0; y < k1.size(); ++y)
    t.roots.push_back(grow(grow, 1, posterior(app.prior, k1.ratio[y]),
                           (1.0 - app.prior) * k1.p0[y], app.prior * k1.p1[y]));
  return t;
}

double threshold_risk(const AppConfig& app, const OutcomeTree& t, std::span<const double> tau,
                      double lambda) {
  const std::size_t K = app.stage_count();
  auto cost = [&](auto&& self, std::size_t id) -> double {
    const OutcomeNode& n = t.nodes[id];
    const std::size_t i = t.stage[id];
    if (i == K) return n.belief >= tau[K] ? app.fa_cost * n.m0 : app.miss_cost * n.m1;
    if (n.belief < tau[i]) return app.miss_cost * n.m1;
    double c = lambda * app.stage(i + 1).cost_mJ * (n.m0 + n.m1);
    for (std::size_t ch : n.children) c += self(self, ch);
    return c;
  };
  double r = lambda * app.stage(1).cost_mJ;
  for (std::size_t root : t.roots) r += cost(cost, root);
  return r;
}

// ------------------------------------------------------- belief-tree search

struct TreeSearch {
  const SystemModel& sys;
  const Kernels& k;
  const PrimaryRule& rule;
  double lambda;
  bool sharing_allowed;
  bool positive_allowed;
  std::uint64_t budget;
  std::uint64_t visited = 0;

  void tick() {
    if (++visited > budget)
      throw EnumerationCapError("decision tree exceeds the enumeration cap");
  }

  double primary(std::size_t i, double pi) {
    tick();
    const AppConfig& a = sys.primary;
    const double stop = a.miss_cost * pi;
    const double pos = a.fa_cost * (1.0 - pi);
    if (i == sys.stage_count()) return std::min(stop, pos);
    const Kernel& kk = k.primary[i];
    double cont = lambda * a.stage(i + 1).cost_mJ;
    for (std::size_t y = 0; y < kk.size(); ++y) {
      const double w = kk.evidence(y, pi);
      if (w != 0.0) cont += w * primary(i + 1, posterior(pi, kk.ratio[y]));
    }
    double best = std::min(stop, cont);
    if (positive_allowed) best = std::min(best, pos);
    return best;
  }

  double own_branch(std::size_t next, double pi2) {
    const Kernel& kk = k.own[next - 1];
    double c = lambda * sys.secondary.stage(next).cost_mJ;
    for (std::size_t y = 0; y < kk.size(); ++y) {
      const double w = kk.evidence(y, pi2);
      if (w != 0.0) c += w * secondary(next, posterior(pi2, kk.ratio[y]), 0.0, false);
    }
    return c;
  }

  double shared_branch(std::size_t next, double pi2, double pi1) {
    const Kernel& kk = k.shared[next - 1];
    const auto& col = k.shared_col_ratio[next - 1];
    double c = 0.0;
    for (std::size_t y = 0; y < kk.size(); ++y) {
      const double w = kk.evidence(y, pi2);
      if (w != 0.0)
        c += w * secondary(next, posterior(pi2, kk.ratio[y]), posterior(pi1, col[y]), true);
    }
    return c;
  }

  double secondary(std::size_t i, double pi2, double pi1, bool sharing) {
    tick();
    const AppConfig& a = sys.secondary;
    const double stop = a.miss_cost * pi2;
    const double pos = a.fa_cost * (1.0 - pi2);
    if (i == sys.stage_count()) return std::min(stop, pos);
    double best = std::min(stop, own_branch(i + 1, pi2));
    if (sharing && sharing_allowed && rule(i, pi1) == Action::Primary)
      best = std::min(best, shared_branch(i + 1, pi2, pi1));
    if (positive_allowed) best = std::min(best, pos);
    return best;
  }

  double secondary_root() {
    double best = own_branch(1, sys.secondary.prior);
    if (sharing_allowed)
      best = std::min(best, shared_branch(1, sys.secondary.prior, sys.primary.prior));
    return best;
  }

  double primary_root() {
    const Kernel& kk = k.primary[0];
    const double pi = sys.primary.prior;
    double c = lambda * sys.primary.stage(1).cost_mJ;
    for (std::size_t y = 0; y < kk.size(); ++y) {
      const double w = kk.evidence(y, pi);
      if (w != 0.0) c += w * primary(1, posterior(pi, kk.ratio[y]));
    }
    return c;
  }
};

// ------------------------------------------------ explicit secondary policies

struct HistoryNode {
  std::size_t stage;
  std::vector<Action> actions;
  // Per action: (p0, p1, child) triples; empty for terminal actions.
  std::vector<std::vector<std::tuple<double, double, std::size_t>>> edges;
};

}  // namespace

std::vector<std::vector<double>> reachable_beliefs(
    double prior, std::span<const std::span<const StageModel>> families) {
  const std::size_t K = families.empty() ? 0 : families[0].size();
  std::vector<std::vector<double>> out(K + 1);
  out[0] = {prior};
  for (std::size_t i = 1; i <= K; ++i) {
    std::vector<double>& cur = out[i];
    for (const auto& fam : families) {
      const Kernel kk(fam[i - 1].robust);
      for (double b : out[i - 1])
        for (double r : kk.ratio) cur.push_back(posterior(b, r));
    }
    std::sort(cur.begin(), cur.end());
    cur.erase(std::unique(cur.begin(), cur.end()), cur.end());
  }
  return out;
}

ExactGrids reachable_grids(const SystemModel& system, const SolveOptions& options) {
  auto flatten = [](const std::vector<std::vector<double>>& sets) {
    std::vector<double> pts;
    for (const auto& s : sets) pts.insert(pts.end(), s.begin(), s.end());
    return Grid::from_points(std::move(pts));
  };
  const std::span<const StageModel> prim(system.primary.stages);
  const std::span<const StageModel> own(system.secondary.stages);
  const std::span<const StageModel> shared(system.shared);
  const std::span<const StageModel> f1[] = {prim};
  ExactGrids g;
  g.primary = flatten(reachable_beliefs(system.primary.prior, f1));
  if (options.allow_sharing) {
    const std::span<const StageModel> f2[] = {own, shared};
    g.secondary = flatten(reachable_beliefs(system.secondary.prior, f2));
  } else {
    const std::span<const StageModel> f2[] = {own};
    g.secondary = flatten(reachable_beliefs(system.secondary.prior, f2));
  }
  return g;
}

OracleResult brute_force_optimum(const SystemModel& system, double lambda,
                                 const PrimaryRule& primary_rule, const SolveOptions& options,
                                 const OracleLimits& limits) {
  check_limits(system, limits);
  const AppConfig& app = system.primary;
  const std::size_t K = app.stage_count();
  const Kernels k(system);

  const std::span<const StageModel> prim(app.stages);
  const std::span<const StageModel> fam[] = {prim};
  const auto reach = reachable_beliefs(app.prior, fam);
  std::vector<std::vector<double>> choices(K + 1);
  std::uint64_t count = 1;
  for (std::size_t i = 1; i <= K; ++i) {
    choices[i] = reach[i];
    choices[i].push_back(kInf);
    count *= choices[i].size();
    if (count > limits.max_policies)
      throw EnumerationCapError("primary threshold policies exceed the enumeration cap");
  }

  const OutcomeTree tree = build_primary_tree(app, k.primary);
  OracleResult r;
  r.primary_risk = kInf;
  r.primary_policies = count;
  std::vector<std::size_t> idx(K + 1, 0);
  std::vector<double> tau(K + 1, 0.0);
  for (std::uint64_t n = 0; n < count; ++n) {
    for (std::size_t i = 1; i <= K; ++i) tau[i] = choices[i][idx[i]];
    const double risk = threshold_risk(app, tree, tau, lambda);
    if (risk < r.primary_risk) {
      r.primary_risk = risk;
      r.primary_thresholds = tau;
    }
    for (std::size_t i = K; i >= 1; --i) {
      if (++idx[i] < choices[i].size()) break;
      idx[i] = 0;
    }
  }

  TreeSearch s{system, k, primary_rule, lambda, options.allow_sharing, false,
               limits.max_policies};
  r.secondary_risk = s.secondary_root();
  return r;
}

AugmentedResult augmented_optimum(const SystemModel& system, double lambda,
                                  const PrimaryRule& primary_rule, const SolveOptions& options,
                                  const OracleLimits& limits) {
  check_limits(system, limits);
  const Kernels k(system);
  TreeSearch s{system, k, primary_rule, lambda, options.allow_sharing, true,
               limits.max_policies};
  AugmentedResult r;
  r.primary_risk = s.primary_root();
  r.secondary_risk = s.secondary_root();
  return r;
}

double enumerate_secondary_policies(const SystemModel& system, double lambda,
                                    const PrimaryRule& primary_rule,
                                    const SolveOptions& options, const OracleLimits& limits) {
  check_limits(system, limits);
  const Kernels k(system);
  const AppConfig& app = system.secondary;
  const std::size_t K = app.stage_count();

  std::vector<HistoryNode> nodes;
  auto grow = [&](auto&& self, std::size_t i, double pi2, double pi1, bool sharing)
      -> std::size_t {
    const std::size_t id = nodes.size();
    nodes.push_back({i, {}, {}});
    std::vector<Action> acts;
    if (i == K) {
      acts = {Action::Stop, Action::Positive};
    } else {
      if (i > 0) acts.push_back(Action::Stop);
      acts.push_back(Action::Secondary);
      const bool avail = i == 0 || (sharing && primary_rule(i, pi1) == Action::Primary);
      if (options.allow_sharing && avail) acts.push_back(Action::Primary);
      if (i > 0 && options.allow_early_positive) acts.push_back(Action::Positive);
    }
    std::vector<std::vector<std::tuple<double, double, std::size_t>>> edges(acts.size());
    for (std::size_t a = 0; a < acts.size(); ++a) {
      if (acts[a] == Action::Secondary) {
        const Kernel& kk = k.own[i];
        for (std::size_t y = 0; y < kk.size(); ++y)
          edges[a].emplace_back(kk.p0[y], kk.p1[y],
                                self(self, i + 1, posterior(pi2, kk.ratio[y]), 0.0, false));
      } else if (acts[a] == Action::Primary) {
        const Kernel& kk = k.shared[i];
        for (std::size_t y = 0; y < kk.size(); ++y)
          edges[a].emplace_back(kk.p0[y], kk.p1[y],
                                self(self, i + 1, posterior(pi2, kk.ratio[y]),
                                     posterior(pi1, k.shared_col_ratio[i][y]), true));
      }
    }
    nodes[id].actions = std::move(acts);
    nodes[id].edges = std::move(edges);
    return id;
  };
  grow(grow, 0, app.prior, system.primary.prior, true);

  std::uint64_t count = 1;
  for (const auto& n : nodes) {
    count *= n.actions.size();
    if (count > limits.max_policies)
      throw EnumerationCapError("secondary policies exceed the enumeration cap");
  }

  std::vector<std::size_t> choice(nodes.size(), 0);
  auto risk = [&](auto&& self, std::size_t id, double m0, double m1) -> double {
    const HistoryNode& n = nodes[id];
    const Action a = n.actions[choice[id]];
    switch (a) {
      case Action::Stop: return app.miss_cost * m1;
      case Action::Positive: return app.fa_cost * m0;
      default: break;
    }
    double c = a == Action::Secondary ? lambda * app.stage(n.stage + 1).cost_mJ * (m0 + m1) : 0.0;
    for (const auto& [p0, p1, child] : n.edges[choice[id]])
      c += self(self, child, m0 * p0, m1 * p1);
    return c;
  };

  double best = kInf;
  for (std::uint64_t it = 0; it < count; ++it) {
    best = std::min(best, risk(risk, 0, 1.0 - app.prior, app.prior));
    for (std::size_t j = nodes.size(); j-- > 0;) {
      if (++choice[j] < nodes[j].actions.size()) break;
      choice[j] = 0;
    }
  }
  return best;
}

SystemRisk exact_policy_risk(const SystemModel& system, const SystemSolution& solution,
                             Measure measure, const OracleLimits& limits) {
  system.validate();
  const std::size_t K = system.stage_count();
  const AppConfig& p1 = system.primary;
  const AppConfig& p2 = system.secondary;
  const PrimaryPolicy& pol1 = solution.primary.policy;
  const SecondaryPolicy& pol2 = solution.secondary.policy;
  const double lambda = solution.lambda;

  // Generating masses per support bin of the update kernel.
  struct Gen {
    Kernel update;
    std::vector<double> g0, g1;
    Gen(const StageModel& s, Measure m) : update(s.robust) {
      const ConditionalPmf& src = m == Measure::Robust ? s.robust : s.nominal;
      for (std::size_t y : update.bins) {
        g0.push_back(src.p0(y));
        g1.push_back(src.p1(y));
      }
    }
  };
  std::vector<Gen> prim, own, shared;
  std::vector<std::vector<double>> col;
  for (std::size_t i = 1; i <= K; ++i) {
    prim.emplace_back(p1.stage(i), measure);
    own.emplace_back(p2.stage(i), measure);
    shared.emplace_back(system.shared[i - 1], measure);
    std::vector<double> r;
    for (std::size_t y : shared.back().update.bins) r.push_back(p1.stage(i).robust.likelihood_ratio(y));
    col.push_back(std::move(r));
  }
  std::uint64_t visited = 0;
  auto tick = [&] {
    if (++visited > limits.max_policies)
      throw EnumerationCapError("outcome enumeration exceeds the cap");
  };

  SystemRisk out;
  RiskBreakdown& r1 = out.primary;
  r1.continue_prob.assign(K, 0.0);
  r1.continue_prob[0] = 1.0;
  r1.resource_mJ = p1.stage(1).cost_mJ;
  auto walk1 = [&](auto&& self, std::size_t i, double pi, double m0, double m1) -> void {
    tick();
    switch (pol1.decide(i, pi)) {
      case Action::Stop: r1.miss += p1.miss_cost * m1; return;
      case Action::Positive: r1.false_alarm += p1.fa_cost * m0; return;
      default: break;
    }
    r1.continue_prob[i] += m0 + m1;
    r1.resource_mJ += p1.stage(i + 1).cost_mJ * (m0 + m1);
    const Gen& g = prim[i];
    for (std::size_t y = 0; y < g.update.size(); ++y)
      self(self, i + 1, posterior(pi, g.update.ratio[y]), m0 * g.g0[y], m1 * g.g1[y]);
  };
  {
    const Gen& g = prim[0];
    for (std::size_t y = 0; y < g.update.size(); ++y)
      walk1(walk1, 1, posterior(p1.prior, g.update.ratio[y]), (1.0 - p1.prior) * g.g0[y],
            p1.prior * g.g1[y]);
  }
  r1.weighted_resource = lambda * r1.resource_mJ;
  r1.total = r1.miss + r1.false_alarm + r1.weighted_resource;

  RiskBreakdown& r2 = out.secondary;
  r2.continue_prob.assign(K, 0.0);
  // `act` is the feature chosen for stage i; pi2/pi1 are the stage i-1 beliefs.
  auto walk2 = [&](auto&& self, std::size_t i, Action act, double pi2, double pi1, bool sharing,
                   double m0, double m1) -> void {
    tick();
    if (act == Action::Stop) { r2.miss += p2.miss_cost * m1; return; }
    if (act == Action::Positive) { r2.false_alarm += p2.fa_cost * m0; return; }
    auto next = [&](double q2, double q1, bool sh, double n0, double n1) {
      Action a;
      if (i == K) a = pol2.decide_without(K, q2);
      else if (sh && pol1.decide(i, q1) == Action::Primary) a = pol2.decide_with(i, q2, q1);
      else a = pol2.decide_without(i, q2);
      if (i == K) {
        if (a == Action::Positive) r2.false_alarm += p2.fa_cost * n0;
        else r2.miss += p2.miss_cost * n1;
        return;
      }
      self(self, i + 1, a, q2, q1, sh, n0, n1);
    };
    if (act == Action::Primary) {
      const Gen& g = shared[i - 1];
      for (std::size_t y = 0; y < g.update.size(); ++y)
        next(posterior(pi2, g.update.ratio[y]), posterior(pi1, col[i - 1][y]), sharing,
             m0 * g.g0[y], m1 * g.g1[y]);
    } else {
      r2.continue_prob[i - 1] += m0 + m1;
      r2.resource_mJ += p2.stage(i).cost_mJ * (m0 + m1);
      const Gen& g = own[i - 1];
      for (std::size_t y = 0; y < g.update.size(); ++y)
        next(posterior(pi2, g.update.ratio[y]), 0.0, false, m0 * g.g0[y], m1 * g.g1[y]);
    }
  };
  walk2(walk2, 1, pol2.stage0, p2.prior, p1.prior, true, 1.0 - p2.prior, p2.prior);
  r2.weighted_resource = lambda * r2.resource_mJ;
  r2.total = r2.miss + r2.false_alarm + r2.weighted_resource;
  return out;
}

}  // namespace cascade
