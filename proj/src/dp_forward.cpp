#include <algorithm>
#include <optional>
#include <vector>

#include "cascade/system.hpp"
#include "dp_detail.hpp"

namespace cascade {

namespace {

// Update ratios always come from the least-favorable models; the generating
// masses come from whichever measure is being evaluated.
struct Transition {
  detail::Kernel update;
  std::vector<double> g0;
  std::vector<double> g1;

  Transition(const StageModel& s, Measure m) : update(s.robust) {
    const ConditionalPmf& gen = m == Measure::Robust ? s.robust : s.nominal;
    for (std::size_t y : update.bins) {
      g0.push_back(gen.p0(y));
      g1.push_back(gen.p1(y));
    }
  }
};

struct Mass {
  std::vector<double> m0;
  std::vector<double> m1;
  explicit Mass(std::size_t n = 0) : m0(n, 0.0), m1(n, 0.0) {}
};

void split(std::vector<double>& v, Grid::Location loc, double mass) {
  if (loc.weight == 0.0) {
    v[loc.index] += mass;
    return;
  }
  v[loc.index] += (1.0 - loc.weight) * mass;
  v[loc.index + 1] += loc.weight * mass;
}

void split2(std::vector<double>& v, std::size_t cols, Grid::Location r, Grid::Location c,
            double mass) {
  const double wr[2] = {1.0 - r.weight, r.weight};
  const double wc[2] = {1.0 - c.weight, c.weight};
  for (int dr = 0; dr < 2; ++dr) {
    if (wr[dr] == 0.0) continue;
    for (int dc = 0; dc < 2; ++dc) {
      if (wc[dc] == 0.0) continue;
      v[(r.index + dr) * cols + c.index + dc] += wr[dr] * wc[dc] * mass;
    }
  }
}

void finish(RiskBreakdown& r, double lambda) {
  r.weighted_resource = lambda * r.resource_mJ;
  r.total = r.miss + r.false_alarm + r.weighted_resource;
}

RiskBreakdown eval_primary(const AppConfig& app, const PrimarySolution& sol, Measure measure) {
  const std::size_t K = app.stage_count();
  const Grid& g = sol.tables.grid;
  const PrimaryPolicy& pol = sol.policy;
  RiskBreakdown r;
  r.continue_prob.assign(K, 0.0);
  r.continue_prob[0] = 1.0;
  r.resource_mJ = app.stage(1).cost_mJ;

  Mass cur(g.size());
  {
    const Transition tr(app.stage(1), measure);
    for (std::size_t y = 0; y < tr.update.size(); ++y) {
      const auto loc = g.locate(detail::posterior(app.prior, tr.update.ratio[y]));
      split(cur.m1, loc, app.prior * tr.g1[y]);
      split(cur.m0, loc, (1.0 - app.prior) * tr.g0[y]);
    }
  }
  for (std::size_t i = 1; i <= K; ++i) {
    Mass next(i < K ? g.size() : 0);
    double cont = 0.0;
    const Transition* tr = nullptr;
    std::optional<Transition> storage;
    if (i < K) tr = &storage.emplace(app.stage(i + 1), measure);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double m0 = cur.m0[k];
      const double m1 = cur.m1[k];
      if (m0 == 0.0 && m1 == 0.0) continue;
      switch (pol.decide(i, g[k])) {
        case Action::Stop: r.miss += app.miss_cost * m1; break;
        case Action::Positive: r.false_alarm += app.fa_cost * m0; break;
        default: {
          cont += m0 + m1;
          for (std::size_t y = 0; y < tr->update.size(); ++y) {
            const auto loc = g.locate(detail::posterior(g[k], tr->update.ratio[y]));
            split(next.m1, loc, m1 * tr->g1[y]);
            split(next.m0, loc, m0 * tr->g0[y]);
          }
        }
      }
    }
    if (i < K) {
      r.continue_prob[i] = cont;
      r.resource_mJ += app.stage(i + 1).cost_mJ * cont;
    }
    cur = std::move(next);
  }
  finish(r, sol.tables.lambda);
  return r;
}

RiskBreakdown eval_secondary(const SystemModel& sys, const SystemSolution& sol,
                             Measure measure) {
  const AppConfig& app = sys.secondary;
  const AppConfig& prim = sys.primary;
  const std::size_t K = app.stage_count();
  const SecondaryPolicy& pol = sol.secondary.policy;
  const PrimaryPolicy& pol1 = sol.primary.policy;
  const Grid& g2 = sol.secondary.tables.grid;
  const Grid& g1 = sol.secondary.tables.primary_grid;
  const std::size_t M2 = g2.size();
  const std::size_t M1 = g1.size();
  const double cm = app.miss_cost;
  const double ca = app.fa_cost;

  RiskBreakdown r;
  r.continue_prob.assign(K, 0.0);

  Mass shared_mass(M2 * M1);  // primary running, secondary on the shared route
  Mass own_mass(M2);          // secondary on its own route

  auto spread_shared = [&](std::size_t stage, double x2, double x1, double m0, double m1,
                           Mass& out) {
    const Transition tr(sys.shared[stage - 1], measure);
    const auto& pm = prim.stage(stage).robust;
    for (std::size_t y = 0; y < tr.update.size(); ++y) {
      const auto rl = g2.locate(detail::posterior(x2, tr.update.ratio[y]));
      const auto cl = g1.locate(detail::posterior(x1, pm.likelihood_ratio(tr.update.bins[y])));
      split2(out.m1, M1, rl, cl, m1 * tr.g1[y]);
      split2(out.m0, M1, rl, cl, m0 * tr.g0[y]);
    }
  };
  auto spread_own = [&](std::size_t stage, double x2, double m0, double m1, Mass& out) {
    const Transition tr(app.stage(stage), measure);
    for (std::size_t y = 0; y < tr.update.size(); ++y) {
      const auto loc = g2.locate(detail::posterior(x2, tr.update.ratio[y]));
      split(out.m1, loc, m1 * tr.g1[y]);
      split(out.m0, loc, m0 * tr.g0[y]);
    }
  };

  if (pol.stage0 == Action::Primary) {
    spread_shared(1, app.prior, prim.prior, 1.0 - app.prior, app.prior, shared_mass);
  } else {
    r.continue_prob[0] = 1.0;
    r.resource_mJ += app.stage(1).cost_mJ;
    spread_own(1, app.prior, 1.0 - app.prior, app.prior, own_mass);
  }

  for (std::size_t i = 1; i <= K; ++i) {
    const bool last = i == K;
    Mass next_shared(last ? 0 : M2 * M1);
    Mass next_own(last ? 0 : M2);
    double own_paid = 0.0;

    auto apply = [&](Action act, double x2, double x1, double m0, double m1) {
      switch (act) {
        case Action::Stop: r.miss += cm * m1; break;
        case Action::Positive: r.false_alarm += ca * m0; break;
        case Action::Primary: spread_shared(i + 1, x2, x1, m0, m1, next_shared); break;
        case Action::Secondary:
          own_paid += m0 + m1;
          spread_own(i + 1, x2, m0, m1, next_own);
          break;
      }
    };

    for (std::size_t a = 0; a < M2; ++a) {
      for (std::size_t j = 0; j < M1; ++j) {
        const std::size_t idx = a * M1 + j;
        const double m0 = shared_mass.m0[idx];
        const double m1 = shared_mass.m1[idx];
        if (m0 == 0.0 && m1 == 0.0) continue;
        Action act;
        if (last) act = pol.decide_without(i, g2[a]);
        else if (pol1.decide(i, g1[j]) == Action::Primary) act = pol.decide_with(i, g2[a], g1[j]);
        else act = pol.decide_without(i, g2[a]);
        apply(act, g2[a], g1[j], m0, m1);
      }
      const double m0 = own_mass.m0[a];
      const double m1 = own_mass.m1[a];
      if (m0 == 0.0 && m1 == 0.0) continue;
      apply(pol.decide_without(i, g2[a]), g2[a], 0.0, m0, m1);
    }
    if (!last) {
      r.continue_prob[i] = own_paid;
      r.resource_mJ += app.stage(i + 1).cost_mJ * own_paid;
    }
    shared_mass = std::move(next_shared);
    own_mass = std::move(next_own);
  }
  finish(r, sol.secondary.tables.lambda);
  return r;
}

}  // namespace

SystemRisk eval_policy_risk(const SystemModel& system, const SystemSolution& solution,
                            Measure measure) {
  return {eval_primary(system.primary, solution.primary, measure),
          eval_secondary(system, solution, measure)};
}

}  // namespace cascade
