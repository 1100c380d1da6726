#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "test_support.hpp"

using namespace cascade;
using cascade::testing::Gen;

TEST_CASE("posterior update worked values") {
  CHECK(posterior_update(Belief(0.5), 1.0).value() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(posterior_update(Belief(0.1), 9.0).value() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(posterior_update(Belief(0.0), 1e6).value() == 0.0);
  CHECK(posterior_update(Belief(0.0), kInf).value() == 0.0);
  CHECK(posterior_update(Belief(0.3), kInf).value() == 1.0);
  CHECK(posterior_update(Belief(0.3), 0.0).value() == 0.0);
  CHECK(posterior_update(Belief(1.0), 0.5).value() == 1.0);
  CHECK_THROWS_AS(posterior_update(Belief(0.3), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(posterior_update(Belief(0.3), std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(Belief(1.5), std::invalid_argument);
}

TEST_CASE("posterior update is monotone in the ratio") {
  Gen g(11);
  for (int n = 0; n < 500; ++n) {
    const double pi = g.uniform(0.01, 0.99);
    const double a = g.uniform(0.0, 10.0);
    const double b = a + g.uniform(0.0, 10.0);
    CHECK(posterior_update(Belief(pi), a).value() <= posterior_update(Belief(pi), b).value());
    // Odds form: posterior odds = prior odds * ratio.
    const double post = posterior_update(Belief(pi), a).value();
    CHECK(post / (1.0 - post) == doctest::Approx(a * pi / (1.0 - pi)).epsilon(1e-12));
  }
}

TEST_CASE("evidence pmf worked values") {
  const ConditionalPmf m({0.4, 0.6}, {0.2, 0.8});
  CHECK(evidence_pmf(m, Belief(0.25))[0] == doctest::Approx(0.35).epsilon(1e-15));
  const auto at_zero = evidence_pmf(m, Belief(0.0));
  CHECK(at_zero[0] == 0.4);
  CHECK(at_zero[1] == 0.6);
  const ConditionalPmf same({0.1, 0.7, 0.2}, {0.1, 0.7, 0.2});
  const auto e = evidence_pmf(same, Belief(0.37));
  for (std::size_t y = 0; y < 3; ++y) CHECK(e[y] == doctest::Approx(same.p0(y)).epsilon(1e-15));
}

TEST_CASE("martingale: expected posterior equals the prior") {
  Gen g(12);
  for (int n = 0; n < 300; ++n) {
    const std::size_t L = g.integer(2, 8);
    const ConditionalPmf m(testing::random_simplex(g, L, 0.2), testing::random_simplex(g, L, 0.2));
    const double pi = g.uniform();
    const auto ev = evidence_pmf(m, Belief(pi));
    double s = 0.0;
    for (std::size_t y = 0; y < L; ++y) {
      if (ev[y] == 0.0) continue;
      s += ev[y] * posterior_update(Belief(pi), m.likelihood_ratio(y)).value();
    }
    CHECK(std::abs(s - pi) <= 1e-9);
  }
}

TEST_CASE("conditional pmf validation") {
  CHECK_THROWS_AS(ConditionalPmf({1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ConditionalPmf({0.5, 0.5}, {0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(ConditionalPmf({0.5, 0.5}, {0.2, 0.3, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(ConditionalPmf({1.1, -0.1}, {0.5, 0.5}), std::invalid_argument);
  const ConditionalPmf m({0.0, 0.5, 0.5}, {0.5, 0.5, 0.0});
  CHECK(m.likelihood_ratio(0) == kInf);
  CHECK(m.likelihood_ratio(1) == 1.0);
  CHECK(m.likelihood_ratio(2) == 0.0);
}

TEST_CASE("bin_of clamps and closes the last bin") {
  const std::vector<double> edges = {0.0, 1.0, 2.0, 3.0};
  CHECK(bin_of(-5.0, edges) == 0);
  CHECK(bin_of(0.0, edges) == 0);
  CHECK(bin_of(0.999, edges) == 0);
  CHECK(bin_of(1.0, edges) == 1);
  CHECK(bin_of(2.5, edges) == 2);
  CHECK(bin_of(3.0, edges) == 2);
  CHECK(bin_of(42.0, edges) == 2);
}

TEST_CASE("estimate_pmf on separable data") {
  std::vector<LabeledScore> s;
  for (int i = 0; i < 8; ++i) s.push_back({0.0, 0});
  for (int i = 0; i < 18; ++i) s.push_back({1.0, 1});
  const auto est = estimate_pmf(s, 2);
  // Add-one smoothing: (0 + 1) / (n + 2) in the empty bin.
  CHECK(est.pmf.p0(0) == doctest::Approx(9.0 / 10.0));
  CHECK(est.pmf.p0(1) == doctest::Approx(1.0 / 10.0));
  CHECK(est.pmf.p1(0) == doctest::Approx(1.0 / 20.0));
  CHECK(est.pmf.p1(1) == doctest::Approx(19.0 / 20.0));
  CHECK(est.edges.size() == 3);
  CHECK(est.edges.front() == 0.0);
  CHECK(est.edges.back() == 1.0);
}

TEST_CASE("estimate_pmf on interleaved identical scores is uninformative") {
  std::vector<LabeledScore> s;
  for (int i = 0; i < 40; ++i) {
    const double v = (i % 5) * 0.25;
    s.push_back({v, 0});
    s.push_back({v, 1});
  }
  const auto est = estimate_pmf(s, 4);
  for (std::size_t y = 0; y < 4; ++y) CHECK(est.pmf.p0(y) == doctest::Approx(est.pmf.p1(y)));
}

TEST_CASE("estimate_pmf is invariant to increasing affine score maps") {
  Gen g(13);
  std::vector<LabeledScore> s;
  for (int i = 0; i < 400; ++i) {
    const int label = g.coin(0.2) ? 1 : 0;
    s.push_back({g.uniform() + label * 0.7, label});
  }
  const auto base = estimate_pmf(s, 10);
  auto mapped = s;
  for (auto& x : mapped) x.score = 3.0 * x.score - 2.0;
  const auto est = estimate_pmf(mapped, 10);
  for (std::size_t y = 0; y < 10; ++y) {
    CHECK(est.pmf.p0(y) == doctest::Approx(base.pmf.p0(y)).epsilon(1e-12));
    CHECK(est.pmf.p1(y) == doctest::Approx(base.pmf.p1(y)).epsilon(1e-12));
  }
}

TEST_CASE("estimate_pmf rejects bad input") {
  std::vector<LabeledScore> only0 = {{0.1, 0}, {0.2, 0}};
  CHECK_THROWS_AS(estimate_pmf(only0, 2), std::invalid_argument);
  std::vector<LabeledScore> both = {{0.1, 0}, {0.2, 1}};
  CHECK_THROWS_AS(estimate_pmf(both, 1), std::invalid_argument);
  std::vector<LabeledScore> bad_label = {{0.1, 0}, {0.2, 2}};
  CHECK_THROWS_AS(estimate_pmf(bad_label, 2), std::invalid_argument);
}

TEST_CASE("estimated ROC tracks the raw-score threshold sweep") {
  // Skewed stream with roughly 10% positives; the smoothed pmf may move each
  // operating point by at most the smoothing mass of the bins above it.
  Gen g(14);
  std::vector<LabeledScore> s;
  std::size_t n1 = 0;
  for (int i = 0; i < 30000; ++i) {
    const int label = g.coin(0.1019) ? 1 : 0;
    n1 += label;
    const double u1 = g.uniform(), u2 = g.uniform();
    const double z = std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(6.283185307179586 * u2);
    s.push_back({z + 2.0 * label, label});
  }
  const std::size_t L = 100;
  const auto est = estimate_pmf(s, L);
  const auto roc = roc_pr(est.pmf, Belief(0.1019));
  const double n0 = static_cast<double>(s.size() - n1);
  for (std::size_t t = 0; t <= L; ++t) {
    double tp = 0.0, fp = 0.0;
    for (const auto& x : s) {
      if (bin_of(x.score, est.edges) < t) continue;
      (x.label ? tp : fp) += 1.0;
    }
    const double above = static_cast<double>(L - t);
    CHECK(std::abs(roc[t].tpr - tp / n1) <= above / (n1 + L) + 1e-12);
    CHECK(std::abs(roc[t].fpr - fp / n0) <= above / (n0 + L) + 1e-12);
  }
}

TEST_CASE("roc_pr special cases") {
  const ConditionalPmf flat({0.2, 0.3, 0.5}, {0.2, 0.3, 0.5});
  for (const auto& p : roc_pr(flat, Belief(0.3))) CHECK(p.tpr == doctest::Approx(p.fpr));
  const ConditionalPmf sep({0.5, 0.5, 0.0}, {0.0, 0.0, 1.0});
  bool perfect = false;
  for (const auto& p : roc_pr(sep, Belief(0.3))) perfect = perfect || (p.tpr == 1.0 && p.fpr == 0.0);
  CHECK(perfect);
  const auto pts = roc_pr(sep, Belief(0.3));
  CHECK_FALSE(pts.back().precision.has_value());
}

TEST_CASE("roc_pr matches enumeration of every threshold rule") {
  Gen g(15);
  for (int n = 0; n < 100; ++n) {
    const auto m = testing::random_pmf(g, 3);
    const double pi = g.uniform(0.05, 0.95);
    const auto pts = roc_pr(m, Belief(pi));
    REQUIRE(pts.size() == 4);
    for (std::size_t t = 0; t <= 3; ++t) {
      // Rule t declares positive on bins {t, ..., 2}: sum bin by bin.
      double tpr = 0.0, fpr = 0.0;
      for (std::size_t y = 0; y < 3; ++y) {
        if (y < t) continue;
        tpr += m.p1(y);
        fpr += m.p0(y);
      }
      CHECK(pts[t].threshold_bin == t);
      CHECK(pts[t].tpr == doctest::Approx(tpr).epsilon(1e-12));
      CHECK(pts[t].fpr == doctest::Approx(fpr).epsilon(1e-12));
      CHECK(pts[t].recall == doctest::Approx(tpr).epsilon(1e-12));
      if (tpr * pi + fpr * (1 - pi) > 0.0) {
        REQUIRE(pts[t].precision.has_value());
        CHECK(*pts[t].precision == doctest::Approx(tpr * pi / (tpr * pi + fpr * (1 - pi))));
      }
    }
  }
}
