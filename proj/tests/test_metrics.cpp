#include "bsds/metrics.hpp"

#include "bsds/rng.hpp"
#include "bsds/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

using namespace bsds;

namespace {

LabeledPool pool_with_hits(std::int64_t n, std::int64_t hits) {
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(n), 0);
  for (std::int64_t i = 0; i < hits; ++i) labels[static_cast<std::size_t>(i)] = 1;
  return make_labeled_pool(std::move(labels));
}

Selection select(std::vector<std::int32_t> chosen, std::int64_t budget,
                 std::vector<std::int32_t> abstained = {}) {
  Selection sel;
  sel.selected = std::move(chosen);
  sel.abstained = std::move(abstained);
  sel.budget = budget;
  return sel;
}

constexpr BsdsParams kDefault{1.0, 0.3};

}  // namespace

TEST_CASE("component rates: worked example values") {
  const LabeledPool pool = pool_with_hits(100, 10);
  // 8 hits and 2 non-hits selected, nothing abstained.
  const Selection sel = select({0, 1, 2, 3, 4, 5, 6, 7, 10, 11}, 10);
  const ComponentRates r = component_rates(pool, sel);
  CHECK(r.hr == doctest::Approx(0.80).epsilon(1e-12));
  CHECK(r.fdr == doctest::Approx(0.20).epsilon(1e-12));
  CHECK(r.cov == 1.0);
  CHECK(r.tp == 8);
  CHECK(r.ppv == doctest::Approx(0.8).epsilon(1e-12));
  CHECK_FALSE(r.degenerate_pool);
}

TEST_CASE("component rates: empty selection, full abstention") {
  const LabeledPool pool = pool_with_hits(20, 4);
  std::vector<std::int32_t> everything(20);
  std::iota(everything.begin(), everything.end(), 0);
  const ComponentRates r = component_rates(pool, select({}, 5, everything));
  CHECK(r.hr == 0.0);
  CHECK(r.fdr == 0.0);
  CHECK(r.cov == 0.0);
}

TEST_CASE("component rates: every subset of a 5-candidate pool matches a hand count") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint8_t> labels(5);
    for (auto& g : labels) g = static_cast<std::uint8_t>(rng.next_below(2));
    if (std::accumulate(labels.begin(), labels.end(), 0) == 0) labels[0] = 1;
    const LabeledPool pool = make_labeled_pool(std::vector<std::uint8_t>(labels));
    for (std::uint32_t mask = 0; mask < 32; ++mask) {
      Selection sel;
      sel.budget = 5;
      for (std::int32_t i = 0; i < 5; ++i)
        if (mask & (1u << i)) sel.selected.push_back(i);
      const ComponentRates r = component_rates(pool, sel);

      // Independent hand count.
      std::int64_t tp = 0, s = 0, hits = 0;
      for (int i = 0; i < 5; ++i) hits += labels[static_cast<std::size_t>(i)];
      for (std::int32_t i : sel.selected) {
        ++s;
        tp += labels[static_cast<std::size_t>(i)];
      }
      CHECK(r.tp == tp);
      CHECK(r.hr == doctest::Approx(double(tp) / double(hits)).epsilon(1e-15));
      CHECK(r.fdr ==
            doctest::Approx(double(s - tp) / double(std::max<std::int64_t>(s, 1)))
                .epsilon(1e-15));
      CHECK(r.cov == 1.0);
    }
  }
}

TEST_CASE("component rates: structural errors and the hit-free flag") {
  const LabeledPool pool = pool_with_hits(10, 2);
  CHECK_THROWS_AS(component_rates(pool, select({11}, 3)), std::out_of_range);
  CHECK_THROWS_AS(component_rates(pool, select({1, 1}, 3)), std::invalid_argument);
  CHECK_THROWS_AS(component_rates(pool, select({0, 1, 2}, 2)), std::invalid_argument);
  CHECK_THROWS_AS(component_rates(pool, select({0}, 3, {0})), std::invalid_argument);

  const LabeledPool hitless = pool_with_hits(10, 0);
  const ComponentRates r = component_rates(hitless, select({0, 1}, 2));
  CHECK(r.degenerate_pool);
  CHECK(r.hr == 0.0);
  CHECK(r.fdr == 1.0);
}

TEST_CASE("bsds: section worked example and full abstention") {
  ComponentRates a{0.80, 0.20, 1.0, 8, 10, 0.8, false};
  CHECK(bsds_score(a, kDefault) == doctest::Approx(0.60).epsilon(1e-12));
  ComponentRates b{0.50, 0.50, 1.0, 5, 10, 0.5, false};
  CHECK(bsds_score(b, kDefault) == doctest::Approx(0.00).epsilon(1e-12));
  ComponentRates c{0.50, 0.00, 0.50, 5, 5, 1.0, false};
  CHECK(bsds_score(c, kDefault) == doctest::Approx(0.35).epsilon(1e-12));

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double gamma = rng.next_double();
    ComponentRates abstain{0.0, 0.0, 0.0, 0, 0, 0.0, false};
    CHECK(bsds_score(abstain, BsdsParams{rng.next_double() * 4.0, gamma}) ==
          -gamma);
  }
}

TEST_CASE("dqs: mean, errors, permutation invariance") {
  const std::vector<double> constant{0.6, 0.6, 0.6};
  CHECK(dqs(constant) == doctest::Approx(0.6).epsilon(1e-15));
  const std::vector<double> extremes{1.0, -1.3};
  CHECK(dqs(extremes) == doctest::Approx(-0.15).epsilon(1e-12));
  CHECK_THROWS_AS(dqs({}), std::invalid_argument);

  Rng rng(11);
  std::vector<double> values(6);
  for (auto& v : values) v = 2.6 * rng.next_double() - 1.3;
  const double forward = dqs(values);
  // Second accumulation order.
  double back = 0.0;
  for (auto it = values.rbegin(); it != values.rend(); ++it) back += *it;
  back /= static_cast<double>(values.size());
  CHECK(forward == doctest::Approx(back).epsilon(1e-14));

  std::vector<double> shuffled = values;
  for (std::size_t i = 0; i + 1 < shuffled.size(); ++i)
    std::swap(shuffled[i], shuffled[i + rng.next_below(shuffled.size() - i)]);
  CHECK(std::abs(dqs(shuffled) - forward) <= 1e-12);
}

TEST_CASE("bayes abstention dominance rule") {
  CHECK(bayes_abstain_dominated(ComponentRates{0.50, 0.50, 1.0, 0, 0, 0, false},
                                kDefault));
  CHECK_FALSE(bayes_abstain_dominated(
      ComponentRates{0.0, 1.0, 1.0, 0, 0, 0, false}, BsdsParams{2.0, 0.3}));

  // Oracle: the rule must agree with comparing bsds against -gamma at full
  // coverage (off the exact boundary).
  Rng rng(17);
  for (int i = 0; i < 5000; ++i) {
    ComponentRates r;
    r.hr = rng.next_double();
    r.fdr = rng.next_double();
    r.cov = 1.0;
    const BsdsParams params{4.0 * rng.next_double(), rng.next_double()};
    const double margin = r.hr - (params.lambda * r.fdr - params.gamma);
    if (std::abs(margin) < 1e-12) continue;
    CHECK(bayes_abstain_dominated(r, params) ==
          (bsds_score(r, params) >= -params.gamma));
  }
}

TEST_CASE("abstain threshold") {
  CHECK(abstain_threshold(kDefault) == 0.15);
  CHECK(abstain_threshold(BsdsParams{2.0, 0.0}) == 0.0);
  // Rational cross-check: 0.03 / 1.1 = 3/110.
  CHECK(abstain_threshold(BsdsParams{0.1, 0.03}) ==
        doctest::Approx(3.0 / 110.0).epsilon(1e-15));
}

TEST_CASE("expected random bsds: closed forms and Monte Carlo") {
  CHECK(expected_random_bsds(50, 0.2, 50, BsdsParams{0.0, 0.0},
                             CoverageMode::kFullCoverage) == 1.0);
  CHECK(expected_random_bsds(100, 0.1, 20, BsdsParams{1.0, 0.3},
                             CoverageMode::kAbstainRemainder) ==
        doctest::Approx(0.2 - 0.9 - 0.3 * 0.8).epsilon(1e-12));
  CHECK_THROWS_AS(expected_random_bsds(10, 0.5, 11, kDefault,
                                       CoverageMode::kFullCoverage),
                  std::invalid_argument);

  // Monte-Carlo oracle, small version of the acceptance run.
  const std::int64_t n = 200, budget = 20;
  const LabeledPool pool = pool_with_hits(n, 20);
  const double analytic = expected_random_bsds(n, pool.prevalence, budget,
                                               kDefault, CoverageMode::kFullCoverage);
  Rng rng(99);
  const int draws = 20000;
  double sum = 0.0, sum_sq = 0.0;
  std::vector<std::int32_t> idx(static_cast<std::size_t>(n));
  for (int d = 0; d < draws; ++d) {
    std::iota(idx.begin(), idx.end(), 0);
    Selection sel;
    sel.budget = budget;
    for (std::int64_t i = 0; i < budget; ++i) {
      const std::uint64_t j = i + rng.next_below(static_cast<std::uint64_t>(n - i));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
      sel.selected.push_back(idx[static_cast<std::size_t>(i)]);
    }
    const double v = bsds_score(component_rates(pool, sel), kDefault);
    sum += v;
    sum_sq += v * v;
  }
  const double mc_mean = sum / draws;
  const double mc_sd = std::sqrt((sum_sq / draws - mc_mean * mc_mean) / draws);
  CHECK(std::abs(mc_mean - analytic) <= 4.0 * mc_sd);
}

TEST_CASE("oracle selection: shapes and fill modes") {
  const LabeledPool ten_hits = pool_with_hits(30, 10);
  const Selection s1 = oracle_selection(ten_hits, 5);
  CHECK(s1.selected.size() == 5);
  ComponentRates r1 = component_rates(ten_hits, s1);
  CHECK(r1.hr == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r1.fdr == 0.0);

  const LabeledPool three_hits = pool_with_hits(30, 3);
  const Selection bare = oracle_selection(three_hits, 5);
  CHECK(bare.selected.size() == 3);
  CHECK(component_rates(three_hits, bare).fdr == 0.0);

  const Selection filled = oracle_selection(three_hits, 5, OracleFill::kDescendingIndex);
  CHECK(filled.selected.size() == 5);
  const ComponentRates rf = component_rates(three_hits, filled);
  CHECK(rf.fdr == doctest::Approx(2.0 / 5.0).epsilon(1e-15));
  // Deterministic tail: highest non-hit indices first.
  CHECK(filled.selected[3] == 29);
  CHECK(filled.selected[4] == 28);
}

TEST_CASE("oracle dominance: brute force over all subsets of small pools") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t n = 2 + static_cast<std::int64_t>(rng.next_below(9));
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(n));
    for (auto& g : labels) g = static_cast<std::uint8_t>(rng.next_below(2));
    const LabeledPool pool = make_labeled_pool(std::move(labels));
    const BsdsParams params{5.0 * rng.next_double(), rng.next_double()};
    for (std::int64_t budget = 1; budget <= n; ++budget) {
      const double best =
          bsds_score(component_rates(pool, oracle_selection(pool, budget)), params);
      for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        if (std::popcount(mask) > budget) continue;
        Selection sel;
        sel.budget = budget;
        for (std::int32_t i = 0; i < n; ++i)
          if (mask & (1u << i)) sel.selected.push_back(i);
        CHECK(bsds_score(component_rates(pool, sel), params) <= best + 1e-12);
      }
    }
  }
}

TEST_CASE("bsds invariants: bounds, monotonicity, swaps") {
  Rng rng(23);

  SUBCASE("boundedness on random rates") {
    for (int i = 0; i < 20000; ++i) {
      ComponentRates r;
      r.hr = rng.next_double();
      r.fdr = rng.next_double();
      r.cov = rng.next_double();
      const BsdsParams params{10.0 * rng.next_double(), rng.next_double()};
      const double v = bsds_score(r, params);
      CHECK(v >= -(params.lambda + params.gamma) - 1e-12);
      CHECK(v <= 1.0 + 1e-12);
    }
  }

  SUBCASE("monotone in each component") {
    for (int i = 0; i < 2000; ++i) {
      ComponentRates r;
      r.hr = rng.next_double();
      r.fdr = rng.next_double();
      r.cov = rng.next_double();
      const BsdsParams params{0.1 + 5.0 * rng.next_double(),
                              0.1 + rng.next_double()};
      const double base = bsds_score(r, params);
      ComponentRates up = r;
      up.hr = r.hr + (1.0 - r.hr) * (0.1 + 0.9 * rng.next_double());
      if (up.hr > r.hr) CHECK(bsds_score(up, params) > base);
      ComponentRates worse = r;
      worse.fdr = r.fdr + (1.0 - r.fdr) * (0.1 + 0.9 * rng.next_double());
      if (worse.fdr > r.fdr) CHECK(bsds_score(worse, params) < base);
      ComponentRates covered = r;
      covered.cov = r.cov + (1.0 - r.cov) * rng.next_double();
      CHECK(bsds_score(covered, params) >= base);
    }
  }

  SUBCASE("swapping a selected non-hit for an unselected hit never hurts") {
    for (int i = 0; i < 500; ++i) {
      const std::int64_t n = 4 + static_cast<std::int64_t>(rng.next_below(20));
      std::vector<std::uint8_t> labels(static_cast<std::size_t>(n));
      for (auto& g : labels) g = static_cast<std::uint8_t>(rng.next_below(2));
      const LabeledPool pool = make_labeled_pool(std::move(labels));
      // Random selection with at least one selected non-hit and one
      // unselected hit, if possible.
      std::vector<std::int32_t> in, out;
      Selection sel;
      sel.budget = n;
      for (std::int32_t c = 0; c < n; ++c)
        (rng.next_below(2) ? in : out).push_back(c);
      sel.selected = in;
      std::int32_t swap_out = -1, swap_in = -1;
      for (std::int32_t c : in)
        if (!pool.labels[static_cast<std::size_t>(c)]) swap_out = c;
      for (std::int32_t c : out)
        if (pool.labels[static_cast<std::size_t>(c)]) swap_in = c;
      if (swap_out < 0 || swap_in < 0 || sel.selected.empty()) continue;
      const BsdsParams params{5.0 * rng.next_double(), rng.next_double()};
      const double before = bsds_score(component_rates(pool, sel), params);
      for (auto& c : sel.selected)
        if (c == swap_out) c = swap_in;
      const double after = bsds_score(component_rates(pool, sel), params);
      CHECK(after >= before - 1e-12);
    }
  }
}

TEST_CASE("budget resolution: round-half-up with a floor of one") {
  CHECK(resolve_budget(0.01, 100) == 1);
  CHECK(resolve_budget(0.01, 41127) == 411);
  CHECK(resolve_budget(0.025, 100) == 3);  // 2.5 rounds up
  CHECK(resolve_budget(0.001, 100) == 1);  // floor
  CHECK(resolve_budget(0.5, 2000) == 1000);
  const BudgetGrid grid = BudgetGrid::standard();
  const auto budgets = grid.resolve(1000);
  CHECK(budgets == std::vector<std::int64_t>{10, 20, 50, 100, 200, 500});
  CHECK_THROWS_AS(BudgetGrid({0.1, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(BudgetGrid({0.0, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(BudgetGrid({0.5, 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(BudgetGrid({}), std::invalid_argument);
}

TEST_CASE("auxiliary metrics: perfect, null and degenerate rankings") {
  const std::int64_t n = 40;
  const LabeledPool pool = pool_with_hits(n, 8);
  Eigen::VectorXd perfect(n);
  for (std::int64_t i = 0; i < n; ++i)
    perfect[i] = pool.labels[static_cast<std::size_t>(i)] ? 2.0 + 0.01 * i
                                                          : 0.5 - 0.01 * i;
  const AuxiliaryMetrics best =
      auxiliary_metrics(pool, make_score_table(perfect, "t"), 8);
  CHECK(best.ef == doctest::Approx(1.0 / pool.prevalence).epsilon(1e-12));
  CHECK(best.auroc == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(best.mcc == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(5);
  const std::int64_t big_n = 4000;
  const LabeledPool big = pool_with_hits(big_n, 400);
  Eigen::VectorXd noise(big_n);
  for (auto i = 0; i < big_n; ++i) noise[i] = rng.next_double();
  const AuxiliaryMetrics null_rank =
      auxiliary_metrics(big, make_score_table(noise, "t"), 200);
  CHECK(std::abs(null_rank.auroc - 0.5) < 0.05);

  const LabeledPool one_class = pool_with_hits(20, 0);
  Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(20, 0.0, 1.0);
  const AuxiliaryMetrics degen =
      auxiliary_metrics(one_class, make_score_table(s, "t"), 5);
  CHECK_FALSE(degen.auroc_defined);
  CHECK_FALSE(degen.mcc_defined);
  CHECK_FALSE(degen.ef_defined);
}

TEST_CASE("auxiliary metrics: pairwise and confusion-matrix oracles") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const std::int64_t n = 50;
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(n));
    std::int64_t hits = 0;
    for (auto& g : labels) {
      g = static_cast<std::uint8_t>(rng.next_below(2));
      hits += g;
    }
    if (hits == 0 || hits == n) continue;
    const LabeledPool pool = make_labeled_pool(std::vector<std::uint8_t>(labels));
    Eigen::VectorXd scores(n);
    for (auto i = 0; i < n; ++i)
      scores[i] = std::floor(rng.next_double() * 8.0);  // coarse: forces ties
    const std::int64_t budget = 1 + static_cast<std::int64_t>(rng.next_below(
                                        static_cast<std::uint64_t>(n)));
    const AuxiliaryMetrics aux =
        auxiliary_metrics(pool, make_score_table(scores, "t"), budget);

    // Pairwise AUROC oracle with half-credit ties.
    double wins = 0.0;
    std::int64_t pairs = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      if (!labels[static_cast<std::size_t>(i)]) continue;
      for (std::int64_t j = 0; j < n; ++j) {
        if (labels[static_cast<std::size_t>(j)]) continue;
        ++pairs;
        if (scores[i] > scores[j]) wins += 1.0;
        else if (scores[i] == scores[j]) wins += 0.5;
      }
    }
    CHECK(aux.auroc ==
          doctest::Approx(wins / static_cast<double>(pairs)).epsilon(1e-12));

    // Confusion-matrix MCC oracle on the same deterministic top-B cut.
    const Selection top = top_b_selection(scores, budget);
    std::int64_t tp = 0;
    for (std::int32_t i : top.selected) tp += labels[static_cast<std::size_t>(i)];
    const double fp = static_cast<double>(budget - tp);
    const double fn = static_cast<double>(hits - tp);
    const double tn = static_cast<double>(n - hits) - fp;
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom > 0.0) {
      CHECK(aux.mcc_defined);
      CHECK(aux.mcc ==
            doctest::Approx((tp * tn - fp * fn) / std::sqrt(denom)).epsilon(1e-10));
    } else {
      CHECK_FALSE(aux.mcc_defined);
    }
  }
}

TEST_CASE("ranking is invariant under positive affine score maps") {
  Rng rng(13);
  const std::int64_t n = 120;
  const LabeledPool pool = pool_with_hits(n, 30);
  Eigen::VectorXd scores(n);
  for (auto i = 0; i < n; ++i) scores[i] = rng.next_normal();
  const Eigen::VectorXd mapped = 3.5 * scores.array() + 11.0;

  const Selection a = top_b_selection(scores, 25);
  const Selection b = top_b_selection(mapped, 25);
  CHECK(a.selected == b.selected);

  const AuxiliaryMetrics ma = auxiliary_metrics(pool, make_score_table(scores, "t"), 25);
  const AuxiliaryMetrics mb = auxiliary_metrics(pool, make_score_table(mapped, "t"), 25);
  CHECK(ma.auroc == mb.auroc);
}
