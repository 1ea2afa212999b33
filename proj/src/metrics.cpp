#include "bsds/metrics.hpp"

#include "bsds/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bsds {

ComponentRates component_rates(const LabeledPool& pool, const Selection& sel) {
  validate_selection(pool, sel);
  const std::int64_t n = pool.size();
  const std::int64_t hits = pool.hit_count;

  std::int64_t tp = 0;
  for (std::int32_t i : sel.selected) tp += pool.labels[static_cast<std::size_t>(i)];

  const auto s = static_cast<std::int64_t>(sel.selected.size());
  const auto a = static_cast<std::int64_t>(sel.abstained.size());

  ComponentRates r;
  r.tp = tp;
  r.selected = s;
  r.degenerate_pool = (hits == 0);
  r.hr = (hits == 0) ? 0.0
                     : static_cast<double>(tp) / static_cast<double>(hits);
  r.fdr = static_cast<double>(s - tp) /
          static_cast<double>(std::max<std::int64_t>(s, 1));
  r.cov = static_cast<double>(s + (n - s - a)) / static_cast<double>(n);
  r.ppv = (s > 0) ? static_cast<double>(tp) / static_cast<double>(s) : 0.0;
  return r;
}

double bsds_score(const ComponentRates& rates, const BsdsParams& params) {
  return rates.hr - params.lambda * rates.fdr -
         params.gamma * (1.0 - rates.cov);
}

double dqs(std::span<const double> per_budget_scores) {
  if (per_budget_scores.empty())
    throw std::invalid_argument("dqs of empty budget list");
  return mean(per_budget_scores);
}

bool bayes_abstain_dominated(const ComponentRates& rates,
                             const BsdsParams& params) {
  return rates.hr >= params.lambda * rates.fdr - params.gamma;
}

double abstain_threshold(const BsdsParams& params) {
  return params.gamma / (1.0 + params.lambda);
}

double expected_random_bsds(std::int64_t n, double prevalence,
                            std::int64_t budget, const BsdsParams& params,
                            CoverageMode mode) {
  if (budget <= 0 || budget > n)
    throw std::invalid_argument("expected_random_bsds: budget outside (0, N]");
  const double frac = static_cast<double>(budget) / static_cast<double>(n);
  double value = frac - params.lambda * (1.0 - prevalence);
  if (mode == CoverageMode::kAbstainRemainder)
    value -= params.gamma * (1.0 - frac);
  return value;
}

Selection oracle_selection(const LabeledPool& pool, std::int64_t budget,
                           OracleFill fill) {
  const std::int64_t n = pool.size();
  if (budget <= 0 || budget > n)
    throw std::invalid_argument("oracle_selection: budget outside (0, N]");
  Selection sel;
  sel.budget = budget;
  for (std::int32_t i = 0; i < n && static_cast<std::int64_t>(sel.selected.size()) < budget; ++i)
    if (pool.labels[static_cast<std::size_t>(i)]) sel.selected.push_back(i);
  if (fill == OracleFill::kDescendingIndex) {
    for (std::int32_t i = static_cast<std::int32_t>(n) - 1;
         i >= 0 && static_cast<std::int64_t>(sel.selected.size()) < budget; --i)
      if (!pool.labels[static_cast<std::size_t>(i)]) sel.selected.push_back(i);
  }
  return sel;
}

std::vector<std::int32_t> rank_by_score(const Eigen::VectorXd& scores) {
  std::vector<std::int32_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int32_t i, std::int32_t j) {
                     return scores[i] > scores[j];
                   });
  return order;
}

Selection top_b_selection(const Eigen::VectorXd& scores, std::int64_t budget) {
  if (budget <= 0 || budget > scores.size())
    throw std::invalid_argument("top_b_selection: budget outside (0, N]");
  const auto order = rank_by_score(scores);
  Selection sel;
  sel.budget = budget;
  sel.selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(budget));
  return sel;
}

AuxiliaryMetrics auxiliary_metrics(const LabeledPool& pool,
                                   const ScoreTable& scores,
                                   std::int64_t budget) {
  const std::int64_t n = pool.size();
  if (scores.values.size() != n)
    throw std::invalid_argument("auxiliary_metrics: scores not aligned to pool");
  if (budget <= 0 || budget > n)
    throw std::invalid_argument("auxiliary_metrics: budget outside (0, N]");

  const std::int64_t pos = pool.hit_count;
  const std::int64_t neg = n - pos;

  const Selection top = top_b_selection(scores.values, budget);
  std::int64_t tp = 0;
  for (std::int32_t i : top.selected) tp += pool.labels[static_cast<std::size_t>(i)];
  const std::int64_t fp = budget - tp;
  const std::int64_t fn = pos - tp;
  const std::int64_t tn = neg - fp;

  AuxiliaryMetrics out;
  if (pos > 0) {
    const double precision = static_cast<double>(tp) / static_cast<double>(budget);
    out.ef = precision / pool.prevalence;
    out.ef_defined = true;
  }

  if (pos > 0 && neg > 0) {
    // Midrank AUROC: ties between scores contribute half a concordant pair.
    const std::vector<double> ranks =
        midranks(std::span<const double>(scores.values.data(),
                                         static_cast<std::size_t>(n)));
    double rank_sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i)
      if (pool.labels[static_cast<std::size_t>(i)]) rank_sum += ranks[static_cast<std::size_t>(i)];
    out.auroc = (rank_sum - 0.5 * static_cast<double>(pos) *
                                static_cast<double>(pos + 1)) /
                (static_cast<double>(pos) * static_cast<double>(neg));
    out.auroc_defined = true;

    const double denom = static_cast<double>(tp + fp) * static_cast<double>(tp + fn) *
                         static_cast<double>(tn + fp) * static_cast<double>(tn + fn);
    if (denom > 0.0) {
      out.mcc = (static_cast<double>(tp) * static_cast<double>(tn) -
                 static_cast<double>(fp) * static_cast<double>(fn)) /
                std::sqrt(denom);
      out.mcc_defined = true;
    }
  }
  return out;
}

}  // namespace bsds
