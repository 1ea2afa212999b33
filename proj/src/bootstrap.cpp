#include "bsds/bootstrap.hpp"

#include "bsds/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bsds {

Resample resample_pool(const LabeledPool& pool, Rng& rng) {
  const std::int64_t n = pool.size();
  Resample out;
  out.index_map.reserve(static_cast<std::size_t>(n));
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(n));
  std::vector<std::string> ids(static_cast<std::size_t>(n));
  const bool has_ids = !pool.ids.empty();
  for (std::int64_t i = 0; i < n; ++i) {
    const auto src = static_cast<std::int32_t>(rng.next_below(static_cast<std::uint64_t>(n)));
    out.index_map.push_back(src);
    labels[static_cast<std::size_t>(i)] = pool.labels[static_cast<std::size_t>(src)];
    if (has_ids) ids[static_cast<std::size_t>(i)] = pool.ids[static_cast<std::size_t>(src)];
  }
  out.pool = has_ids ? make_labeled_pool(std::move(ids), std::move(labels))
                     : make_labeled_pool(std::move(labels));
  return out;
}

double jackknife_acceleration(std::span<const double> jackknife_values) {
  if (jackknife_values.size() < 2) return 0.0;
  const double m = mean(jackknife_values);
  double sq = 0.0, cu = 0.0;
  for (double v : jackknife_values) {
    const double d = m - v;
    sq += d * d;
    cu += d * d * d;
  }
  if (sq <= 0.0) return 0.0;
  return cu / (6.0 * std::pow(sq, 1.5));
}

std::pair<double, double> percentile_interval(std::span<const double> replicates,
                                              double level) {
  if (replicates.empty())
    throw std::invalid_argument("percentile_interval of empty sample");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("confidence level outside (0,1)");
  std::vector<double> sorted(replicates.begin(), replicates.end());
  std::sort(sorted.begin(), sorted.end());
  const double alpha = 1.0 - level;
  return {quantile_sorted(sorted, alpha / 2.0),
          quantile_sorted(sorted, 1.0 - alpha / 2.0)};
}

BcaInterval bca_interval(std::span<const double> replicates,
                         double point_estimate,
                         std::span<const double> jackknife_values,
                         double level) {
  if (replicates.size() < 2)
    throw std::invalid_argument("bca_interval needs at least two replicates");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("confidence level outside (0,1)");

  std::vector<double> sorted(replicates.begin(), replicates.end());
  std::sort(sorted.begin(), sorted.end());

  BcaInterval out;
  if (sorted.front() == sorted.back()) {
    out.lo = out.hi = sorted.front();
    out.degenerate = true;
    return out;
  }

  const auto r = static_cast<double>(sorted.size());
  std::int64_t below = 0;
  for (double v : sorted) {
    if (v < point_estimate) ++below;
    else break;
  }
  // Clamp the bias fraction away from 0 and 1 so z0 stays finite.
  double frac = static_cast<double>(below) / r;
  frac = std::clamp(frac, 1.0 / (r + 1.0), r / (r + 1.0));
  out.z0 = norm_ppf(frac);
  out.acceleration = jackknife_acceleration(jackknife_values);

  const double alpha = 1.0 - level;
  double q_lo = alpha / 2.0;
  double q_hi = 1.0 - alpha / 2.0;
  if (out.z0 != 0.0 || out.acceleration != 0.0) {
    const auto adjust = [&](double q) {
      const double z = norm_ppf(q);
      const double num = out.z0 + z;
      return norm_cdf(out.z0 + num / (1.0 - out.acceleration * num));
    };
    q_lo = adjust(q_lo);
    q_hi = adjust(q_hi);
  }
  out.lo = quantile_sorted(sorted, q_lo);
  out.hi = quantile_sorted(sorted, q_hi);
  return out;
}

BootstrapSummary summarize_bootstrap(double point_estimate,
                                     std::span<const double> replicates,
                                     std::span<const double> jackknife_values,
                                     double level) {
  BootstrapSummary s;
  s.point_estimate = point_estimate;
  s.replicate_count = static_cast<std::int64_t>(replicates.size());
  if (!replicates.empty()) s.replicate_mean = mean(replicates);
  if (replicates.size() >= 2) {
    s.interval = bca_interval(replicates, point_estimate, jackknife_values, level);
    s.acceleration_from_jackknife = !jackknife_values.empty();
  } else {
    s.interval.lo = s.interval.hi = point_estimate;
    s.interval.degenerate = true;
  }
  return s;
}

std::vector<std::int32_t> ranking_by_value(std::span<const double> values) {
  std::vector<std::int32_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
  });
  return order;
}

std::vector<SensitivityCell> sensitivity_grid(
    std::span<const std::vector<ComponentRates>> per_proposer_rates,
    std::span<const double> lambda_grid, std::span<const double> gamma_grid,
    const BsdsParams& default_params) {
  if (lambda_grid.empty() || gamma_grid.empty())
    throw std::invalid_argument("sensitivity grid axes must be non-empty");
  if (per_proposer_rates.empty())
    throw std::invalid_argument("sensitivity grid needs at least one proposer");

  const auto dqs_at = [&](const BsdsParams& params) {
    std::vector<double> out;
    out.reserve(per_proposer_rates.size());
    for (const auto& rates : per_proposer_rates) {
      std::vector<double> per_budget;
      per_budget.reserve(rates.size());
      for (const ComponentRates& r : rates)
        per_budget.push_back(bsds_score(r, params));
      out.push_back(dqs(per_budget));
    }
    return out;
  };

  const std::vector<double> default_dqs = dqs_at(default_params);
  const std::vector<std::int32_t> default_ranking = ranking_by_value(default_dqs);

  std::vector<SensitivityCell> cells;
  cells.reserve(lambda_grid.size() * gamma_grid.size());
  for (double lambda : lambda_grid) {
    for (double gamma : gamma_grid) {
      SensitivityCell cell;
      cell.lambda = lambda;
      cell.gamma = gamma;
      cell.dqs = dqs_at(BsdsParams{lambda, gamma});
      if (per_proposer_rates.size() >= 2) {
        const std::vector<std::int32_t> ranking = ranking_by_value(cell.dqs);
        cell.tau_vs_default = kendall_tau_orderings(default_ranking, ranking);
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace bsds
