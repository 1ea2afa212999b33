#pragma once

#include "bsds/metrics.hpp"
#include "bsds/rng.hpp"
#include "bsds/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace bsds {

/// Replicate plan: seed 0 is the full data, seeds 1..replicate_count-1 are
/// with-replacement resamples. Per-seed streams are derived from the master
/// seed by a counter construction (see rng.hpp), so execution order is
/// irrelevant.
struct BootstrapPlan {
  std::int64_t replicate_count = 1000;
  std::uint64_t master_seed = 0;
  double confidence = 0.95;
};

struct Resample {
  LabeledPool pool;
  std::vector<std::int32_t> index_map;  // replicate row -> source row
};

/// N with-replacement draws; score tables and fingerprints realign through
/// the index map.
Resample resample_pool(const LabeledPool& pool, Rng& rng);

struct BcaInterval {
  double lo = 0.0;
  double hi = 0.0;
  double z0 = 0.0;
  double acceleration = 0.0;
  bool degenerate = false;  // all replicates identical
};

/// Plain percentile interval at the given confidence level.
std::pair<double, double> percentile_interval(std::span<const double> replicates,
                                              double level = 0.95);

/// Bias-corrected accelerated interval. z0 comes from the fraction of
/// replicates strictly below the point estimate; the acceleration from the
/// jackknife skewness (empty list means a = 0). With z0 = 0 and a = 0 the
/// adjusted levels reduce to the nominal ones, so the result equals
/// percentile_interval bit for bit.
BcaInterval bca_interval(std::span<const double> replicates,
                         double point_estimate,
                         std::span<const double> jackknife_values,
                         double level = 0.95);

/// Jackknife acceleration constant from leave-one-out statistic values.
double jackknife_acceleration(std::span<const double> jackknife_values);

struct BootstrapSummary {
  double point_estimate = 0.0;  // seed-0 value
  double replicate_mean = 0.0;
  BcaInterval interval;
  std::int64_t replicate_count = 0;  // successful replicates
  bool acceleration_from_jackknife = false;
};

BootstrapSummary summarize_bootstrap(double point_estimate,
                                     std::span<const double> replicates,
                                     std::span<const double> jackknife_values,
                                     double level);

/// One sensitivity cell: per-proposer DQS at (lambda, gamma) plus the
/// Kendall tau of the proposer ranking against the default-parameter ranking.
struct SensitivityCell {
  double lambda = 0.0;
  double gamma = 0.0;
  std::vector<double> dqs;  // aligned to the proposer list
  double tau_vs_default = 1.0;
};

/// Recomputes DQS over a (lambda, gamma) grid from stored component rates;
/// proposers are never re-invoked. rates[p][b] is proposer p at budget b.
std::vector<SensitivityCell> sensitivity_grid(
    std::span<const std::vector<ComponentRates>> per_proposer_rates,
    std::span<const double> lambda_grid, std::span<const double> gamma_grid,
    const BsdsParams& default_params);

/// Ranking by descending value, index ascending on ties.
std::vector<std::int32_t> ranking_by_value(std::span<const double> values);

}  // namespace bsds
