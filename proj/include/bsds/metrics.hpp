#pragma once

#include "bsds/types.hpp"

#include <span>

namespace bsds {

/// HR, FDR and coverage for one selection on one pool.
/// A hit-free pool does not fail: hr is 0 and `degenerate_pool` is set, so
/// bootstrap replicates that lose every hit still evaluate.
ComponentRates component_rates(const LabeledPool& pool, const Selection& sel);

/// The budget-sensitive discovery score: HR - lambda*FDR - gamma*(1 - Cov).
/// Total on valid rates; always within [-(lambda+gamma), 1].
double bsds_score(const ComponentRates& rates, const BsdsParams& params);

/// Mean BSDS over the budget grid.
double dqs(std::span<const double> per_budget_scores);

/// True iff a full-coverage selection with these rates dominates full
/// abstention, i.e. HR >= lambda*FDR - gamma.
bool bayes_abstain_dominated(const ComponentRates& rates,
                             const BsdsParams& params);

/// Calibrated-probability cutoff below which abstention is optimal:
/// gamma / (1 + lambda).
double abstain_threshold(const BsdsParams& params);

enum class CoverageMode {
  kFullCoverage,      // selection plus explicit rejection of the rest
  kAbstainRemainder,  // everything outside S abstained
};

/// Expected BSDS of a uniform random size-B selection.
/// full coverage:     B/N - lambda*(1-p)
/// abstain remainder: B/N - lambda*(1-p) - gamma*(1 - B/N)
double expected_random_bsds(std::int64_t n, double prevalence,
                            std::int64_t budget, const BsdsParams& params,
                            CoverageMode mode);

enum class OracleFill {
  kNone,             // stop once the hits are exhausted (BSDS-maximal)
  kDescendingIndex,  // pad to the full budget with non-hits, highest index first
};

/// Hits-first selection: min(B, |H|) hits in ascending index order, then
/// optionally padded per `fill`. A = empty.
/// With kNone this is the BSDS maximizer over all full-coverage selections
/// of size <= B; padding can only add false discoveries.
Selection oracle_selection(const LabeledPool& pool, std::int64_t budget,
                           OracleFill fill = OracleFill::kNone);

/// Candidate order by (score descending, index ascending).
std::vector<std::int32_t> rank_by_score(const Eigen::VectorXd& scores);

/// Top-B of rank_by_score as a full-coverage selection.
Selection top_b_selection(const Eigen::VectorXd& scores, std::int64_t budget);

struct AuxiliaryMetrics {
  double ef = 0.0;     // (TP/|S|) / p for the top-B cut
  double auroc = 0.5;  // midrank statistic over scores vs labels
  double mcc = 0.0;    // confusion matrix of the top-B cut
  bool ef_defined = false;
  bool auroc_defined = false;
  bool mcc_defined = false;
};

/// Standard score-ranking metrics at one budget. Degenerate one-class pools
/// leave auroc/mcc flagged undefined rather than forcing a value.
AuxiliaryMetrics auxiliary_metrics(const LabeledPool& pool,
                                   const ScoreTable& scores,
                                   std::int64_t budget);

}  // namespace bsds
