#pragma once

#include "bsds/bootstrap.hpp"
#include "bsds/io.hpp"
#include "bsds/soft_objective.hpp"
#include "bsds/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bsds {

enum class ProposerKind {
  kRandom,
  kGreedyMl,
  kInformedPrior,
  kRetrieval,
  kGenerative,
  kBsdsGuided,
  kEnsemble,
  kExternal,       // ingested score table ranked greedily (LLM-style rows)
  kScripted,       // explicit selected/abstained id lists
  kBsdsRecursive,  // soft-BSDS MLP, 3 rounds, augmentation
  kBsdsNoAug,      // no recursive feature augmentation
  kBsds1Round,     // single round, alpha = 5
  kGreedyMlpNn,    // cross-entropy loss, otherwise identical
};

const char* proposer_kind_name(ProposerKind kind);
ProposerKind proposer_kind_from_name(const std::string& name);

struct ProposerSpec {
  ProposerKind kind = ProposerKind::kRandom;
  std::string name;         // report label; defaults to the kind name
  std::string score_table;  // required by score-consuming kinds
  double temperature = 0.1;  // generative
  std::int64_t rounds = 3;   // bsds-guided
  std::vector<std::string> scripted_selected;
  std::vector<std::string> scripted_abstained;
  bool scripted_abstain_rest = false;
  SoftBsdsConfig trainer;          // MLP kinds
  std::int32_t trainer_folds = 5;  // stratified CV folds for MLP kinds
};

struct DeploymentEconomics {
  double unit_cost = 5.0;   // per validated candidate
  double hit_value = 50.0;  // per confirmed hit
  std::vector<std::int64_t> budgets = {50, 100, 200, 500};
};

struct CampaignConfig {
  BsdsParams params;
  BudgetGrid budgets = BudgetGrid::standard();
  std::uint64_t master_seed = 1;
  std::int64_t replicates = 1;  // seed 0 only
  double confidence = 0.95;
  double kb_fraction = 0.10;
  std::int64_t jackknife_cap = 2000;  // candidate subsample for acceleration
  std::vector<ProposerSpec> proposers;
  std::vector<double> lambda_grid;  // sensitivity axes; empty = skip
  std::vector<double> gamma_grid;
  std::optional<DeploymentEconomics> deployment;
  bool compute_auxiliary = true;

  /// Canonical text used for the embedded config hash.
  std::string canonical_string() const;
};

struct CampaignInputs {
  PoolData data;
  std::vector<std::pair<std::string, ScoreTable>> score_tables;

  const ScoreTable& table(const std::string& name) const;
};

/// Fan-out of every configured proposer over every budget.
/// Seed 0 is the full pool; with config.replicates > 1, seeds 1..R-1 run on
/// with-replacement resamples (knowledge base resampled, MLP variants
/// retrained per seed) and DQS / per-budget BSDS get BCa summaries.
/// Per-proposer or per-seed failures are recorded as notes; the campaign
/// continues for everything else.
ReportBundle run_campaign(const CampaignInputs& inputs,
                          const CampaignConfig& config);

/// Seed-0 DQS of the generative proposer at each temperature; the underlying
/// draws share streams across temperatures.
std::vector<TemperatureRow> temperature_sweep(const CampaignInputs& inputs,
                                              const CampaignConfig& config,
                                              const std::string& score_table,
                                              std::span<const double> temperatures);

/// hits, hit rate, cost and ROI of each score table's top-B cut.
std::vector<DeploymentRow> deployment_simulation(
    const CampaignInputs& inputs, const DeploymentEconomics& economics);

}  // namespace bsds
