#pragma once

#include "bsds/campaign.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace bsds {

// Exit code contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitInternalError = 3;
inline constexpr int kExitPropertyFailure = 4;

struct CampaignArgs {
  std::filesystem::path pool_path;
  std::vector<std::pair<std::string, std::filesystem::path>> score_paths;
  std::filesystem::path config_path;  // empty = defaults
  std::filesystem::path out_dir;      // empty = $BSDS_OUT_DIR or ./bsds_report
  ReportFormat format = ReportFormat::kTabular;
  std::optional<double> lambda;
  std::optional<double> gamma;
  std::optional<std::string> preset;  // hts | clinical | av
  std::optional<std::uint64_t> master_seed;
  std::optional<std::int64_t> replicates;
  std::optional<std::vector<double>> budget_fractions;
};

struct SweepArgs {
  CampaignArgs common;
  std::vector<double> temperatures;  // empty = config or {0.1,0.2,0.5,1.0,2.0}
  std::string score_table;           // empty = first table
};

struct DeploymentArgs {
  CampaignArgs common;
  std::optional<double> unit_cost;
  std::optional<double> hit_value;
  std::optional<std::vector<std::int64_t>> budgets;
};

struct SynthArgs {
  SyntheticSpec spec;
  std::filesystem::path out_dir;
};

/// Seed-0 evaluation: per-budget rates, BSDS, DQS and auxiliary metrics.
int cmd_evaluate(const CampaignArgs& args);

/// Full bootstrap campaign with BCa summaries.
int cmd_bootstrap(const CampaignArgs& args);

/// Generative proposer DQS across a temperature list with shared seeds.
int cmd_sweep_temperature(const SweepArgs& args);

/// (lambda, gamma) grid recomputed from seed-0 rates.
int cmd_sensitivity_grid(const CampaignArgs& args);

/// hits / hit rate / cost / ROI per score table and budget.
int cmd_deployment_sim(const DeploymentArgs& args);

/// Writes pool.csv, scores_ml.csv and a ready campaign.json.
int cmd_synth_gen(const SynthArgs& args);

/// Embedded property suite; the corrupt hook flips the sign of lambda inside
/// the boundedness check so the negative control can verify a failure path.
int cmd_self_check(bool corrupt_lambda_sign = false);

/// Campaign config assembled from the config file plus CLI overrides.
CampaignConfig load_campaign_config(const CampaignArgs& args);

std::filesystem::path resolve_out_dir(const std::filesystem::path& requested);

}  // namespace bsds
