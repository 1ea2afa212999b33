#pragma once

#include "bsds/bootstrap.hpp"
#include "bsds/fingerprint.hpp"
#include "bsds/metrics.hpp"
#include "bsds/types.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bsds {

/// A loaded pool file: labels plus whatever optional columns were present.
/// Reserved column names: id, label, group, fingerprint, prior, admet.
/// Every other column is a named feature column.
struct PoolData {
  LabeledPool pool;
  Eigen::MatrixXd features;  // n x d, d == 0 when no feature columns
  std::vector<std::string> feature_names;
  std::vector<Fingerprint> fingerprints;  // empty or one per candidate
  std::vector<std::string> groups;        // empty or one per candidate
  Eigen::VectorXd prior;                  // empty or one per candidate, in [0,1]
  Eigen::VectorXd admet;                  // empty or one per candidate, in [0,1]

  bool has_fingerprints() const { return !fingerprints.empty(); }
  bool has_groups() const { return !groups.empty(); }
  bool has_prior() const { return prior.size() > 0; }
  bool has_admet() const { return admet.size() > 0; }
};

/// Comma-separated, '#'-prefixed metadata lines, mandatory header.
/// Errors name the offending row and column.
PoolData load_pool(const std::filesystem::path& path);

void write_pool(const PoolData& data, const std::filesystem::path& path);

/// Scores keyed by candidate id. Strict mode rejects missing ids; lenient
/// mode fills them with `default_value` and reports how many were filled.
struct LoadScoresOptions {
  bool strict = true;
  double default_value = 0.0;
};

ScoreTable load_scores(const std::filesystem::path& path, const LabeledPool& pool,
                       const LoadScoresOptions& options = {});

void write_scores(const ScoreTable& table, const LabeledPool& pool,
                  const std::filesystem::path& path);

/// Desk-scale synthetic campaign data. Labels are planted exactly
/// (round-half-up(n*prevalence) hits); scores are resampled until the
/// realized AUROC is within tolerance of the target; hit fingerprints share
/// per-cluster core bits so similarity search has signal.
struct SyntheticSpec {
  std::int64_t n = 2000;
  double prevalence = 0.05;
  double target_auroc = 0.85;  // 0.5 means no signal
  double auroc_tolerance = 0.02;
  std::int32_t fingerprint_width = 2048;
  std::int32_t hit_clusters = 4;
  std::int32_t cluster_core_bits = 96;
  double background_bit_density = 0.05;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  PoolData data;
  ScoreTable scores;
  double realized_auroc = 0.5;
  std::int32_t attempts = 0;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

enum class FoldMode {
  kRandomStratified,  // per-fold prevalence within one candidate of the pool's
  kByGroup,           // whole groups per fold, sizes balanced greedily
};

/// Fold assignment as held-out index lists, one per fold.
std::vector<std::vector<std::int32_t>> grouped_folds(
    const LabeledPool& pool, std::int32_t fold_count, FoldMode mode,
    std::span<const std::string> groups, Rng& rng);

// ---------------------------------------------------------------------------
// Report bundle and emission
// ---------------------------------------------------------------------------

struct MetricRow {
  std::string proposer;
  double fraction = 0.0;
  std::int64_t budget = 0;
  ComponentRates rates;
  double bsds = 0.0;
};

struct DqsRow {
  std::string proposer;
  double dqs_seed0 = 0.0;
  std::optional<BootstrapSummary> summary;
};

struct BudgetSummaryRow {
  std::string proposer;
  double fraction = 0.0;
  std::int64_t budget = 0;
  double bsds_seed0 = 0.0;
  BootstrapSummary summary;
};

struct AuxiliaryRow {
  std::string table;
  double fraction = 0.0;
  std::int64_t budget = 0;
  AuxiliaryMetrics metrics;
};

struct DistributionRow {
  std::string proposer;
  std::int64_t seed = 0;
  double dqs = 0.0;
};

struct DeploymentRow {
  std::string strategy;
  std::int64_t budget = 0;
  std::int64_t hits = 0;
  double hit_rate = 0.0;
  double cost = 0.0;
  double roi = 0.0;  // fraction, 8.6 == 860%
};

struct TemperatureRow {
  double temperature = 0.0;
  double dqs = 0.0;
};

struct ReportBundle {
  std::string config_hash;
  std::vector<std::string> proposer_names;
  std::vector<MetricRow> metrics;
  std::vector<DqsRow> dqs_rows;
  std::vector<BudgetSummaryRow> budget_summaries;
  std::vector<AuxiliaryRow> auxiliary;
  std::vector<DistributionRow> distributions;
  std::vector<SensitivityCell> sensitivity;
  std::vector<std::string> sensitivity_proposers;
  std::vector<DeploymentRow> deployment;
  std::vector<TemperatureRow> temperatures;
  std::vector<std::string> notes;
};

enum class ReportFormat { kTabular, kStructuredText };

/// Writes the bundle under `out_dir` with stable field order and 17
/// significant digits, so identical bundles give byte-identical files.
/// Returns the written paths in a fixed order.
std::vector<std::filesystem::path> emit_report(const ReportBundle& bundle,
                                               ReportFormat format,
                                               const std::filesystem::path& out_dir);

/// Reads `proposer,dqs` pairs back from an emitted dqs.csv.
std::vector<std::pair<std::string, double>> read_dqs_table(
    const std::filesystem::path& path);

/// FNV-1a hash of a canonical configuration string, rendered as hex.
std::string config_hash(const std::string& canonical_config);

/// 17-significant-digit rendering used across all text output.
std::string format_double(double value);

}  // namespace bsds
