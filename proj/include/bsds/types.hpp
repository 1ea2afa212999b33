#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsds {

/// Raised for malformed input files, unknown ids, bad CLI arguments.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a training run produces non-finite values.
struct training_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Finite candidate pool with binary hit labels.
struct LabeledPool {
  std::vector<std::string> ids;
  std::vector<std::uint8_t> labels;  // each 0 or 1
  std::int64_t hit_count = 0;
  double prevalence = 0.0;

  std::int64_t size() const { return static_cast<std::int64_t>(labels.size()); }
};

/// Validates labels and fills the derived hit statistics.
LabeledPool make_labeled_pool(std::vector<std::string> ids,
                              std::vector<std::uint8_t> labels);

/// Convenience for pools whose ids are irrelevant (tests, resamples).
LabeledPool make_labeled_pool(std::vector<std::uint8_t> labels);

/// A budgeted decision: selected set S, abstained set A, everything else
/// counts as explicitly rejected. |S| <= budget and S, A are disjoint.
struct Selection {
  std::vector<std::int32_t> selected;
  std::vector<std::int32_t> abstained;
  std::int64_t budget = 0;
};

/// Throws std::out_of_range / std::invalid_argument on any broken invariant.
void validate_selection(const LabeledPool& pool, const Selection& sel);

/// False-discovery penalty lambda and abstention penalty gamma, both >= 0.
struct BsdsParams {
  double lambda = 1.0;
  double gamma = 0.3;
};

/// Ordered budget fractions B/N in (0,1].
class BudgetGrid {
 public:
  explicit BudgetGrid(std::vector<double> fractions);

  static BudgetGrid standard();  // {0.01, 0.02, 0.05, 0.10, 0.20, 0.50}

  const std::vector<double>& fractions() const { return fractions_; }
  std::size_t size() const { return fractions_.size(); }

  /// B = max(1, round-half-up(fraction * n)).
  std::vector<std::int64_t> resolve(std::int64_t n) const;

 private:
  std::vector<double> fractions_;
};

std::int64_t resolve_budget(double fraction, std::int64_t n);

/// Component rates of one evaluated selection.
struct ComponentRates {
  double hr = 0.0;   // |S ∩ H| / |H|
  double fdr = 0.0;  // |S \ H| / max(|S|, 1)
  double cov = 0.0;  // (|S| + |X \ S \ A|) / N
  std::int64_t tp = 0;
  std::int64_t selected = 0;
  double ppv = 0.0;  // 1 - fdr when |S| > 0
  bool degenerate_pool = false;  // no hits in the pool; hr forced to 0
};

/// Per-candidate real scores aligned to a pool.
struct ScoreTable {
  Eigen::VectorXd values;
  std::string provenance;
  bool calibrated_probability = false;
};

ScoreTable make_score_table(Eigen::VectorXd values, std::string provenance,
                            bool calibrated_probability = false);

}  // namespace bsds
