#pragma once

#include "bsds/fingerprint.hpp"
#include "bsds/metrics.hpp"
#include "bsds/rng.hpp"
#include "bsds/types.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace bsds {

/// Uniform without-replacement sample of B candidates, full coverage.
Selection propose_random(const LabeledPool& pool, std::int64_t budget, Rng& rng);

/// Top-B by (score descending, index ascending), full coverage.
Selection propose_greedy(const Eigen::VectorXd& scores, std::int64_t budget);

/// Top-B on the blend 0.6*score + 0.4*prior. Priors must lie in [0,1].
Selection propose_informed_prior(const Eigen::VectorXd& scores,
                                 const Eigen::VectorXd& prior_scores,
                                 std::int64_t budget);

/// Greedy sequential pick of argmax 0.5*score + 0.3*retrieval + 0.2*diversity,
/// recomputing diversity against the growing selected set; ties by index.
Selection propose_retrieval(const Eigen::VectorXd& scores,
                            std::span<const Fingerprint> fingerprints,
                            const KnowledgeBase& kb, std::int64_t budget);

/// Sequential without-replacement softmax sampling, P(i) ∝ exp(s_i / tau)
/// renormalized over the remaining candidates after each draw.
Selection propose_generative(const Eigen::VectorXd& scores, std::int64_t budget,
                             double temperature, Rng& rng);

/// Reveals labels only for candidates the caller has already committed to.
/// Querying anything else is a contract violation.
class LabelOracle {
 public:
  explicit LabelOracle(const LabeledPool& pool) : pool_(&pool) {
    revealed_.assign(static_cast<std::size_t>(pool.size()), 0);
  }

  void reveal(std::span<const std::int32_t> selected);
  bool is_revealed(std::int32_t index) const;
  std::uint8_t label(std::int32_t index) const;

 private:
  const LabeledPool* pool_;
  std::vector<std::uint8_t> revealed_;
};

/// Multi-round label-feedback protocol. The budget is split evenly across
/// rounds (floor(B/r) per round, remainder in the last). Round 1 takes the
/// top-scored candidates; later rounds rank remaining candidates by
/// score + 0.3 * maxTanimoto-to-confirmed-hits. rounds = 1 collapses to
/// propose_greedy.
Selection propose_bsds_guided(const Eigen::VectorXd& scores,
                              std::span<const Fingerprint> fingerprints,
                              std::int64_t budget, std::int64_t rounds,
                              LabelOracle& oracle);

/// Per-candidate Borda points for one component ranking: rank r (1-based)
/// contributes N - r points, tied scores share the mean of their range.
Eigen::VectorXd borda_points(const Eigen::VectorXd& component_scores);

/// Borda aggregation of >= 2 component score vectors, then selection-size
/// optimization: k* <= B maximizing the expected BSDS with the score table
/// read as calibrated probabilities (expected hits sum(p), expected false
/// discoveries sum(1-p)/k over the top-k of the Borda order).
Selection propose_ensemble(std::span<const Eigen::VectorXd> component_scores,
                           const Eigen::VectorXd& calibrated_probabilities,
                           std::int64_t budget, const BsdsParams& params);

/// Full preference order of the retrieval strategy: the greedy loop run to
/// the whole pool. Used as an ensemble component.
std::vector<std::int32_t> retrieval_order(const Eigen::VectorXd& scores,
                                          std::span<const Fingerprint> fingerprints,
                                          const KnowledgeBase& kb);

/// Full sampled order of the generative strategy (softmax without
/// replacement until the pool is exhausted).
std::vector<std::int32_t> generative_order(const Eigen::VectorXd& scores,
                                           double temperature, Rng& rng);

/// Positional scores (N - position) turning an ordering into a score vector,
/// e.g. to feed sampled orders into Borda aggregation.
Eigen::VectorXd order_scores(std::span<const std::int32_t> order);

}  // namespace bsds
