#include "bsds/proposers.hpp"

#include "bsds/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bsds {

namespace {

void check_budget(std::int64_t budget, std::int64_t n) {
  if (budget <= 0 || budget > n)
    throw std::invalid_argument("budget outside (0, N]");
}

void check_aligned(const Eigen::VectorXd& v, std::int64_t n, const char* what) {
  if (v.size() != n)
    throw std::invalid_argument(std::string(what) + " not aligned to pool");
}

}  // namespace

Selection propose_random(const LabeledPool& pool, std::int64_t budget, Rng& rng) {
  const std::int64_t n = pool.size();
  check_budget(budget, n);
  std::vector<std::int32_t> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (std::int64_t i = 0; i < budget; ++i) {
    const std::uint64_t j = i + rng.next_below(static_cast<std::uint64_t>(n - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  Selection sel;
  sel.budget = budget;
  sel.selected.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(budget));
  return sel;
}

Selection propose_greedy(const Eigen::VectorXd& scores, std::int64_t budget) {
  return top_b_selection(scores, budget);
}

Selection propose_informed_prior(const Eigen::VectorXd& scores,
                                 const Eigen::VectorXd& prior_scores,
                                 std::int64_t budget) {
  if (prior_scores.size() != scores.size())
    throw std::invalid_argument("prior scores not aligned to scores");
  if ((prior_scores.array() < 0.0).any() || (prior_scores.array() > 1.0).any())
    throw std::invalid_argument("prior scores must lie in [0,1]");
  const Eigen::VectorXd blended = 0.6 * scores + 0.4 * prior_scores;
  return top_b_selection(blended, budget);
}

Selection propose_retrieval(const Eigen::VectorXd& scores,
                            std::span<const Fingerprint> fingerprints,
                            const KnowledgeBase& kb, std::int64_t budget) {
  const std::int64_t n = scores.size();
  check_budget(budget, n);
  if (fingerprints.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("fingerprints not aligned to scores");
  if (kb.fingerprints.empty())
    throw std::invalid_argument("retrieval proposer needs a non-empty knowledge base");

  Eigen::VectorXd retr(n);
  for (std::int64_t i = 0; i < n; ++i)
    retr[i] = retrieval_score(fingerprints[static_cast<std::size_t>(i)], kb);

  // diversity_i = -max Tanimoto to the selected set; tracked incrementally.
  Eigen::VectorXd max_sim_to_selected = Eigen::VectorXd::Zero(n);
  std::vector<char> taken(static_cast<std::size_t>(n), 0);

  Selection sel;
  sel.budget = budget;
  sel.selected.reserve(static_cast<std::size_t>(budget));
  for (std::int64_t step = 0; step < budget; ++step) {
    std::int32_t best = -1;
    double best_value = 0.0;
    for (std::int32_t i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      const double diversity = sel.selected.empty() ? 0.0 : -max_sim_to_selected[i];
      const double value = 0.5 * scores[i] + 0.3 * retr[i] + 0.2 * diversity;
      if (best < 0 || value > best_value) {
        best = i;
        best_value = value;
      }
    }
    taken[static_cast<std::size_t>(best)] = 1;
    sel.selected.push_back(best);
    const Fingerprint& picked = fingerprints[static_cast<std::size_t>(best)];
    for (std::int32_t i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      const double sim = tanimoto(fingerprints[static_cast<std::size_t>(i)], picked);
      if (sim > max_sim_to_selected[i]) max_sim_to_selected[i] = sim;
    }
  }
  return sel;
}

Selection propose_generative(const Eigen::VectorXd& scores, std::int64_t budget,
                             double temperature, Rng& rng) {
  const std::int64_t n = scores.size();
  check_budget(budget, n);
  if (!(temperature > 0.0))
    throw std::invalid_argument("generative temperature must be positive");

  std::vector<std::int32_t> remaining(static_cast<std::size_t>(n));
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<double> weights(static_cast<std::size_t>(n), 0.0);

  Selection sel;
  sel.budget = budget;
  sel.selected.reserve(static_cast<std::size_t>(budget));
  for (std::int64_t step = 0; step < budget; ++step) {
    // Stable softmax over the remaining candidates.
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::int32_t i : remaining)
      max_logit = std::max(max_logit, scores[i] / temperature);
    double total = 0.0;
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      weights[k] = std::exp(scores[remaining[k]] / temperature - max_logit);
      total += weights[k];
    }
    const double u = rng.next_double() * total;
    double acc = 0.0;
    std::size_t pick = remaining.size() - 1;
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      acc += weights[k];
      if (u < acc) {
        pick = k;
        break;
      }
    }
    sel.selected.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return sel;
}

void LabelOracle::reveal(std::span<const std::int32_t> selected) {
  for (std::int32_t i : selected) {
    if (i < 0 || i >= pool_->size())
      throw std::out_of_range("label oracle: index out of range");
    revealed_[static_cast<std::size_t>(i)] = 1;
  }
}

bool LabelOracle::is_revealed(std::int32_t index) const {
  return index >= 0 && index < pool_->size() &&
         revealed_[static_cast<std::size_t>(index)];
}

std::uint8_t LabelOracle::label(std::int32_t index) const {
  if (!is_revealed(index))
    throw std::logic_error("label oracle queried for an unselected candidate");
  return pool_->labels[static_cast<std::size_t>(index)];
}

namespace {

// Top `take` unselected candidates by `value` (desc, index asc).
void take_top(const Eigen::VectorXd& value, std::vector<char>& taken,
              std::int64_t take, std::vector<std::int32_t>& out) {
  const std::int64_t n = value.size();
  std::vector<std::int32_t> order;
  order.reserve(static_cast<std::size_t>(n));
  for (std::int32_t i = 0; i < n; ++i)
    if (!taken[static_cast<std::size_t>(i)]) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int32_t a, std::int32_t b) { return value[a] > value[b]; });
  const auto limit = std::min<std::int64_t>(take, static_cast<std::int64_t>(order.size()));
  for (std::int64_t k = 0; k < limit; ++k) {
    taken[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = 1;
    out.push_back(order[static_cast<std::size_t>(k)]);
  }
}

}  // namespace

Selection propose_bsds_guided(const Eigen::VectorXd& scores,
                              std::span<const Fingerprint> fingerprints,
                              std::int64_t budget, std::int64_t rounds,
                              LabelOracle& oracle) {
  const std::int64_t n = scores.size();
  check_budget(budget, n);
  if (rounds < 1) throw std::invalid_argument("guided proposer needs rounds >= 1");
  if (fingerprints.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("fingerprints not aligned to scores");

  constexpr double kBoostWeight = 0.3;

  Selection sel;
  sel.budget = budget;
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  // Max Tanimoto to any confirmed hit so far, updated as hits are confirmed.
  Eigen::VectorXd max_sim_to_hits = Eigen::VectorXd::Zero(n);
  bool any_confirmed = false;

  for (std::int64_t round = 0; round < rounds; ++round) {
    const std::int64_t portion = (round + 1 < rounds)
                                     ? budget / rounds
                                     : budget - (rounds - 1) * (budget / rounds);
    if (portion <= 0) continue;

    Eigen::VectorXd value = scores;
    if (any_confirmed) value += kBoostWeight * max_sim_to_hits;

    std::vector<std::int32_t> picks;
    take_top(value, taken, portion, picks);
    oracle.reveal(picks);
    for (std::int32_t i : picks) {
      sel.selected.push_back(i);
      if (!oracle.label(i)) continue;
      any_confirmed = true;
      const Fingerprint& hit_fp = fingerprints[static_cast<std::size_t>(i)];
      for (std::int32_t j = 0; j < n; ++j) {
        if (taken[static_cast<std::size_t>(j)]) continue;
        const double sim = tanimoto(fingerprints[static_cast<std::size_t>(j)], hit_fp);
        if (sim > max_sim_to_hits[j]) max_sim_to_hits[j] = sim;
      }
    }
  }
  return sel;
}

Eigen::VectorXd borda_points(const Eigen::VectorXd& component_scores) {
  const std::int64_t n = component_scores.size();
  const std::vector<double> ranks =
      midranks(std::span<const double>(component_scores.data(),
                                       static_cast<std::size_t>(n)));
  Eigen::VectorXd points(n);
  // midranks are ascending; rank 1 is the worst score, so points = rank - 1
  // gives the best candidate N - 1 points and the worst 0, ties averaged.
  for (std::int64_t i = 0; i < n; ++i) points[i] = ranks[static_cast<std::size_t>(i)] - 1.0;
  return points;
}

Selection propose_ensemble(std::span<const Eigen::VectorXd> component_scores,
                           const Eigen::VectorXd& calibrated_probabilities,
                           std::int64_t budget, const BsdsParams& params) {
  if (component_scores.size() < 2)
    throw std::invalid_argument("ensemble needs >= 2 component rankings");
  const std::int64_t n = calibrated_probabilities.size();
  check_budget(budget, n);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(n);
  for (const Eigen::VectorXd& comp : component_scores) {
    check_aligned(comp, n, "ensemble component");
    total += borda_points(comp);
  }

  const std::vector<std::int32_t> order = rank_by_score(total);

  const double expected_hits =
      std::max(calibrated_probabilities.sum(), 1e-12);
  double top_p_sum = 0.0;
  double best_value = -std::numeric_limits<double>::infinity();
  std::int64_t best_k = 1;
  for (std::int64_t k = 1; k <= budget; ++k) {
    top_p_sum += calibrated_probabilities[order[static_cast<std::size_t>(k - 1)]];
    const double exp_hr = top_p_sum / expected_hits;
    const double exp_fdr =
        (static_cast<double>(k) - top_p_sum) / static_cast<double>(k);
    const double exp_bsds = exp_hr - params.lambda * exp_fdr;  // full coverage
    if (exp_bsds > best_value) {
      best_value = exp_bsds;
      best_k = k;
    }
  }

  Selection sel;
  sel.budget = budget;
  sel.selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best_k));
  return sel;
}

std::vector<std::int32_t> retrieval_order(const Eigen::VectorXd& scores,
                                          std::span<const Fingerprint> fingerprints,
                                          const KnowledgeBase& kb) {
  const Selection full = propose_retrieval(scores, fingerprints, kb, scores.size());
  return full.selected;
}

std::vector<std::int32_t> generative_order(const Eigen::VectorXd& scores,
                                           double temperature, Rng& rng) {
  const Selection full = propose_generative(scores, scores.size(), temperature, rng);
  return full.selected;
}

Eigen::VectorXd order_scores(std::span<const std::int32_t> order) {
  const std::int64_t n = static_cast<std::int64_t>(order.size());
  Eigen::VectorXd scores(n);
  for (std::int64_t pos = 0; pos < n; ++pos)
    scores[order[static_cast<std::size_t>(pos)]] = static_cast<double>(n - pos);
  return scores;
}

}  // namespace bsds
