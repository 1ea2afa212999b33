#include "bsds/types.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace bsds {

LabeledPool make_labeled_pool(std::vector<std::string> ids,
                              std::vector<std::uint8_t> labels) {
  if (labels.empty()) throw std::invalid_argument("pool must have N >= 1");
  if (!ids.empty() && ids.size() != labels.size())
    throw std::invalid_argument("pool ids/labels length mismatch");
  LabeledPool pool;
  pool.ids = std::move(ids);
  pool.labels = std::move(labels);
  for (std::uint8_t g : pool.labels) {
    if (g > 1) throw std::invalid_argument("pool labels must be 0 or 1");
    pool.hit_count += g;
  }
  pool.prevalence =
      static_cast<double>(pool.hit_count) / static_cast<double>(pool.size());
  return pool;
}

LabeledPool make_labeled_pool(std::vector<std::uint8_t> labels) {
  return make_labeled_pool({}, std::move(labels));
}

void validate_selection(const LabeledPool& pool, const Selection& sel) {
  const std::int64_t n = pool.size();
  if (sel.budget <= 0) throw std::invalid_argument("budget must be positive");
  if (static_cast<std::int64_t>(sel.selected.size()) > sel.budget)
    throw std::invalid_argument("selection exceeds budget");
  std::unordered_set<std::int32_t> seen;
  seen.reserve(sel.selected.size() + sel.abstained.size());
  for (std::int32_t i : sel.selected) {
    if (i < 0 || i >= n) throw std::out_of_range("selected index out of range");
    if (!seen.insert(i).second)
      throw std::invalid_argument("duplicate index in selection");
  }
  for (std::int32_t i : sel.abstained) {
    if (i < 0 || i >= n) throw std::out_of_range("abstained index out of range");
    if (!seen.insert(i).second)
      throw std::invalid_argument("selected and abstained sets overlap");
  }
}

std::int64_t resolve_budget(double fraction, std::int64_t n) {
  const double b = std::floor(fraction * static_cast<double>(n) + 0.5);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(b));
}

BudgetGrid::BudgetGrid(std::vector<double> fractions)
    : fractions_(std::move(fractions)) {
  if (fractions_.empty())
    throw std::invalid_argument("budget grid must be non-empty");
  double prev = 0.0;
  for (double f : fractions_) {
    if (!(f > prev) || f > 1.0)
      throw std::invalid_argument(
          "budget fractions must be strictly increasing in (0,1]");
    prev = f;
  }
}

BudgetGrid BudgetGrid::standard() {
  return BudgetGrid({0.01, 0.02, 0.05, 0.10, 0.20, 0.50});
}

std::vector<std::int64_t> BudgetGrid::resolve(std::int64_t n) const {
  std::vector<std::int64_t> out;
  out.reserve(fractions_.size());
  for (double f : fractions_) out.push_back(resolve_budget(f, n));
  return out;
}

ScoreTable make_score_table(Eigen::VectorXd values, std::string provenance,
                            bool calibrated_probability) {
  if (!values.allFinite())
    throw std::invalid_argument("score table contains non-finite values");
  return ScoreTable{std::move(values), std::move(provenance),
                    calibrated_probability};
}

}  // namespace bsds
