#include "bsds/campaign.hpp"

#include "bsds/proposers.hpp"
#include "bsds/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace bsds {

const char* proposer_kind_name(ProposerKind kind) {
  switch (kind) {
    case ProposerKind::kRandom: return "random";
    case ProposerKind::kGreedyMl: return "greedy_ml";
    case ProposerKind::kInformedPrior: return "informed_prior";
    case ProposerKind::kRetrieval: return "retrieval";
    case ProposerKind::kGenerative: return "generative";
    case ProposerKind::kBsdsGuided: return "bsds_guided";
    case ProposerKind::kEnsemble: return "ensemble";
    case ProposerKind::kExternal: return "external";
    case ProposerKind::kScripted: return "scripted";
    case ProposerKind::kBsdsRecursive: return "bsds_recursive";
    case ProposerKind::kBsdsNoAug: return "bsds_noaug";
    case ProposerKind::kBsds1Round: return "bsds_1round";
    case ProposerKind::kGreedyMlpNn: return "greedy_mlp_nn";
  }
  return "unknown";
}

ProposerKind proposer_kind_from_name(const std::string& name) {
  static const std::unordered_map<std::string, ProposerKind> kMap = {
      {"random", ProposerKind::kRandom},
      {"greedy_ml", ProposerKind::kGreedyMl},
      {"informed_prior", ProposerKind::kInformedPrior},
      {"retrieval", ProposerKind::kRetrieval},
      {"generative", ProposerKind::kGenerative},
      {"bsds_guided", ProposerKind::kBsdsGuided},
      {"ensemble", ProposerKind::kEnsemble},
      {"external", ProposerKind::kExternal},
      {"scripted", ProposerKind::kScripted},
      {"bsds_recursive", ProposerKind::kBsdsRecursive},
      {"bsds_noaug", ProposerKind::kBsdsNoAug},
      {"bsds_1round", ProposerKind::kBsds1Round},
      {"greedy_mlp_nn", ProposerKind::kGreedyMlpNn},
  };
  const auto it = kMap.find(name);
  if (it == kMap.end()) throw io_error("unknown proposer kind '" + name + "'");
  return it->second;
}

const ScoreTable& CampaignInputs::table(const std::string& name) const {
  for (const auto& [table_name, table] : score_tables)
    if (table_name == name) return table;
  throw io_error("unknown score table '" + name + "'");
}

std::string CampaignConfig::canonical_string() const {
  std::ostringstream os;
  os << "lambda=" << format_double(params.lambda)
     << ";gamma=" << format_double(params.gamma) << ";fractions=";
  for (double f : budgets.fractions()) os << format_double(f) << ",";
  os << ";seed=" << master_seed << ";replicates=" << replicates
     << ";confidence=" << format_double(confidence)
     << ";kb_fraction=" << format_double(kb_fraction)
     << ";jackknife_cap=" << jackknife_cap << ";proposers=";
  for (const ProposerSpec& p : proposers) {
    os << p.name << ":" << proposer_kind_name(p.kind) << ":" << p.score_table
       << ":" << format_double(p.temperature) << ":" << p.rounds << ":"
       << p.trainer_folds << ",";
  }
  os << ";lambda_grid=";
  for (double v : lambda_grid) os << format_double(v) << ",";
  os << ";gamma_grid=";
  for (double v : gamma_grid) os << format_double(v) << ",";
  if (deployment) {
    os << ";deployment=" << format_double(deployment->unit_cost) << ":"
       << format_double(deployment->hit_value) << ":";
    for (std::int64_t b : deployment->budgets) os << b << ",";
  }
  return os.str();
}

namespace {

constexpr std::uint64_t kSweepPurpose = 6;
constexpr std::uint64_t kJackknifePurpose = 7;
constexpr std::uint64_t kFoldPurpose = 8;
constexpr std::uint64_t kBudgetFree = 0xffffffffULL;  // budget slot for
                                                      // budget-independent draws

bool needs_scores(ProposerKind k) {
  return k != ProposerKind::kRandom && k != ProposerKind::kScripted;
}

bool needs_fingerprints(ProposerKind k) {
  switch (k) {
    case ProposerKind::kRetrieval:
    case ProposerKind::kBsdsGuided:
    case ProposerKind::kEnsemble:
    case ProposerKind::kBsdsRecursive:
    case ProposerKind::kBsdsNoAug:
    case ProposerKind::kBsds1Round:
    case ProposerKind::kGreedyMlpNn:
      return true;
    default:
      return false;
  }
}

bool needs_knowledge_base(ProposerKind k) {
  return k == ProposerKind::kRetrieval || k == ProposerKind::kEnsemble;
}

bool is_mlp_kind(ProposerKind k) {
  return k == ProposerKind::kBsdsRecursive || k == ProposerKind::kBsdsNoAug ||
         k == ProposerKind::kBsds1Round || k == ProposerKind::kGreedyMlpNn;
}

// A static full-pool ranking exists, so candidate-level jackknife is exact.
bool has_static_ranking(ProposerKind k) {
  return k == ProposerKind::kGreedyMl || k == ProposerKind::kExternal ||
         k == ProposerKind::kInformedPrior;
}

struct SeedView {
  const LabeledPool* pool = nullptr;
  LabeledPool pool_storage;
  std::vector<std::int32_t> index_map;  // empty at seed 0
  std::vector<std::pair<std::string, Eigen::VectorXd>> scores;
  std::vector<Fingerprint> fp_storage;
  const std::vector<Fingerprint>* fingerprints = nullptr;
  Eigen::VectorXd prior, admet;
  Eigen::MatrixXd features;
  bool has_prior = false, has_admet = false, has_features = false;

  const Eigen::VectorXd& score_values(const std::string& name) const {
    for (const auto& [n, v] : scores)
      if (n == name) return v;
    throw io_error("unknown score table '" + name + "'");
  }
};

struct Needs {
  bool fingerprints = false;
  bool knowledge_base = false;
  bool prior = false;
  bool admet = false;
  bool features = false;
};

Needs collect_needs(const CampaignConfig& config) {
  Needs needs;
  for (const ProposerSpec& p : config.proposers) {
    if (needs_fingerprints(p.kind)) needs.fingerprints = true;
    if (needs_knowledge_base(p.kind)) needs.knowledge_base = true;
    if (p.kind == ProposerKind::kInformedPrior || p.kind == ProposerKind::kEnsemble)
      needs.prior = true;
    if (is_mlp_kind(p.kind)) {
      needs.prior = true;
      needs.admet = true;
      needs.features = true;
      needs.fingerprints = true;
    }
  }
  return needs;
}

SeedView make_seed_view(const CampaignInputs& inputs, const CampaignConfig& config,
                        const Needs& needs, std::int64_t seed) {
  SeedView view;
  const PoolData& data = inputs.data;
  if (seed == 0) {
    view.pool = &data.pool;
    for (const auto& [name, table] : inputs.score_tables)
      view.scores.emplace_back(name, table.values);
    if (needs.fingerprints && data.has_fingerprints())
      view.fingerprints = &data.fingerprints;
    if (needs.prior && data.has_prior()) {
      view.prior = data.prior;
      view.has_prior = true;
    }
    if (needs.admet && data.has_admet()) {
      view.admet = data.admet;
      view.has_admet = true;
    }
    if (needs.features && data.features.cols() > 0) {
      view.features = data.features;
      view.has_features = true;
    }
    return view;
  }

  Rng rng(derive_stream({config.master_seed, stream_purpose::resample,
                         static_cast<std::uint64_t>(seed)}));
  Resample resample = resample_pool(data.pool, rng);
  view.pool_storage = std::move(resample.pool);
  view.pool = &view.pool_storage;
  view.index_map = std::move(resample.index_map);

  const auto gather_vec = [&](const Eigen::VectorXd& src) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(view.index_map.size()));
    for (std::size_t i = 0; i < view.index_map.size(); ++i)
      out[static_cast<Eigen::Index>(i)] = src[view.index_map[i]];
    return out;
  };

  for (const auto& [name, table] : inputs.score_tables)
    view.scores.emplace_back(name, gather_vec(table.values));
  if (needs.fingerprints && data.has_fingerprints()) {
    view.fp_storage.reserve(view.index_map.size());
    for (std::int32_t src : view.index_map)
      view.fp_storage.push_back(data.fingerprints[static_cast<std::size_t>(src)]);
    view.fingerprints = &view.fp_storage;
  }
  if (needs.prior && data.has_prior()) {
    view.prior = gather_vec(data.prior);
    view.has_prior = true;
  }
  if (needs.admet && data.has_admet()) {
    view.admet = gather_vec(data.admet);
    view.has_admet = true;
  }
  if (needs.features && data.features.cols() > 0) {
    view.features.resize(static_cast<Eigen::Index>(view.index_map.size()),
                         data.features.cols());
    for (std::size_t i = 0; i < view.index_map.size(); ++i)
      view.features.row(static_cast<Eigen::Index>(i)) =
          data.features.row(view.index_map[i]);
    view.has_features = true;
  }
  return view;
}

// Rates of every budget prefix of a fixed pick order, full coverage.
std::vector<ComponentRates> rates_from_ranking(
    const LabeledPool& pool, std::span<const std::int32_t> order,
    std::span<const std::int64_t> budgets) {
  std::vector<std::int64_t> prefix_hits(order.size() + 1, 0);
  for (std::size_t i = 0; i < order.size(); ++i)
    prefix_hits[i + 1] =
        prefix_hits[i] + pool.labels[static_cast<std::size_t>(order[i])];

  std::vector<ComponentRates> out;
  out.reserve(budgets.size());
  for (std::int64_t b : budgets) {
    if (b > static_cast<std::int64_t>(order.size()))
      throw std::invalid_argument("budget exceeds ranking length");
    ComponentRates r;
    r.tp = prefix_hits[static_cast<std::size_t>(b)];
    r.selected = b;
    r.degenerate_pool = (pool.hit_count == 0);
    r.hr = r.degenerate_pool
               ? 0.0
               : static_cast<double>(r.tp) / static_cast<double>(pool.hit_count);
    r.fdr = static_cast<double>(b - r.tp) / static_cast<double>(b);
    r.cov = 1.0;
    r.ppv = static_cast<double>(r.tp) / static_cast<double>(b);
    out.push_back(r);
  }
  return out;
}

Eigen::MatrixXd assemble_recursive_features(
    const SeedView& view, const std::string& score_table,
    std::span<const std::vector<std::int32_t>> folds) {
  if (!view.has_features)
    throw io_error("recursive proposer skipped: pool has no feature columns");
  if (!view.fingerprints)
    throw io_error("recursive proposer skipped: pool has no fingerprints");
  if (!view.has_prior)
    throw io_error("recursive proposer skipped: pool has no prior column");
  if (!view.has_admet)
    throw io_error("recursive proposer skipped: pool has no admet column");

  const Eigen::VectorXd& ml = view.score_values(score_table);
  const LabeledPool& pool = *view.pool;
  const std::int64_t n = pool.size();

  // Nearest-active Tanimoto against out-of-own-fold actives only.
  Eigen::VectorXd nearest_active = Eigen::VectorXd::Zero(n);
  for (const auto& fold : folds) {
    std::vector<char> in_fold(static_cast<std::size_t>(n), 0);
    for (std::int32_t i : fold) in_fold[static_cast<std::size_t>(i)] = 1;
    std::vector<std::int32_t> out_actives;
    for (std::int32_t j = 0; j < n; ++j)
      if (!in_fold[static_cast<std::size_t>(j)] &&
          pool.labels[static_cast<std::size_t>(j)])
        out_actives.push_back(j);
    for (std::int32_t i : fold) {
      double best = 0.0;
      for (std::int32_t j : out_actives)
        best = std::max(best, tanimoto((*view.fingerprints)[static_cast<std::size_t>(i)],
                                       (*view.fingerprints)[static_cast<std::size_t>(j)]));
      nearest_active[i] = best;
    }
  }

  const Eigen::Index d = 1 + view.features.cols() + 3;
  Eigen::MatrixXd out(n, d);
  out.col(0) = ml;
  out.middleCols(1, view.features.cols()) = view.features;
  out.col(1 + view.features.cols()) = nearest_active;
  out.col(2 + view.features.cols()) = view.prior;
  out.col(3 + view.features.cols()) = view.admet;
  return out;
}

std::vector<ComponentRates> evaluate_proposer(
    const CampaignConfig& config, const SeedView& view, const KnowledgeBase* kb,
    const ProposerSpec& spec, std::size_t proposer_index, std::int64_t seed,
    std::span<const std::int64_t> budgets) {
  const LabeledPool& pool = *view.pool;
  const std::int64_t max_budget = *std::max_element(budgets.begin(), budgets.end());

  const auto proposer_stream = [&](std::uint64_t budget_slot) {
    return derive_stream({config.master_seed, stream_purpose::proposer,
                          static_cast<std::uint64_t>(seed),
                          static_cast<std::uint64_t>(proposer_index), budget_slot});
  };

  const auto require_kb = [&]() -> const KnowledgeBase& {
    if (!kb) throw io_error("knowledge base unavailable for this seed");
    return *kb;
  };

  switch (spec.kind) {
    case ProposerKind::kRandom: {
      std::vector<ComponentRates> out;
      out.reserve(budgets.size());
      for (std::size_t b = 0; b < budgets.size(); ++b) {
        Rng rng(proposer_stream(b));
        out.push_back(component_rates(pool, propose_random(pool, budgets[b], rng)));
      }
      return out;
    }
    case ProposerKind::kGreedyMl:
    case ProposerKind::kExternal: {
      const auto order = rank_by_score(view.score_values(spec.score_table));
      return rates_from_ranking(pool, order, budgets);
    }
    case ProposerKind::kInformedPrior: {
      if (!view.has_prior)
        throw io_error("informed_prior proposer needs a prior column");
      const Eigen::VectorXd blended =
          0.6 * view.score_values(spec.score_table) + 0.4 * view.prior;
      return rates_from_ranking(pool, rank_by_score(blended), budgets);
    }
    case ProposerKind::kRetrieval: {
      if (!view.fingerprints)
        throw io_error("retrieval proposer needs fingerprints");
      // The greedy loop is budget-prefix-consistent: smaller budgets select
      // exact prefixes of the same pick order.
      const Selection sel =
          propose_retrieval(view.score_values(spec.score_table),
                            *view.fingerprints, require_kb(), max_budget);
      return rates_from_ranking(pool, sel.selected, budgets);
    }
    case ProposerKind::kGenerative: {
      std::vector<ComponentRates> out;
      out.reserve(budgets.size());
      for (std::size_t b = 0; b < budgets.size(); ++b) {
        Rng rng(proposer_stream(b));
        out.push_back(component_rates(
            pool, propose_generative(view.score_values(spec.score_table),
                                     budgets[b], spec.temperature, rng)));
      }
      return out;
    }
    case ProposerKind::kBsdsGuided: {
      if (!view.fingerprints)
        throw io_error("bsds_guided proposer needs fingerprints");
      std::vector<ComponentRates> out;
      out.reserve(budgets.size());
      for (std::size_t b = 0; b < budgets.size(); ++b) {
        LabelOracle oracle(pool);
        out.push_back(component_rates(
            pool, propose_bsds_guided(view.score_values(spec.score_table),
                                      *view.fingerprints, budgets[b],
                                      spec.rounds, oracle)));
      }
      return out;
    }
    case ProposerKind::kEnsemble: {
      if (!view.has_prior) throw io_error("ensemble proposer needs a prior column");
      if (!view.fingerprints) throw io_error("ensemble proposer needs fingerprints");
      const Eigen::VectorXd& ml = view.score_values(spec.score_table);
      std::vector<Eigen::VectorXd> components;
      components.push_back(0.6 * ml + 0.4 * view.prior);
      components.push_back(order_scores(
          retrieval_order(ml, *view.fingerprints, require_kb())));
      Rng rng(proposer_stream(kBudgetFree));
      components.push_back(order_scores(generative_order(ml, spec.temperature, rng)));
      std::vector<ComponentRates> out;
      out.reserve(budgets.size());
      for (std::int64_t b : budgets)
        out.push_back(component_rates(
            pool, propose_ensemble(components, ml, b, config.params)));
      return out;
    }
    case ProposerKind::kScripted: {
      if (seed != 0)
        throw io_error("scripted proposer is only defined on the full pool");
      std::unordered_map<std::string, std::int32_t> index_of;
      for (std::int32_t i = 0; i < pool.size(); ++i)
        index_of.emplace(pool.ids[static_cast<std::size_t>(i)], i);
      const auto to_indices = [&](const std::vector<std::string>& ids) {
        std::vector<std::int32_t> out;
        out.reserve(ids.size());
        for (const std::string& id : ids) {
          const auto it = index_of.find(id);
          if (it == index_of.end())
            throw io_error("scripted proposer: unknown id '" + id + "'");
          out.push_back(it->second);
        }
        return out;
      };
      const std::vector<std::int32_t> chosen = to_indices(spec.scripted_selected);
      std::vector<std::int32_t> abstained = to_indices(spec.scripted_abstained);
      if (spec.scripted_abstain_rest) {
        std::vector<char> used(static_cast<std::size_t>(pool.size()), 0);
        for (std::int32_t i : chosen) used[static_cast<std::size_t>(i)] = 1;
        for (std::int32_t i = 0; i < pool.size(); ++i)
          if (!used[static_cast<std::size_t>(i)]) abstained.push_back(i);
      }
      std::vector<ComponentRates> out;
      out.reserve(budgets.size());
      for (std::int64_t b : budgets) {
        Selection sel;
        sel.budget = b;
        const auto take = std::min<std::int64_t>(
            b, static_cast<std::int64_t>(chosen.size()));
        sel.selected.assign(chosen.begin(), chosen.begin() + take);
        std::vector<char> in_sel(static_cast<std::size_t>(pool.size()), 0);
        for (std::int32_t i : sel.selected) in_sel[static_cast<std::size_t>(i)] = 1;
        for (std::int32_t i : abstained)
          if (!in_sel[static_cast<std::size_t>(i)]) sel.abstained.push_back(i);
        out.push_back(component_rates(pool, sel));
      }
      return out;
    }
    case ProposerKind::kBsdsRecursive:
    case ProposerKind::kBsdsNoAug:
    case ProposerKind::kBsds1Round:
    case ProposerKind::kGreedyMlpNn: {
      SoftBsdsConfig trainer = spec.trainer;
      trainer.params = config.params;
      trainer.budget_fractions = config.budgets.fractions();
      trainer.seed = derive_stream({config.master_seed, stream_purpose::trainer,
                                    static_cast<std::uint64_t>(seed),
                                    static_cast<std::uint64_t>(proposer_index)});
      TrainLoss loss = TrainLoss::kSoftBsds;
      if (spec.kind == ProposerKind::kBsdsNoAug) trainer.augment = false;
      if (spec.kind == ProposerKind::kBsds1Round)
        trainer.alpha_schedule = {trainer.alpha_schedule.front()};
      if (spec.kind == ProposerKind::kGreedyMlpNn) loss = TrainLoss::kBce;

      Rng fold_rng(derive_stream({config.master_seed, kFoldPurpose,
                                  static_cast<std::uint64_t>(seed),
                                  static_cast<std::uint64_t>(proposer_index)}));
      const auto folds = grouped_folds(pool, spec.trainer_folds,
                                       FoldMode::kRandomStratified, {}, fold_rng);
      const Eigen::MatrixXd features =
          assemble_recursive_features(view, spec.score_table, folds);
      const TrainResult trained = train_recursive(
          features, std::span<const std::uint8_t>(pool.labels), folds, trainer, loss);
      return rates_from_ranking(pool, rank_by_score(trained.scores), budgets);
    }
  }
  throw std::logic_error("unhandled proposer kind");
}

// Leave-one-candidate-out DQS values on the seed-0 ranking, cap applied.
std::vector<double> ranking_jackknife(const LabeledPool& pool,
                                      std::span<const std::int32_t> order,
                                      const BudgetGrid& grid,
                                      const BsdsParams& params,
                                      std::int64_t cap, Rng& rng) {
  const std::int64_t n = pool.size();
  if (n < 3) return {};
  std::vector<std::int64_t> prefix_hits(static_cast<std::size_t>(n) + 1, 0);
  std::vector<std::int64_t> position(static_cast<std::size_t>(n), 0);
  for (std::int64_t i = 0; i < n; ++i) {
    prefix_hits[static_cast<std::size_t>(i) + 1] =
        prefix_hits[static_cast<std::size_t>(i)] +
        pool.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    position[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;
  }

  std::vector<std::int32_t> points(static_cast<std::size_t>(n));
  std::iota(points.begin(), points.end(), 0);
  if (cap > 0 && n > cap) {
    for (std::int64_t i = 0; i < cap; ++i) {
      const std::uint64_t j = i + rng.next_below(static_cast<std::uint64_t>(n - i));
      std::swap(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
    }
    points.resize(static_cast<std::size_t>(cap));
    std::sort(points.begin(), points.end());
  }

  const std::vector<std::int64_t> budgets = grid.resolve(n - 1);
  std::vector<double> out;
  out.reserve(points.size());
  for (std::int32_t q : points) {
    const std::int64_t g_q = pool.labels[static_cast<std::size_t>(q)];
    const std::int64_t hits = pool.hit_count - g_q;
    const std::int64_t pos_q = position[static_cast<std::size_t>(q)];
    double acc = 0.0;
    for (std::int64_t b : budgets) {
      std::int64_t tp;
      if (pos_q < b)
        tp = prefix_hits[static_cast<std::size_t>(b) + 1] - g_q;
      else
        tp = prefix_hits[static_cast<std::size_t>(b)];
      const double hr = (hits > 0) ? static_cast<double>(tp) / static_cast<double>(hits) : 0.0;
      const double fdr = static_cast<double>(b - tp) / static_cast<double>(b);
      acc += hr - params.lambda * fdr;  // cov = 1
    }
    out.push_back(acc / static_cast<double>(budgets.size()));
  }
  return out;
}

}  // namespace

ReportBundle run_campaign(const CampaignInputs& inputs,
                          const CampaignConfig& config) {
  if (config.proposers.empty())
    throw io_error("campaign has no proposers configured");
  if (config.replicates < 1)
    throw io_error("campaign needs replicates >= 1");
  for (const ProposerSpec& spec : config.proposers)
    if (needs_scores(spec.kind) && spec.score_table.empty())
      throw io_error("proposer '" + spec.name + "' needs a score table");
  for (const auto& [name, table] : inputs.score_tables)
    if (table.values.size() != inputs.data.pool.size())
      throw io_error("score table '" + name + "' not aligned to pool");

  const Needs needs = collect_needs(config);
  const std::int64_t n = inputs.data.pool.size();
  const std::vector<std::int64_t> budgets = config.budgets.resolve(n);
  const std::size_t n_proposers = config.proposers.size();
  const std::size_t n_budgets = budgets.size();

  // Per proposer, per successful seed: DQS and per-budget BSDS.
  std::vector<std::vector<std::pair<std::int64_t, double>>> seed_dqs(n_proposers);
  std::vector<std::vector<std::vector<double>>> seed_bsds(
      n_proposers, std::vector<std::vector<double>>(n_budgets));
  std::vector<std::optional<std::vector<ComponentRates>>> seed0_rates(n_proposers);
  std::vector<std::int64_t> failure_count(n_proposers, 0);
  std::vector<std::string> first_failure(n_proposers);

  for (std::int64_t seed = 0; seed < config.replicates; ++seed) {
    const SeedView view = make_seed_view(inputs, config, needs, seed);

    std::optional<KnowledgeBase> kb;
    std::string kb_error;
    if (needs.knowledge_base) {
      if (!view.fingerprints) {
        kb_error = "pool has no fingerprints";
      } else {
        try {
          Rng rng(derive_stream({config.master_seed, stream_purpose::knowledge_base,
                                 static_cast<std::uint64_t>(seed)}));
          kb = sample_knowledge_base(*view.pool, *view.fingerprints,
                                     config.kb_fraction, rng);
        } catch (const std::exception& e) {
          kb_error = e.what();
        }
      }
    }

    for (std::size_t p = 0; p < n_proposers; ++p) {
      const ProposerSpec& spec = config.proposers[p];
      try {
        if (needs_knowledge_base(spec.kind) && !kb)
          throw io_error("knowledge base unavailable: " + kb_error);
        std::vector<ComponentRates> rates = evaluate_proposer(
            config, view, kb ? &*kb : nullptr, spec, p, seed, budgets);
        std::vector<double> per_budget;
        per_budget.reserve(n_budgets);
        for (std::size_t b = 0; b < n_budgets; ++b) {
          const double score = bsds_score(rates[b], config.params);
          per_budget.push_back(score);
          seed_bsds[p][b].push_back(score);
        }
        seed_dqs[p].emplace_back(seed, dqs(per_budget));
        if (seed == 0) seed0_rates[p] = std::move(rates);
      } catch (const std::exception& e) {
        ++failure_count[p];
        if (first_failure[p].empty()) {
          std::ostringstream os;
          os << "seed " << seed << ": " << e.what();
          first_failure[p] = os.str();
        }
      }
    }
  }

  ReportBundle bundle;
  bundle.config_hash = config_hash(config.canonical_string());
  for (const ProposerSpec& spec : config.proposers)
    bundle.proposer_names.push_back(spec.name);

  // Seed-0 metric rows.
  for (std::size_t p = 0; p < n_proposers; ++p) {
    if (!seed0_rates[p]) continue;
    for (std::size_t b = 0; b < n_budgets; ++b) {
      MetricRow row;
      row.proposer = config.proposers[p].name;
      row.fraction = config.budgets.fractions()[b];
      row.budget = budgets[b];
      row.rates = (*seed0_rates[p])[b];
      row.bsds = bsds_score(row.rates, config.params);
      bundle.metrics.push_back(std::move(row));
    }
  }

  // DQS rows, with bootstrap summaries when replicates were run.
  for (std::size_t p = 0; p < n_proposers; ++p) {
    if (seed_dqs[p].empty()) continue;
    const auto& entries = seed_dqs[p];
    const bool have_seed0 = entries.front().first == 0;
    if (!have_seed0) continue;  // seed-0 failure: reported in notes only

    DqsRow row;
    row.proposer = config.proposers[p].name;
    row.dqs_seed0 = entries.front().second;

    if (config.replicates > 1) {
      std::vector<double> replicate_values;
      replicate_values.reserve(entries.size());
      for (const auto& [seed, value] : entries)
        if (seed != 0) replicate_values.push_back(value);

      std::vector<double> jackknife;
      const ProposerSpec& spec = config.proposers[p];
      if (has_static_ranking(spec.kind) && seed0_rates[p]) {
        const SeedView seed0_view = make_seed_view(inputs, config, needs, 0);
        Eigen::VectorXd ranking_scores;
        if (spec.kind == ProposerKind::kInformedPrior)
          ranking_scores = 0.6 * seed0_view.score_values(spec.score_table) +
                           0.4 * seed0_view.prior;
        else
          ranking_scores = seed0_view.score_values(spec.score_table);
        Rng rng(derive_stream({config.master_seed, kJackknifePurpose,
                               static_cast<std::uint64_t>(p)}));
        jackknife = ranking_jackknife(*seed0_view.pool,
                                      rank_by_score(ranking_scores),
                                      config.budgets, config.params,
                                      config.jackknife_cap, rng);
      } else {
        bundle.notes.push_back(config.proposers[p].name +
                               ": BCa acceleration a=0 (no candidate-level "
                               "jackknife for this strategy)");
      }
      row.summary = summarize_bootstrap(row.dqs_seed0, replicate_values,
                                        jackknife, config.confidence);

      for (const auto& [seed, value] : entries) {
        DistributionRow d;
        d.proposer = config.proposers[p].name;
        d.seed = seed;
        d.dqs = value;
        bundle.distributions.push_back(std::move(d));
      }

      for (std::size_t b = 0; b < n_budgets; ++b) {
        BudgetSummaryRow bs;
        bs.proposer = config.proposers[p].name;
        bs.fraction = config.budgets.fractions()[b];
        bs.budget = budgets[b];
        bs.bsds_seed0 = seed_bsds[p][b].front();
        const std::vector<double>& all = seed_bsds[p][b];
        const std::vector<double> replicate_values_b(all.begin() + 1, all.end());
        bs.summary = summarize_bootstrap(bs.bsds_seed0, replicate_values_b, {},
                                         config.confidence);
        bundle.budget_summaries.push_back(std::move(bs));
      }
    }
    bundle.dqs_rows.push_back(std::move(row));
  }

  for (std::size_t p = 0; p < n_proposers; ++p)
    if (failure_count[p] > 0) {
      std::ostringstream os;
      os << config.proposers[p].name << ": " << failure_count[p] << "/"
         << config.replicates << " seeds failed (first: " << first_failure[p]
         << ")";
      bundle.notes.push_back(os.str());
    }

  if (config.compute_auxiliary) {
    for (const auto& [name, table] : inputs.score_tables) {
      for (std::size_t b = 0; b < n_budgets; ++b) {
        AuxiliaryRow row;
        row.table = name;
        row.fraction = config.budgets.fractions()[b];
        row.budget = budgets[b];
        row.metrics = auxiliary_metrics(inputs.data.pool, table, budgets[b]);
        bundle.auxiliary.push_back(std::move(row));
      }
    }
  }

  if (!config.lambda_grid.empty() && !config.gamma_grid.empty()) {
    std::vector<std::vector<ComponentRates>> grid_rates;
    for (std::size_t p = 0; p < n_proposers; ++p)
      if (seed0_rates[p]) {
        grid_rates.push_back(*seed0_rates[p]);
        bundle.sensitivity_proposers.push_back(config.proposers[p].name);
      }
    if (!grid_rates.empty())
      bundle.sensitivity = sensitivity_grid(grid_rates, config.lambda_grid,
                                            config.gamma_grid, config.params);
  }

  if (config.deployment)
    bundle.deployment = deployment_simulation(inputs, *config.deployment);

  return bundle;
}

std::vector<TemperatureRow> temperature_sweep(const CampaignInputs& inputs,
                                              const CampaignConfig& config,
                                              const std::string& score_table,
                                              std::span<const double> temperatures) {
  if (temperatures.empty())
    throw io_error("temperature sweep needs at least one temperature");
  for (double t : temperatures)
    if (!(t > 0.0)) throw io_error("temperatures must be positive");

  const ScoreTable& table = inputs.table(score_table);
  const LabeledPool& pool = inputs.data.pool;
  const std::vector<std::int64_t> budgets = config.budgets.resolve(pool.size());

  std::vector<TemperatureRow> out;
  out.reserve(temperatures.size());
  for (double tau : temperatures) {
    std::vector<double> per_budget;
    per_budget.reserve(budgets.size());
    for (std::size_t b = 0; b < budgets.size(); ++b) {
      // Streams keyed by budget only, shared across temperatures.
      Rng rng(derive_stream({config.master_seed, kSweepPurpose,
                             static_cast<std::uint64_t>(b)}));
      const Selection sel =
          propose_generative(table.values, budgets[b], tau, rng);
      per_budget.push_back(bsds_score(component_rates(pool, sel), config.params));
    }
    out.push_back(TemperatureRow{tau, dqs(per_budget)});
  }
  return out;
}

std::vector<DeploymentRow> deployment_simulation(
    const CampaignInputs& inputs, const DeploymentEconomics& economics) {
  if (!(economics.unit_cost > 0.0))
    throw io_error("deployment unit cost must be positive");
  if (economics.hit_value < 0.0)
    throw io_error("deployment hit value must be non-negative");
  const LabeledPool& pool = inputs.data.pool;
  std::vector<DeploymentRow> out;
  for (const auto& [name, table] : inputs.score_tables) {
    const auto order = rank_by_score(table.values);
    std::vector<std::int64_t> prefix_hits(order.size() + 1, 0);
    for (std::size_t i = 0; i < order.size(); ++i)
      prefix_hits[i + 1] =
          prefix_hits[i] + pool.labels[static_cast<std::size_t>(order[i])];
    for (std::int64_t b : economics.budgets) {
      if (b <= 0 || b > pool.size())
        throw io_error("deployment budget outside (0, N]");
      DeploymentRow row;
      row.strategy = name;
      row.budget = b;
      row.hits = prefix_hits[static_cast<std::size_t>(b)];
      row.hit_rate = static_cast<double>(row.hits) / static_cast<double>(b);
      row.cost = static_cast<double>(b) * economics.unit_cost;
      const double value = static_cast<double>(row.hits) * economics.hit_value;
      row.roi = (value - row.cost) / row.cost;
      out.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace bsds
