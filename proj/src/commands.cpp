#include "bsds/commands.hpp"

#include "bsds/metrics.hpp"
#include "bsds/proposers.hpp"
#include "bsds/soft_objective.hpp"
#include "bsds/stats.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace bsds {

namespace {

using nlohmann::json;

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw io_error(path.string() + ": " + e.what());
  }
}

ProposerSpec parse_proposer(const json& j) {
  ProposerSpec spec;
  if (!j.contains("kind")) throw io_error("proposer entry missing 'kind'");
  spec.kind = proposer_kind_from_name(j.at("kind").get<std::string>());
  spec.name = j.value("name", std::string(proposer_kind_name(spec.kind)));
  spec.score_table = j.value("scores", std::string());
  spec.temperature = j.value("temperature", 0.1);
  spec.rounds = j.value("rounds", std::int64_t{3});
  if (j.contains("selected"))
    spec.scripted_selected = j.at("selected").get<std::vector<std::string>>();
  if (j.contains("abstained"))
    spec.scripted_abstained = j.at("abstained").get<std::vector<std::string>>();
  spec.scripted_abstain_rest = j.value("abstain_rest", false);
  spec.trainer_folds = j.value("folds", 5);
  spec.trainer.epochs_per_round = j.value("epochs", 300);
  spec.trainer.step_size = j.value("step_size", 0.05);
  if (j.contains("hidden"))
    spec.trainer.hidden_sizes = j.at("hidden").get<std::vector<std::int32_t>>();
  if (j.contains("alpha_schedule"))
    spec.trainer.alpha_schedule = j.at("alpha_schedule").get<std::vector<double>>();
  return spec;
}

void apply_preset(CampaignConfig& config, const std::string& preset) {
  // Cost-ratio presets: lambda = c_fp / v_hit, gamma = c_abstain / v_hit.
  if (preset == "hts") {
    config.params = {5000.0 / 50000.0, 1500.0 / 50000.0};
  } else if (preset == "clinical") {
    config.params = {10000.0 / 10000.0, 3000.0 / 10000.0};
  } else if (preset == "av") {
    config.params = {200.0 / 1000000.0, 50000.0 / 1000000.0};
  } else {
    throw io_error("unknown preset '" + preset + "' (hts, clinical, av)");
  }
}

json config_json(const CampaignArgs& args) {
  if (args.config_path.empty()) return json::object();
  return load_json(args.config_path);
}

struct LoadedCampaign {
  CampaignInputs inputs;
  CampaignConfig config;
  std::vector<double> temperatures;
};

LoadedCampaign load_campaign(const CampaignArgs& args, bool need_pool = true) {
  LoadedCampaign out;
  const json j = config_json(args);

  CampaignConfig& config = out.config;
  if (j.contains("preset")) apply_preset(config, j.at("preset").get<std::string>());
  if (args.preset) apply_preset(config, *args.preset);
  config.params.lambda = j.value("lambda", config.params.lambda);
  config.params.gamma = j.value("gamma", config.params.gamma);
  if (args.lambda) config.params.lambda = *args.lambda;
  if (args.gamma) config.params.gamma = *args.gamma;
  if (config.params.lambda < 0.0 || config.params.gamma < 0.0)
    throw io_error("lambda and gamma must be non-negative");

  std::vector<double> fractions = BudgetGrid::standard().fractions();
  if (j.contains("budget_fractions"))
    fractions = j.at("budget_fractions").get<std::vector<double>>();
  if (args.budget_fractions) fractions = *args.budget_fractions;
  try {
    config.budgets = BudgetGrid(fractions);
  } catch (const std::exception& e) {
    throw io_error(std::string("bad budget fractions: ") + e.what());
  }

  config.master_seed = j.value("master_seed", std::uint64_t{1});
  if (args.master_seed) config.master_seed = *args.master_seed;
  config.replicates = j.value("replicates", std::int64_t{1});
  if (args.replicates) config.replicates = *args.replicates;
  if (config.replicates < 1) throw io_error("replicates must be >= 1");
  config.confidence = j.value("confidence", 0.95);
  config.kb_fraction = j.value("kb_fraction", 0.10);
  config.jackknife_cap = j.value("jackknife_cap", std::int64_t{2000});

  if (j.contains("proposers"))
    for (const json& p : j.at("proposers"))
      config.proposers.push_back(parse_proposer(p));

  if (j.contains("sensitivity")) {
    const json& s = j.at("sensitivity");
    config.lambda_grid = s.value("lambda_grid", std::vector<double>{});
    config.gamma_grid = s.value("gamma_grid", std::vector<double>{});
  }

  if (j.contains("deployment")) {
    const json& d = j.at("deployment");
    DeploymentEconomics econ;
    econ.unit_cost = d.value("unit_cost", 5.0);
    econ.hit_value = d.value("hit_value", 50.0);
    if (d.contains("budgets"))
      econ.budgets = d.at("budgets").get<std::vector<std::int64_t>>();
    config.deployment = econ;
  }

  out.temperatures = j.value("temperatures", std::vector<double>{});

  if (need_pool) {
    if (args.pool_path.empty()) throw io_error("no pool file given (--pool)");
    out.inputs.data = load_pool(args.pool_path);
    for (const auto& [name, path] : args.score_paths)
      out.inputs.score_tables.emplace_back(
          name, load_scores(path, out.inputs.data.pool));
  }
  return out;
}

int report_and_return(const ReportBundle& bundle, const CampaignArgs& args) {
  const std::filesystem::path dir = resolve_out_dir(args.out_dir);
  const auto written = emit_report(bundle, args.format, dir);
  for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
  for (const std::string& note : bundle.notes)
    std::cout << "note: " << note << "\n";
  return kExitOk;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const io_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
}

}  // namespace

std::filesystem::path resolve_out_dir(const std::filesystem::path& requested) {
  if (!requested.empty()) return requested;
  if (const char* env = std::getenv("BSDS_OUT_DIR"); env && *env)
    return std::filesystem::path(env);
  return std::filesystem::path("bsds_report");
}

CampaignConfig load_campaign_config(const CampaignArgs& args) {
  return load_campaign(args, /*need_pool=*/false).config;
}

int cmd_evaluate(const CampaignArgs& args) {
  return guarded([&] {
    LoadedCampaign campaign = load_campaign(args);
    campaign.config.replicates = 1;
    if (args.replicates && *args.replicates != 1)
      throw io_error("evaluate runs seed 0 only; use bootstrap for replicates");
    if (campaign.config.proposers.empty())
      throw io_error("no proposers configured");
    const ReportBundle bundle = run_campaign(campaign.inputs, campaign.config);
    return report_and_return(bundle, args);
  });
}

int cmd_bootstrap(const CampaignArgs& args) {
  return guarded([&] {
    LoadedCampaign campaign = load_campaign(args);
    if (campaign.config.proposers.empty())
      throw io_error("no proposers configured");
    if (campaign.config.replicates < 1)
      throw io_error("bootstrap needs replicates >= 1");
    const ReportBundle bundle = run_campaign(campaign.inputs, campaign.config);
    return report_and_return(bundle, args);
  });
}

int cmd_sweep_temperature(const SweepArgs& args) {
  return guarded([&] {
    LoadedCampaign campaign = load_campaign(args.common);
    std::vector<double> temperatures = args.temperatures;
    if (temperatures.empty()) temperatures = campaign.temperatures;
    if (temperatures.empty()) temperatures = {0.1, 0.2, 0.5, 1.0, 2.0};
    std::string table = args.score_table;
    if (table.empty()) {
      if (campaign.inputs.score_tables.empty())
        throw io_error("temperature sweep needs a score table");
      table = campaign.inputs.score_tables.front().first;
    }
    ReportBundle bundle;
    bundle.config_hash = config_hash(campaign.config.canonical_string());
    bundle.temperatures =
        temperature_sweep(campaign.inputs, campaign.config, table, temperatures);
    return report_and_return(bundle, args.common);
  });
}

int cmd_sensitivity_grid(const CampaignArgs& args) {
  return guarded([&] {
    LoadedCampaign campaign = load_campaign(args);
    campaign.config.replicates = 1;
    if (campaign.config.proposers.empty())
      throw io_error("no proposers configured");
    if (campaign.config.lambda_grid.empty())
      campaign.config.lambda_grid = {0.01, 0.05, 0.1, 0.25, 0.5,
                                     1.0,  2.0,  5.0, 10.0};
    if (campaign.config.gamma_grid.empty())
      campaign.config.gamma_grid = {0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0};
    const ReportBundle bundle = run_campaign(campaign.inputs, campaign.config);
    return report_and_return(bundle, args);
  });
}

int cmd_deployment_sim(const DeploymentArgs& args) {
  return guarded([&] {
    LoadedCampaign campaign = load_campaign(args.common);
    DeploymentEconomics econ =
        campaign.config.deployment.value_or(DeploymentEconomics{});
    if (args.unit_cost) econ.unit_cost = *args.unit_cost;
    if (args.hit_value) econ.hit_value = *args.hit_value;
    if (args.budgets) econ.budgets = *args.budgets;
    ReportBundle bundle;
    bundle.config_hash = config_hash(campaign.config.canonical_string());
    bundle.deployment = deployment_simulation(campaign.inputs, econ);
    return report_and_return(bundle, args.common);
  });
}

int cmd_synth_gen(const SynthArgs& args) {
  return guarded([&] {
    const SyntheticData synth = generate_synthetic(args.spec);
    const std::filesystem::path dir = resolve_out_dir(args.out_dir);
    std::filesystem::create_directories(dir);
    write_pool(synth.data, dir / "pool.csv");
    write_scores(synth.scores, synth.data.pool, dir / "scores_ml.csv");

    json config;
    config["lambda"] = 1.0;
    config["gamma"] = 0.3;
    config["budget_fractions"] = {0.01, 0.02, 0.05, 0.10, 0.20, 0.50};
    config["master_seed"] = 1;
    config["replicates"] = 1;
    config["kb_fraction"] = 0.10;
    config["proposers"] = json::array({
        json{{"kind", "random"}, {"name", "random"}},
        json{{"kind", "greedy_ml"}, {"name", "greedy_ml"}, {"scores", "ml"}},
        json{{"kind", "informed_prior"}, {"name", "informed_prior"}, {"scores", "ml"}},
        json{{"kind", "retrieval"}, {"name", "retrieval"}, {"scores", "ml"}},
        json{{"kind", "generative"},
             {"name", "generative"},
             {"scores", "ml"},
             {"temperature", 0.1}},
        json{{"kind", "bsds_guided"}, {"name", "bsds_guided"}, {"scores", "ml"}},
        json{{"kind", "ensemble"}, {"name", "ensemble"}, {"scores", "ml"}},
    });
    config["temperatures"] = {0.1, 0.2, 0.5, 1.0, 2.0};
    std::vector<std::int64_t> deploy_budgets;
    for (std::int64_t b : {50, 100, 200, 500})
      if (b <= args.spec.n) deploy_budgets.push_back(b);
    if (!deploy_budgets.empty())
      config["deployment"] = json{{"unit_cost", 5.0},
                                  {"hit_value", 50.0},
                                  {"budgets", deploy_budgets}};
    std::ofstream out(dir / "campaign.json");
    if (!out) throw io_error("cannot write " + (dir / "campaign.json").string());
    out << config.dump(2) << "\n";

    std::cout << "wrote " << (dir / "pool.csv").string() << "\n";
    std::cout << "wrote " << (dir / "scores_ml.csv").string() << "\n";
    std::cout << "wrote " << (dir / "campaign.json").string() << "\n";
    std::cout << "realized_auroc " << format_double(synth.realized_auroc)
              << " after " << synth.attempts << " attempt(s)\n";
    return kExitOk;
  });
}

namespace {

struct CheckContext {
  int failures = 0;

  void check(bool ok, const std::string& name, const std::string& detail = "") {
    if (ok) {
      std::cout << "[ok]   " << name << "\n";
    } else {
      ++failures;
      std::cout << "[FAIL] " << name;
      if (!detail.empty()) std::cout << " (" << detail << ")";
      std::cout << "\n";
    }
  }
};

}  // namespace

int cmd_self_check(bool corrupt_lambda_sign) {
  try {
    CheckContext ctx;
    Rng rng(20240901);

    // Boundedness over random pools, selections and penalties.
    {
      bool ok = true;
      for (int trial = 0; trial < 20000 && ok; ++trial) {
        const std::int64_t n = 2 + static_cast<std::int64_t>(rng.next_below(30));
        std::vector<std::uint8_t> labels(static_cast<std::size_t>(n));
        for (auto& g : labels) g = static_cast<std::uint8_t>(rng.next_below(2));
        const LabeledPool pool = make_labeled_pool(std::move(labels));
        const std::int64_t budget = 1 + static_cast<std::int64_t>(rng.next_below(
                                            static_cast<std::uint64_t>(n)));
        Selection sel;
        sel.budget = budget;
        for (std::int32_t i = 0; i < n; ++i) {
          const double u = rng.next_double();
          if (u < 0.3 &&
              static_cast<std::int64_t>(sel.selected.size()) < budget)
            sel.selected.push_back(i);
          else if (u < 0.5)
            sel.abstained.push_back(i);
        }
        double lambda = 10.0 * rng.next_double();
        const double gamma = rng.next_double();
        const double bound_lo = -(lambda + gamma);
        if (corrupt_lambda_sign) lambda = -lambda;  // negative-control hook
        const double value =
            bsds_score(component_rates(pool, sel), BsdsParams{lambda, gamma});
        ok = value >= bound_lo - 1e-12 && value <= 1.0 + 1e-12;
      }
      ctx.check(ok, "boundedness: -(lambda+gamma) <= BSDS <= 1");
    }

    // Oracle dominance by brute force on small pools.
    {
      bool ok = true;
      const BsdsParams params{1.0, 0.3};
      for (int trial = 0; trial < 200 && ok; ++trial) {
        const std::int64_t n = 2 + static_cast<std::int64_t>(rng.next_below(9));
        std::vector<std::uint8_t> labels(static_cast<std::size_t>(n));
        std::uint32_t hit_mask = 0;
        for (std::int64_t i = 0; i < n; ++i) {
          labels[static_cast<std::size_t>(i)] =
              static_cast<std::uint8_t>(rng.next_below(2));
          if (labels[static_cast<std::size_t>(i)]) hit_mask |= 1u << i;
        }
        const LabeledPool pool = make_labeled_pool(std::move(labels));
        for (std::int64_t budget = 1; budget <= n && ok; ++budget) {
          const double best = bsds_score(
              component_rates(pool, oracle_selection(pool, budget)), params);
          for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
            if (std::popcount(mask) > budget) continue;
            Selection sel;
            sel.budget = budget;
            for (std::int64_t i = 0; i < n; ++i)
              if (mask & (1u << i)) sel.selected.push_back(static_cast<std::int32_t>(i));
            if (bsds_score(component_rates(pool, sel), params) > best + 1e-12) {
              ok = false;
              break;
            }
          }
        }
      }
      ctx.check(ok, "oracle dominance over all small selections");
    }

    // Gradient check against central finite differences.
    {
      bool ok = true;
      double worst = 0.0;
      for (int trial = 0; trial < 5 && ok; ++trial) {
        Rng grad_rng(derive_stream({901, static_cast<std::uint64_t>(trial)}));
        const Eigen::Index rows = 20;
        Eigen::MatrixXd x(rows, 3);
        Eigen::VectorXd g(rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
          for (Eigen::Index c = 0; c < 3; ++c) x(i, c) = grad_rng.next_normal();
          g[i] = (i % 4 == 0) ? 1.0 : 0.0;
        }
        SoftBsdsConfig cfg;
        cfg.budget_fractions = {0.1, 0.3};
        MlpModel model = make_mlp({3, 4, 2, 1}, grad_rng);
        for (TrainLoss kind : {TrainLoss::kSoftBsds, TrainLoss::kBce}) {
          std::vector<double> taus;
          const Eigen::VectorXd scores = mlp_forward(model, x);
          std::vector<double> sorted(scores.data(), scores.data() + scores.size());
          std::sort(sorted.begin(), sorted.end());
          for (double f : cfg.budget_fractions)
            taus.push_back(quantile_sorted(sorted, 1.0 - f));
          const std::vector<double>* fixed =
              (kind == TrainLoss::kSoftBsds) ? &taus : nullptr;
          const Eigen::VectorXd analytic =
              mlp_loss_gradient(model, x, g, kind, 5.0, cfg, fixed).flatten();
          Eigen::VectorXd theta = flatten_parameters(model);
          for (Eigen::Index k = 0; k < theta.size(); ++k) {
            const double h = 1e-5;
            MlpModel probe = model;
            Eigen::VectorXd t = theta;
            t[k] = theta[k] + h;
            set_parameters(probe, t);
            const double up = mlp_loss(probe, x, g, kind, 5.0, cfg, fixed);
            t[k] = theta[k] - h;
            set_parameters(probe, t);
            const double dn = mlp_loss(probe, x, g, kind, 5.0, cfg, fixed);
            const double fd = (up - dn) / (2.0 * h);
            const double rel = std::abs(fd - analytic[k]) /
                               std::max({std::abs(fd), std::abs(analytic[k]), 1e-3});
            worst = std::max(worst, rel);
          }
        }
        ok = worst <= 1e-4;
      }
      ctx.check(ok, "gradient matches central finite differences",
                "max rel err " + format_double(worst));
    }

    // BCa reduction to the percentile interval.
    {
      std::vector<double> reps;
      Rng bca_rng(7);
      for (int i = 0; i < 400; ++i) reps.push_back(bca_rng.next_normal());
      std::vector<double> sorted = reps;
      std::sort(sorted.begin(), sorted.end());
      const double med = quantile_sorted(sorted, 0.5);
      const BcaInterval iv = bca_interval(reps, med, {}, 0.95);
      const auto [plo, phi] = percentile_interval(reps, 0.95);
      const bool reduces = iv.z0 == 0.0 && iv.acceleration == 0.0 &&
                           iv.lo == plo && iv.hi == phi;
      ctx.check(reduces, "BCa with z0=0, a=0 equals the percentile interval");
    }

    // Kendall tau identities.
    {
      std::vector<double> x = {5, 4, 3, 2, 1, 0.5, 0.25, 0.1};
      std::vector<double> rev(x.rbegin(), x.rend());
      const bool ok = std::abs(kendall_tau_b(x, x) - 1.0) < 1e-15 &&
                      std::abs(kendall_tau_b(x, rev) + 1.0) < 1e-15;
      ctx.check(ok, "kendall tau identities: tau(x,x)=1, tau(x,reverse)=-1");
    }

    // Abstention identities.
    {
      std::vector<std::uint8_t> labels(20, 0);
      for (int i = 0; i < 5; ++i) labels[static_cast<std::size_t>(i)] = 1;
      const LabeledPool pool = make_labeled_pool(std::move(labels));
      Selection sel;
      sel.budget = 5;
      for (std::int32_t i = 0; i < 20; ++i) sel.abstained.push_back(i);
      const BsdsParams params{1.0, 0.3};
      const double value = bsds_score(component_rates(pool, sel), params);
      const bool ok = value == -params.gamma &&
                      abstain_threshold(params) == 0.15;
      ctx.check(ok, "full abstention scores exactly -gamma; threshold 0.15");
    }

    if (ctx.failures > 0) {
      std::cout << ctx.failures << " check(s) failed\n";
      return kExitPropertyFailure;
    }
    std::cout << "all checks passed\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
}

}  // namespace bsds
