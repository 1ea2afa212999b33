#include "bsds/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

// "name=path" pairs for --scores.
std::vector<std::pair<std::string, std::filesystem::path>> parse_score_args(
    const std::vector<std::string>& raw) {
  std::vector<std::pair<std::string, std::filesystem::path>> out;
  for (const std::string& entry : raw) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= entry.size())
      throw bsds::io_error("--scores expects name=path, got '" + entry + "'");
    out.emplace_back(entry.substr(0, eq), entry.substr(eq + 1));
  }
  return out;
}

struct CampaignCli {
  bsds::CampaignArgs args;
  std::vector<std::string> raw_scores;
  std::string format = "tabular";
  double lambda_opt = 0.0, gamma_opt = 0.0;
  std::string preset;
  std::uint64_t seed_opt = 0;
  std::int64_t replicates_opt = 0;
  std::vector<double> fractions;
  CLI::Option *lambda_o = nullptr, *gamma_o = nullptr, *preset_o = nullptr,
              *seed_o = nullptr, *reps_o = nullptr, *frac_o = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--pool", args.pool_path, "pool CSV file");
    cmd->add_option("--scores", raw_scores, "score table as name=path (repeatable)");
    cmd->add_option("--config", args.config_path, "campaign config JSON");
    cmd->add_option("--out", args.out_dir,
                    "output directory (default $BSDS_OUT_DIR or ./bsds_report)");
    cmd->add_option("--format", format, "report format: tabular | json")
        ->check(CLI::IsMember({"tabular", "json"}));
    lambda_o = cmd->add_option("--lambda", lambda_opt, "false-discovery penalty");
    gamma_o = cmd->add_option("--gamma", gamma_opt, "abstention penalty");
    preset_o = cmd->add_option("--preset", preset, "cost preset: hts | clinical | av")
                   ->check(CLI::IsMember({"hts", "clinical", "av"}));
    seed_o = cmd->add_option("--seed", seed_opt, "master seed");
    reps_o = cmd->add_option("--replicates", replicates_opt, "bootstrap replicates");
    frac_o = cmd->add_option("--budgets", fractions, "budget fractions")->expected(-1);
  }

  bsds::CampaignArgs finish() {
    args.score_paths = parse_score_args(raw_scores);
    args.format = (format == "json") ? bsds::ReportFormat::kStructuredText
                                     : bsds::ReportFormat::kTabular;
    if (lambda_o->count()) args.lambda = lambda_opt;
    if (gamma_o->count()) args.gamma = gamma_opt;
    if (preset_o->count()) args.preset = preset;
    if (seed_o->count()) args.master_seed = seed_opt;
    if (reps_o->count()) args.replicates = replicates_opt;
    if (frac_o->count()) args.budget_fractions = fractions;
    return args;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"budget-sensitive discovery evaluation toolkit"};
  app.require_subcommand(1);

  CampaignCli eval_cli, boot_cli, sweep_cli, grid_cli, deploy_cli;
  bsds::SynthArgs synth_args;
  bool corrupt_lambda = false;

  std::vector<double> sweep_temperatures;
  std::string sweep_table;
  double deploy_unit_cost = 0.0, deploy_hit_value = 0.0;
  std::vector<std::int64_t> deploy_budgets;

  CLI::App* eval = app.add_subcommand("evaluate", "seed-0 campaign evaluation");
  eval_cli.attach(eval);

  CLI::App* boot =
      app.add_subcommand("bootstrap", "bootstrap campaign with BCa intervals");
  boot_cli.attach(boot);

  CLI::App* sweep = app.add_subcommand(
      "sweep-temperature", "generative proposer DQS across temperatures");
  sweep_cli.attach(sweep);
  sweep->add_option("--temperatures", sweep_temperatures, "softmax temperatures")
      ->expected(-1);
  sweep->add_option("--table", sweep_table, "score table name (default: first)");

  CLI::App* grid = app.add_subcommand("sensitivity-grid",
                                      "(lambda, gamma) grid from seed-0 rates");
  grid_cli.attach(grid);

  CLI::App* deploy =
      app.add_subcommand("deployment-sim", "hits / hit rate / ROI per score table");
  deploy_cli.attach(deploy);
  CLI::Option* unit_o =
      deploy->add_option("--unit-cost", deploy_unit_cost, "cost per validation");
  CLI::Option* value_o =
      deploy->add_option("--hit-value", deploy_hit_value, "value per confirmed hit");
  CLI::Option* dbudget_o =
      deploy->add_option("--deployment-budgets", deploy_budgets, "absolute budgets")
          ->expected(-1);

  CLI::App* synth = app.add_subcommand("synth-gen", "generate a synthetic campaign");
  synth->add_option("--n", synth_args.spec.n, "pool size");
  synth->add_option("--prevalence", synth_args.spec.prevalence, "hit prevalence");
  synth->add_option("--auroc", synth_args.spec.target_auroc, "target score AUROC");
  synth->add_option("--width", synth_args.spec.fingerprint_width,
                    "fingerprint width in bits");
  synth->add_option("--clusters", synth_args.spec.hit_clusters, "hit cluster count");
  synth->add_option("--seed", synth_args.spec.seed, "generator seed");
  synth->add_option("--out", synth_args.out_dir, "output directory");

  CLI::App* check =
      app.add_subcommand("self-check", "run the embedded property suite");
  check
      ->add_flag("--corrupt-lambda-sign", corrupt_lambda,
                 "negative-control hook: flip lambda inside the boundedness check")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);

    if (*eval) return bsds::cmd_evaluate(eval_cli.finish());
    if (*boot) return bsds::cmd_bootstrap(boot_cli.finish());
    if (*sweep) {
      bsds::SweepArgs args;
      args.common = sweep_cli.finish();
      args.temperatures = sweep_temperatures;
      args.score_table = sweep_table;
      return bsds::cmd_sweep_temperature(args);
    }
    if (*grid) return bsds::cmd_sensitivity_grid(grid_cli.finish());
    if (*deploy) {
      bsds::DeploymentArgs args;
      args.common = deploy_cli.finish();
      if (unit_o->count()) args.unit_cost = deploy_unit_cost;
      if (value_o->count()) args.hit_value = deploy_hit_value;
      if (dbudget_o->count()) args.budgets = deploy_budgets;
      return bsds::cmd_deployment_sim(args);
    }
    if (*synth) return bsds::cmd_synth_gen(synth_args);
    if (*check) return bsds::cmd_self_check(corrupt_lambda);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bsds::kExitInputError;
  } catch (const bsds::io_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return bsds::kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return bsds::kExitInternalError;
  }
  return bsds::kExitInputError;
}
