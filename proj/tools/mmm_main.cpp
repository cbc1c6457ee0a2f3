// Apache License, Version 2.0, refer to LICENSE.txt

#include <CLI11.hpp>

#include "mmm/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Model-based clustering of multivariate longitudinal mixed-type data"};
  app.require_subcommand(1);

  auto add_common = [](CLI::App* cmd, mmm::CommonOptions& common) {
    cmd->add_option("--config", common.config_path, "JSON run configuration");
    cmd->add_option("--seed", common.seed, "root seed")
        ->each([&common](const std::string&) { common.seed_set = true; });
    cmd->add_option("--threads", common.threads,
                    "worker threads (default: MMM_THREADS or hardware)");
    cmd->add_option("--init", common.init, "initialization: kmeanspp or random");
  };

  mmm::FitOptions fit_opt;
  auto* fit = app.add_subcommand("fit", "fit the mixture at a fixed number of clusters");
  fit->add_option("--data", fit_opt.data_path, "long-format CSV data file")->required();
  fit->add_option("--schema", fit_opt.schema_path, "schema JSON file")->required();
  fit->add_option("--k", fit_opt.k, "number of clusters")->required();
  fit->add_option("--out-dir", fit_opt.out_dir, "output directory")->required();
  add_common(fit, fit_opt.common);

  mmm::SelectKOptions select_opt;
  auto* select = app.add_subcommand("select-k", "sweep K and pick the BIC minimizer");
  select->add_option("--data", select_opt.data_path, "long-format CSV data file")->required();
  select->add_option("--schema", select_opt.schema_path, "schema JSON file")->required();
  select->add_option("--kmax", select_opt.kmax, "largest K to try")->required();
  select->add_option("--out-dir", select_opt.out_dir, "output directory")->required();
  add_common(select, select_opt.common);

  mmm::SimulateOptions sim_opt;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
  simulate->add_option("--scenario", sim_opt.scenario, "built-in scenario name")
      ->default_val("paper-4.1");
  simulate->add_option("--n", sim_opt.n, "number of units")->default_val(500);
  simulate->add_option("--noise", sim_opt.noise, "fraction of noisy units")
      ->default_val(0.0);
  simulate->add_option("--seed", sim_opt.seed, "generator seed")->default_val(0);
  simulate->add_option("--out-dir", sim_opt.out_dir, "output directory")->required();

  mmm::EvaluateOptions eval_opt;
  auto* evaluate = app.add_subcommand("evaluate", "score a fit against simulation truth");
  evaluate->add_option("--truth", eval_opt.truth_path, "truth.json from simulate")->required();
  evaluate->add_option("--fit", eval_opt.fit_dir, "fit output directory")->required();
  evaluate->add_option("--out", eval_opt.out_path, "metrics CSV path")->required();

  mmm::ScenarioOptions scen_opt;
  auto* scenario = app.add_subcommand("scenario", "run the simulation/evaluation grid");
  scenario->add_option("--n", scen_opt.n_values, "unit counts")->delimiter(',');
  scenario->add_option("--noise", scen_opt.noise_fractions, "noise fractions")->delimiter(',');
  scenario->add_option("--replicates", scen_opt.replicates, "replicates per cell")
      ->default_val(5);
  scenario->add_option("--kmax", scen_opt.kmax, "BIC sweep limit (0 disables)")
      ->default_val(0);
  scenario->add_option("--out-dir", scen_opt.out_dir, "output directory")->required();
  add_common(scenario, scen_opt.common);

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) return mmm::cmd_fit(fit_opt);
  if (select->parsed()) return mmm::cmd_select_k(select_opt);
  if (simulate->parsed()) return mmm::cmd_simulate(sim_opt);
  if (evaluate->parsed()) return mmm::cmd_evaluate(eval_opt);
  if (scenario->parsed()) return mmm::cmd_scenario(scen_opt);
  return mmm::kExitError;
}
