// Apache License, Version 2.0, refer to LICENSE.txt

#include "mmm/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mmm/io.hpp"
#include "mmm/metrics.hpp"
#include "mmm/simulate.hpp"

namespace mmm {

namespace {

namespace fs = std::filesystem;

EmConfig load_config(const CommonOptions& common) {
  EmConfig cfg;
  if (!common.config_path.empty()) {
    std::ifstream in(common.config_path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file '" + common.config_path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("config file '" + common.config_path + "': " + e.what());
    }
    cfg = config_from_json(j);
  }
  if (common.threads > 0) cfg.threads = common.threads;
  if (!common.init.empty()) {
    if (common.init == "kmeanspp")
      cfg.init = InitMethod::kKmeansPP;
    else if (common.init == "random")
      cfg.init = InitMethod::kRandom;
    else
      throw ValidationError("--init must be kmeanspp or random");
  }
  return cfg;
}

std::uint64_t resolve_seed(const CommonOptions& common) {
  if (common.seed_set) return common.seed;
  if (!common.config_path.empty()) {
    std::ifstream in(common.config_path, std::ios::binary);
    nlohmann::json j;
    in >> j;
    if (j.contains("seed")) return j["seed"].get<std::uint64_t>();
  }
  return 0;
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) throw ValidationError("--out-dir is required");
  fs::create_directories(dir);
}

void write_fit_artifacts(const std::string& out_dir, const MixedDataset& ds,
                         const FitResult& result, const EmConfig& cfg,
                         std::uint64_t seed) {
  write_fit_json((fs::path(out_dir) / "params.json").string(), result, cfg, seed);
  write_assignments_csv((fs::path(out_dir) / "assignments.csv").string(), ds.units,
                        result.assignments, result.tau);
  write_loglik_history_csv((fs::path(out_dir) / "loglik_history.csv").string(),
                           result.loglik_history);
}

int report_error(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return kExitError;
}

}  // namespace

int cmd_fit(const FitOptions& opt) {
  try {
    if (opt.k < 1) throw ValidationError("--k must be >= 1");
    const EmConfig cfg = load_config(opt.common);
    const std::uint64_t seed = resolve_seed(opt.common);
    const Schema schema = read_schema_json(opt.schema_path);
    const MixedDataset ds = read_dataset_csv(opt.data_path, schema);
    ensure_dir(opt.out_dir);
    const FitResult result = fit(ds, opt.k, cfg, seed);
    write_fit_artifacts(opt.out_dir, ds, result, cfg, seed);
    return result.converged ? kExitOk : kExitNotConverged;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}

int cmd_select_k(const SelectKOptions& opt) {
  try {
    if (opt.kmax < 1) throw ValidationError("--kmax must be >= 1");
    const EmConfig cfg = load_config(opt.common);
    const std::uint64_t seed = resolve_seed(opt.common);
    const Schema schema = read_schema_json(opt.schema_path);
    const MixedDataset ds = read_dataset_csv(opt.data_path, schema);
    ensure_dir(opt.out_dir);
    const KSweepReport report = select_k(ds, opt.kmax, cfg, seed);
    write_ksweep_csv((fs::path(opt.out_dir) / "ksweep.csv").string(), report);
    write_fit_artifacts(opt.out_dir, ds, report.best, cfg, seed);
    return report.best.converged ? kExitOk : kExitNotConverged;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}

int cmd_simulate(const SimulateOptions& opt) {
  try {
    if (opt.scenario != "paper-4.1")
      throw ValidationError("unknown scenario '" + opt.scenario + "'");
    if (opt.n < 1) throw ValidationError("--n must be >= 1");
    const GenConfig gen = benchmark_gen_config(opt.n, opt.noise, opt.seed);
    gen.validate();
    ensure_dir(opt.out_dir);
    auto [ds, truth] = generate(gen);

    write_schema_json((fs::path(opt.out_dir) / "schema.json").string(), ds.schema);
    write_dataset_csv((fs::path(opt.out_dir) / "data.csv").string(), ds);

    nlohmann::json j;
    j["units"] = ds.units;
    j["labels"] = truth.labels;
    j["noisy_units"] = truth.noisy_units;
    j["params"] = params_to_json(truth.params);
    j["scenario"] = opt.scenario;
    j["n"] = opt.n;
    j["noise_fraction"] = opt.noise;
    j["seed"] = opt.seed;
    std::ofstream out(fs::path(opt.out_dir) / "truth.json", std::ios::binary);
    out << j.dump(2) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}

int cmd_evaluate(const EvaluateOptions& opt) {
  try {
    std::ifstream in(opt.truth_path, std::ios::binary);
    if (!in) throw ValidationError("cannot open truth file '" + opt.truth_path + "'");
    nlohmann::json tj;
    try {
      in >> tj;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("truth file '" + opt.truth_path + "': " + e.what());
    }
    const auto labels = tj.at("labels").get<std::vector<int>>();
    const auto noisy = tj.value("noisy_units", std::vector<int>{});
    const MMMParams truth_params = params_from_json(tj.at("params"));

    const FitResult fitted =
        read_fit_json((fs::path(opt.fit_dir) / "params.json").string());
    const AssignmentsFile assignments =
        read_assignments_csv((fs::path(opt.fit_dir) / "assignments.csv").string());
    if (assignments.assignments.size() != labels.size())
      throw ValidationError("truth and fit describe different unit counts");

    const double ari_all = ari(labels, assignments.assignments);
    double ari_clean = ari_all;
    if (!noisy.empty()) {
      std::vector<bool> is_noisy(labels.size(), false);
      for (int i : noisy) is_noisy[i] = true;
      std::vector<int> keep_labels, keep_assign;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (is_noisy[i]) continue;
        keep_labels.push_back(labels[i]);
        keep_assign.push_back(assignments.assignments[i]);
      }
      ari_clean = ari(keep_labels, keep_assign);
    }
    const auto perm = align_clusters(fitted.params, truth_params);
    const ParamErrors errors =
        parameter_errors(apply_permutation(fitted.params, perm), truth_params);

    std::ostringstream out;
    out << "ari,ari_clean_units,mape_m,mape_phi_diag,mape_sigma_diag,mape_pi\n";
    out << format_double(ari_all) << ',' << format_double(ari_clean) << ','
        << format_double(errors.mape_m) << ',' << format_double(errors.mape_phi_diag)
        << ',' << format_double(errors.mape_sigma_diag) << ','
        << format_double(errors.mape_pi) << '\n';
    std::ofstream f(opt.out_path, std::ios::binary);
    if (!f) throw ValidationError("cannot write file '" + opt.out_path + "'");
    f << out.str();
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}

int cmd_scenario(const ScenarioOptions& opt) {
  try {
    ScenarioConfig cfg;
    cfg.n_values = opt.n_values;
    cfg.noise_fractions = opt.noise_fractions;
    cfg.replicates = opt.replicates;
    cfg.kmax = opt.kmax;
    cfg.em = load_config(opt.common);
    cfg.seed = resolve_seed(opt.common);
    for (double tau : cfg.noise_fractions)
      if (tau < 0.0 || tau >= 1.0)
        throw ValidationError("noise fractions must lie in [0,1)");
    ensure_dir(opt.out_dir);
    const auto rows = run_scenario(cfg);
    write_scenario_csv((fs::path(opt.out_dir) / "report.csv").string(), rows);
    write_scenario_provenance((fs::path(opt.out_dir) / "scenario_config.json").string(),
                              cfg);
    for (const auto& row : rows)
      if (row.status != "ok") return kExitNotConverged;
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}

}  // namespace mmm
