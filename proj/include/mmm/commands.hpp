// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MMM_COMMANDS_HPP
#define MMM_COMMANDS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace mmm {

// Exit codes shared by all commands: 0 success (fit converged), 2 fit hit
// max_iter without converging (artifacts still written), 1 any error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;

struct CommonOptions {
  std::string config_path;  // optional JSON config file
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string init;  // "", "kmeanspp" or "random"
};

struct FitOptions {
  std::string data_path;
  std::string schema_path;
  int k = 0;
  std::string out_dir;
  CommonOptions common;
};
int cmd_fit(const FitOptions& opt);

struct SelectKOptions {
  std::string data_path;
  std::string schema_path;
  int kmax = 0;
  std::string out_dir;
  CommonOptions common;
};
int cmd_select_k(const SelectKOptions& opt);

struct SimulateOptions {
  std::string scenario = "paper-4.1";
  int n = 500;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir;
};
int cmd_simulate(const SimulateOptions& opt);

struct EvaluateOptions {
  std::string truth_path;  // truth.json from simulate
  std::string fit_dir;     // directory holding params.json and assignments.csv
  std::string out_path;    // metrics.csv
};
int cmd_evaluate(const EvaluateOptions& opt);

struct ScenarioOptions {
  std::vector<int> n_values{500};
  std::vector<double> noise_fractions{0.0};
  int replicates = 5;
  int kmax = 0;
  std::string out_dir;
  CommonOptions common;
};
int cmd_scenario(const ScenarioOptions& opt);

}  // namespace mmm

#endif  // MMM_COMMANDS_HPP
