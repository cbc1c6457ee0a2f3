// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MMM_SIMULATE_HPP
#define MMM_SIMULATE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mmm/dataset.hpp"
#include "mmm/em.hpp"

namespace mmm {

struct GenConfig {
  int n = 0;
  int k = 0;
  int t = 0;
  Schema schema;  // continuous/ordinal/binary/count rows (no nominals)
  Vector pi;
  std::vector<Matrix> means;   // K matrices, rows() x T
  std::vector<Matrix> phi;     // K matrices, T x T
  std::vector<Matrix> sigma;   // K matrices, rows() x rows()
  double noise_fraction = 0.0;  // fraction of units receiving latent noise
  double noise_var = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
  MMMParams params() const;
};

struct GroundTruth {
  std::vector<int> labels;          // 1-based cluster labels
  std::vector<Matrix> latent;       // latent matrices after noise injection
  MMMParams params;
  std::vector<int> noisy_units;     // 0-based unit indices
};

// Draw labels from pi, latents from the matching matrix normal, optionally
// add latent noise, then emit observed values per row kind (copy /
// thresholds / Poisson of exp).
std::pair<MixedDataset, GroundTruth> generate(const GenConfig& cfg);

// Add N(0, noise_var) to every latent entry of floor(tau * N_k) units per
// cluster, chosen uniformly within the cluster. Returns the modified latents
// and the selected unit indices.
std::pair<std::vector<Matrix>, std::vector<int>> inject_noise(
    const std::vector<Matrix>& latent, double tau, double noise_var,
    const std::vector<int>& labels, RngStream& rng);

// The built-in `paper-4.1` scenario: two clusters over one continuous, one
// 5-level ordinal, one binary and one count variable at three time points,
// identity covariances, weights (0.6, 0.4).
GenConfig benchmark_gen_config(int n, double noise_fraction, std::uint64_t seed);

struct ScenarioConfig {
  std::vector<int> n_values;
  std::vector<double> noise_fractions;
  int replicates = 5;
  int kmax = 0;  // 0 disables the BIC sweep
  std::uint64_t seed = 0;
  EmConfig em;
};

struct ScenarioRow {
  int n = 0;
  double noise_fraction = 0.0;
  int replicate = 0;
  std::string status;  // ok | fit_failed
  double ari_bayes = 0.0;
  double ari_mmm = 0.0;
  double ari_mmm_clean = 0.0;
  double ari_mmn = 0.0;
  double mape_m = 0.0;
  double mape_phi_diag = 0.0;
  double mape_sigma_diag = 0.0;
  double mape_pi = 0.0;
  int best_k = 0;
  bool mmm_converged = false;
  int mmm_iterations = 0;
  double mmm_seconds = 0.0;
  double mmn_seconds = 0.0;
  double sweep_seconds = 0.0;
};

// One cell per (N, noise fraction, replicate): generate, fit at the true K,
// fit the continuous baseline, optionally sweep K by BIC. Fit failures are
// flagged rows, not aborts.
std::vector<ScenarioRow> run_scenario(const ScenarioConfig& cfg);

void write_scenario_csv(const std::string& path, const std::vector<ScenarioRow>& rows);
void write_scenario_provenance(const std::string& path, const ScenarioConfig& cfg);

}  // namespace mmm

#endif  // MMM_SIMULATE_HPP
