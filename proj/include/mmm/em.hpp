// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MMM_EM_HPP
#define MMM_EM_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mmm/dataset.hpp"
#include "mmm/matnorm.hpp"
#include "mmm/samplers.hpp"

namespace mmm {

// Mixture parameters: weights plus per-cluster (M_k, Phi_k, Sigma_k).
struct MMMParams {
  Vector pi;
  std::vector<MatNormParams> comp;

  int k() const { return static_cast<int>(comp.size()); }
  void validate() const;
};

enum class InitMethod { kKmeansPP, kRandom };

struct EmConfig {
  McmcConfig mcmc;
  int max_iter = 100;
  double eps = 1e-3;
  int w1 = 3;
  int w2 = 3;
  InitMethod init = InitMethod::kKmeansPP;
  int restarts = 5;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

// Per-unit-per-cluster E-step output. Conditional latent moments are stored
// as matrices; the (i,k) cell lives at index i*K + k. The quadratic
// contractions d/b pair with Phi^{-1}, c/a with the beta-beta and
// gamma-gamma blocks of Sigma^{-1}.
struct EStepStats {
  Matrix tau;                        // N x K responsibilities
  std::vector<Matrix> m_beta;        // O x T conditional means
  std::vector<Matrix> m_gamma;       // G x T conditional means
  std::vector<Matrix> d_contr;       // O x O
  std::vector<Matrix> b_contr;       // G x G
  std::vector<Matrix> c_contr;       // T x T
  std::vector<Matrix> a_contr;       // T x T
  Vector unit_loglik;                // per-unit log sum_k q_ik

  int n() const { return static_cast<int>(tau.rows()); }
  int k() const { return static_cast<int>(tau.cols()); }
  int cell(int i, int k_) const { return i * k() + k_; }
};

struct FitResult {
  MMMParams params;
  Matrix tau;
  std::vector<int> assignments;  // argmax of tau rows, lowest index on ties
  std::vector<double> loglik_history;
  double bic = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Kmeans++ seeding plus Lloyd iterations on the vectorized latent
// initialization view; covariances start at identity, weights floored at
// 1/(10K).
MMMParams init_kmeanspp(const MixedDataset& ds, int k, RngStream& rng);

// K distinct units drawn uniformly as means, uniform weights, identity
// covariances.
MMMParams init_random(const MixedDataset& ds, int k, RngStream& rng);

// Seed context for one E-step; sampling streams derive from
// (seed, iteration, unit, cluster, purpose).
struct EStepSeed {
  std::uint64_t seed = 0;
  int iteration = 0;
};

EStepStats e_step(const MMMParams& params, const MixedDataset& ds,
                  const EmConfig& cfg, const EStepSeed& seed);

// Closed-form parameter updates. Sigma_k uses the previous Phi_k; Phi_k then
// uses the new Sigma_k and is determinant-constrained last. Throws
// DegenerateClusterError when a cluster keeps less than 0.5 units of mass.
MMMParams m_step(const EStepStats& stats, const MixedDataset& ds,
                 const MMMParams& params_prev);

double observed_loglik(const EStepStats& stats);

// Moving-average criterion on the log-likelihood history:
// |mean(last w1) - mean(previous w2)| / |mean(last w1)| < eps.
bool check_convergence(const std::vector<double>& history, int w1, int w2,
                       double eps);

using IterationObserver =
    std::function<void(int iteration, const MMMParams& params, const EStepStats& stats)>;

// Full MCMC-EM fit: initialization, E/M alternation until convergence or
// max_iter, BIC from the final likelihood estimate. Random initialization
// runs `restarts` complete fits and keeps the best final log-likelihood.
FitResult fit(const MixedDataset& ds, int k, const EmConfig& cfg, std::uint64_t seed);

// Same loop from explicit starting parameters (single run, no restarts).
FitResult fit_from(const MMMParams& params0, const MixedDataset& ds,
                   const EmConfig& cfg, std::uint64_t seed,
                   const IterationObserver& observer = nullptr);

// Continuous baseline: all observed values cast to reals and fitted with the
// exact matrix-normal mixture EM (no MCMC anywhere on that path).
FitResult fit_mmn(const MixedDataset& ds, int k, const EmConfig& cfg, std::uint64_t seed);

// Cast helper used by fit_mmn: every variable becomes continuous, codes and
// counts kept as-is (nominals expanded first).
MixedDataset as_continuous(const MixedDataset& ds);

}  // namespace mmm

#endif  // MMM_EM_HPP
