// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MMM_METRICS_HPP
#define MMM_METRICS_HPP

#include <cstdint>
#include <vector>

#include "mmm/em.hpp"

namespace mmm {

// BIC = -2 loglik + nu_K log N with
// nu_K = K [1 + JT + J(J+1)/2 + T(T+1)/2] - 1.
double bic(double loglik, int k, int j, int t, double n);

struct KSweepRow {
  int k = 0;
  double loglik = 0.0;
  double bic = 0.0;
  bool converged = false;
  int iterations = 0;
  bool failed = false;
};

struct KSweepReport {
  std::vector<KSweepRow> rows;
  int best_k = 0;
  FitResult best;
};

// Fit K = 1..kmax with independent derived seeds; best_k minimizes BIC among
// converged fits (falls back to completed fits when none converged).
KSweepReport select_k(const MixedDataset& ds, int kmax, const EmConfig& cfg,
                      std::uint64_t seed);

// Adjusted Rand index from the pair-counting contingency table. Invariant to
// label permutation; 1 for identical partitions.
double ari(const std::vector<int>& a, const std::vector<int>& b);

// 100 * mean(|theta - theta_hat| / |theta|). Entries with |theta| < 1e-8 are
// the caller's responsibility to filter.
double mape(const Vector& truth, const Vector& est);

// Minimal-cost assignment (Hungarian method, shortest augmenting paths) on a
// square cost matrix; returns column index per row.
std::vector<int> hungarian_min_assignment(const Matrix& cost);

// Permutation sigma minimizing sum_k ||M_est[sigma(k)] - M_true[k]||_F.
std::vector<int> align_clusters(const MMMParams& est, const MMMParams& truth);

// Reorder clusters so that comp[k] = p.comp[perm[k]].
MMMParams apply_permutation(const MMMParams& p, const std::vector<int>& perm);

// Per-block MAPE of aligned estimates: all entries of M, diagonals of Phi
// and Sigma, and pi; entries with |true| < 1e-8 are dropped.
struct ParamErrors {
  double mape_m = 0.0;
  double mape_phi_diag = 0.0;
  double mape_sigma_diag = 0.0;
  double mape_pi = 0.0;
};
ParamErrors parameter_errors(const MMMParams& est_aligned, const MMMParams& truth);

}  // namespace mmm

#endif  // MMM_METRICS_HPP
