// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MMM_SAMPLERS_HPP
#define MMM_SAMPLERS_HPP

#include <Eigen/Dense>
#include <vector>

#include "mmm/matnorm.hpp"
#include "mmm/rng.hpp"

namespace mmm {

struct McmcConfig {
  int gibbs_burnin = 100;
  int gibbs_thin = 2;
  int gibbs_samples = 100;
  int count_iters = 500;
  int count_chains = 3;
  double count_burnin_fraction = 0.5;
  int orthant_draws = 500;

  void validate() const;
};

// Axis-aligned truncation region; entries may be +-inf.
struct TruncRegion {
  Vector lower;
  Vector upper;
};

struct MomentPair {
  Vector m;  // first moment
  Matrix S;  // raw second moment E[z z^T]
};

// Systematic-scan Gibbs sampler for a d-dimensional normal truncated to the
// region, each conditional drawn by inverse CDF. Returns cfg.gibbs_samples
// vectors after burn-in and thinning; every sample lies inside the region.
std::vector<Vector> gibbs_truncated_mvn(const Vector& mean, const Matrix& cov,
                                        const TruncRegion& region,
                                        const McmcConfig& cfg, RngStream& rng);

// Pooled post-burn-in draws from cfg.count_chains coordinate-wise
// random-walk Metropolis chains targeting
//   p(z) propto prod_c Poisson(y_c | exp(z_c)) * N(z; prior_mean, prior_cov).
// Per-coordinate steps adapt toward 0.44 acceptance during burn-in and are
// frozen afterwards.
std::vector<Vector> sample_count_posterior(const Eigen::VectorXi& y,
                                           const Vector& prior_mean,
                                           const Matrix& prior_cov,
                                           const McmcConfig& cfg, RngStream& rng);

MomentPair moments(const std::vector<Vector>& samples);

// Monte-Carlo region probability (hits + 0.5) / (n + 1); the smoothing keeps
// zero-hit regions away from exact zero.
double orthant_prob_mc(const Vector& mean, const Matrix& cov,
                       const TruncRegion& region, int n, RngStream& rng);

}  // namespace mmm

#endif  // MMM_SAMPLERS_HPP
