// Apache License, Version 2.0, refer to LICENSE.txt

#include "mmm/samplers.hpp"

#include <algorithm>
#include <cmath>

#include "mmm/normal.hpp"

namespace mmm {

void McmcConfig::validate() const {
  if (gibbs_burnin <= 0 || gibbs_thin < 1 || gibbs_samples <= 0 ||
      count_iters <= 0 || count_chains <= 0 || orthant_draws <= 0)
    throw ValidationError("mcmc configuration values must be positive");
  if (!(count_burnin_fraction > 0.0 && count_burnin_fraction < 1.0))
    throw ValidationError("count_burnin_fraction must lie in (0,1)");
}

namespace {

void check_region(const Vector& mean, const TruncRegion& region) {
  if (region.lower.size() != mean.size() || region.upper.size() != mean.size())
    throw ShapeError("truncation region does not match dimension");
  for (Eigen::Index c = 0; c < mean.size(); ++c) {
    if (!(region.lower(c) < region.upper(c)))
      throw RegionError("truncation region is empty");
    if (std::isfinite(region.lower(c)) && std::isfinite(region.upper(c)) &&
        region.upper(c) - region.lower(c) < 1e-12)
      throw RegionError("truncation region is degenerate");
  }
}

// Feasible start: the mean clamped into the region; midpoint for finite
// intervals, bound -+1 for half-infinite ones.
Vector feasible_start(const Vector& mean, const TruncRegion& region) {
  Vector z = mean;
  for (Eigen::Index c = 0; c < z.size(); ++c) {
    const double lo = region.lower(c);
    const double hi = region.upper(c);
    if (z(c) > lo && z(c) <= hi) continue;
    if (std::isfinite(lo) && std::isfinite(hi))
      z(c) = 0.5 * (lo + hi);
    else if (std::isfinite(lo))
      z(c) = lo + 1.0;
    else
      z(c) = hi - 1.0;
  }
  return z;
}

}  // namespace

std::vector<Vector> gibbs_truncated_mvn(const Vector& mean, const Matrix& cov,
                                        const TruncRegion& region,
                                        const McmcConfig& cfg, RngStream& rng) {
  cfg.validate();
  const Eigen::Index d = mean.size();
  if (cov.rows() != d || cov.cols() != d)
    throw ShapeError("gibbs_truncated_mvn: covariance does not match mean");
  check_region(mean, region);

  const Matrix precision =
      llt_with_jitter(cov).solve(Matrix::Identity(d, d));
  Vector cond_sd(d);
  for (Eigen::Index c = 0; c < d; ++c) cond_sd(c) = 1.0 / std::sqrt(precision(c, c));

  Vector z = feasible_start(mean, region);
  Vector w = z - mean;

  std::vector<Vector> samples;
  samples.reserve(cfg.gibbs_samples);
  const int total = cfg.gibbs_burnin + cfg.gibbs_samples * cfg.gibbs_thin;
  for (int scan = 1; scan <= total; ++scan) {
    for (Eigen::Index c = 0; c < d; ++c) {
      // Conditional N(mu_c - s_c / Lambda_cc, 1 / Lambda_cc) with
      // s_c = sum_{j != c} Lambda_cj (z_j - mu_j).
      const double s = precision.row(c).dot(w) - precision(c, c) * w(c);
      const double cmean = mean(c) - s * cond_sd(c) * cond_sd(c);
      const double a = (region.lower(c) - cmean) / cond_sd(c);
      const double b = (region.upper(c) - cmean) / cond_sd(c);
      double draw = cmean + cond_sd(c) * truncated_std_normal(a, b, rng.uniform());
      if (draw <= region.lower(c)) draw = std::nextafter(region.lower(c), region.upper(c));
      if (draw > region.upper(c)) draw = region.upper(c);
      z(c) = draw;
      w(c) = draw - mean(c);
    }
    if (scan > cfg.gibbs_burnin && (scan - cfg.gibbs_burnin) % cfg.gibbs_thin == 0)
      samples.push_back(z);
  }
  return samples;
}

std::vector<Vector> sample_count_posterior(const Eigen::VectorXi& y,
                                           const Vector& prior_mean,
                                           const Matrix& prior_cov,
                                           const McmcConfig& cfg, RngStream& rng) {
  cfg.validate();
  const Eigen::Index d = prior_mean.size();
  if (y.size() != d || prior_cov.rows() != d || prior_cov.cols() != d)
    throw ShapeError("sample_count_posterior: dimension mismatch");
  for (Eigen::Index c = 0; c < d; ++c)
    if (y(c) < 0) throw ValidationError("sample_count_posterior: negative count");

  const Matrix precision =
      llt_with_jitter(prior_cov).solve(Matrix::Identity(d, d));
  const int burnin = static_cast<int>(std::ceil(cfg.count_iters * cfg.count_burnin_fraction));
  constexpr int kBatch = 50;

  std::vector<Vector> pooled;
  pooled.reserve(static_cast<std::size_t>(cfg.count_chains) *
                 std::max(0, cfg.count_iters - burnin));

  for (int chain = 0; chain < cfg.count_chains; ++chain) {
    Vector z = prior_mean;
    if (chain > 0)
      for (Eigen::Index c = 0; c < d; ++c) z(c) += 0.5 * rng.normal();
    Vector w = z - prior_mean;
    Vector q = precision * w;  // gradient piece of the Gaussian prior

    Vector step(d);
    for (Eigen::Index c = 0; c < d; ++c)
      step(c) = 2.4 * std::sqrt(prior_cov(c, c));
    Eigen::VectorXi accepts = Eigen::VectorXi::Zero(d);
    int batch = 0;

    for (int iter = 1; iter <= cfg.count_iters; ++iter) {
      for (Eigen::Index c = 0; c < d; ++c) {
        const double delta = step(c) * rng.normal();
        const double z_new = z(c) + delta;
        // Poisson log-likelihood change for this entry plus the Gaussian
        // prior change; exp overflow rejects naturally.
        double logr = y(c) * delta - (std::exp(z_new) - std::exp(z(c)));
        logr -= 0.5 * delta * (2.0 * q(c) + precision(c, c) * delta);
        if (logr >= 0.0 || rng.uniform() < std::exp(logr)) {
          z(c) = z_new;
          w(c) += delta;
          q += precision.col(c) * delta;
          ++accepts(c);
        }
      }
      if (iter <= burnin && iter % kBatch == 0) {
        ++batch;
        const double adj = std::min(0.25, 1.0 / std::sqrt(static_cast<double>(batch)));
        for (Eigen::Index c = 0; c < d; ++c) {
          const double rate = static_cast<double>(accepts(c)) / kBatch;
          step(c) *= std::exp(rate > 0.44 ? adj : -adj);
        }
        accepts.setZero();
      }
      if (iter > burnin) pooled.push_back(z);
    }
  }
  return pooled;
}

MomentPair moments(const std::vector<Vector>& samples) {
  if (samples.size() < 2)
    throw ValidationError("moments: need at least two samples");
  const Eigen::Index d = samples.front().size();
  MomentPair out;
  out.m = Vector::Zero(d);
  out.S = Matrix::Zero(d, d);
  for (const auto& z : samples) {
    out.m += z;
    out.S.selfadjointView<Eigen::Lower>().rankUpdate(z);
  }
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  out.m *= inv_n;
  out.S *= inv_n;
  out.S.triangularView<Eigen::StrictlyUpper>() = out.S.transpose();
  return out;
}

double orthant_prob_mc(const Vector& mean, const Matrix& cov,
                       const TruncRegion& region, int n, RngStream& rng) {
  if (n < 1) throw ValidationError("orthant_prob_mc: n must be >= 1");
  const Eigen::Index d = mean.size();
  if (cov.rows() != d || cov.cols() != d)
    throw ShapeError("orthant_prob_mc: covariance does not match mean");
  check_region(mean, region);

  const Matrix chol = llt_with_jitter(cov).matrixL();
  Vector eps(d), z(d);
  long hits = 0;
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < d; ++c) eps(c) = rng.normal();
    z = mean + chol * eps;
    bool inside = true;
    for (Eigen::Index c = 0; c < d && inside; ++c)
      inside = z(c) > region.lower(c) && z(c) <= region.upper(c);
    if (inside) ++hits;
  }
  return (static_cast<double>(hits) + 0.5) / (static_cast<double>(n) + 1.0);
}

}  // namespace mmm
