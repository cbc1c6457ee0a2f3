// Apache License, Version 2.0, refer to LICENSE.txt

#include "mmm/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mmm/metrics.hpp"
#include "mmm/threading.hpp"

namespace mmm {

void MMMParams::validate() const {
  if (comp.empty()) throw ValidationError("MMMParams: no components");
  if (pi.size() != k()) throw ShapeError("MMMParams: pi size mismatch");
  if (std::abs(pi.sum() - 1.0) > 1e-8 || (pi.array() <= 0.0).any())
    throw ValidationError("MMMParams: weights must be positive and sum to 1");
  const Eigen::Index j = comp.front().rows();
  const Eigen::Index t = comp.front().cols();
  for (const auto& c : comp) {
    if (c.M.rows() != j || c.M.cols() != t || c.Phi.rows() != t ||
        c.Phi.cols() != t || c.Sigma.rows() != j || c.Sigma.cols() != j)
      throw ShapeError("MMMParams: component dimensions disagree");
  }
}

void EmConfig::validate() const {
  mcmc.validate();
  if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  if (w1 < 1 || w2 < 1) throw ValidationError("convergence windows must be >= 1");
  if (restarts < 1) throw ValidationError("restarts must be >= 1");
}

namespace {

Matrix make_pd(Matrix s) {
  s = symmetrized(s);
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() == Eigen::Success) return s;
  for (double jitter : {1e-10, 1e-8, 1e-6}) {
    Matrix patched = s;
    patched.diagonal().array() += jitter;
    llt.compute(patched);
    if (llt.info() == Eigen::Success) return patched;
  }
  throw CovarianceNotPdError("M-step covariance could not be repaired");
}

// sum_{g,d} phi_inv(g,d) * S.block(g*rows, d*rows)  ==  E[Z Phi^{-1} Z^T]
Matrix contract_time(const Matrix& second_moment, const Matrix& phi_inv, int rows) {
  const int t = static_cast<int>(phi_inv.rows());
  Matrix out = Matrix::Zero(rows, rows);
  for (int g = 0; g < t; ++g)
    for (int d = 0; d < t; ++d)
      out.noalias() += phi_inv(g, d) * second_moment.block(g * rows, d * rows, rows, rows);
  return 0.5 * (out + out.transpose());
}

// out(h,t) = sum(S.block(h*rows, t*rows) .* sigma_inv_block)
//          == E[Z^T Sigma^{-1}_block Z](h,t)
Matrix contract_rows(const Matrix& second_moment, const Matrix& sigma_inv_block,
                     int rows, int t) {
  Matrix out(t, t);
  for (int h = 0; h < t; ++h)
    for (int s = 0; s < t; ++s)
      out(h, s) = second_moment.block(h * rows, s * rows, rows, rows)
                      .cwiseProduct(sigma_inv_block)
                      .sum();
  return 0.5 * (out + out.transpose());
}

double poisson_logpmf(double y, double log_rate) {
  return y * log_rate - std::exp(log_rate) - std::lgamma(y + 1.0);
}

// Cluster-level quantities reused across all units of one E-step.
struct ClusterWork {
  double log_pi = 0.0;
  MatNormParams alpha;       // marginal of the continuous block
  Matrix gain_beta;          // Sigma_ba Sigma_aa^{-1}
  Matrix m_beta_prior;       // O x T
  Matrix kron_beta;          // kron(Phi, Sigma^{beta|alpha})
  Matrix gain_gamma;         // Sigma_g,(ab) Sigma_(ab),(ab)^{-1}
  Matrix m_gamma_prior;      // G x T
  Matrix m_head;             // (C+O) x T prior mean of the conditioning rows
  Matrix kron_gamma;         // kron(Phi, Sigma^{gamma|alpha,beta})
  Matrix phi_inv;
  Matrix sigma_inv_bb;
  Matrix sigma_inv_gg;
};

ClusterWork make_cluster_work(const MatNormParams& p, double pi_k,
                              const BlockPartition& part) {
  const int c = part.c, o = part.o, g = part.g;
  const int j = part.rows();
  const int t = static_cast<int>(p.cols());
  ClusterWork w;
  w.log_pi = std::log(pi_k);
  w.phi_inv = llt_with_jitter(p.Phi).solve(Matrix::Identity(t, t));
  const Matrix sigma_inv = llt_with_jitter(p.Sigma).solve(Matrix::Identity(j, j));

  if (c > 0)
    w.alpha = MatNormParams{p.M.topRows(c), p.Phi, p.Sigma.topLeftCorner(c, c)};

  if (o > 0) {
    w.sigma_inv_bb = sigma_inv.block(c, c, o, o);
    w.m_beta_prior = p.M.middleRows(c, o);
    Matrix sigma_cond;
    if (c > 0) {
      std::vector<int> obs(c);
      std::iota(obs.begin(), obs.end(), 0);
      // Solve against the alpha block once; per-unit means reuse the gain.
      const Matrix s_aa = p.Sigma.topLeftCorner(c, c);
      const Matrix s_ba = p.Sigma.block(c, 0, o, c);
      w.gain_beta = llt_with_jitter(s_aa).solve(s_ba.transpose()).transpose();
      sigma_cond = p.Sigma.block(c, c, o, o) - w.gain_beta * s_ba.transpose();
      sigma_cond = symmetrized(sigma_cond);
    } else {
      sigma_cond = p.Sigma.block(c, c, o, o);
    }
    w.kron_beta = kron(p.Phi, sigma_cond);
  }

  if (g > 0) {
    w.sigma_inv_gg = sigma_inv.block(c + o, c + o, g, g);
    w.m_gamma_prior = p.M.bottomRows(g);
    const int head = c + o;
    Matrix sigma_cond;
    if (head > 0) {
      w.m_head = p.M.topRows(head);
      const Matrix s_hh = p.Sigma.topLeftCorner(head, head);
      const Matrix s_gh = p.Sigma.block(head, 0, g, head);
      w.gain_gamma = llt_with_jitter(s_hh).solve(s_gh.transpose()).transpose();
      sigma_cond = p.Sigma.block(head, head, g, g) - w.gain_gamma * s_gh.transpose();
      sigma_cond = symmetrized(sigma_cond);
    } else {
      sigma_cond = p.Sigma;
    }
    w.kron_gamma = kron(p.Phi, sigma_cond);
  }
  return w;
}

double logsumexp_row(const Eigen::RowVectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

EStepStats e_step(const MMMParams& params, const MixedDataset& ds,
                  const EmConfig& cfg, const EStepSeed& seed) {
  params.validate();
  cfg.validate();
  const BlockPartition part = block_partition(ds.schema);
  const int n = ds.n();
  const int k = params.k();
  const int c = part.c, o = part.o, g = part.g;
  const int t = ds.t;
  if (params.comp.front().rows() != part.rows() || params.comp.front().cols() != t)
    throw ShapeError("e_step: parameter dimensions do not match dataset");

  std::vector<ClusterWork> work;
  work.reserve(k);
  for (int h = 0; h < k; ++h)
    work.push_back(make_cluster_work(params.comp[h], params.pi(h), part));

  std::vector<Eigen::VectorXd> beta_thresholds(o);
  for (int r = 0; r < o; ++r)
    beta_thresholds[r] = thresholds_for(ds.schema.variables[c + r]);

  EStepStats stats;
  stats.tau.resize(n, k);
  stats.unit_loglik.resize(n);
  stats.m_beta.assign(static_cast<std::size_t>(n) * k, Matrix());
  stats.m_gamma.assign(static_cast<std::size_t>(n) * k, Matrix());
  stats.d_contr.assign(static_cast<std::size_t>(n) * k, Matrix());
  stats.b_contr.assign(static_cast<std::size_t>(n) * k, Matrix());
  stats.c_contr.assign(static_cast<std::size_t>(n) * k, Matrix());
  stats.a_contr.assign(static_cast<std::size_t>(n) * k, Matrix());
  Matrix log_q(n, k);

  const std::uint64_t it = static_cast<std::uint64_t>(seed.iteration);
  parallel_for(n, resolve_threads(cfg.threads), [&](int i) {
    const Matrix& y = ds.values[i];
    for (int h = 0; h < k; ++h) {
      const ClusterWork& w = work[h];
      const std::size_t cell = static_cast<std::size_t>(i) * k + h;
      const std::uint64_t ui = static_cast<std::uint64_t>(i);
      const std::uint64_t uk = static_cast<std::uint64_t>(h);
      double lq = w.log_pi;

      if (c > 0) lq += matnorm_logpdf(y.topRows(c), w.alpha);

      Matrix m_beta_hat(o, t);
      if (o > 0) {
        Matrix cond_mean = w.m_beta_prior;
        if (c > 0)
          cond_mean.noalias() += w.gain_beta * (y.topRows(c) - w.alpha.M);

        TruncRegion region;
        region.lower.resize(o * t);
        region.upper.resize(o * t);
        for (int tt = 0; tt < t; ++tt) {
          for (int r = 0; r < o; ++r) {
            const int code = static_cast<int>(y(c + r, tt));
            region.lower(tt * o + r) = beta_thresholds[r](code - 1);
            region.upper(tt * o + r) = beta_thresholds[r](code);
          }
        }

        RngStream gibbs_rng(seed.seed, {it, ui, uk, stream::kGibbs});
        const auto samples = gibbs_truncated_mvn(vec(cond_mean), w.kron_beta,
                                                 region, cfg.mcmc, gibbs_rng);
        const MomentPair mp = moments(samples);
        m_beta_hat = unvec(mp.m, o, t);
        stats.m_beta[cell] = m_beta_hat;
        stats.d_contr[cell] = contract_time(mp.S, w.phi_inv, o);
        stats.c_contr[cell] = contract_rows(mp.S, w.sigma_inv_bb, o, t);

        RngStream orthant_rng(seed.seed, {it, ui, uk, stream::kOrthant});
        lq += std::log(orthant_prob_mc(vec(cond_mean), w.kron_beta, region,
                                       cfg.mcmc.orthant_draws, orthant_rng));
      }

      if (g > 0) {
        Matrix cond_mean = w.m_gamma_prior;
        if (c + o > 0) {
          Matrix head(c + o, t);
          if (c > 0) head.topRows(c) = y.topRows(c);
          if (o > 0) head.bottomRows(o) = m_beta_hat;
          cond_mean.noalias() += w.gain_gamma * (head - w.m_head);
        }
        Eigen::VectorXi counts(g * t);
        for (int tt = 0; tt < t; ++tt)
          for (int r = 0; r < g; ++r)
            counts(tt * g + r) = static_cast<int>(y(c + o + r, tt));

        RngStream count_rng(seed.seed, {it, ui, uk, stream::kCount});
        const auto samples = sample_count_posterior(counts, vec(cond_mean),
                                                    w.kron_gamma, cfg.mcmc, count_rng);
        const MomentPair mp = moments(samples);
        const Matrix m_gamma_hat = unvec(mp.m, g, t);
        stats.m_gamma[cell] = m_gamma_hat;
        stats.b_contr[cell] = contract_time(mp.S, w.phi_inv, g);
        stats.a_contr[cell] = contract_rows(mp.S, w.sigma_inv_gg, g, t);

        for (int tt = 0; tt < t; ++tt)
          for (int r = 0; r < g; ++r)
            lq += poisson_logpmf(y(c + o + r, tt), m_gamma_hat(r, tt));
      }

      log_q(i, h) = lq;
    }

    const double lse = logsumexp_row(log_q.row(i));
    if (!std::isfinite(lse))
      throw NumericalError(i, "e_step: all cluster densities vanished for unit " +
                                  std::to_string(i));
    stats.tau.row(i) = (log_q.row(i).array() - lse).exp();
    stats.tau.row(i) /= stats.tau.row(i).sum();
    stats.unit_loglik(i) = lse;
  });

  return stats;
}

MMMParams m_step(const EStepStats& stats, const MixedDataset& ds,
                 const MMMParams& params_prev) {
  const BlockPartition part = block_partition(ds.schema);
  const int n = ds.n();
  const int k = stats.k();
  const int c = part.c, o = part.o, g = part.g;
  const int j = part.rows();
  const int t = ds.t;
  if (stats.n() != n || params_prev.k() != k)
    throw ShapeError("m_step: statistics do not match dataset/parameters");

  auto stack = [&](int i, int h) {
    Matrix z(j, t);
    if (c > 0) z.topRows(c) = ds.values[i].topRows(c);
    const std::size_t cell = static_cast<std::size_t>(i) * k + h;
    if (o > 0) z.middleRows(c, o) = stats.m_beta[cell];
    if (g > 0) z.bottomRows(g) = stats.m_gamma[cell];
    return z;
  };

  MMMParams out;
  out.pi.resize(k);
  out.comp.resize(k);
  for (int h = 0; h < k; ++h) {
    const double sum_tau = stats.tau.col(h).sum();
    if (sum_tau < 0.5)
      throw DegenerateClusterError(
          h, "cluster " + std::to_string(h) + " carries less than half a unit of mass");
    out.pi(h) = sum_tau / static_cast<double>(n);

    Matrix mean = Matrix::Zero(j, t);
    for (int i = 0; i < n; ++i) mean.noalias() += stats.tau(i, h) * stack(i, h);
    mean /= sum_tau;

    const Matrix phi_inv_prev =
        llt_with_jitter(params_prev.comp[h].Phi).solve(Matrix::Identity(t, t));

    Matrix sigma_acc = Matrix::Zero(j, j);
    for (int i = 0; i < n; ++i) {
      const double tau = stats.tau(i, h);
      const std::size_t cell = static_cast<std::size_t>(i) * k + h;
      const Matrix z = stack(i, h);
      const Matrix centered = z - mean;
      Matrix term = centered * phi_inv_prev * centered.transpose();
      if (o > 0) {
        const Matrix& mb = stats.m_beta[cell];
        term.block(c, c, o, o) +=
            stats.d_contr[cell] - mb * phi_inv_prev * mb.transpose();
      }
      if (g > 0) {
        const Matrix& mg = stats.m_gamma[cell];
        term.block(c + o, c + o, g, g) +=
            stats.b_contr[cell] - mg * phi_inv_prev * mg.transpose();
      }
      sigma_acc.noalias() += tau * term;
    }
    Matrix sigma = make_pd(sigma_acc / (static_cast<double>(t) * sum_tau));

    const Matrix sigma_inv = llt_with_jitter(sigma).solve(Matrix::Identity(j, j));
    Matrix phi_acc = Matrix::Zero(t, t);
    for (int i = 0; i < n; ++i) {
      const double tau = stats.tau(i, h);
      const std::size_t cell = static_cast<std::size_t>(i) * k + h;
      const Matrix z = stack(i, h);
      const Matrix centered = z - mean;
      Matrix term = centered.transpose() * sigma_inv * centered;
      if (o > 0) {
        const Matrix& mb = stats.m_beta[cell];
        term += stats.c_contr[cell] -
                mb.transpose() * sigma_inv.block(c, c, o, o) * mb;
      }
      if (g > 0) {
        const Matrix& mg = stats.m_gamma[cell];
        term += stats.a_contr[cell] -
                mg.transpose() * sigma_inv.block(c + o, c + o, g, g) * mg;
      }
      phi_acc.noalias() += tau * term;
    }
    Matrix phi = phi_acc / (static_cast<double>(j) * sum_tau);
    if (!(phi.partialPivLu().determinant() > 0.0)) phi = make_pd(phi);
    out.comp[h] = MatNormParams{mean, constrain_phi(phi), sigma};
  }
  return out;
}

double observed_loglik(const EStepStats& stats) { return stats.unit_loglik.sum(); }

bool check_convergence(const std::vector<double>& history, int w1, int w2,
                       double eps) {
  if (w1 < 1 || w2 < 1) throw ValidationError("convergence windows must be >= 1");
  if (static_cast<int>(history.size()) < w1 + w2) return false;
  const auto mean_of = [&](int from, int count) {
    double acc = 0.0;
    for (int i = from; i < from + count; ++i) acc += history[i];
    return acc / count;
  };
  const int s = static_cast<int>(history.size());
  const double recent = mean_of(s - w1, w1);
  const double previous = mean_of(s - w1 - w2, w2);
  const double num = std::abs(recent - previous);
  if (num == 0.0) return true;
  if (recent == 0.0) return false;
  return num / std::abs(recent) < eps;
}

MMMParams init_kmeanspp(const MixedDataset& ds, int k, RngStream& rng) {
  if (k < 1) throw ValidationError("init_kmeanspp: k must be >= 1");
  const int n = ds.n();
  if (k > n) throw ValidationError("init_kmeanspp: more clusters than units");
  const auto latent = latent_init_view(ds);
  const int j = ds.rows();
  const int t = ds.t;
  const int dim = j * t;

  Matrix x(n, dim);
  for (int i = 0; i < n; ++i) x.row(i) = vec(latent[i]).transpose();

  // Kmeans++ seeding: first centroid uniform, the rest by squared-distance
  // sampling.
  Matrix centroids(k, dim);
  centroids.row(0) = x.row(static_cast<int>(rng.uniform_int(n)));
  Vector dist2 = (x.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int h = 1; h < k; ++h) {
    const double total = dist2.sum();
    int pick;
    if (total <= 0.0) {
      pick = static_cast<int>(rng.uniform_int(n));
    } else {
      double target = rng.uniform() * total;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        target -= dist2(i);
        if (target <= 0.0) {
          pick = i;
          break;
        }
      }
    }
    centroids.row(h) = x.row(pick);
    dist2 = dist2.cwiseMin((x.rowwise() - centroids.row(h)).rowwise().squaredNorm());
  }

  std::vector<int> assign(n, 0);
  for (int round = 0; round < 50; ++round) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (x.row(i) - centroids.row(0)).squaredNorm();
      for (int h = 1; h < k; ++h) {
        const double d = (x.row(i) - centroids.row(h)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = h;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    Matrix sums = Matrix::Zero(k, dim);
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
    for (int i = 0; i < n; ++i) {
      sums.row(assign[i]) += x.row(i);
      ++counts(assign[i]);
    }
    for (int h = 0; h < k; ++h) {
      if (counts(h) > 0) {
        centroids.row(h) = sums.row(h) / counts(h);
        continue;
      }
      // Re-seed an empty cluster with the farthest point.
      int far = 0;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        const double d = (x.row(i) - centroids.row(assign[i])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centroids.row(h) = x.row(far);
      assign[far] = h;
      changed = true;
    }
    if (!changed) break;
  }

  Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
  for (int i = 0; i < n; ++i) ++counts(assign[i]);
  MMMParams params;
  params.pi.resize(k);
  const double floor = 1.0 / (10.0 * k);
  for (int h = 0; h < k; ++h)
    params.pi(h) = std::max(static_cast<double>(counts(h)) / n, floor);
  params.pi /= params.pi.sum();
  for (int h = 0; h < k; ++h)
    params.comp.push_back(MatNormParams{unvec(centroids.row(h).transpose(), j, t),
                                        Matrix::Identity(t, t),
                                        Matrix::Identity(j, j)});
  return params;
}

MMMParams init_random(const MixedDataset& ds, int k, RngStream& rng) {
  if (k < 1) throw ValidationError("init_random: k must be >= 1");
  const int n = ds.n();
  if (k > n) throw ValidationError("init_random: more clusters than units");
  const auto latent = latent_init_view(ds);

  // Sampling without replacement: partial Fisher-Yates.
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int h = 0; h < k; ++h)
    std::swap(idx[h], idx[h + static_cast<int>(rng.uniform_int(n - h))]);

  MMMParams params;
  params.pi = Vector::Constant(k, 1.0 / k);
  for (int h = 0; h < k; ++h)
    params.comp.push_back(MatNormParams{latent[idx[h]],
                                        Matrix::Identity(ds.t, ds.t),
                                        Matrix::Identity(ds.rows(), ds.rows())});
  return params;
}

FitResult fit_from(const MMMParams& params0, const MixedDataset& ds,
                   const EmConfig& cfg, std::uint64_t seed,
                   const IterationObserver& observer) {
  cfg.validate();
  const MixedDataset expanded = expand_nominal(ds);
  const BlockPartition part = block_partition(expanded.schema);

  FitResult result;
  MMMParams params = params0;
  EStepStats last_stats;
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    EStepStats stats = e_step(params, expanded, cfg, {seed, iter});
    MMMParams updated = m_step(stats, expanded, params);
    result.loglik_history.push_back(observed_loglik(stats));
    if (observer) observer(iter, updated, stats);
    params = std::move(updated);
    last_stats = std::move(stats);
    result.iterations = iter;
    if (check_convergence(result.loglik_history, cfg.w1, cfg.w2, cfg.eps)) {
      result.converged = true;
      break;
    }
  }

  result.params = std::move(params);
  result.tau = std::move(last_stats.tau);
  result.assignments.resize(expanded.n());
  for (int i = 0; i < expanded.n(); ++i) {
    int best = 0;
    for (int h = 1; h < result.tau.cols(); ++h)
      if (result.tau(i, h) > result.tau(i, best)) best = h;
    result.assignments[i] = best;
  }
  result.bic = bic(result.loglik_history.back(), static_cast<int>(result.tau.cols()),
                   part.rows(), expanded.t, static_cast<double>(expanded.n()));
  return result;
}

namespace {

FitResult fit_one_start(const MixedDataset& expanded, int k, const EmConfig& cfg,
                        std::uint64_t seed, int run) {
  MMMParams params0;
  {
    RngStream init_rng(seed, {0, static_cast<std::uint64_t>(run), 0, stream::kInit});
    params0 = cfg.init == InitMethod::kKmeansPP ? init_kmeanspp(expanded, k, init_rng)
                                                : init_random(expanded, k, init_rng);
  }
  const std::uint64_t run_seed = derive_seed(seed, {static_cast<std::uint64_t>(run)});
  for (int retry = 0;; ++retry) {
    try {
      return fit_from(params0, expanded, cfg, derive_seed(run_seed, {static_cast<std::uint64_t>(retry)}));
    } catch (const DegenerateClusterError& e) {
      if (retry >= 3)
        throw FitFailedError(std::string("fit: restart budget exhausted (") + e.what() + ")");
      RngStream retry_rng(seed, {0, static_cast<std::uint64_t>(run),
                                 static_cast<std::uint64_t>(retry + 1), stream::kRestart});
      params0 = init_random(expanded, k, retry_rng);
    }
  }
}

}  // namespace

FitResult fit(const MixedDataset& ds, int k, const EmConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const MixedDataset expanded = expand_nominal(ds);
  const int runs = cfg.init == InitMethod::kRandom ? cfg.restarts : 1;
  FitResult best;
  bool have_best = false;
  for (int run = 0; run < runs; ++run) {
    FitResult candidate = fit_one_start(expanded, k, cfg, seed, run);
    if (!have_best || candidate.loglik_history.back() > best.loglik_history.back()) {
      best = std::move(candidate);
      have_best = true;
    }
  }
  return best;
}

MixedDataset as_continuous(const MixedDataset& ds) {
  MixedDataset out = expand_nominal(ds);
  for (auto& v : out.schema.variables) {
    v.kind = VariableKind::kContinuous;
    v.levels = 0;
  }
  return out;
}

FitResult fit_mmn(const MixedDataset& ds, int k, const EmConfig& cfg, std::uint64_t seed) {
  return fit(as_continuous(ds), k, cfg, seed);
}

}  // namespace mmm
