// Apache License, Version 2.0, refer to LICENSE.txt
//
// Test-only oracles. Everything here is an independent computation path:
// dense JT-dimensional Gaussian algebra with explicit inverses, grid
// quadrature, pair enumeration, and a direct matrix-normal mixture EM. None
// of it reuses the library's factorized implementations it is checking.

#ifndef MMM_TESTS_ORACLES_HPP
#define MMM_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mmm/em.hpp"
#include "mmm/rng.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd kron_loops(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      for (int r = 0; r < b.rows(); ++r)
        for (int c = 0; c < b.cols(); ++c)
          out(i * b.rows() + r, j * b.cols() + c) = a(i, j) * b(r, c);
  return out;
}

inline VectorXd stack_columns(const MatrixXd& z) {
  VectorXd v(z.size());
  int idx = 0;
  for (int c = 0; c < z.cols(); ++c)
    for (int r = 0; r < z.rows(); ++r) v(idx++) = z(r, c);
  return v;
}

inline double dense_mvn_logpdf(const VectorXd& x, const VectorXd& mean,
                               const MatrixXd& cov) {
  const int d = static_cast<int>(x.size());
  const MatrixXd inv = cov.inverse();
  const double logdet = std::log(cov.determinant());
  const VectorXd centered = x - mean;
  return -0.5 * d * std::log(2.0 * M_PI) - 0.5 * logdet -
         0.5 * centered.dot(inv * centered);
}

struct DenseConditional {
  VectorXd mean;
  MatrixXd cov;
};

inline DenseConditional dense_gaussian_conditional(const VectorXd& mean,
                                                   const MatrixXd& cov,
                                                   const std::vector<int>& observed,
                                                   const VectorXd& x_obs) {
  std::vector<int> hidden;
  std::vector<bool> is_obs(mean.size(), false);
  for (int i : observed) is_obs[i] = true;
  for (int i = 0; i < mean.size(); ++i)
    if (!is_obs[i]) hidden.push_back(i);

  const int no = static_cast<int>(observed.size());
  const int nh = static_cast<int>(hidden.size());
  MatrixXd s_oo(no, no), s_ho(nh, no), s_hh(nh, nh);
  VectorXd m_o(no), m_h(nh);
  for (int i = 0; i < no; ++i) {
    m_o(i) = mean(observed[i]);
    for (int j = 0; j < no; ++j) s_oo(i, j) = cov(observed[i], observed[j]);
  }
  for (int i = 0; i < nh; ++i) {
    m_h(i) = mean(hidden[i]);
    for (int j = 0; j < no; ++j) s_ho(i, j) = cov(hidden[i], observed[j]);
    for (int j = 0; j < nh; ++j) s_hh(i, j) = cov(hidden[i], hidden[j]);
  }
  const MatrixXd gain = s_ho * s_oo.inverse();
  return {m_h + gain * (x_obs - m_o), s_hh - gain * s_ho.transpose()};
}

// Mean of a standard normal truncated to (a, b); either bound may be infinite.
inline double truncnorm_mean(double a, double b) {
  const double fa = std::isinf(a) ? 0.0 : mmm::norm_pdf(a);
  const double fb = std::isinf(b) ? 0.0 : mmm::norm_pdf(b);
  const double mass = mmm::norm_cdf(b) - mmm::norm_cdf(a);
  return (fa - fb) / mass;
}

// Posterior mean of z with y ~ Poisson(e^z), z ~ N(mu, sigma2), by Simpson
// quadrature over a mode-centered window.
inline double poisson_lognormal_posterior_mean(long y, double mu, double sigma2) {
  // Newton for the mode of y z - e^z - (z - mu)^2 / (2 sigma2).
  double z = y > 0 ? std::log(static_cast<double>(y)) : mu - 1.0;
  for (int it = 0; it < 200; ++it) {
    const double grad = y - std::exp(z) - (z - mu) / sigma2;
    const double hess = -std::exp(z) - 1.0 / sigma2;
    const double step = grad / hess;
    z -= step;
    if (std::abs(step) < 1e-13) break;
  }
  const double sd = 1.0 / std::sqrt(std::exp(z) + 1.0 / sigma2);
  const double lo = z - 40.0 * sd;
  const double hi = z + 40.0 * sd;
  const int n = 40000;  // even
  const double h = (hi - lo) / n;
  auto logw = [&](double zz) {
    return y * zz - std::exp(zz) - 0.5 * (zz - mu) * (zz - mu) / sigma2;
  };
  const double shift = logw(z);
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double zz = lo + i * h;
    const double w = std::exp(logw(zz) - shift);
    const double coef = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    num += coef * w * zz;
    den += coef * w;
  }
  return num / den;
}

// Pair-enumeration adjusted Rand index.
inline double ari_pairs(const std::vector<int>& a, const std::vector<int>& b) {
  const int n = static_cast<int>(a.size());
  double n11 = 0, n10 = 0, n01 = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      n11 += sa && sb;
      n10 += sa && !sb;
      n01 += !sa && sb;
    }
  }
  const double total = 0.5 * n * (n - 1);
  const double expected = (n11 + n10) * (n11 + n01) / total;
  const double maximum = 0.5 * ((n11 + n10) + (n11 + n01));
  if (maximum == expected) return 1.0;
  return (n11 - expected) / (maximum - expected);
}

inline MatrixXd random_pd(int d, mmm::RngStream& rng) {
  MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  return a * a.transpose() / d + 0.5 * MatrixXd::Identity(d, d);
}

inline MatrixXd random_matrix(int r, int c, mmm::RngStream& rng) {
  MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

// Direct matrix-normal mixture EM on all-continuous data: responsibilities
// through the dense vectorized Gaussian, closed-form M-step with explicit
// inverses, determinant constraint applied by direct scaling.
inline std::vector<mmm::MMMParams> mmn_em_trajectory(
    const std::vector<MatrixXd>& data, const mmm::MMMParams& params0, int iters) {
  const int n = static_cast<int>(data.size());
  const int k = params0.k();
  const int j = static_cast<int>(data.front().rows());
  const int t = static_cast<int>(data.front().cols());
  mmm::MMMParams params = params0;
  std::vector<mmm::MMMParams> trajectory;

  for (int step = 0; step < iters; ++step) {
    MatrixXd tau(n, k);
    for (int i = 0; i < n; ++i) {
      VectorXd logq(k);
      for (int h = 0; h < k; ++h) {
        const MatrixXd cov = kron_loops(params.comp[h].Phi, params.comp[h].Sigma);
        logq(h) = std::log(params.pi(h)) +
                  dense_mvn_logpdf(stack_columns(data[i]),
                                   stack_columns(params.comp[h].M), cov);
      }
      const double m = logq.maxCoeff();
      const VectorXd w = (logq.array() - m).exp();
      tau.row(i) = (w / w.sum()).transpose();
    }

    mmm::MMMParams next;
    next.pi.resize(k);
    next.comp.resize(k);
    for (int h = 0; h < k; ++h) {
      const double sum_tau = tau.col(h).sum();
      next.pi(h) = sum_tau / n;
      MatrixXd mean = MatrixXd::Zero(j, t);
      for (int i = 0; i < n; ++i) mean += tau(i, h) * data[i];
      mean /= sum_tau;
      const MatrixXd phi_inv_prev = params.comp[h].Phi.inverse();
      MatrixXd sigma = MatrixXd::Zero(j, j);
      for (int i = 0; i < n; ++i) {
        const MatrixXd c = data[i] - mean;
        sigma += tau(i, h) * c * phi_inv_prev * c.transpose();
      }
      sigma /= t * sum_tau;
      const MatrixXd sigma_inv = sigma.inverse();
      MatrixXd phi = MatrixXd::Zero(t, t);
      for (int i = 0; i < n; ++i) {
        const MatrixXd c = data[i] - mean;
        phi += tau(i, h) * c.transpose() * sigma_inv * c;
      }
      phi /= j * sum_tau;
      phi /= std::pow(phi.determinant(), 1.0 / t);
      phi = 0.5 * (phi + phi.transpose()).eval();
      next.comp[h] = mmm::MatNormParams{mean, phi, sigma};
    }
    params = next;
    trajectory.push_back(params);
  }
  return trajectory;
}

}  // namespace oracle

#endif  // MMM_TESTS_ORACLES_HPP
