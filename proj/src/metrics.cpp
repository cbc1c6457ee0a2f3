// Apache License, Version 2.0, refer to LICENSE.txt

#include "mmm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace mmm {

double bic(double loglik, int k, int j, int t, double n) {
  if (n < 1.0) throw ValidationError("bic: n must be >= 1");
  const double nu = static_cast<double>(k) *
                        (1.0 + j * t + j * (j + 1) / 2.0 + t * (t + 1) / 2.0) -
                    1.0;
  return -2.0 * loglik + nu * std::log(n);
}

KSweepReport select_k(const MixedDataset& ds, int kmax, const EmConfig& cfg,
                      std::uint64_t seed) {
  if (kmax < 1) throw ValidationError("select_k: kmax must be >= 1");
  KSweepReport report;
  std::map<int, FitResult> fits;
  for (int k = 1; k <= kmax; ++k) {
    KSweepRow row;
    row.k = k;
    try {
      FitResult fr = fit(ds, k, cfg, derive_seed(seed, {static_cast<std::uint64_t>(k)}));
      row.loglik = fr.loglik_history.back();
      row.bic = fr.bic;
      row.converged = fr.converged;
      row.iterations = fr.iterations;
      fits.emplace(k, std::move(fr));
    } catch (const Error&) {
      row.failed = true;
      row.loglik = std::numeric_limits<double>::quiet_NaN();
      row.bic = std::numeric_limits<double>::quiet_NaN();
    }
    report.rows.push_back(row);
  }

  auto pick = [&](bool require_converged) {
    int best = 0;
    double best_bic = std::numeric_limits<double>::infinity();
    for (const auto& row : report.rows) {
      if (row.failed || (require_converged && !row.converged)) continue;
      if (row.bic < best_bic) {
        best_bic = row.bic;
        best = row.k;
      }
    }
    return best;
  };
  report.best_k = pick(true);
  if (report.best_k == 0) report.best_k = pick(false);
  if (report.best_k == 0) throw SelectionError("select_k: every candidate fit failed");
  report.best = fits.at(report.best_k);
  return report;
}

double ari(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ShapeError("ari: partitions differ in length");
  const std::size_t n = a.size();
  if (n == 0) throw ValidationError("ari: empty partitions");

  std::map<std::pair<int, int>, long> cells;
  std::map<int, long> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    ++cells[{a[i], b[i]}];
    ++rows[a[i]];
    ++cols[b[i]];
  }
  auto choose2 = [](long m) { return 0.5 * m * (m - 1); };
  double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, count] : cells) sum_cells += choose2(count);
  for (const auto& [key, count] : rows) sum_rows += choose2(count);
  for (const auto& [key, count] : cols) sum_cols += choose2(count);
  const double total = choose2(static_cast<long>(n));
  const double expected = sum_rows * sum_cols / total;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  if (maximum == expected) return 1.0;  // both partitions degenerate
  return (sum_cells - expected) / (maximum - expected);
}

double mape(const Vector& truth, const Vector& est) {
  if (truth.size() != est.size()) throw ShapeError("mape: length mismatch");
  if (truth.size() == 0) throw ValidationError("mape: empty parameter vector");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    if (std::abs(truth(i)) < 1e-8)
      throw DomainError("mape: true parameter too close to zero");
    acc += std::abs((truth(i) - est(i)) / truth(i));
  }
  return 100.0 * acc / static_cast<double>(truth.size());
}

std::vector<int> hungarian_min_assignment(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw ShapeError("assignment matrix must be square");
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();

  // Shortest augmenting path formulation with row/column potentials;
  // match[j] holds the row assigned to column j (1-based sentinels).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n);
  for (int j = 1; j <= n; ++j)
    if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

std::vector<int> align_clusters(const MMMParams& est, const MMMParams& truth) {
  if (est.k() != truth.k()) throw ShapeError("align_clusters: cluster counts differ");
  const int k = truth.k();
  Matrix cost(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      cost(i, j) = (est.comp[j].M - truth.comp[i].M).norm();
  return hungarian_min_assignment(cost);
}

MMMParams apply_permutation(const MMMParams& p, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != p.k())
    throw ShapeError("apply_permutation: permutation size mismatch");
  MMMParams out;
  out.pi = Vector(p.k());
  for (int k = 0; k < p.k(); ++k) {
    out.pi(k) = p.pi(perm[k]);
    out.comp.push_back(p.comp[perm[k]]);
  }
  return out;
}

ParamErrors parameter_errors(const MMMParams& est_aligned, const MMMParams& truth) {
  if (est_aligned.k() != truth.k())
    throw ShapeError("parameter_errors: cluster counts differ");
  std::vector<double> tm, em, tp, ep, ts, es, tw, ew;
  for (int k = 0; k < truth.k(); ++k) {
    const auto& t = truth.comp[k];
    const auto& e = est_aligned.comp[k];
    for (Eigen::Index idx = 0; idx < t.M.size(); ++idx) {
      if (std::abs(t.M(idx)) < 1e-8) continue;
      tm.push_back(t.M(idx));
      em.push_back(e.M(idx));
    }
    for (Eigen::Index d = 0; d < t.Phi.rows(); ++d) {
      if (std::abs(t.Phi(d, d)) < 1e-8) continue;
      tp.push_back(t.Phi(d, d));
      ep.push_back(e.Phi(d, d));
    }
    for (Eigen::Index d = 0; d < t.Sigma.rows(); ++d) {
      if (std::abs(t.Sigma(d, d)) < 1e-8) continue;
      ts.push_back(t.Sigma(d, d));
      es.push_back(e.Sigma(d, d));
    }
    tw.push_back(truth.pi(k));
    ew.push_back(est_aligned.pi(k));
  }
  auto to_vec = [](const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  };
  ParamErrors out;
  out.mape_m = mape(to_vec(tm), to_vec(em));
  out.mape_phi_diag = mape(to_vec(tp), to_vec(ep));
  out.mape_sigma_diag = mape(to_vec(ts), to_vec(es));
  out.mape_pi = mape(to_vec(tw), to_vec(ew));
  return out;
}

}  // namespace mmm
