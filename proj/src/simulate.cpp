// Apache License, Version 2.0, refer to LICENSE.txt

#include "mmm/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mmm/io.hpp"
#include "mmm/metrics.hpp"

namespace mmm {

void GenConfig::validate() const {
  schema.validate();
  if (schema.has_nominal())
    throw ValidationError("generator schema must not contain nominal variables");
  (void)block_partition(schema);
  if (n < 1 || k < 1 || t < 1) throw ValidationError("generator needs n, k, t >= 1");
  if (pi.size() != k || std::abs(pi.sum() - 1.0) > 1e-8 || (pi.array() <= 0.0).any())
    throw ValidationError("generator weights must be positive and sum to 1");
  if (static_cast<int>(means.size()) != k || static_cast<int>(phi.size()) != k ||
      static_cast<int>(sigma.size()) != k)
    throw ValidationError("generator needs K mean/phi/sigma matrices");
  const int j = schema.rows();
  for (int h = 0; h < k; ++h) {
    if (means[h].rows() != j || means[h].cols() != t || phi[h].rows() != t ||
        phi[h].cols() != t || sigma[h].rows() != j || sigma[h].cols() != j)
      throw ValidationError("generator parameter dimensions do not match schema");
  }
  if (noise_fraction < 0.0 || noise_fraction >= 1.0)
    throw ValidationError("noise fraction must lie in [0,1)");
  if (!(noise_var > 0.0)) throw ValidationError("noise variance must be positive");
}

MMMParams GenConfig::params() const {
  MMMParams p;
  p.pi = pi;
  for (int h = 0; h < k; ++h) p.comp.push_back(MatNormParams{means[h], phi[h], sigma[h]});
  return p;
}

std::pair<std::vector<Matrix>, std::vector<int>> inject_noise(
    const std::vector<Matrix>& latent, double tau, double noise_var,
    const std::vector<int>& labels, RngStream& rng) {
  if (latent.size() != labels.size())
    throw ShapeError("inject_noise: labels do not match latent matrices");
  if (tau < 0.0 || tau >= 1.0) throw ValidationError("noise fraction must lie in [0,1)");

  std::vector<Matrix> out = latent;
  std::vector<int> noisy;
  if (tau == 0.0) return {out, noisy};

  int k = 0;
  for (int label : labels) k = std::max(k, label);
  const double sd = std::sqrt(noise_var);
  for (int h = 1; h <= k; ++h) {
    std::vector<int> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == h) members.push_back(static_cast<int>(i));
    const int take = static_cast<int>(std::floor(tau * members.size()));
    for (int pick = 0; pick < take; ++pick)
      std::swap(members[pick],
                members[pick + static_cast<int>(rng.uniform_int(members.size() - pick))]);
    for (int pick = 0; pick < take; ++pick) {
      const int unit = members[pick];
      Matrix& z = out[unit];
      for (Eigen::Index col = 0; col < z.cols(); ++col)
        for (Eigen::Index row = 0; row < z.rows(); ++row)
          z(row, col) += sd * rng.normal();
      noisy.push_back(unit);
    }
  }
  std::sort(noisy.begin(), noisy.end());
  return {out, noisy};
}

std::pair<MixedDataset, GroundTruth> generate(const GenConfig& cfg) {
  cfg.validate();
  const int j = cfg.schema.rows();

  GroundTruth truth;
  truth.params = cfg.params();
  truth.labels.resize(cfg.n);
  truth.latent.reserve(cfg.n);

  RngStream label_rng(cfg.seed, {stream::kLabel});
  RngStream latent_rng(cfg.seed, {stream::kLatent});
  for (int i = 0; i < cfg.n; ++i) {
    double u = label_rng.uniform();
    int label = cfg.k;
    for (int h = 0; h < cfg.k; ++h) {
      u -= cfg.pi(h);
      if (u <= 0.0) {
        label = h + 1;
        break;
      }
    }
    truth.labels[i] = label;
    truth.latent.push_back(sample_matnorm(truth.params.comp[label - 1], latent_rng));
  }

  if (cfg.noise_fraction > 0.0) {
    RngStream noise_rng(cfg.seed, {stream::kNoise});
    auto [noised, picked] = inject_noise(truth.latent, cfg.noise_fraction,
                                         cfg.noise_var, truth.labels, noise_rng);
    truth.latent = std::move(noised);
    truth.noisy_units = std::move(picked);
  }

  MixedDataset ds;
  ds.schema = cfg.schema;
  ds.t = cfg.t;
  ds.units.reserve(cfg.n);
  ds.values.reserve(cfg.n);
  RngStream emit_rng(cfg.seed, {stream::kEmit});
  for (int i = 0; i < cfg.n; ++i) {
    ds.units.push_back("u" + std::to_string(i + 1));
    Matrix y(j, cfg.t);
    const Matrix& z = truth.latent[i];
    for (int r = 0; r < j; ++r) {
      const auto& var = cfg.schema.variables[r];
      switch (var.kind) {
        case VariableKind::kContinuous:
          y.row(r) = z.row(r);
          break;
        case VariableKind::kOrdinal:
        case VariableKind::kBinary: {
          const Eigen::VectorXd thr = thresholds_for(var);
          for (int tt = 0; tt < cfg.t; ++tt) y(r, tt) = discretize(z(r, tt), thr);
          break;
        }
        case VariableKind::kCount:
          for (int tt = 0; tt < cfg.t; ++tt)
            y(r, tt) = static_cast<double>(emit_rng.poisson(std::exp(z(r, tt))));
          break;
        case VariableKind::kNominal:
          throw ValidationError("generator schema must not contain nominal variables");
      }
    }
    ds.values.push_back(std::move(y));
  }
  return {std::move(ds), std::move(truth)};
}

GenConfig benchmark_gen_config(int n, double noise_fraction, std::uint64_t seed) {
  GenConfig cfg;
  cfg.n = n;
  cfg.k = 2;
  cfg.t = 3;
  cfg.schema.variables = {{"v1", VariableKind::kContinuous, 0},
                          {"v2", VariableKind::kOrdinal, 5},
                          {"v3", VariableKind::kBinary, 0},
                          {"v4", VariableKind::kCount, 0}};
  cfg.pi = Vector(2);
  cfg.pi << 0.6, 0.4;
  Matrix m1(4, 3), m2(4, 3);
  m1.row(0).setConstant(1.75);
  m1.row(1).setConstant(1.75);
  m1.row(2).setConstant(-0.25);
  m1.row(3).setConstant(1.0);
  m2.row(0).setConstant(2.75);
  m2.row(1).setConstant(2.75);
  m2.row(2).setConstant(0.25);
  m2.row(3).setConstant(2.5);
  cfg.means = {m1, m2};
  cfg.phi = {Matrix::Identity(3, 3), Matrix::Identity(3, 3)};
  cfg.sigma = {Matrix::Identity(4, 4), Matrix::Identity(4, 4)};
  cfg.noise_fraction = noise_fraction;
  cfg.noise_var = 0.5;
  cfg.seed = seed;
  return cfg;
}

namespace {

std::vector<int> subset(const std::vector<int>& v, const std::vector<int>& keep) {
  std::vector<int> out;
  out.reserve(keep.size());
  for (int i : keep) out.push_back(v[i]);
  return out;
}

std::vector<int> clean_indices(int n, const std::vector<int>& noisy) {
  std::vector<bool> is_noisy(n, false);
  for (int i : noisy) is_noisy[i] = true;
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (!is_noisy[i]) out.push_back(i);
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<ScenarioRow> run_scenario(const ScenarioConfig& cfg) {
  if (cfg.replicates < 1) throw ValidationError("scenario needs at least one replicate");
  std::vector<ScenarioRow> rows;
  for (int n : cfg.n_values) {
    for (double tau : cfg.noise_fractions) {
      for (int rep = 0; rep < cfg.replicates; ++rep) {
        ScenarioRow row;
        row.n = n;
        row.noise_fraction = tau;
        row.replicate = rep;
        const std::uint64_t cell_seed =
            derive_seed(cfg.seed, {static_cast<std::uint64_t>(n),
                                   static_cast<std::uint64_t>(std::llround(tau * 1000)),
                                   static_cast<std::uint64_t>(rep)});
        const GenConfig gen = benchmark_gen_config(n, tau, cell_seed);
        auto [ds, truth] = generate(gen);
        try {
          // Reference partition: one E-step at the true parameters.
          {
            const EStepStats stats =
                e_step(truth.params, ds, cfg.em, {derive_seed(cell_seed, {1}), 1});
            std::vector<int> bayes(ds.n());
            for (int i = 0; i < ds.n(); ++i) {
              int best = 0;
              for (int h = 1; h < stats.tau.cols(); ++h)
                if (stats.tau(i, h) > stats.tau(i, best)) best = h;
              bayes[i] = best;
            }
            row.ari_bayes = ari(truth.labels, bayes);
          }

          auto start = std::chrono::steady_clock::now();
          const FitResult mmm_fit = fit(ds, gen.k, cfg.em, derive_seed(cell_seed, {2}));
          row.mmm_seconds = seconds_since(start);
          row.mmm_converged = mmm_fit.converged;
          row.mmm_iterations = mmm_fit.iterations;
          row.ari_mmm = ari(truth.labels, mmm_fit.assignments);
          const auto clean = clean_indices(ds.n(), truth.noisy_units);
          row.ari_mmm_clean =
              ari(subset(truth.labels, clean), subset(mmm_fit.assignments, clean));
          const auto perm = align_clusters(mmm_fit.params, truth.params);
          const auto errors =
              parameter_errors(apply_permutation(mmm_fit.params, perm), truth.params);
          row.mape_m = errors.mape_m;
          row.mape_phi_diag = errors.mape_phi_diag;
          row.mape_sigma_diag = errors.mape_sigma_diag;
          row.mape_pi = errors.mape_pi;

          start = std::chrono::steady_clock::now();
          const FitResult mmn_fit = fit_mmn(ds, gen.k, cfg.em, derive_seed(cell_seed, {3}));
          row.mmn_seconds = seconds_since(start);
          row.ari_mmn = ari(truth.labels, mmn_fit.assignments);

          if (cfg.kmax > 0) {
            start = std::chrono::steady_clock::now();
            const KSweepReport sweep =
                select_k(ds, cfg.kmax, cfg.em, derive_seed(cell_seed, {4}));
            row.sweep_seconds = seconds_since(start);
            row.best_k = sweep.best_k;
          }
          row.status = "ok";
        } catch (const Error& e) {
          row.status = std::string("fit_failed: ") + e.what();
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_scenario_csv(const std::string& path, const std::vector<ScenarioRow>& rows) {
  std::ostringstream out;
  out << "n,noise_fraction,replicate,status,ari_bayes,ari_mmm,ari_mmm_clean,ari_mmn,"
         "mape_m,mape_phi_diag,mape_sigma_diag,mape_pi,best_k,mmm_converged,"
         "mmm_iterations,mmm_seconds,mmn_seconds,sweep_seconds\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.noise_fraction) << ',' << r.replicate << ','
        << r.status << ',' << format_double(r.ari_bayes) << ','
        << format_double(r.ari_mmm) << ',' << format_double(r.ari_mmm_clean) << ','
        << format_double(r.ari_mmn) << ',' << format_double(r.mape_m) << ','
        << format_double(r.mape_phi_diag) << ',' << format_double(r.mape_sigma_diag)
        << ',' << format_double(r.mape_pi) << ',' << r.best_k << ','
        << (r.mmm_converged ? 1 : 0) << ',' << r.mmm_iterations << ','
        << format_double(r.mmm_seconds) << ',' << format_double(r.mmn_seconds) << ','
        << format_double(r.sweep_seconds) << '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write file '" + path + "'");
  f << out.str();
}

void write_scenario_provenance(const std::string& path, const ScenarioConfig& cfg) {
  nlohmann::json j;
  j["n_values"] = cfg.n_values;
  j["noise_fractions"] = cfg.noise_fractions;
  j["replicates"] = cfg.replicates;
  j["kmax"] = cfg.kmax;
  j["seed"] = cfg.seed;
  j["em"] = config_to_json(cfg.em);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write file '" + path + "'");
  f << j.dump(2) << "\n";
}

}  // namespace mmm
