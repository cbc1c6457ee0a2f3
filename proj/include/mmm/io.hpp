// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MMM_IO_HPP
#define MMM_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmm/dataset.hpp"
#include "mmm/em.hpp"
#include "mmm/metrics.hpp"

namespace mmm {

// Schema file: JSON {"variables": [{"name", "kind", "levels"?}]} in row order.
Schema read_schema_json(const std::string& path);
void write_schema_json(const std::string& path, const Schema& schema);

// Data file: long-format CSV with header `unit,variable,time,value`; units
// and variables are strings, time is a 1-based integer, value parsed per
// schema. Every (unit, variable, time) cell must appear exactly once.
MixedDataset read_dataset_csv(const std::string& path, const Schema& schema);
void write_dataset_csv(const std::string& path, const MixedDataset& ds);

nlohmann::json params_to_json(const MMMParams& params);
MMMParams params_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const EmConfig& cfg);
EmConfig config_from_json(const nlohmann::json& j);

// Fitted-model artifact: {K, pi, clusters:[{M, Phi, Sigma}], loglik_history,
// bic, converged, iterations, seed, config}.
void write_fit_json(const std::string& path, const FitResult& result,
                    const EmConfig& cfg, std::uint64_t seed);
FitResult read_fit_json(const std::string& path);

// Assignments CSV: `unit,cluster,tau_1..tau_K` with 1-based cluster ids.
void write_assignments_csv(const std::string& path,
                           const std::vector<std::string>& units,
                           const std::vector<int>& assignments, const Matrix& tau);

void write_loglik_history_csv(const std::string& path,
                              const std::vector<double>& history);

struct AssignmentsFile {
  std::vector<std::string> units;
  std::vector<int> assignments;  // 0-based
  Matrix tau;
};
AssignmentsFile read_assignments_csv(const std::string& path);

// K-sweep CSV: `K,loglik,bic,converged,iterations`.
void write_ksweep_csv(const std::string& path, const KSweepReport& report);

std::string format_double(double v);

}  // namespace mmm

#endif  // MMM_IO_HPP
