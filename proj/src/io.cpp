// Apache License, Version 2.0, refer to LICENSE.txt

#include "mmm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace mmm {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file '" + path + "'");
  out << content;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  j["data"] = data;  // row-major
  return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw ValidationError("matrix json: data length does not match dims");
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
  return m;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Schema read_schema_json(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("schema file '" + path + "': " + e.what());
  }
  Schema schema;
  if (!j.contains("variables") || !j["variables"].is_array())
    throw ValidationError("schema file '" + path + "' lacks a variables array");
  for (const auto& vj : j["variables"]) {
    VariableSpec v;
    v.name = vj.at("name").get<std::string>();
    v.kind = variable_kind_from_string(vj.at("kind").get<std::string>());
    v.levels = vj.value("levels", 0);
    schema.variables.push_back(std::move(v));
  }
  schema.validate();
  return schema;
}

void write_schema_json(const std::string& path, const Schema& schema) {
  nlohmann::json j;
  j["variables"] = nlohmann::json::array();
  for (const auto& v : schema.variables) {
    nlohmann::json vj;
    vj["name"] = v.name;
    vj["kind"] = to_string(v.kind);
    if (v.kind == VariableKind::kOrdinal || v.kind == VariableKind::kNominal)
      vj["levels"] = v.levels;
    j["variables"].push_back(vj);
  }
  write_file(path, j.dump(2) + "\n");
}

MixedDataset read_dataset_csv(const std::string& path, const Schema& schema) {
  schema.validate();
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("data file '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_csv_line(line) != std::vector<std::string>{"unit", "variable", "time", "value"})
    throw ValidationError("data file '" + path + "' must start with header unit,variable,time,value");

  std::map<std::string, int> var_row;
  for (int r = 0; r < schema.rows(); ++r) var_row[schema.variables[r].name] = r;

  struct Cell {
    int unit, row, time;
    double value;
  };
  std::vector<Cell> cells;
  std::map<std::string, int> unit_index;
  std::vector<std::string> units;
  int max_time = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4)
      throw ValidationError("data file '" + path + "' line " + std::to_string(line_no) +
                            ": expected 4 fields");
    const auto it = var_row.find(fields[1]);
    if (it == var_row.end())
      throw ValidationError("data file '" + path + "' line " + std::to_string(line_no) +
                            ": variable '" + fields[1] + "' is not in the schema");
    int time;
    double value;
    try {
      time = std::stoi(fields[2]);
      value = std::stod(fields[3]);
    } catch (const std::exception&) {
      throw ValidationError("data file '" + path + "' line " + std::to_string(line_no) +
                            ": cannot parse time/value");
    }
    if (time < 1)
      throw ValidationError("data file '" + path + "' line " + std::to_string(line_no) +
                            ": time must be a 1-based integer");
    max_time = std::max(max_time, time);
    auto [uit, inserted] = unit_index.try_emplace(fields[0], static_cast<int>(units.size()));
    if (inserted) units.push_back(fields[0]);
    cells.push_back({uit->second, it->second, time - 1, value});
  }
  if (cells.empty()) throw ValidationError("data file '" + path + "' has no rows");

  MixedDataset ds;
  ds.schema = schema;
  ds.units = units;
  ds.t = max_time;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ds.values.assign(units.size(), Eigen::MatrixXd::Constant(schema.rows(), max_time, nan));
  for (const auto& cell : cells) {
    double& slot = ds.values[cell.unit](cell.row, cell.time);
    if (!std::isnan(slot))
      throw ValidationError("data file '" + path + "': duplicate cell for unit '" +
                            units[cell.unit] + "', variable '" +
                            schema.variables[cell.row].name + "', time " +
                            std::to_string(cell.time + 1));
    slot = cell.value;
  }
  for (std::size_t i = 0; i < ds.values.size(); ++i)
    for (int r = 0; r < schema.rows(); ++r)
      for (int t = 0; t < max_time; ++t)
        if (std::isnan(ds.values[i](r, t)))
          throw ValidationError("data file '" + path + "': missing cell for unit '" +
                                units[i] + "', variable '" + schema.variables[r].name +
                                "', time " + std::to_string(t + 1));
  validate(ds);
  return ds;
}

void write_dataset_csv(const std::string& path, const MixedDataset& ds) {
  std::ostringstream out;
  out << "unit,variable,time,value\n";
  for (int i = 0; i < ds.n(); ++i)
    for (int r = 0; r < ds.rows(); ++r)
      for (int t = 0; t < ds.t; ++t)
        out << ds.units[i] << ',' << ds.schema.variables[r].name << ',' << (t + 1)
            << ',' << format_double(ds.values[i](r, t)) << '\n';
  write_file(path, out.str());
}

nlohmann::json params_to_json(const MMMParams& params) {
  nlohmann::json j;
  j["K"] = params.k();
  j["pi"] = std::vector<double>(params.pi.data(), params.pi.data() + params.pi.size());
  j["clusters"] = nlohmann::json::array();
  for (const auto& c : params.comp) {
    nlohmann::json cj;
    cj["M"] = matrix_to_json(c.M);
    cj["Phi"] = matrix_to_json(c.Phi);
    cj["Sigma"] = matrix_to_json(c.Sigma);
    j["clusters"].push_back(cj);
  }
  return j;
}

MMMParams params_from_json(const nlohmann::json& j) {
  MMMParams params;
  const auto pi = j.at("pi").get<std::vector<double>>();
  params.pi = Eigen::Map<const Vector>(pi.data(), static_cast<Eigen::Index>(pi.size()));
  for (const auto& cj : j.at("clusters")) {
    MatNormParams c;
    c.M = matrix_from_json(cj.at("M"));
    c.Phi = matrix_from_json(cj.at("Phi"));
    c.Sigma = matrix_from_json(cj.at("Sigma"));
    params.comp.push_back(std::move(c));
  }
  if (j.contains("K") && j["K"].get<int>() != params.k())
    throw ValidationError("params json: K does not match cluster list");
  return params;
}

nlohmann::json config_to_json(const EmConfig& cfg) {
  nlohmann::json j;
  j["mcmc"] = {{"gibbs_burnin", cfg.mcmc.gibbs_burnin},
               {"gibbs_thin", cfg.mcmc.gibbs_thin},
               {"gibbs_samples", cfg.mcmc.gibbs_samples},
               {"count_iters", cfg.mcmc.count_iters},
               {"count_chains", cfg.mcmc.count_chains},
               {"count_burnin_fraction", cfg.mcmc.count_burnin_fraction},
               {"orthant_draws", cfg.mcmc.orthant_draws}};
  j["em"] = {{"max_iter", cfg.max_iter},
             {"eps", cfg.eps},
             {"w1", cfg.w1},
             {"w2", cfg.w2},
             {"init", cfg.init == InitMethod::kKmeansPP ? "kmeanspp" : "random"},
             {"restarts", cfg.restarts}};
  j["threads"] = cfg.threads;
  return j;
}

EmConfig config_from_json(const nlohmann::json& j) {
  EmConfig cfg;
  if (j.contains("mcmc")) {
    const auto& m = j["mcmc"];
    cfg.mcmc.gibbs_burnin = m.value("gibbs_burnin", cfg.mcmc.gibbs_burnin);
    cfg.mcmc.gibbs_thin = m.value("gibbs_thin", cfg.mcmc.gibbs_thin);
    cfg.mcmc.gibbs_samples = m.value("gibbs_samples", cfg.mcmc.gibbs_samples);
    cfg.mcmc.count_iters = m.value("count_iters", cfg.mcmc.count_iters);
    cfg.mcmc.count_chains = m.value("count_chains", cfg.mcmc.count_chains);
    cfg.mcmc.count_burnin_fraction =
        m.value("count_burnin_fraction", cfg.mcmc.count_burnin_fraction);
    cfg.mcmc.orthant_draws = m.value("orthant_draws", cfg.mcmc.orthant_draws);
  }
  if (j.contains("em")) {
    const auto& e = j["em"];
    cfg.max_iter = e.value("max_iter", cfg.max_iter);
    cfg.eps = e.value("eps", cfg.eps);
    cfg.w1 = e.value("w1", cfg.w1);
    cfg.w2 = e.value("w2", cfg.w2);
    cfg.restarts = e.value("restarts", cfg.restarts);
    const std::string init = e.value("init", std::string("kmeanspp"));
    if (init == "kmeanspp")
      cfg.init = InitMethod::kKmeansPP;
    else if (init == "random")
      cfg.init = InitMethod::kRandom;
    else
      throw ValidationError("config: init must be kmeanspp or random");
  }
  cfg.threads = j.value("threads", cfg.threads);
  cfg.validate();
  return cfg;
}

void write_fit_json(const std::string& path, const FitResult& result,
                    const EmConfig& cfg, std::uint64_t seed) {
  nlohmann::json j = params_to_json(result.params);
  j["loglik_history"] = result.loglik_history;
  j["bic"] = result.bic;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["seed"] = seed;
  j["config"] = config_to_json(cfg);
  write_file(path, j.dump(2) + "\n");
}

FitResult read_fit_json(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("fit file '" + path + "': " + e.what());
  }
  FitResult result;
  result.params = params_from_json(j);
  result.loglik_history = j.value("loglik_history", std::vector<double>{});
  result.bic = j.value("bic", 0.0);
  result.converged = j.value("converged", false);
  result.iterations = j.value("iterations", 0);
  return result;
}

void write_assignments_csv(const std::string& path,
                           const std::vector<std::string>& units,
                           const std::vector<int>& assignments, const Matrix& tau) {
  if (units.size() != assignments.size() ||
      static_cast<Eigen::Index>(units.size()) != tau.rows())
    throw ShapeError("write_assignments_csv: size mismatch");
  std::ostringstream out;
  out << "unit,cluster";
  for (Eigen::Index k = 0; k < tau.cols(); ++k) out << ",tau_" << (k + 1);
  out << '\n';
  for (std::size_t i = 0; i < units.size(); ++i) {
    out << units[i] << ',' << (assignments[i] + 1);
    for (Eigen::Index k = 0; k < tau.cols(); ++k)
      out << ',' << format_double(tau(static_cast<Eigen::Index>(i), k));
    out << '\n';
  }
  write_file(path, out.str());
}

AssignmentsFile read_assignments_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("assignments file '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "unit" || header[1] != "cluster")
    throw ValidationError("assignments file '" + path + "' has an unexpected header");
  const int k = static_cast<int>(header.size()) - 2;

  AssignmentsFile out;
  std::vector<std::vector<double>> tau_rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != k + 2)
      throw ValidationError("assignments file '" + path + "' row has wrong arity");
    out.units.push_back(fields[0]);
    out.assignments.push_back(std::stoi(fields[1]) - 1);
    std::vector<double> row(k);
    for (int h = 0; h < k; ++h) row[h] = std::stod(fields[2 + h]);
    tau_rows.push_back(std::move(row));
  }
  out.tau.resize(static_cast<Eigen::Index>(tau_rows.size()), k);
  for (std::size_t i = 0; i < tau_rows.size(); ++i)
    for (int h = 0; h < k; ++h) out.tau(static_cast<Eigen::Index>(i), h) = tau_rows[i][h];
  return out;
}

void write_loglik_history_csv(const std::string& path,
                              const std::vector<double>& history) {
  std::ostringstream out;
  out << "iteration,loglik\n";
  for (std::size_t i = 0; i < history.size(); ++i)
    out << (i + 1) << ',' << format_double(history[i]) << '\n';
  write_file(path, out.str());
}

void write_ksweep_csv(const std::string& path, const KSweepReport& report) {
  std::ostringstream out;
  out << "K,loglik,bic,converged,iterations\n";
  for (const auto& row : report.rows)
    out << row.k << ',' << format_double(row.loglik) << ',' << format_double(row.bic)
        << ',' << (row.converged ? 1 : 0) << ',' << row.iterations << '\n';
  write_file(path, out.str());
}

}  // namespace mmm
