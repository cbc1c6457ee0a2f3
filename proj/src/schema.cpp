// Apache License, Version 2.0, refer to LICENSE.txt

#include "mmm/schema.hpp"

#include <cmath>
#include <limits>

namespace mmm {

std::string to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::kContinuous: return "continuous";
    case VariableKind::kOrdinal: return "ordinal";
    case VariableKind::kBinary: return "binary";
    case VariableKind::kNominal: return "nominal";
    case VariableKind::kCount: return "count";
  }
  throw ValidationError("unknown variable kind");
}

VariableKind variable_kind_from_string(const std::string& s) {
  if (s == "continuous") return VariableKind::kContinuous;
  if (s == "ordinal") return VariableKind::kOrdinal;
  if (s == "binary") return VariableKind::kBinary;
  if (s == "nominal") return VariableKind::kNominal;
  if (s == "count") return VariableKind::kCount;
  throw ValidationError("unknown variable kind '" + s + "'");
}

bool Schema::has_nominal() const {
  for (const auto& v : variables)
    if (v.kind == VariableKind::kNominal) return true;
  return false;
}

void Schema::validate() const {
  if (variables.empty()) throw ValidationError("schema has no variables");
  for (const auto& v : variables) {
    if (v.name.empty()) throw ValidationError("schema variable with empty name");
    if (v.kind == VariableKind::kOrdinal && v.levels < 2)
      throw ValidationError("ordinal variable '" + v.name + "' needs levels >= 2");
    if (v.kind == VariableKind::kNominal && v.levels < 2)
      throw ValidationError("nominal variable '" + v.name + "' needs levels >= 2");
  }
  for (std::size_t i = 0; i < variables.size(); ++i)
    for (std::size_t j = i + 1; j < variables.size(); ++j)
      if (variables[i].name == variables[j].name)
        throw ValidationError("duplicate variable name '" + variables[i].name + "'");
}

namespace {

int block_of(VariableKind kind) {
  switch (kind) {
    case VariableKind::kContinuous: return 0;
    case VariableKind::kOrdinal:
    case VariableKind::kBinary: return 1;
    case VariableKind::kCount: return 2;
    case VariableKind::kNominal: break;
  }
  throw TypeError("nominal variable must be expanded before block partitioning");
}

}  // namespace

BlockPartition block_partition(const Schema& schema) {
  schema.validate();
  BlockPartition part;
  int last = -1;
  for (const auto& v : schema.variables) {
    const int b = block_of(v.kind);
    if (b < last)
      throw ValidationError("schema rows are not in alpha/beta/gamma block order");
    last = b;
    if (b == 0) ++part.c;
    if (b == 1) ++part.o;
    if (b == 2) ++part.g;
  }
  return part;
}

Eigen::VectorXd thresholds_for(const VariableSpec& v) {
  const double inf = std::numeric_limits<double>::infinity();
  if (v.kind == VariableKind::kBinary) {
    Eigen::VectorXd t(3);
    t << -inf, 0.0, inf;
    return t;
  }
  if (v.kind == VariableKind::kOrdinal) {
    if (v.levels < 2)
      throw ValidationError("ordinal variable '" + v.name + "' needs levels >= 2");
    Eigen::VectorXd t(v.levels + 1);
    t(0) = -inf;
    for (int c = 1; c < v.levels; ++c) t(c) = c + 0.5;
    t(v.levels) = inf;
    return t;
  }
  throw TypeError("thresholds are defined for ordinal and binary variables only");
}

int discretize(double z, const Eigen::VectorXd& thresholds) {
  if (!std::isfinite(z)) throw ValidationError("discretize: non-finite latent value");
  const int levels = static_cast<int>(thresholds.size()) - 1;
  for (int c = 1; c <= levels; ++c)
    if (z <= thresholds(c)) return c;
  return levels;  // z == +inf threshold edge; unreachable for finite z
}

}  // namespace mmm
