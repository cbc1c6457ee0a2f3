// Apache License, Version 2.0, refer to LICENSE.txt

#include "mmm/dataset.hpp"

#include <cmath>

namespace mmm {

namespace {

bool is_integral_code(double v) { return std::isfinite(v) && v == std::floor(v); }

void validate_entry(const VariableSpec& var, double v) {
  switch (var.kind) {
    case VariableKind::kContinuous:
      if (!std::isfinite(v))
        throw ValidationError("non-finite value for continuous variable '" + var.name + "'");
      return;
    case VariableKind::kOrdinal:
      if (!is_integral_code(v) || v < 1 || v > var.levels)
        throw ValidationError("ordinal code out of range for variable '" + var.name + "'");
      return;
    case VariableKind::kBinary:
      if (v != 1.0 && v != 2.0)
        throw ValidationError("binary variable '" + var.name + "' must be coded {1,2}");
      return;
    case VariableKind::kNominal:
      if (!is_integral_code(v) || v < 1 || v > var.levels)
        throw ValidationError("nominal code out of range for variable '" + var.name + "'");
      return;
    case VariableKind::kCount:
      if (!is_integral_code(v) || v < 0)
        throw ValidationError("count variable '" + var.name + "' must hold non-negative integers");
      return;
  }
}

}  // namespace

void validate(const MixedDataset& ds) {
  ds.schema.validate();
  if (ds.t <= 0) throw ValidationError("dataset needs at least one time point");
  if (static_cast<int>(ds.units.size()) != ds.n())
    throw ValidationError("unit names do not match number of value matrices");
  for (int i = 0; i < ds.n(); ++i) {
    const auto& m = ds.values[i];
    if (m.rows() != ds.rows() || m.cols() != ds.t)
      throw ValidationError("value matrix for unit '" + ds.units[i] + "' has wrong shape");
    for (int r = 0; r < ds.rows(); ++r)
      for (int t = 0; t < ds.t; ++t) validate_entry(ds.schema.variables[r], m(r, t));
  }
}

MixedDataset expand_nominal(const MixedDataset& ds) {
  validate(ds);

  // Target row order: alpha, beta (nominal rows expand in place), gamma.
  struct RowPlan {
    VariableSpec spec;
    int source = 0;       // row in the input dataset
    int indicator = 0;    // nominal level p+1 indicated, 0 for plain copy
  };
  std::vector<RowPlan> plan;
  auto add_block = [&](int block) {
    for (int r = 0; r < ds.rows(); ++r) {
      const auto& v = ds.schema.variables[r];
      const bool in_block =
          (block == 0 && v.kind == VariableKind::kContinuous) ||
          (block == 1 && (v.kind == VariableKind::kOrdinal ||
                          v.kind == VariableKind::kBinary ||
                          v.kind == VariableKind::kNominal)) ||
          (block == 2 && v.kind == VariableKind::kCount);
      if (!in_block) continue;
      if (v.kind == VariableKind::kNominal) {
        for (int p = 1; p < v.levels; ++p) {
          VariableSpec bin{v.name + "." + std::to_string(p + 1), VariableKind::kBinary, 0};
          plan.push_back({bin, r, p + 1});
        }
      } else {
        plan.push_back({v, r, 0});
      }
    }
  };
  add_block(0);
  add_block(1);
  add_block(2);

  bool identity = plan.size() == ds.schema.variables.size();
  for (std::size_t r = 0; identity && r < plan.size(); ++r)
    identity = plan[r].indicator == 0 && plan[r].source == static_cast<int>(r);
  if (identity) return ds;

  MixedDataset out;
  out.t = ds.t;
  out.units = ds.units;
  for (const auto& row : plan) out.schema.variables.push_back(row.spec);
  out.values.reserve(ds.n());
  for (int i = 0; i < ds.n(); ++i) {
    Eigen::MatrixXd m(static_cast<int>(plan.size()), ds.t);
    for (std::size_t r = 0; r < plan.size(); ++r) {
      for (int t = 0; t < ds.t; ++t) {
        const double v = ds.values[i](plan[r].source, t);
        m(static_cast<int>(r), t) =
            plan[r].indicator == 0 ? v : (v == plan[r].indicator ? 2.0 : 1.0);
      }
    }
    out.values.push_back(std::move(m));
  }
  return out;
}

std::vector<Eigen::MatrixXd> latent_init_view(const MixedDataset& ds) {
  if (ds.schema.has_nominal())
    throw TypeError("latent_init_view requires an expanded dataset");
  std::vector<Eigen::MatrixXd> out;
  out.reserve(ds.n());
  for (const auto& y : ds.values) {
    Eigen::MatrixXd z = y;
    for (int r = 0; r < ds.rows(); ++r) {
      if (ds.schema.variables[r].kind == VariableKind::kCount)
        z.row(r) = (y.row(r).array() + 1.0).log();
    }
    out.push_back(std::move(z));
  }
  return out;
}

}  // namespace mmm
