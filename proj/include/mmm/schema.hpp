// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MMM_SCHEMA_HPP
#define MMM_SCHEMA_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mmm/errors.hpp"

namespace mmm {

enum class VariableKind { kContinuous, kOrdinal, kBinary, kNominal, kCount };

std::string to_string(VariableKind kind);
VariableKind variable_kind_from_string(const std::string& s);

struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::kContinuous;
  // Ordinal: number of categories (>= 2). Nominal: number of levels (>= 2).
  // Unused otherwise.
  int levels = 0;
};

// Ordered variable list. After nominal expansion the rows come in block
// order: alpha (continuous), beta (ordinal/binary), gamma (count).
struct Schema {
  std::vector<VariableSpec> variables;

  int rows() const { return static_cast<int>(variables.size()); }
  bool has_nominal() const;
  void validate() const;
};

// Row counts of the alpha/beta/gamma blocks of an expanded schema. Rows
// [0, c) are continuous, [c, c+o) categorical, [c+o, c+o+g) counts.
struct BlockPartition {
  int c = 0;
  int o = 0;
  int g = 0;
  int rows() const { return c + o + g; }
};

// Requires an expanded schema (no nominal variables, blocks in order).
BlockPartition block_partition(const Schema& schema);

// Threshold vector of length levels+1 cutting the latent line:
// ordinal -> (-inf, 1.5, 2.5, ..., C_o - 0.5, inf); binary -> (-inf, 0, inf).
Eigen::VectorXd thresholds_for(const VariableSpec& v);

// Category c with thresholds[c-1] < z <= thresholds[c] (right-closed).
int discretize(double z, const Eigen::VectorXd& thresholds);

}  // namespace mmm

#endif  // MMM_SCHEMA_HPP
