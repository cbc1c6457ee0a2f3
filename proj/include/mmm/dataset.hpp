// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MMM_DATASET_HPP
#define MMM_DATASET_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mmm/schema.hpp"

namespace mmm {

// N observed J x T matrices of mixed entries plus their schema. Coded kinds
// store their integer codes as doubles: ordinal 1..C_o, binary {1,2},
// nominal 1..P, count >= 0.
struct MixedDataset {
  Schema schema;
  std::vector<std::string> units;        // size N
  std::vector<Eigen::MatrixXd> values;   // N matrices, rows() x T
  int t = 0;

  int n() const { return static_cast<int>(values.size()); }
  int rows() const { return schema.rows(); }
};

// Throws ValidationError on out-of-range codes, non-integer codes, negative
// counts, or non-finite entries.
void validate(const MixedDataset& ds);

// Replace each nominal variable with P levels by P-1 binary rows (row p is 2
// iff the observed level is p+1, reference level 1) and reorder rows into
// alpha/beta/gamma block order. Identity on already-expanded datasets.
MixedDataset expand_nominal(const MixedDataset& ds);

// Real-valued view used only by initialization: continuous rows copied,
// categorical codes as reals, count rows log(y + 1).
std::vector<Eigen::MatrixXd> latent_init_view(const MixedDataset& ds);

}  // namespace mmm

#endif  // MMM_DATASET_HPP
