// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MMM_ERRORS_HPP
#define MMM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mmm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension disagreement between related matrices or vectors.
struct ShapeError : Error {
  using Error::Error;
};

// A covariance matrix failed Cholesky factorization even after jitter.
struct CovarianceNotPdError : Error {
  using Error::Error;
};

// The observed block of a conditioning step is numerically singular.
struct ConditioningSingularError : Error {
  using Error::Error;
};

// Determinant constraint cannot be applied (det <= 0).
struct ConstraintError : Error {
  using Error::Error;
};

// Invalid data, schema, or configuration values.
struct ValidationError : Error {
  using Error::Error;
};

// Operation called on a variable kind it does not support.
struct TypeError : Error {
  using Error::Error;
};

// A truncation region is empty or degenerate.
struct RegionError : Error {
  using Error::Error;
};

// Input outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// A cluster lost essentially all responsibility mass during an M-step.
struct DegenerateClusterError : Error {
  DegenerateClusterError(int cluster, const std::string& what)
      : Error(what), cluster(cluster) {}
  int cluster;
};

// Fit could not complete within the restart budget.
struct FitFailedError : Error {
  using Error::Error;
};

// Every candidate fit of a K sweep failed.
struct SelectionError : Error {
  using Error::Error;
};

// Numerical breakdown with a known culprit unit.
struct NumericalError : Error {
  NumericalError(int unit, const std::string& what) : Error(what), unit(unit) {}
  int unit;
};

}  // namespace mmm

#endif  // MMM_ERRORS_HPP
