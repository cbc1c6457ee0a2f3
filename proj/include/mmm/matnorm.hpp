// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MMM_MATNORM_HPP
#define MMM_MATNORM_HPP

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "mmm/errors.hpp"
#include "mmm/rng.hpp"

// Matrix-variate normal core. A J x T variate Z ~ MN(M, Phi, Sigma) has
// density
//   (2pi)^{-TJ/2} |Phi|^{-J/2} |Sigma|^{-T/2}
//     exp{ -1/2 tr[ Sigma^{-1} (Z-M) Phi^{-1} (Z-M)^T ] },
// with Phi the T x T column (time) covariance and Sigma the J x J row
// (variable) covariance. Under column-stacking vec, the equivalent
// JT-dimensional Gaussian has covariance kron(Phi, Sigma).

namespace mmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct MatNormParams {
  Matrix M;      // J x T mean
  Matrix Phi;    // T x T column covariance, |Phi| = 1 after constraint
  Matrix Sigma;  // J x J row covariance

  Eigen::Index rows() const { return M.rows(); }
  Eigen::Index cols() const { return M.cols(); }
};

// Cholesky with diagonal jitter escalation (1e-10 -> 1e-6); near-singular
// E-step estimates are repaired instead of aborting the fit.
inline Eigen::LLT<Matrix> llt_with_jitter(const Matrix& s) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() == Eigen::Success) return llt;
  for (double jitter : {1e-10, 1e-8, 1e-6}) {
    Matrix patched = s;
    patched.diagonal().array() += jitter;
    llt.compute(patched);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw CovarianceNotPdError("covariance matrix is not positive definite");
}

inline double logdet_from_llt(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// (X + X^T) / 2 into a fresh matrix; safe against self-assignment aliasing.
inline Matrix symmetrized(const Matrix& s) { return 0.5 * (s + s.transpose()); }

// Column-stacking vectorization: entry (j, t) lands at index t*J + j.
template <typename Derived>
Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic> vec(
    const Eigen::MatrixBase<Derived>& z) {
  return z.reshaped();
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> unvec(
    const Eigen::MatrixBase<Derived>& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw ShapeError("unvec: vector length does not match rows*cols");
  return v.reshaped(rows, cols);
}

template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Out = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Out out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline double matnorm_logpdf(const Matrix& z, const MatNormParams& p) {
  const Eigen::Index j = p.rows();
  const Eigen::Index t = p.cols();
  if (z.rows() != j || z.cols() != t || p.Phi.rows() != t || p.Phi.cols() != t ||
      p.Sigma.rows() != j || p.Sigma.cols() != j)
    throw ShapeError("matnorm_logpdf: inconsistent dimensions");
  const auto llt_phi = llt_with_jitter(p.Phi);
  const auto llt_sigma = llt_with_jitter(p.Sigma);
  const Matrix centered = z - p.M;
  // tr[Sigma^{-1} X Phi^{-1} X^T] = sum( (Sigma^{-1} X) .* (X Phi^{-1}) )
  const double quad =
      (llt_sigma.solve(centered).cwiseProduct(
           llt_phi.solve(centered.transpose()).transpose()))
          .sum();
  return -0.5 * static_cast<double>(j * t) * kLog2Pi -
         0.5 * static_cast<double>(j) * logdet_from_llt(llt_phi) -
         0.5 * static_cast<double>(t) * logdet_from_llt(llt_sigma) - 0.5 * quad;
}

struct RowConditional {
  Matrix mean;   // unobserved-rows x T
  Matrix sigma;  // unobserved x unobserved row covariance (Phi is unchanged)
};

// Condition the matrix-normal row blocks on observed rows:
//   mean  = M_u + Sigma_{u,o} Sigma_{o,o}^{-1} (Z_obs - M_o)
//   sigma = Sigma_{u,u} - Sigma_{u,o} Sigma_{o,o}^{-1} Sigma_{o,u}
inline RowConditional condition_on_blocks(const Matrix& m, const Matrix& sigma,
                                          const std::vector<int>& observed_rows,
                                          const Matrix& z_obs) {
  const Eigen::Index j = m.rows();
  if (sigma.rows() != j || sigma.cols() != j)
    throw ShapeError("condition_on_blocks: Sigma does not match M");
  if (observed_rows.empty() || static_cast<Eigen::Index>(observed_rows.size()) >= j)
    throw ShapeError("condition_on_blocks: observed rows must be a nonempty strict subset");
  if (z_obs.rows() != static_cast<Eigen::Index>(observed_rows.size()) ||
      z_obs.cols() != m.cols())
    throw ShapeError("condition_on_blocks: Z_obs shape mismatch");

  std::vector<bool> is_obs(j, false);
  for (int r : observed_rows) {
    if (r < 0 || r >= j) throw ShapeError("condition_on_blocks: row index out of range");
    is_obs[r] = true;
  }
  std::vector<int> unobserved;
  for (int r = 0; r < j; ++r)
    if (!is_obs[r]) unobserved.push_back(r);

  const Matrix s_oo = sigma(observed_rows, observed_rows);
  const Matrix s_uo = sigma(unobserved, observed_rows);
  Eigen::LLT<Matrix> llt(s_oo);
  if (llt.info() != Eigen::Success)
    throw ConditioningSingularError("condition_on_blocks: observed block is singular");

  const Matrix gain = llt.solve(s_uo.transpose()).transpose();  // Sigma_uo Sigma_oo^{-1}
  RowConditional out;
  out.mean = m(unobserved, Eigen::all) + gain * (z_obs - m(observed_rows, Eigen::all));
  out.sigma = sigma(unobserved, unobserved) - gain * s_uo.transpose();
  out.sigma = symmetrized(out.sigma);
  return out;
}

// Unit-determinant identifiability constraint. Symmetrization commutes with
// the det^{1/T} rescaling, so scaling the symmetrized matrix is the order
// that leaves the determinant exactly 1.
inline Matrix constrain_phi(const Matrix& phi) {
  if (phi.rows() != phi.cols()) throw ShapeError("constrain_phi: matrix not square");
  if (!(phi.partialPivLu().determinant() > 0.0))
    throw ConstraintError("constrain_phi: determinant is not positive");
  const Matrix sym = symmetrized(phi);
  const double det = sym.partialPivLu().determinant();
  if (!(det > 0.0))
    throw ConstraintError("constrain_phi: symmetrized determinant is not positive");
  return sym / std::pow(det, 1.0 / static_cast<double>(phi.rows()));
}

// Draw Z = M + L_sigma E L_phi^T with E i.i.d. standard normal, so that
// vec(Z) has covariance kron(Phi, Sigma).
inline Matrix sample_matnorm(const MatNormParams& p, RngStream& rng) {
  const Eigen::Index j = p.rows();
  const Eigen::Index t = p.cols();
  const Matrix l_sigma = llt_with_jitter(p.Sigma).matrixL();
  const Matrix l_phi = llt_with_jitter(p.Phi).matrixL();
  Matrix e(j, t);
  for (Eigen::Index c = 0; c < t; ++c)
    for (Eigen::Index r = 0; r < j; ++r) e(r, c) = rng.normal();
  return p.M + l_sigma * e * l_phi.transpose();
}

}  // namespace mmm

#endif  // MMM_MATNORM_HPP
