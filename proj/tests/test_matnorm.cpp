// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include "mmm/matnorm.hpp"
#include "oracles.hpp"

using mmm::Matrix;
using mmm::Vector;

TEST_SUITE_BEGIN("matnorm");

TEST_CASE("logpdf at the mean reduces to the normalizing constant") {
  mmm::MatNormParams p{Matrix::Zero(2, 3), Matrix::Identity(3, 3),
                       Matrix::Identity(2, 2)};
  // J=2, T=3, identity covariances: the exponent vanishes, leaving -3 log(2pi).
  CHECK(mmm::matnorm_logpdf(Matrix::Zero(2, 3), p) ==
        doctest::Approx(-3.0 * std::log(2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("1x1 case is the standard normal") {
  mmm::MatNormParams p{Matrix::Zero(1, 1), Matrix::Identity(1, 1),
                       Matrix::Identity(1, 1)};
  CHECK(mmm::matnorm_logpdf(Matrix::Zero(1, 1), p) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("logpdf equals the dense vectorized Gaussian") {
  mmm::RngStream rng(42, {1});
  for (int rep = 0; rep < 200; ++rep) {
    const int j = 1 + static_cast<int>(rng.uniform_int(5));
    const int t = 1 + static_cast<int>(rng.uniform_int(5));
    mmm::MatNormParams p{oracle::random_matrix(j, t, rng), oracle::random_pd(t, rng),
                         oracle::random_pd(j, rng)};
    const Matrix z = oracle::random_matrix(j, t, rng);
    const double expected = oracle::dense_mvn_logpdf(
        oracle::stack_columns(z), oracle::stack_columns(p.M),
        oracle::kron_loops(p.Phi, p.Sigma));
    CHECK(mmm::matnorm_logpdf(z, p) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("density integrates to one on a 1x1 grid") {
  mmm::MatNormParams p{Matrix::Constant(1, 1, 0.3), Matrix::Constant(1, 1, 1.7),
                       Matrix::Constant(1, 1, 1.0)};
  const int n = 20000;
  const double lo = -12.0, hi = 12.0;
  const double h = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    Matrix z = Matrix::Constant(1, 1, lo + i * h);
    const double coef = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += coef * std::exp(mmm::matnorm_logpdf(z, p));
  }
  CHECK(acc * h / 3.0 == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("logpdf rejects bad inputs") {
  mmm::MatNormParams p{Matrix::Zero(2, 2), Matrix::Identity(2, 2),
                       Matrix::Identity(2, 2)};
  CHECK_THROWS_AS(mmm::matnorm_logpdf(Matrix::Zero(3, 2), p), mmm::ShapeError);
  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
  mmm::MatNormParams q{Matrix::Zero(2, 2), bad, Matrix::Identity(2, 2)};
  CHECK_THROWS_AS(mmm::matnorm_logpdf(Matrix::Zero(2, 2), q),
                  mmm::CovarianceNotPdError);
}

TEST_CASE("vec stacks columns and unvec inverts it") {
  Matrix z(2, 2);
  z << 1.0, 3.0, 2.0, 4.0;
  const Vector v = mmm::vec(z);
  CHECK(v(0) == 1.0);
  CHECK(v(1) == 2.0);
  CHECK(v(2) == 3.0);
  CHECK(v(3) == 4.0);
  CHECK(mmm::unvec(v, 2, 2) == z);

  mmm::RngStream rng(7, {});
  const Matrix r = oracle::random_matrix(4, 5, rng);
  CHECK(mmm::unvec(mmm::vec(r), 4, 5) == r);
  CHECK_THROWS_AS(mmm::unvec(v, 3, 2), mmm::ShapeError);
}

TEST_CASE("kron basics") {
  CHECK(mmm::kron(Matrix::Identity(2, 2), Matrix::Identity(3, 3)) ==
        Matrix::Identity(6, 6));
  Matrix b(2, 2);
  b << 1.0, 2.0, 3.0, 4.0;
  CHECK(mmm::kron(Matrix::Constant(1, 1, 2.0), b) == (2.0 * b).eval());

  // The scaling ambiguity (c^{-1} Phi) kron (c Sigma) = Phi kron Sigma.
  mmm::RngStream rng(11, {});
  const Matrix phi = oracle::random_pd(2, rng);
  const Matrix sigma = oracle::random_pd(2, rng);
  const double c = 3.0;
  CHECK(((mmm::kron((phi / c).eval(), (c * sigma).eval()) -
          mmm::kron(phi, sigma))
             .cwiseAbs()
             .maxCoeff()) < 1e-12);
}

TEST_CASE("kron matches the loop oracle on random shapes") {
  mmm::RngStream rng(13, {});
  const Matrix a = oracle::random_matrix(2, 3, rng);
  const Matrix b = oracle::random_matrix(3, 2, rng);
  CHECK((mmm::kron(a, b) - oracle::kron_loops(a, b)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("conditioning: block-diagonal and zero-innovation cases") {
  Matrix m(3, 2);
  m << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  Matrix sigma = Matrix::Identity(3, 3);
  sigma(1, 2) = sigma(2, 1) = 0.4;  // cross terms only within the unobserved set

  Matrix z_obs(1, 2);
  z_obs << 9.0, -1.0;
  const auto cond = mmm::condition_on_blocks(m, sigma, {0}, z_obs);
  CHECK((cond.mean - m.bottomRows(2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((cond.sigma - sigma.bottomRightCorner(2, 2)).cwiseAbs().maxCoeff() == 0.0);

  mmm::RngStream rng(3, {});
  const Matrix full = oracle::random_pd(3, rng);
  const auto cond2 = mmm::condition_on_blocks(m, full, {0}, m.topRows(1));
  CHECK((cond2.mean - m.bottomRows(2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("conditioning matches the dense vectorized Gaussian oracle") {
  mmm::RngStream rng(17, {});
  const int j = 3, t = 2;
  const Matrix m = oracle::random_matrix(j, t, rng);
  const Matrix sigma = oracle::random_pd(j, rng);
  const Matrix phi = oracle::random_pd(t, rng);
  Matrix z_obs(1, t);
  z_obs << 0.7, -0.4;

  const auto cond = mmm::condition_on_blocks(m, sigma, {0}, z_obs);

  // Dense route: condition vec(Z) ~ N(vec(M), kron(Phi, Sigma)) on row 0.
  std::vector<int> obs_idx;
  Eigen::VectorXd x_obs(t);
  for (int tt = 0; tt < t; ++tt) {
    obs_idx.push_back(tt * j + 0);
    x_obs(tt) = z_obs(0, tt);
  }
  const auto dense = oracle::dense_gaussian_conditional(
      oracle::stack_columns(m), oracle::kron_loops(phi, sigma), obs_idx, x_obs);

  CHECK((oracle::stack_columns(cond.mean) - dense.mean).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((oracle::kron_loops(phi, cond.sigma) - dense.cov).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("conditioning on all but one row agrees with scalar conditioning") {
  mmm::RngStream rng(19, {});
  const int j = 4;
  const Matrix m = oracle::random_matrix(j, 1, rng);
  const Matrix sigma = oracle::random_pd(j, rng);
  const Matrix z_obs = oracle::random_matrix(j - 1, 1, rng);
  const auto cond = mmm::condition_on_blocks(m, sigma, {0, 1, 2}, z_obs);
  REQUIRE(cond.mean.rows() == 1);

  const Eigen::Vector3d gap = z_obs - m.topRows(3);
  const Eigen::Matrix3d s_oo = sigma.topLeftCorner(3, 3);
  const Eigen::RowVector3d s_uo = sigma.row(3).head(3);
  const double mean = m(3, 0) + s_uo * s_oo.inverse() * gap;
  const double var = sigma(3, 3) - s_uo * s_oo.inverse() * s_uo.transpose();
  CHECK(cond.mean(0, 0) == doctest::Approx(mean).epsilon(1e-12));
  CHECK(cond.sigma(0, 0) == doctest::Approx(var).epsilon(1e-12));
}

TEST_CASE("conditioning rejects singular observed blocks") {
  Matrix m = Matrix::Zero(2, 1);
  Matrix sigma(2, 2);
  sigma << 0.0, 0.0, 0.0, 1.0;  // observed row has zero variance
  CHECK_THROWS_AS(mmm::condition_on_blocks(m, sigma, {0}, Matrix::Zero(1, 1)),
                  mmm::ConditioningSingularError);
}

TEST_CASE("constrain_phi scales to unit determinant") {
  Matrix phi(2, 2);
  phi << 4.0, 0.0, 0.0, 1.0;
  const Matrix out = mmm::constrain_phi(phi);
  CHECK(out(0, 0) == doctest::Approx(2.0));
  CHECK(out(1, 1) == doctest::Approx(0.5));
  CHECK(out.determinant() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("constrain_phi symmetrizes asymmetric input") {
  Matrix phi(2, 2);
  phi << 2.0, 0.2, 0.1, 2.0;
  const Matrix out = mmm::constrain_phi(phi);
  CHECK(out(0, 1) == doctest::Approx(out(1, 0)));
  // Off-diagonal becomes (0.2 + 0.1)/2 before the determinant rescaling.
  const double det_sym = 2.0 * 2.0 - 0.15 * 0.15;
  CHECK(out(0, 1) == doctest::Approx(0.15 / std::sqrt(det_sym)).epsilon(1e-12));
  CHECK(out.determinant() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("constrain_phi is idempotent and rejects det <= 0") {
  mmm::RngStream rng(23, {});
  const Matrix phi = oracle::random_pd(3, rng);
  const Matrix once = mmm::constrain_phi(phi);
  const Matrix twice = mmm::constrain_phi(once);
  CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((once - mmm::constrain_phi(once)).cwiseAbs().maxCoeff() < 1e-12);

  Matrix neg(2, 2);
  neg << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(mmm::constrain_phi(neg), mmm::ConstraintError);
}

TEST_CASE("sample_matnorm moments and determinism") {
  mmm::RngStream rng(29, {});
  mmm::MatNormParams p{Matrix::Constant(2, 2, 1.5), oracle::random_pd(2, rng),
                       oracle::random_pd(2, rng)};

  const int draws = 50000;
  Matrix mean_acc = Matrix::Zero(2, 2);
  Matrix cov_acc = Matrix::Zero(4, 4);
  Vector mu_acc = Vector::Zero(4);
  mmm::RngStream sampler(31, {});
  for (int i = 0; i < draws; ++i) {
    const Matrix z = mmm::sample_matnorm(p, sampler);
    mean_acc += z;
    const Vector v = mmm::vec(z);
    mu_acc += v;
    cov_acc += v * v.transpose();
  }
  mean_acc /= draws;
  mu_acc /= draws;
  cov_acc = cov_acc / draws - mu_acc * mu_acc.transpose();
  CHECK((mean_acc - p.M).cwiseAbs().maxCoeff() < 0.02);
  CHECK((cov_acc - mmm::kron(p.Phi, p.Sigma)).cwiseAbs().maxCoeff() < 0.05);

  mmm::RngStream a(99, {4}), b(99, {4});
  const Matrix za = mmm::sample_matnorm(p, a);
  const Matrix zb = mmm::sample_matnorm(p, b);
  CHECK((za - zb).cwiseAbs().maxCoeff() == 0.0);
}

TEST_SUITE_END();
