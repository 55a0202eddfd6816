#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lowrank/specfun.hpp"
#include "test_util.hpp"

using namespace lowrank;
using namespace lowrank::testing;

TEST_CASE("symmetrization is exact at construction") {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  const SymMatrix s(m);
  CHECK(s(0, 1) == s(1, 0));
  CHECK(s(0, 1) == 2.5);
  CHECK_THROWS_AS(SymMatrix(Matrix::Zero(2, 3)), InvalidInput);
}

TEST_CASE("sym_eig sorts descending and reconstructs") {
  const EigenDecomposition d = sym_eig(SymMatrix::diagonal({3, 1, 2}));
  CHECK(d.values(0) == doctest::Approx(3));
  CHECK(d.values(1) == doctest::Approx(2));
  CHECK(d.values(2) == doctest::Approx(1));

  const EigenDecomposition id = sym_eig(SymMatrix::identity(3));
  CHECK((id.values.array() - 1).abs().maxCoeff() < 1e-14);
  CHECK((id.basis.transpose() * id.basis - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);

  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const SymMatrix x = random_sym(rng, 10);
    const EigenDecomposition e = sym_eig(x);
    CHECK((e.basis.transpose() * e.basis - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((e.reconstruct() - x.mat()).cwiseAbs().maxCoeff() <= 1e-8 * (1 + x.max_abs()));
    for (int i = 0; i + 1 < 10; ++i) CHECK(e.values(i) >= e.values(i + 1));
  }
}

TEST_CASE("sym_eig rejects non-finite entries") {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 0) = std::nan("");
  CHECK_THROWS_AS(sym_eig(SymMatrix(m)), InvalidInput);
}

TEST_CASE("spectral_apply examples") {
  CHECK((matrix_exp(SymMatrix::zero(3)).mat() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  const SymMatrix l = matrix_log(SymMatrix::diagonal({std::exp(1.0), std::exp(2.0)}));
  CHECK(l(0, 0) == doctest::Approx(1));
  CHECK(l(1, 1) == doctest::Approx(2));
  CHECK(std::abs(l(0, 1)) < 1e-14);

  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const SymMatrix x = random_psd(rng, 6, 6);
    const SymMatrix r = matrix_sqrt(x);
    CHECK((r.mat() * r.mat() - x.mat()).cwiseAbs().maxCoeff() <= 1e-8 * (1 + x.max_abs()));
  }
}

TEST_CASE("log of an indefinite matrix is a domain error") {
  CHECK_THROWS_AS(matrix_log(SymMatrix::diagonal({1, -1})), DomainError);
  CHECK_THROWS_AS(matrix_sqrt(SymMatrix::diagonal({1, -1e-6})), DomainError);
  // Round-off negativity is clamped.
  const SymMatrix r = matrix_sqrt(SymMatrix::diagonal({4, -1e-12}));
  CHECK(r(0, 0) == doctest::Approx(2));
  CHECK(r(1, 1) == 0.0);
}

TEST_CASE("pinv examples and Penrose identities") {
  CHECK((pinv(SymMatrix::identity(3)).mat() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  const SymMatrix d = pinv(SymMatrix::diagonal({2, 0}));
  CHECK(d(0, 0) == doctest::Approx(0.5));
  CHECK(d(1, 1) == 0.0);

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Matrix x = random_psd(rng, 6, 3).mat();
    const Matrix p = pinv(SymMatrix(x)).mat();
    const double s = 1 + x.cwiseAbs().maxCoeff();
    CHECK((x * p * x - x).cwiseAbs().maxCoeff() <= 1e-7 * s);
    CHECK((p * x * p - p).cwiseAbs().maxCoeff() <= 1e-7 * (1 + p.cwiseAbs().maxCoeff()));
    CHECK(((x * p).transpose() - x * p).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK(((p * x).transpose() - p * x).cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("logdet_eps examples and determinant oracle") {
  CHECK(logdet_eps(SymMatrix::zero(3), 1.0) == doctest::Approx(0));
  CHECK(logdet_eps(SymMatrix::diagonal({std::exp(1.0) - 0.1, 0}), 0.1) ==
        doctest::Approx(1 + std::log(0.1)));
  CHECK_THROWS_AS(logdet_eps(SymMatrix::identity(2), 0.0), InvalidInput);

  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const SymMatrix x = random_psd(rng, 5, 5);
    const double eps = 1e-6;
    const double oracle = std::log((x.mat() + eps * Matrix::Identity(5, 5)).determinant());
    CHECK(std::abs(logdet_eps(x, eps) - oracle) <= 1e-6 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("sum_top_k_eig matches a sort") {
  CHECK(sum_top_k_eig(SymMatrix::diagonal({3, 2, 1}), 2) == doctest::Approx(5));
  CHECK(sum_top_k_eig(SymMatrix::identity(4), 4) == doctest::Approx(4));
  CHECK_THROWS_AS(sum_top_k_eig(SymMatrix::identity(4), 0), InvalidInput);
  CHECK_THROWS_AS(sum_top_k_eig(SymMatrix::identity(4), 5), InvalidInput);

  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const SymMatrix x = random_sym(rng, 8);
    const Eigen::EigenSolver<Matrix> es(x.mat());
    std::vector<double> ev(8);
    for (int i = 0; i < 8; ++i) ev[i] = es.eigenvalues()(i).real();
    std::sort(ev.rbegin(), ev.rend());
    CHECK(sum_top_k_eig(x, 3) == doctest::Approx(ev[0] + ev[1] + ev[2]).epsilon(1e-10));
  }
}

TEST_CASE("generalized_schur_check examples") {
  const SymMatrix I = SymMatrix::identity(2);
  CHECK(generalized_schur_check(I, Matrix::Zero(2, 2), I, 1e-9));
  CHECK_FALSE(generalized_schur_check(SymMatrix::zero(2), Matrix::Identity(2, 2), I, 1e-9));
  CHECK_THROWS_AS(generalized_schur_check(I, Matrix::Zero(3, 2), I, 1e-9), InvalidInput);
}

TEST_CASE("generalized_schur_check agrees with the block eigenvalue test") {
  Rng rng(6);
  int agree = 0;
  const double tol = 1e-8;
  for (int t = 0; t < 500; ++t) {
    // Rank-deficient PSD blocks plus a perturbation that is sometimes large
    // enough to break positivity.
    const int n = uniform_int(rng, 1, 4), m = uniform_int(rng, 1, 4);
    const Matrix G = rng.normal_matrix(n + m, uniform_int(rng, 1, n + m));
    Matrix full = G * G.transpose();
    if (rng.uniform() < 0.5) full(n + m - 1, n + m - 1) -= uniform(rng, 0.0, 1.0);
    const SymMatrix a(full.topLeftCorner(n, n));
    const SymMatrix c(full.bottomRightCorner(m, m));
    const Matrix b = full.topRightCorner(n, m);
    const bool direct = min_eigenvalue(block_matrix(a, b, c)) >= -tol;
    const bool lemma = generalized_schur_check(a, b, c, tol);
    if (direct == lemma) ++agree;
  }
  CHECK(agree == 500);
}

TEST_CASE("trace-Jacobi identity") {
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    const SymMatrix x = random_pd(rng, uniform_int(rng, 1, 10));
    CHECK(std::abs(matrix_log(x).trace() - std::log(x.mat().determinant())) <= 1e-8);
  }
}

TEST_CASE("true Golden-Thompson inequality") {
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    const SymMatrix x = random_sym(rng, 4), y = random_sym(rng, 4);
    const double lhs = matrix_exp(x + y).trace();
    const double rhs = (matrix_exp(x).mat() * matrix_exp(y).mat()).trace();
    CHECK(lhs <= rhs * (1 + 1e-8));
  }
}

TEST_CASE("trace monotonicity of exp and operator monotonicity of log") {
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    const SymMatrix x = random_pd(rng, 5);
    const SymMatrix y = x + random_psd(rng, 5, uniform_int(rng, 1, 5));
    CHECK(matrix_exp(x).trace() <= matrix_exp(y).trace() + 1e-8);
    CHECK(min_eigenvalue(matrix_log(y) - matrix_log(x)) >= -1e-8);
  }
}
