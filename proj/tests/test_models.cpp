#include <doctest.h>

#include <cmath>

#include "lowrank/algos.hpp"
#include "lowrank/generators.hpp"
#include "lowrank/models.hpp"
#include "test_util.hpp"

using namespace lowrank;
using namespace lowrank::testing;

namespace {

SolverSettings tight() {
  SolverSettings st;
  st.tol = 1e-8;
  st.max_iter = 100000;
  return st;
}

double solve_value(const BuiltModel& bm, const SolverSettings& st = tight()) {
  const Solution s = solve(bm.problem, st);
  REQUIRE(s.status == SolveStatus::Optimal);
  return s.objective;
}

RrrInstance small_rrr(Rng& rng, int m, int p, int n, double gamma, double mu) {
  RrrInstance inst;
  inst.X = rng.normal_matrix(m, p);
  inst.Y = inst.X * rng.normal_matrix(p, 1) * rng.normal_matrix(1, n) + rng.normal_matrix(m, n, 0.1);
  inst.gamma = gamma;
  inst.mu = mu;
  return inst;
}

// Minimizes a convex function of one variable on [lo, hi].
template <class F>
double minimize_1d(F f, double lo, double hi) {
  while (hi - lo > 1e-10) {
    const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
    if (f(a) <= f(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  return f((lo + hi) / 2);
}

Matrix ridge_fit(const RrrInstance& inst) {
  const double m = static_cast<double>(inst.X.rows());
  const Eigen::Index p = inst.X.cols();
  return (inst.X.transpose() * inst.X / m + Matrix::Identity(p, p) / inst.gamma)
      .ldlt()
      .solve(inst.X.transpose() * inst.Y / m);
}

}  // namespace

TEST_CASE("numerical rank uses the 1e-4 singular value threshold") {
  Matrix m = Matrix::Zero(3, 3);
  m.diagonal() << 1, 2e-4, 5e-5;
  CHECK(numerical_rank(m) == 2);
  CHECK(numerical_rank(Matrix::Zero(2, 2)) == 0);
}

TEST_CASE("RRR relaxations vanish on zero responses") {
  Rng rng(1);
  RrrInstance inst = small_rrr(rng, 8, 3, 2, 10.0, 0.1);
  inst.Y.setZero();
  for (const BuiltModel& bm : {build_rrr_persp(inst), build_rrr_dcl(inst), build_rrr_nn(inst)}) {
    const Solution s = solve(bm.problem, tight());
    CHECK(s.status == SolveStatus::Optimal);
    CHECK(std::abs(s.objective) <= 1e-6);
    CHECK(bm.matrix(s.x, "beta").cwiseAbs().maxCoeff() <= 1e-4);
  }
}

TEST_CASE("RRR relaxations reject mismatched data") {
  RrrInstance inst;
  inst.X = Matrix::Ones(4, 2);
  inst.Y = Matrix::Ones(3, 2);
  CHECK_THROWS_AS(build_rrr_persp(inst), InvalidInput);
  CHECK_THROWS_AS(build_rrr_dcl(inst), InvalidInput);
  CHECK_THROWS_AS(build_rrr_nn(inst), InvalidInput);
}

TEST_CASE("one-dimensional perspective relaxation matches the scalar oracle") {
  Rng rng(2);
  for (int t = 0; t < 5; ++t) {
    RrrInstance inst = small_rrr(rng, 10, 1, 1, uniform(rng, 0.5, 5.0), uniform(rng, 0.01, 0.5));
    const double m = 10;
    const double a = inst.Y.squaredNorm(), b = (inst.X.transpose() * inst.Y)(0, 0),
                 c = inst.X.squaredNorm();
    const double g = inst.gamma, mu = inst.mu;
    // min over w ∈ [0, 1] of β²/(2γw) + μw.
    auto f = [&](double beta) {
      const double loss = (a - 2 * b * beta + c * beta * beta) / (2 * m);
      const double knee = std::sqrt(2 * g * mu);
      const double reg = std::abs(beta) >= knee ? beta * beta / (2 * g) + mu
                                                : std::sqrt(2 * mu / g) * std::abs(beta);
      return loss + reg;
    };
    const double oracle = minimize_1d(f, -100, 100);
    CHECK(solve_value(build_rrr_persp(inst)) == doctest::Approx(oracle).epsilon(1e-5));
  }
}

TEST_CASE("one-dimensional nuclear norm relaxation is soft thresholding") {
  Rng rng(3);
  for (int t = 0; t < 5; ++t) {
    RrrInstance inst = small_rrr(rng, 10, 1, 1, uniform(rng, 0.5, 5.0), uniform(rng, 0.01, 0.5));
    const double m = 10;
    const double a = inst.Y.squaredNorm(), b = (inst.X.transpose() * inst.Y)(0, 0),
                 c = inst.X.squaredNorm();
    const double shrunk = std::max(std::abs(b / m) - inst.mu, 0.0) / (c / m + 1 / inst.gamma);
    const double beta = b >= 0 ? shrunk : -shrunk;
    const double oracle = (a - 2 * b * beta + c * beta * beta) / (2 * m) +
                          beta * beta / (2 * inst.gamma) + inst.mu * std::abs(beta);
    const BuiltModel bm = build_rrr_nn(inst);
    const Solution s = solve(bm.problem, tight());
    CHECK(s.objective == doctest::Approx(oracle).epsilon(1e-5));
    CHECK(bm.matrix(s.x, "beta")(0, 0) == doctest::Approx(beta).epsilon(1e-3));
  }
}

TEST_CASE("nuclear norm relaxation without rank penalty is ridge regression") {
  Rng rng(4);
  const RrrInstance inst = small_rrr(rng, 12, 4, 3, 2.0, 0.0);
  const Matrix beta = ridge_fit(inst);
  const double m = 12;
  const double oracle = (inst.Y - inst.X * beta).squaredNorm() / (2 * m) +
                        beta.squaredNorm() / (2 * inst.gamma);
  const BuiltModel bm = build_rrr_nn(inst);
  const Solution s = solve(bm.problem, tight());
  CHECK(s.objective == doctest::Approx(oracle).epsilon(1e-5));
  CHECK((bm.matrix(s.x, "beta") - beta).cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("RRR relaxations are ordered below the non-convex objective") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const RrrInstance inst = small_rrr(rng, 10, 3, 3, uniform(rng, 1.0, 10.0), uniform(rng, 0.01, 0.3));
    const double persp = solve_value(build_rrr_persp(inst));
    const double dcl = solve_value(build_rrr_dcl(inst));
    CHECK(persp <= dcl + 1e-5);
    const Matrix ridge = ridge_fit(inst);
    for (int k = 0; k <= 3; ++k) {
      CHECK(dcl <= rrr_objective(inst, truncated_svd(ridge, k)) + 1e-5);
    }
  }
}

TEST_CASE("solutions satisfy their model constraints") {
  Rng rng(6);
  const RrrInstance inst = small_rrr(rng, 10, 3, 2, 5.0, 0.1);
  NmfInstance nmf = gen_nmf(5, 2, 7);
  const SolverSettings st;
  for (const BuiltModel& bm : {build_rrr_persp(inst), build_rrr_dcl(inst), build_rrr_nn(inst),
                               build_nmf_dnn(nmf), build_rank_k_svd(rng.normal_matrix(4, 3), 2)}) {
    const Solution s = solve(bm.problem, st);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(bm.max_violation(s.x) <= 5 * st.tol * (1 + bm.problem.b.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("variable map covers the variable vector without overlap") {
  Rng rng(7);
  const BuiltModel bm = build_rrr_persp(small_rrr(rng, 6, 3, 2, 1.0, 0.1));
  int next = 0;
  for (const VarBlock& b : bm.varmap) {
    CHECK(b.start == next);
    next += b.length();
  }
  CHECK(next == bm.problem.c.size());
  CHECK(bm.has_var("theta"));
  CHECK_FALSE(bm.has_var("nope"));
  CHECK_THROWS_AS(bm.var("nope"), InvalidInput);
}

TEST_CASE("matrix completion examples") {
  CompletionInstance empty;
  empty.n = 3;
  empty.gamma = 2.0;
  empty.mu = 0.3;
  const BuiltModel be = build_matrix_completion(empty);
  const Solution se = solve(be.problem, tight());
  CHECK(std::abs(se.objective) <= 1e-6);
  CHECK(be.matrix(se.x, "X").cwiseAbs().maxCoeff() <= 1e-4);

  CompletionInstance diag;
  diag.n = 3;
  diag.gamma = 1e6;
  diag.mu = 0.0;
  const double d[3] = {2.0, 1.0, 0.5};
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) diag.observed.push_back({i, j, i == j ? d[i] : 0.0});
  }
  const BuiltModel bd = build_matrix_completion(diag);
  const Solution sd = solve(bd.problem, tight());
  CHECK((bd.matrix(sd.x, "X") - Matrix(Eigen::Vector3d(d[0], d[1], d[2]).asDiagonal()))
            .cwiseAbs()
            .maxCoeff() <= 1e-4);

  CompletionInstance bad = diag;
  bad.observed.push_back({0, 0, 1.0});
  CHECK_THROWS_AS(build_matrix_completion(bad), InvalidInput);
}

TEST_CASE("matrix completion lower-bounds truncated feasible points") {
  Rng rng(8);
  for (int t = 0; t < 5; ++t) {
    const int n = 4;
    const SymMatrix truth = random_psd(rng, n, 2);
    CompletionInstance inst;
    inst.n = n;
    inst.gamma = 5.0;
    inst.mu = 0.1;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        if (rng.uniform() < 0.7) inst.observed.push_back({i, j, truth(i, j)});
      }
    }
    const double value = solve_value(build_matrix_completion(inst));
    const EigenDecomposition ed = sym_eig(truth);
    for (int r = 0; r <= n; ++r) {
      Vector lam = ed.values.cwiseMax(0.0);
      for (int i = r; i < n; ++i) lam(i) = 0;
      const SymMatrix X(ed.basis * lam.asDiagonal() * ed.basis.transpose());
      CHECK(value <= completion_objective(inst, X) + 1e-5);
    }
  }
}

TEST_CASE("tensor unfoldings") {
  Tensor3 ones({2, 2, 2});
  ones.data.setOnes();
  for (int mode = 1; mode <= 3; ++mode) {
    const Matrix u = unfold(ones, mode);
    CHECK(u.rows() == 2);
    CHECK(u.cols() == 4);
    CHECK((u.array() == 1.0).all());
  }

  Rng rng(9);
  const Vector a = rng.normal_matrix(2, 1), b = rng.normal_matrix(3, 1), c = rng.normal_matrix(4, 1);
  Tensor3 r1({2, 3, 4});
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 4; ++k) r1(i, j, k) = a(i) * b(j) * c(k);
    }
  }
  for (int mode = 1; mode <= 3; ++mode) {
    CHECK(numerical_rank(unfold(r1, mode)) == 1);
    const Tensor3 back = fold(unfold(r1, mode), mode, r1.dims);
    CHECK((back.data - r1.data).cwiseAbs().maxCoeff() == 0.0);
  }
  // Mode-2 rows are indexed by i₂ and columns by (i₁, i₃) lexicographically.
  CHECK(unfold(r1, 2)(1, 1 * 4 + 2) == r1(1, 1, 2));
  CHECK_THROWS_AS(unfold(r1, 4), InvalidInput);
  CHECK_THROWS_AS(fold(Matrix::Zero(2, 2), 1, {2, 3, 4}), InvalidInput);
}

TEST_CASE("tensor completion examples") {
  TensorInstance zero;
  zero.dims = {2, 2, 2};
  zero.k = {1, 1, 1};
  zero.weight = 0.1;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) zero.observed.push_back({i, j, k, 0.0});
    }
  }
  CHECK(std::abs(solve_value(build_tensor_completion(zero))) <= 1e-6);

  Rng rng(10);
  for (int t = 0; t < 3; ++t) {
    TensorInstance inst;
    inst.dims = {3, 3, 3};
    inst.k = {1, 1, 1};
    inst.weight = 0.05;
    Tensor3 T(inst.dims);
    const Vector a = rng.normal_matrix(3, 1), b = rng.normal_matrix(3, 1), c = rng.normal_matrix(3, 1);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
          T(i, j, k) = a(i) * b(j) * c(k);
          if (rng.uniform() < 0.6) inst.observed.push_back({i, j, k, T(i, j, k)});
        }
      }
    }
    const double value = solve_value(build_tensor_completion(inst));
    // The rank-one truth and its shrunk copies are feasible points.
    for (double s : {0.0, 0.5, 0.9, 1.0}) {
      Tensor3 S = T;
      S.data *= s;
      CHECK(value <= tensor_objective(inst, S) + 1e-5);
    }
  }
}

TEST_CASE("NMF relaxation examples") {
  NmfInstance zero;
  zero.A = SymMatrix::zero(3);
  zero.k = 1;
  CHECK(std::abs(solve_value(build_nmf_dnn(zero))) <= 1e-6);

  Rng rng(11);
  const Matrix u = rng.uniform_matrix(5, 1);
  NmfInstance r1;
  r1.A = SymMatrix(u * u.transpose());
  r1.k = 1;
  CHECK(solve_value(build_nmf_dnn(r1)) <= 1e-4);
  const AlsResult als = als_nmf(r1, 1);
  CHECK(als.ub <= 1e-6);

  NmfInstance neg = r1;
  neg.A = SymMatrix::diagonal({1, -1, 1, 1, 1});
  CHECK_THROWS_AS(build_nmf_dnn(neg), InvalidInput);
}

TEST_CASE("NMF relaxation lower-bounds the ALS objective") {
  SolverSettings st = tight();
  st.tol = 1e-10;
  st.max_iter = 300000;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const NmfInstance inst = gen_nmf(8, 3, seed);
    const AlsResult als = als_nmf(inst, seed);
    const double lb = 2 * solve_value(build_nmf_dnn(inst), st);
    CHECK(lb <= als.ub + 1e-6 * (1 + als.ub));
  }
}

TEST_CASE("rank-k SVD model is exact for k at least the rank") {
  Rng rng(12);
  const Matrix A = rng.normal_matrix(5, 2) * rng.normal_matrix(2, 4);
  CHECK(std::abs(solve_value(build_rank_k_svd(A, 2))) <= 1e-5);
  CHECK(std::abs(solve_value(build_rank_k_svd(A, 3))) <= 1e-5);
  CHECK(solve_value(build_rank_k_svd(A, 0)) == doctest::Approx(0.5 * A.squaredNorm()).epsilon(1e-5));
  CHECK_THROWS_AS(build_rank_k_svd(A, -1), InvalidInput);
}

TEST_CASE("sum of top-k eigenvalues epigraph") {
  CHECK(solve_value(build_sum_top_k_model(SymMatrix::diagonal({3, 2, 1}), 2)) ==
        doctest::Approx(5).epsilon(1e-6));
  CHECK(solve_value(build_sum_top_k_model(SymMatrix::identity(4), 4)) ==
        doctest::Approx(4).epsilon(1e-6));
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    const int n = uniform_int(rng, 2, 7), k = uniform_int(rng, 1, n);
    const SymMatrix X = random_sym(rng, n);
    CHECK(std::abs(solve_value(build_sum_top_k_model(X, k)) - sum_top_k_eig(X, k)) <= 1e-5);
  }
  CHECK_THROWS_AS(build_sum_top_k_epigraph(0, 3), InvalidInput);
}

TEST_CASE("factor analysis examples") {
  FactorInstance d;
  d.Sigma = SymMatrix::diagonal({1, 2, 3});
  d.k = 0;
  d.M = 1.0;
  const BuiltModel bd = build_factor_analysis_q2(d);
  const Solution sd = solve(bd.problem, tight());
  REQUIRE(sd.status == SolveStatus::Optimal);
  CHECK(std::abs(sd.objective) <= 1e-5);
  CHECK(bd.matrix(sd.x, "X").cwiseAbs().maxCoeff() <= 1e-4);
  CHECK((bd.matrix(sd.x, "Phi").diagonal() - Eigen::Vector3d(1, 2, 3)).cwiseAbs().maxCoeff() <= 1e-4);

  Rng rng(14);
  const Vector u = rng.normal_matrix(5, 1);
  FactorInstance r1;
  r1.Sigma = SymMatrix(u * u.transpose());
  r1.k = 1;
  r1.M = u.squaredNorm();
  CHECK(solve_value(build_factor_analysis_q2(r1)) <= 1e-4);

  FactorInstance bad = r1;
  bad.M = 0.0;
  CHECK_THROWS_AS(build_factor_analysis_q2(bad), InvalidInput);
}
