#include <doctest.h>

#include <cmath>

#include "lowrank/perspective.hpp"
#include "test_util.hpp"

using namespace lowrank;
using namespace lowrank::testing;

namespace {

const std::vector<ScalarFunctionSpec>& catalog() {
  static const std::vector<ScalarFunctionSpec> fs = {
      ScalarFunctionSpec::big_m(2.0),        ScalarFunctionSpec::ridge(1.0),
      ScalarFunctionSpec::ridge_big_m(1.0, 2.0), ScalarFunctionSpec::power(3.0),
      ScalarFunctionSpec::log(1e-3),         ScalarFunctionSpec::entropy(),
      ScalarFunctionSpec::softplus(),        ScalarFunctionSpec::square()};
  return fs;
}

}  // namespace

TEST_CASE("scalar perspective examples") {
  CHECK(scalar_perspective(ScalarFunctionSpec::ridge(1.0), 2, 1).value() == doctest::Approx(2));
  for (const ScalarFunctionSpec& f : catalog()) {
    CHECK(scalar_perspective(f, 0, 0).value() == 0.0);
    CHECK(scalar_perspective(f, 1, 0).is_infinite());
  }
  // z·ω(x/z) with ω(t) = t log t.
  CHECK(scalar_perspective(ScalarFunctionSpec::entropy(), 1, 2).value() ==
        doctest::Approx(2 * (0.5 * std::log(0.5))));
  CHECK(scalar_perspective(ScalarFunctionSpec::entropy(), 1, 2).value() ==
        doctest::Approx(std::log(0.5)));
  CHECK(scalar_perspective(ScalarFunctionSpec::big_m(1.0), 3, 2).is_infinite());
  CHECK(scalar_perspective(ScalarFunctionSpec::big_m(1.0), 2, 2).value() == 0.0);
  CHECK_THROWS_AS(scalar_perspective(ScalarFunctionSpec::square(), 0, -1), InvalidInput);
}

TEST_CASE("perspective at z = 1 equals the function") {
  Rng rng(1);
  for (const ScalarFunctionSpec& f : catalog()) {
    for (int t = 0; t < 20; ++t) {
      const double x = uniform(rng, 0.01, 1.9);
      CHECK(scalar_perspective(f, x, 1).value() == doctest::Approx(f.value(x)));
    }
  }
}

TEST_CASE("Lemma 1 cases of the corrected scalar perspective") {
  Rng rng(2);
  for (const ScalarFunctionSpec& f : catalog()) {
    const double x = uniform(rng, 0.1, 1.5);
    CHECK(scalar_perspective(f, x, 1).value() == doctest::Approx(f.value(x)));
    CHECK((scalar_perspective(f, 0, 0).value() + f.at_zero()) == doctest::Approx(f.at_zero()));
    CHECK(scalar_perspective(f, x, 0).is_infinite());
  }
}

TEST_CASE("simultaneous_diagonalize examples") {
  const CommutingPair a = simultaneous_diagonalize(SymMatrix::diagonal({1, 2}), SymMatrix::identity(2));
  CHECK(a.lam_x(0) == doctest::Approx(2));
  CHECK(a.lam_x(1) == doctest::Approx(1));
  CHECK(a.lam_y(0) == doctest::Approx(1));
  CHECK(a.lam_y(1) == doctest::Approx(1));

  const CommutingPair b =
      simultaneous_diagonalize(SymMatrix::diagonal({1, 0}), SymMatrix::diagonal({0, 1}));
  CHECK_FALSE(b.x_in_span_of_y());

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const Matrix U = random_orthogonal(rng, 2);
    const CommutingPair p = simultaneous_diagonalize(in_basis(U, Eigen::Vector2d(3, 1)),
                                                     in_basis(U, Eigen::Vector2d(1, 0)));
    CHECK(p.lam_y(0) == doctest::Approx(1));
    CHECK(p.lam_x(0) == doctest::Approx(3));
    CHECK(std::abs(p.lam_y(1)) < 1e-10);
    CHECK(p.lam_x(1) == doctest::Approx(1));
    const Matrix dx = p.basis.transpose() * p.X.mat() * p.basis;
    CHECK((dx - Matrix(p.lam_x.asDiagonal())).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("simultaneous_diagonalize rejects non-commuting pairs") {
  Rng rng(4);
  CHECK_THROWS_AS(simultaneous_diagonalize(random_psd(rng, 3, 3), random_psd(rng, 3, 3)), NotCommuting);
}

TEST_CASE("repeated eigenvalues of Y pair with X inside the eigenspace") {
  Rng rng(5);
  const Matrix U = random_orthogonal(rng, 4);
  const SymMatrix X = in_basis(U, Eigen::Vector4d(4, 3, 2, 1));
  const SymMatrix Y = in_basis(U, Eigen::Vector4d(1, 1, 0, 0));
  const CommutingPair p = simultaneous_diagonalize(X, Y);
  CHECK(p.lam_x(0) == doctest::Approx(4));
  CHECK(p.lam_x(1) == doctest::Approx(3));
  CHECK(p.lam_x(2) == doctest::Approx(2));
  const Matrix dy = p.basis.transpose() * Y.mat() * p.basis;
  CHECK((dy - Matrix(p.lam_y.asDiagonal())).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("matrix perspective examples") {
  Rng rng(6);
  const SymMatrix X = random_sym(rng, 4);
  const std::optional<SymMatrix> g = matrix_perspective(ScalarFunctionSpec::softplus(), X, SymMatrix::identity(4));
  REQUIRE(g.has_value());
  const SymMatrix direct = spectral_apply(X, [](double x) { return std::log1p(std::exp(x)); });
  CHECK((g->mat() - direct.mat()).cwiseAbs().maxCoeff() < 1e-10);

  const std::optional<SymMatrix> s = matrix_perspective(
      ScalarFunctionSpec::square(), SymMatrix::diagonal({2, 0}), SymMatrix::diagonal({1, 0}));
  REQUIRE(s.has_value());
  CHECK(((*s).mat() - SymMatrix::diagonal({4, 0}).mat()).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_FALSE(matrix_perspective(ScalarFunctionSpec::square(), random_psd(rng, 3, 3),
                                 random_psd(rng, 3, 3))
                  .has_value());
  CHECK_FALSE(matrix_perspective(ScalarFunctionSpec::square(), SymMatrix::diagonal({1, 1}),
                                 SymMatrix::diagonal({1, 0}))
                  .has_value());
}

TEST_CASE("trace perspective examples") {
  const SymMatrix P = SymMatrix::diagonal({1, 0});
  const ExtendedReal r = trace_matrix_perspective(ScalarFunctionSpec::ridge(0.5),
                                                  simultaneous_diagonalize(P, P), 0.0, false);
  CHECK(r.value() == doctest::Approx(1));

  const ExtendedReal z = trace_matrix_perspective(
      ScalarFunctionSpec::square(), simultaneous_diagonalize(SymMatrix::zero(3), SymMatrix::zero(3)),
      0.7, true);
  CHECK(z.value() == doctest::Approx(0));

  const double lam = 2.0, eps = 1e-3;
  const ExtendedReal l = trace_matrix_perspective(
      ScalarFunctionSpec::eps_log(eps),
      simultaneous_diagonalize(SymMatrix::diagonal({lam + eps, eps}), P), 0.0, true);
  CHECK(l.value() == doctest::Approx(std::log(lam + eps) + std::log(eps)));
  CHECK(l.value() == doctest::Approx(logdet_eps(SymMatrix::diagonal({lam, 0}), eps)));
}

TEST_CASE("trace perspective on diagonal pairs is the sum of scalar perspectives") {
  Rng rng(7);
  for (const ScalarFunctionSpec& f : catalog()) {
    for (int t = 0; t < 10; ++t) {
      Vector x(4), y(4);
      for (int i = 0; i < 4; ++i) {
        y(i) = rng.uniform() < 0.3 ? 0.0 : uniform(rng, 0.2, 1.0);
        x(i) = y(i) == 0 ? 0.0 : y(i) * uniform(rng, 0.05, 1.9);
      }
      const ExtendedReal m = trace_matrix_perspective(
          f, simultaneous_diagonalize(SymMatrix::diagonal(x), SymMatrix::diagonal(y)), 0.0, false);
      ExtendedReal s = 0.0;
      for (int i = 0; i < 4; ++i) s = s + scalar_perspective(f, x(i), y(i));
      CHECK(m.value() == doctest::Approx(s.value()).epsilon(1e-12));
    }
  }
}

TEST_CASE("matrix perspective is positively homogeneous") {
  Rng rng(8);
  for (const ScalarFunctionSpec& f : catalog()) {
    for (int t = 0; t < 10; ++t) {
      const Matrix U = random_orthogonal(rng, 3);
      Vector ly(3), lx(3);
      for (int i = 0; i < 3; ++i) {
        ly(i) = uniform(rng, 0.2, 1.0);
        lx(i) = ly(i) * uniform(rng, 0.05, 1.9);
      }
      const SymMatrix X = in_basis(U, lx), Y = in_basis(U, ly);
      const double mu = uniform(rng, 0.0, 3.0);
      const std::optional<SymMatrix> a = matrix_perspective(f, mu * X, mu * Y);
      const std::optional<SymMatrix> b = matrix_perspective(f, X, Y);
      REQUIRE(a.has_value());
      REQUIRE(b.has_value());
      CHECK((a->mat() - mu * b->mat()).cwiseAbs().maxCoeff() <= 1e-8 * (1 + b->max_abs()));
    }
  }
}

TEST_CASE("trace perspective is jointly convex along shared-basis segments") {
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    const Matrix U = random_orthogonal(rng, 4);
    auto pair = [&] {
      Vector ly(4), lx(4);
      for (int i = 0; i < 4; ++i) {
        ly(i) = uniform(rng, 0.1, 1.0);
        lx(i) = uniform(rng, 0.0, 2.0);
      }
      return std::make_pair(in_basis(U, lx), in_basis(U, ly));
    };
    const auto [X1, Y1] = pair();
    const auto [X2, Y2] = pair();
    const double a = rng.uniform();
    const SymMatrix Xc = a * X1 + (1 - a) * X2, Yc = a * Y1 + (1 - a) * Y2;

    auto tr = [](const ScalarFunctionSpec& f, const SymMatrix& X, const SymMatrix& Y) {
      return trace_matrix_perspective(f, simultaneous_diagonalize(X, Y), 0.0, false).value();
    };
    const ScalarFunctionSpec sq = ScalarFunctionSpec::square();
    CHECK(tr(sq, Xc, Yc) <= a * tr(sq, X1, Y1) + (1 - a) * tr(sq, X2, Y2) + 1e-8);
    const ScalarFunctionSpec lg = ScalarFunctionSpec::eps_log(1e-6);
    CHECK(tr(lg, Xc, Yc) >= a * tr(lg, X1, Y1) + (1 - a) * tr(lg, X2, Y2) - 1e-8);
  }
}

TEST_CASE("epigraph transform examples") {
  const ScalarFunctionSpec sq = ScalarFunctionSpec::square();
  CHECK(epigraph_transform_check(sq, SymMatrix::diagonal({1}), SymMatrix::diagonal({2}),
                                 SymMatrix::diagonal({0.5}), 1e-9));
  CHECK_FALSE(epigraph_transform_check(sq, SymMatrix::diagonal({1}), SymMatrix::diagonal({2}),
                                       SymMatrix::diagonal({0.4}), 1e-9));
  CHECK_THROWS_AS(epigraph_transform_check(sq, SymMatrix::diagonal({1, 0}), SymMatrix::diagonal({1, 0}),
                                           SymMatrix::diagonal({1, 0}), 1e-9),
                  InvalidInput);

  Rng rng(10);
  for (int t = 0; t < 50; ++t) {
    const SymMatrix X = random_sym(rng, 3);
    const SymMatrix theta = matrix_exp(X) + random_sym(rng, 3, 0.3);
    const bool via_transform = epigraph_transform_check(
        ScalarFunctionSpec::softplus(), X, SymMatrix::identity(3), theta, 1e-9);
    const SymMatrix f = *matrix_perspective(ScalarFunctionSpec::softplus(), X, SymMatrix::identity(3));
    CHECK(via_transform == (min_eigenvalue(theta - f) >= -1e-9));
  }
}
