#include "lowrank/perspective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace lowrank {

ExtendedReal::ExtendedReal(double v) : v_(v) {
  if (std::isnan(v)) throw InvalidInput("ExtendedReal: NaN");
  if (v == -std::numeric_limits<double>::infinity()) {
    throw InvalidInput("ExtendedReal: -inf is not representable");
  }
}

ExtendedReal ExtendedReal::operator+(const ExtendedReal& o) const {
  if (is_infinite() || o.is_infinite()) return infinity();
  return ExtendedReal(v_ + o.v_);
}

ExtendedReal scalar_perspective(const ScalarFunctionSpec& omega, double x, double z) {
  if (z < 0) throw InvalidInput("scalar_perspective: z must be non-negative");
  if (z == 0) {
    if (x == 0) return 0.0;
    if (omega.kind == ScalarKind::EpsLog && x > 0) return 0.0;
    return ExtendedReal::infinity();
  }
  if (omega.kind == ScalarKind::Power) {
    return std::pow(std::abs(x), omega.p) * std::pow(z, 1 - omega.p);
  }
  const double r = x / z;
  if (!omega.in_domain(r)) return ExtendedReal::infinity();
  return z * omega.value(r);
}

bool CommutingPair::out_of_span(Eigen::Index i) const {
  return std::abs(lam_y(i)) <= span_tol && std::abs(lam_x(i)) > span_tol;
}

bool CommutingPair::x_in_span_of_y() const {
  for (Eigen::Index i = 0; i < lam_x.size(); ++i) {
    if (out_of_span(i)) return false;
  }
  return true;
}

CommutingPair simultaneous_diagonalize(const SymMatrix& X, const SymMatrix& Y, double tol) {
  if (X.size() != Y.size()) throw InvalidInput("simultaneous_diagonalize: size mismatch");
  const int n = X.size();
  const double nx = X.size() ? sym_eig(X).values.cwiseAbs().maxCoeff() : 0.0;
  const EigenDecomposition ey = sym_eig(Y);
  const double ny = n ? ey.values.cwiseAbs().maxCoeff() : 0.0;
  const Matrix comm = X.mat() * Y.mat() - Y.mat() * X.mat();
  if (n && comm.cwiseAbs().maxCoeff() > tol * (1 + nx * ny)) {
    throw NotCommuting("simultaneous_diagonalize: commutator norm " +
                       std::to_string(comm.cwiseAbs().maxCoeff()) + " exceeds tolerance");
  }

  // Cluster the (descending) eigenvalues of Y and rotate inside each cluster
  // so that X becomes diagonal there as well.
  const double cluster_tol = 1e-7 * (1 + ny);
  Matrix basis(n, n);
  int start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n && ey.values(start) - ey.values(end) <= cluster_tol) ++end;
    const Matrix q = ey.basis.middleCols(start, end - start);
    const SymMatrix xq(q.transpose() * X.mat() * q);
    const EigenDecomposition ex = sym_eig(xq);
    basis.middleCols(start, end - start) = q * ex.basis;
    start = end;
  }

  CommutingPair out;
  out.X = X;
  out.Y = Y;
  out.basis = basis;
  out.lam_x = (basis.transpose() * X.mat() * basis).diagonal();
  out.lam_y = (basis.transpose() * Y.mat() * basis).diagonal();
  out.span_tol = 1e-10 * std::max({1.0, nx, ny});
  return out;
}

namespace {

// Per-eigenvalue perspective with tiny eigenvalues snapped to zero.
ExtendedReal eig_perspective(const ScalarFunctionSpec& omega, const CommutingPair& pair,
                             Eigen::Index i) {
  double x = pair.lam_x(i);
  double y = pair.lam_y(i);
  if (std::abs(x) <= pair.span_tol) x = 0;
  if (std::abs(y) <= pair.span_tol) y = 0;
  if (y < 0) return ExtendedReal::infinity();
  return scalar_perspective(omega, x, y);
}

}  // namespace

std::optional<SymMatrix> matrix_perspective(const ScalarFunctionSpec& f, const SymMatrix& X,
                                            const SymMatrix& Y) {
  CommutingPair pair;
  try {
    pair = simultaneous_diagonalize(X, Y);
  } catch (const NotCommuting&) {
    return std::nullopt;
  }
  Vector g(pair.lam_x.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const ExtendedReal v = eig_perspective(f, pair, i);
    if (v.is_infinite()) return std::nullopt;
    g(i) = v.value();
  }
  return SymMatrix(pair.basis * g.asDiagonal() * pair.basis.transpose());
}

ExtendedReal trace_matrix_perspective(const ScalarFunctionSpec& omega, const CommutingPair& pair,
                                      double mu, bool with_omega0_correction) {
  ExtendedReal total = 0.0;
  double tr_y = 0;
  for (Eigen::Index i = 0; i < pair.lam_x.size(); ++i) {
    total = total + eig_perspective(omega, pair, i);
    tr_y += pair.lam_y(i);
  }
  if (total.is_infinite()) return total;
  double v = total.value() + mu * tr_y;
  if (with_omega0_correction) {
    v += (static_cast<double>(pair.lam_x.size()) - tr_y) * omega.at_zero();
  }
  return v;
}

bool epigraph_transform_check(const ScalarFunctionSpec& f, const SymMatrix& X,
                              const SymMatrix& Y, const SymMatrix& theta, double tol) {
  if (X.size() != Y.size() || theta.size() != Y.size()) {
    throw InvalidInput("epigraph_transform_check: size mismatch");
  }
  const EigenDecomposition ey = sym_eig(Y);
  if (ey.values.size() && ey.values.minCoeff() <= tol) {
    throw InvalidInput("epigraph_transform_check: Y must be positive definite");
  }
  const Vector inv_sqrt = ey.values.cwiseSqrt().cwiseInverse();
  const Matrix y_is = ey.basis * inv_sqrt.asDiagonal() * ey.basis.transpose();
  const SymMatrix a(y_is * X.mat() * y_is);
  const SymMatrix b(y_is * theta.mat() * y_is);
  SymMatrix fa;
  try {
    fa = spectral_apply(a, [&f](double v) { return f.value(v); });
  } catch (const DomainError&) {
    return false;
  }
  return min_eigenvalue(b - fa) >= -tol;
}

}  // namespace lowrank
