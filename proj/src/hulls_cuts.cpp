#include "lowrank/hulls_cuts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lowrank {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tracks the smallest slack and which inequality produced it.
struct MarginTracker {
  double margin = kInf;
  std::string witness = "none";

  void add(double slack, const char* name) {
    if (slack < margin) {
      margin = slack;
      witness = name;
    }
  }
  HullQueryResult result(double tol) const { return {margin >= -tol, margin, witness}; }
};

}  // namespace

HullQueryResult hull_membership_T(const SymMatrix& X, const SymMatrix& Y, double t,
                                  const ScalarFunctionSpec& omega, double mu, double k,
                                  double tol) {
  if (X.size() != Y.size()) throw InvalidInput("hull_membership_T: X and Y differ in size");
  MarginTracker mt;
  mt.add(min_eigenvalue(X), "X_psd");
  mt.add(min_eigenvalue(Y), "Y_psd");
  mt.add(1 - max_eigenvalue(Y), "Y_below_I");
  mt.add(k - Y.trace(), "trace_Y");
  if (mt.margin < -tol) return mt.result(tol);

  CommutingPair pair;
  try {
    pair = simultaneous_diagonalize(X, Y);
  } catch (const NotCommuting&) {
    return {false, -kInf, "not_commuting"};
  }
  // Eigenvalues within tol of the box are placed on it.
  pair.lam_x = pair.lam_x.cwiseMax(0.0);
  pair.lam_y = pair.lam_y.cwiseMax(0.0).cwiseMin(1.0);
  const ExtendedReal value = trace_matrix_perspective(omega, pair, mu, true);
  if (value.is_infinite()) return {false, -kInf, "perspective_infinite"};
  mt.add(t - value.value(), "epigraph");
  return mt.result(tol);
}

HullQueryResult hull_membership_S(const SymMatrix& Y, const SymMatrix& X, const SymMatrix& theta,
                                  double l, double u, double k, double tol) {
  if (!(l <= u)) throw InvalidInput("hull_membership_S: need l <= u");
  const int n = Y.size();
  if (X.size() != n || theta.size() != n) throw InvalidInput("hull_membership_S: size mismatch");
  MarginTracker mt;
  mt.add(1 - max_eigenvalue(Y), "Y_below_I");
  mt.add(k - Y.trace(), "trace_Y");
  mt.add(min_eigenvalue(u * Y - X), "upper_bound");
  mt.add(min_eigenvalue(X - l * Y), "lower_bound");
  mt.add(min_eigenvalue(block_matrix(Y, X.mat(), theta)), "schur_block");
  return mt.result(tol);
}

HullQueryResult hull_membership_Q(double rho, const std::vector<HullBlock>& blocks, double tol) {
  MarginTracker mt;
  double sum = 0.0;
  for (const HullBlock& b : blocks) {
    if (!(b.q >= 0)) throw InvalidInput("hull_membership_Q: weights must be non-negative");
    sum += b.q * b.theta.trace();
    const HullQueryResult r = hull_membership_S(b.Y, b.X, b.theta, b.l, b.u, b.k, tol);
    if (r.margin < mt.margin) {
      mt.margin = r.margin;
      mt.witness = "block_" + r.witness;
    }
  }
  mt.add(rho - sum, "epigraph");
  return mt.result(tol);
}

namespace {

// |a|^q / s^{q−1} for s > 0, with the closure at s = 0.
double persp_power(double a, double s, double q) {
  if (s > 0) return std::pow(std::abs(a), q) / std::pow(s, q - 1);
  if (q == 1) return std::abs(a);
  return a == 0 ? 0.0 : kInf;
}

}  // namespace

double scalar_closure_value(double x, double y, double z, double d, double q) {
  if (!(q >= 1)) throw InvalidInput("scalar_closure: q must be >= 1");
  z = std::clamp(z, 0.0, 1.0);
  auto h = [&](double beta) {
    return persp_power(y - beta - d * (1 - z), 1 - z, q) + persp_power(x + beta - d * z, z, q);
  };
  // At the endpoints one term pins β (for q > 1).
  if (q > 1 && z == 0) return h(-x);
  if (q > 1 && z == 1) return h(y);
  const double R = (std::abs(x) + std::abs(y) + std::abs(d) + 1) * 10;
  double lo = -R, hi = R;
  while (hi - lo > 1e-9) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (h(m1) <= h(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return h((lo + hi) / 2);
}

HullQueryResult scalar_closure_membership(double x, double y, double z, double t, double d,
                                          double q, double M, double tol) {
  if (!(q >= 1) || !(M > 0)) throw InvalidInput("scalar_closure: need q >= 1 and M > 0");
  MarginTracker mt;
  mt.add(z, "z_nonneg");
  mt.add(1 - z, "z_below_1");
  mt.add(M * z - std::abs(x), "big_m");
  if (mt.margin < -tol) return mt.result(tol);
  const double v = scalar_closure_value(x, y, z, d, q);
  if (!std::isfinite(v)) return {false, -kInf, "perspective_infinite"};
  mt.add(t - v, "epigraph");
  return mt.result(tol);
}

PerspectiveCut perspective_cut(const ScalarFunctionSpec& omega, double xbar, double c) {
  if (!omega.in_domain(xbar)) throw DomainError("perspective_cut: x̄ outside the domain");
  const double s = omega.subgradient(xbar);
  return {c + omega.value(xbar) - s * xbar, s};
}

SymMatrix AffineMatrixCut::rhs(const SymMatrix& X, const SymMatrix& Y) const {
  return constant + sym_part(coeff_X * X.mat() + coeff_Y * Y.mat());
}

SymMatrix AffineMatrixCut::residual(const SymMatrix& X, const SymMatrix& Y,
                                    const SymMatrix& theta) const {
  return theta - rhs(X, Y);
}

AffineMatrixCut matrix_perspective_cut(const ScalarFunctionSpec& f, const SymMatrix& xbar) {
  const EigenDecomposition ed = sym_eig(xbar);
  const int n = xbar.size();
  Vector fv(n), sv(n);
  for (int i = 0; i < n; ++i) {
    const double lam = ed.values(i);
    if (!f.in_domain(lam)) throw DomainError("matrix_perspective_cut: X̄ outside the domain");
    fv(i) = f.value(lam);
    sv(i) = f.subgradient(lam);
  }
  const Matrix& U = ed.basis;
  const Matrix F = U * fv.asDiagonal() * U.transpose();
  const Matrix S = U * sv.asDiagonal() * U.transpose();
  // f(X̄)Y + S(X − X̄Y) = S·X + (f(X̄) − S·X̄)·Y
  AffineMatrixCut cut;
  cut.constant = SymMatrix::zero(n);
  cut.coeff_X = S;
  cut.coeff_Y = F - S * xbar.mat();
  return cut;
}

double ScalarContraction::residual(const SymMatrix& X, const SymMatrix& Y,
                                   const SymMatrix& theta) const {
  return inner(weight, cut.residual(X, Y, theta));
}

SymMatrix PairContraction::residual(const SymMatrix& X, const SymMatrix& Y,
                                    const SymMatrix& theta) const {
  return SymMatrix(V.transpose() * cut.residual(X, Y, theta).mat() * V);
}

ScalarContraction trace_cut(const AffineMatrixCut& cut) {
  return {cut, SymMatrix::identity(cut.constant.size())};
}

ScalarContraction rank_one_cut(const AffineMatrixCut& cut, const Vector& b) {
  if (b.size() != cut.constant.size() || b.squaredNorm() == 0) {
    throw InvalidInput("rank_one_cut: b must be nonzero with matching length");
  }
  return {cut, SymMatrix(b * b.transpose())};
}

PairContraction soc_pair_cut(const AffineMatrixCut& cut, const Vector& v1, const Vector& v2) {
  const Eigen::Index n = cut.constant.size();
  if (v1.size() != n || v2.size() != n || v1.squaredNorm() == 0 || v2.squaredNorm() == 0) {
    throw InvalidInput("soc_pair_cut: vectors must be nonzero with matching length");
  }
  Matrix V(n, 2);
  V << v1, v2;
  return {cut, V};
}

}  // namespace lowrank
