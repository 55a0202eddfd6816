#include "lowrank/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lowrank {

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw InvalidInput("SymMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + ", expected square");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(int n) { return SymMatrix(Matrix::Identity(n, n)); }
SymMatrix SymMatrix::zero(int n) { return SymMatrix(Matrix::Zero(n, n)); }
SymMatrix SymMatrix::diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

SymMatrix SymMatrix::diagonal(std::initializer_list<double> d) {
  Vector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return diagonal(v);
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const { return SymMatrix(m_ + o.m_); }
SymMatrix SymMatrix::operator-(const SymMatrix& o) const { return SymMatrix(m_ - o.m_); }
SymMatrix SymMatrix::operator-() const { return SymMatrix(-m_); }
SymMatrix SymMatrix::operator*(double a) const { return SymMatrix(a * m_); }

double inner(const SymMatrix& a, const SymMatrix& b) {
  return a.mat().cwiseProduct(b.mat()).sum();
}

SymMatrix sym_part(const Matrix& m) { return SymMatrix(m); }

Matrix EigenDecomposition::reconstruct() const {
  return basis * values.asDiagonal() * basis.transpose();
}

EigenDecomposition sym_eig(const SymMatrix& x) {
  if (!x.mat().allFinite()) throw InvalidInput("sym_eig: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> es(x.mat());
  if (es.info() != Eigen::Success) throw InvalidInput("sym_eig: eigensolver failed");
  // Eigen returns ascending order; flip to descending.
  EigenDecomposition out;
  out.values = es.eigenvalues().reverse();
  out.basis = es.eigenvectors().rowwise().reverse();
  return out;
}

namespace {

SymMatrix apply_to_values(const EigenDecomposition& ed, const std::function<double(double)>& f) {
  Vector fv(ed.values.size());
  for (Eigen::Index i = 0; i < ed.values.size(); ++i) {
    fv(i) = f(ed.values(i));
    if (!std::isfinite(fv(i))) {
      throw DomainError("spectral_apply: eigenvalue " + std::to_string(ed.values(i)) +
                        " outside the domain of the scalar function");
    }
  }
  return SymMatrix(ed.basis * fv.asDiagonal() * ed.basis.transpose());
}

}  // namespace

SymMatrix spectral_apply(const SymMatrix& x, const std::function<double(double)>& f) {
  return apply_to_values(sym_eig(x), f);
}

SymMatrix spectral_apply_psd(const SymMatrix& x, const std::function<double(double)>& f) {
  EigenDecomposition ed = sym_eig(x);
  for (Eigen::Index i = 0; i < ed.values.size(); ++i) {
    if (ed.values(i) < -kPsdClampTol) {
      throw DomainError("spectral_apply_psd: eigenvalue " + std::to_string(ed.values(i)) +
                        " is negative beyond the clamp tolerance");
    }
    ed.values(i) = std::max(ed.values(i), 0.0);
  }
  return apply_to_values(ed, f);
}

SymMatrix matrix_exp(const SymMatrix& x) {
  return spectral_apply(x, [](double v) { return std::exp(v); });
}

SymMatrix matrix_log(const SymMatrix& x) {
  return spectral_apply(x, [](double v) { return v > 0 ? std::log(v) : NAN; });
}

SymMatrix matrix_sqrt(const SymMatrix& x) {
  return spectral_apply_psd(x, [](double v) { return std::sqrt(v); });
}

SymMatrix pinv(const SymMatrix& x, double rank_tol) {
  const EigenDecomposition ed = sym_eig(x);
  if (rank_tol < 0) {
    const double scale = ed.values.size() ? ed.values.cwiseAbs().maxCoeff() : 0.0;
    rank_tol = 1e-9 * std::max(scale, 1.0);
  }
  Vector inv(ed.values.size());
  for (Eigen::Index i = 0; i < ed.values.size(); ++i) {
    inv(i) = std::abs(ed.values(i)) > rank_tol ? 1.0 / ed.values(i) : 0.0;
  }
  return SymMatrix(ed.basis * inv.asDiagonal() * ed.basis.transpose());
}

double logdet_eps(const SymMatrix& x, double eps) {
  if (!(eps > 0)) throw InvalidInput("logdet_eps: eps must be positive");
  const EigenDecomposition ed = sym_eig(x);
  double s = 0;
  for (Eigen::Index i = 0; i < ed.values.size(); ++i) {
    s += std::log(std::max(ed.values(i), 0.0) + eps);
  }
  return s;
}

double sum_top_k_eig(const SymMatrix& x, int k) {
  if (k < 1 || k > x.size()) {
    throw InvalidInput("sum_top_k_eig: k=" + std::to_string(k) + " outside [1, " +
                       std::to_string(x.size()) + "]");
  }
  return sym_eig(x).values.head(k).sum();
}

double min_eigenvalue(const SymMatrix& x) {
  if (x.size() == 0) return 0.0;
  return sym_eig(x).values.minCoeff();
}

double max_eigenvalue(const SymMatrix& x) {
  if (x.size() == 0) return 0.0;
  return sym_eig(x).values.maxCoeff();
}

bool generalized_schur_check(const SymMatrix& a, const Matrix& b, const SymMatrix& c,
                             double tol) {
  if (b.rows() != a.size() || b.cols() != c.size()) {
    throw InvalidInput("generalized_schur_check: B is " + std::to_string(b.rows()) + "x" +
                       std::to_string(b.cols()) + ", expected " + std::to_string(a.size()) +
                       "x" + std::to_string(c.size()));
  }
  if (min_eigenvalue(a) < -tol) return false;
  const SymMatrix a_pinv = pinv(a);
  const Matrix range_residual = b - a.mat() * (a_pinv.mat() * b);
  if (range_residual.size() && range_residual.cwiseAbs().maxCoeff() > tol) return false;
  const SymMatrix schur(c.mat() - b.transpose() * a_pinv.mat() * b);
  return min_eigenvalue(schur) >= -tol;
}

SymMatrix block_matrix(const SymMatrix& a, const Matrix& b, const SymMatrix& c) {
  if (b.rows() != a.size() || b.cols() != c.size()) {
    throw InvalidInput("block_matrix: dimension mismatch");
  }
  const int n = a.size(), m = c.size();
  Matrix out(n + m, n + m);
  out.topLeftCorner(n, n) = a.mat();
  out.topRightCorner(n, m) = b;
  out.bottomLeftCorner(m, n) = b.transpose();
  out.bottomRightCorner(m, m) = c.mat();
  return SymMatrix(out);
}

}  // namespace lowrank
