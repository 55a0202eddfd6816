#pragma once

// Dense symmetric linear algebra and spectral matrix functions.

#include <Eigen/Dense>

#include <functional>
#include <initializer_list>

#include "lowrank/errors.hpp"

namespace lowrank {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. The stored entries are exactly symmetric: the
/// constructor replaces the input by (M + Mᵀ)/2.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(int n);
  static SymMatrix zero(int n);
  static SymMatrix diagonal(const Vector& d);
  static SymMatrix diagonal(std::initializer_list<double> d);

  int size() const { return static_cast<int>(m_.rows()); }
  const Matrix& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }
  double max_abs() const { return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator-() const;
  SymMatrix operator*(double a) const;
  friend SymMatrix operator*(double a, const SymMatrix& s) { return s * a; }

 private:
  Matrix m_;
};

/// Frobenius inner product tr(AB).
double inner(const SymMatrix& a, const SymMatrix& b);

/// Symmetric part (M + Mᵀ)/2 of a square matrix.
SymMatrix sym_part(const Matrix& m);

struct EigenDecomposition {
  Matrix basis;   // orthonormal columns
  Vector values;  // descending

  Matrix reconstruct() const;
};

/// Eigendecomposition with eigenvalues sorted descending.
/// Throws InvalidInput on non-finite entries.
EigenDecomposition sym_eig(const SymMatrix& x);

/// U Diag(f(λ₁), ..., f(λₙ)) Uᵀ. Throws DomainError when f returns a
/// non-finite value on some eigenvalue.
SymMatrix spectral_apply(const SymMatrix& x, const std::function<double(double)>& f);

/// Same as spectral_apply but for nominally-PSD inputs: eigenvalues in
/// [-1e-10, 0) are clamped to 0 first, anything more negative is a DomainError.
SymMatrix spectral_apply_psd(const SymMatrix& x, const std::function<double(double)>& f);

SymMatrix matrix_exp(const SymMatrix& x);
SymMatrix matrix_log(const SymMatrix& x);
SymMatrix matrix_sqrt(const SymMatrix& x);

/// Eigenvalue tolerance below which a nominally-PSD matrix is rejected.
inline constexpr double kPsdClampTol = 1e-10;

/// Pseudoinverse by eigenvalue inversion. A negative rank_tol selects the
/// default 1e-9 * max(|λ|max, 1).
SymMatrix pinv(const SymMatrix& x, double rank_tol = -1.0);

/// Σ log(max(λᵢ, 0) + ε).
double logdet_eps(const SymMatrix& x, double eps);

/// Sum of the k largest eigenvalues, 1 ≤ k ≤ n.
double sum_top_k_eig(const SymMatrix& x, int k);

double min_eigenvalue(const SymMatrix& x);
double max_eigenvalue(const SymMatrix& x);

/// Checks the generalized Schur conditions for [[A, B], [Bᵀ, C]] ⪰ 0:
/// A ⪰ 0, (I - A A†) B = 0 and C - Bᵀ A† B ⪰ 0, each to within tol.
bool generalized_schur_check(const SymMatrix& a, const Matrix& b, const SymMatrix& c,
                             double tol);

/// Assembles [[A, B], [Bᵀ, C]].
SymMatrix block_matrix(const SymMatrix& a, const Matrix& b, const SymMatrix& c);

}  // namespace lowrank
