#pragma once

// Scalar and matrix perspective functions.

#include <limits>
#include <optional>

#include "lowrank/scalar_function.hpp"
#include "lowrank/specfun.hpp"

namespace lowrank {

/// A real number or +∞. Finite values are never NaN.
class ExtendedReal {
 public:
  ExtendedReal() = default;
  ExtendedReal(double v);  // NOLINT(google-explicit-constructor): reals embed implicitly

  static ExtendedReal infinity() { return ExtendedReal(std::numeric_limits<double>::infinity()); }

  bool is_infinite() const { return v_ == std::numeric_limits<double>::infinity(); }
  bool is_finite() const { return !is_infinite(); }
  /// The finite value; +∞ is returned as the IEEE infinity.
  double value() const { return v_; }

  ExtendedReal operator+(const ExtendedReal& o) const;
  bool operator<=(double t) const { return is_finite() && v_ <= t; }

 private:
  double v_ = 0.0;
};

/// z·ω(x/z) for z > 0; 0 at x = z = 0; +∞ otherwise. For EpsLog the value at
/// z = 0, x > 0 is the closure limit 0. Throws InvalidInput for z < 0.
ExtendedReal scalar_perspective(const ScalarFunctionSpec& omega, double x, double z);

/// Two symmetric matrices that share an orthonormal eigenbasis. Column i of
/// `basis` carries eigenvalue lam_x[i] of X and lam_y[i] of Y; columns are
/// ordered by lam_y descending, then lam_x descending.
struct CommutingPair {
  SymMatrix X;
  SymMatrix Y;
  Matrix basis;
  Vector lam_x;
  Vector lam_y;
  /// Eigenvalues with magnitude at most span_tol are treated as zero.
  double span_tol = 0.0;

  /// True at index i when lam_y[i] is zero but lam_x[i] is not, i.e. X has a
  /// component outside the span of Y along that eigenvector.
  bool out_of_span(Eigen::Index i) const;
  bool x_in_span_of_y() const;
};

/// Default commutator tolerance, applied as tol·(1 + ‖X‖·‖Y‖).
inline constexpr double kCommuteTol = 1e-8;

/// Computes a common eigenbasis. Repeated eigenvalues of Y are resolved by
/// diagonalizing X inside each eigenspace of Y.
/// Throws NotCommuting when ‖XY − YX‖_max > tol·(1 + ‖X‖‖Y‖).
CommutingPair simultaneous_diagonalize(const SymMatrix& X, const SymMatrix& Y,
                                       double tol = kCommuteTol);

/// g_f(X, Y) = U Diag(g_ω(λˣᵢ, λʸᵢ)) Uᵀ, or nullopt (+∞) when the pair does not
/// commute, Y is not PSD, or some eigenvalue pair has infinite perspective.
std::optional<SymMatrix> matrix_perspective(const ScalarFunctionSpec& f, const SymMatrix& X,
                                            const SymMatrix& Y);

/// Σᵢ g_ω(λˣᵢ, λʸᵢ) + μ·tr(Y), plus (n − tr Y)·ω(0) when the correction is on.
ExtendedReal trace_matrix_perspective(const ScalarFunctionSpec& omega, const CommutingPair& pair,
                                      double mu, bool with_omega0_correction);

/// Tests (Y^{-1/2} X Y^{-1/2}, Y^{-1/2} θ Y^{-1/2}) ∈ epi(f) within tol.
/// Throws InvalidInput unless Y ≻ tol·I.
bool epigraph_transform_check(const ScalarFunctionSpec& f, const SymMatrix& X,
                              const SymMatrix& Y, const SymMatrix& theta, double tol);

}  // namespace lowrank
