#pragma once

// Membership oracles for convex hulls of low-rank sets and generators of
// scalar and matrix perspective cuts.

#include <string>
#include <vector>

#include "lowrank/perspective.hpp"

namespace lowrank {

/// margin is the smallest signed slack over all defining inequalities;
/// member ⟺ margin ≥ −tol. witness names the binding inequality.
struct HullQueryResult {
  bool member = false;
  double margin = 0.0;
  std::string witness;
};

/// {(X, Y, t): X ⪰ 0, 0 ⪯ Y ⪯ I, tr Y ≤ k, X and Y commute,
///  Σ g_ω(λˣ, λʸ) + μ tr Y + (n − tr Y) ω(0) ≤ t}.
HullQueryResult hull_membership_T(const SymMatrix& X, const SymMatrix& Y, double t,
                                  const ScalarFunctionSpec& omega, double mu, double k,
                                  double tol = 1e-7);

/// {(Y, X, θ): Y ⪯ I, tr Y ≤ k, uY ⪰ X ⪰ ℓY, [[Y, X], [Xᵀ, θ]] ⪰ 0}.
HullQueryResult hull_membership_S(const SymMatrix& Y, const SymMatrix& X, const SymMatrix& theta,
                                  double l, double u, double k, double tol = 1e-7);

struct HullBlock {
  SymMatrix X, Y, theta;
  double q = 1.0;
  double l = 0.0, u = 1.0, k = 1.0;
};

/// ρ ≥ Σ qᵢ tr θᵢ and every block in the S-hull.
HullQueryResult hull_membership_Q(double rho, const std::vector<HullBlock>& blocks,
                                  double tol = 1e-7);

/// Closure of {(x, y, z, t): z ∈ {0,1}, |x| ≤ Mz, t ≥ |x + y − d|^q} with
/// the split form min_β |y−β−d(1−z)|^q/(1−z)^{q−1} + |x+β−dz|^q/z^{q−1}.
HullQueryResult scalar_closure_membership(double x, double y, double z, double t, double d,
                                          double q, double M, double tol = 1e-7);

/// The inner minimum over β of the split form (+∞ outside its domain).
double scalar_closure_value(double x, double y, double z, double d, double q);

/// ρ ≥ a·z + b·x.
struct PerspectiveCut {
  double a = 0.0;
  double b = 0.0;
  double slack(double x, double z, double rho) const { return rho - a * z - b * x; }
};

/// Linearization of the perspective of ω + c at (x̄, 1):
/// ρ ≥ (c + ω(x̄))z + s(x − x̄z), s ∈ ∂ω(x̄). Throws DomainError off dom ω.
PerspectiveCut perspective_cut(const ScalarFunctionSpec& omega, double xbar, double c = 0.0);

/// θ ⪰ C + sym(Lx·X + Ly·Y).
struct AffineMatrixCut {
  SymMatrix constant;
  Matrix coeff_X;
  Matrix coeff_Y;

  SymMatrix rhs(const SymMatrix& X, const SymMatrix& Y) const;
  /// θ − rhs(X, Y); the cut holds when this is PSD.
  SymMatrix residual(const SymMatrix& X, const SymMatrix& Y, const SymMatrix& theta) const;
};

/// θ ⪰ f(X̄)Y + S(X − X̄Y) with S = U Diag(ω′(λ)) Uᵀ at X̄ = U Diag(λ) Uᵀ.
AffineMatrixCut matrix_perspective_cut(const ScalarFunctionSpec& f, const SymMatrix& xbar);

/// ⟨W, θ − rhs(X, Y)⟩ ≥ 0.
struct ScalarContraction {
  AffineMatrixCut cut;
  SymMatrix weight;
  double residual(const SymMatrix& X, const SymMatrix& Y, const SymMatrix& theta) const;
};

/// Vᵀ(θ − rhs(X, Y))V ⪰ 0 with V = [v₁ v₂].
struct PairContraction {
  AffineMatrixCut cut;
  Matrix V;
  SymMatrix residual(const SymMatrix& X, const SymMatrix& Y, const SymMatrix& theta) const;
};

ScalarContraction trace_cut(const AffineMatrixCut& cut);
ScalarContraction rank_one_cut(const AffineMatrixCut& cut, const Vector& b);
PairContraction soc_pair_cut(const AffineMatrixCut& cut, const Vector& v1, const Vector& v2);

}  // namespace lowrank
