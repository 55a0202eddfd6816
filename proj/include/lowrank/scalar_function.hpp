#pragma once

#include <string>

namespace lowrank {

enum class ScalarKind {
  BigM,       // 0 on |x| ≤ M, +∞ outside
  Ridge,      // x² / 2γ
  RidgeBigM,  // x² / 2γ on |x| ≤ M
  Power,      // |x|^p, p ≥ 1
  Log,        // -log(x + ε)
  Entropy,    // x log x
  Softplus,   // log(1 + eˣ)
  Square,     // x²
  NegPower,   // -x^α, α ∈ (0, 1)
  EpsLog,     // log x on ε-shifted eigenvalues; ω(0) taken as log ε
};

/// A univariate convex (or, for EpsLog, concave) function together with its
/// parameters. Values outside the domain are reported as +∞.
struct ScalarFunctionSpec {
  ScalarKind kind = ScalarKind::Square;
  double M = 1.0;
  double gamma = 1.0;
  double p = 2.0;
  double alpha = 0.5;
  double eps = 1e-6;

  static ScalarFunctionSpec big_m(double M);
  static ScalarFunctionSpec ridge(double gamma);
  static ScalarFunctionSpec ridge_big_m(double gamma, double M);
  static ScalarFunctionSpec power(double p);
  static ScalarFunctionSpec log(double eps);
  static ScalarFunctionSpec entropy();
  static ScalarFunctionSpec softplus();
  static ScalarFunctionSpec square();
  static ScalarFunctionSpec neg_power(double alpha);
  static ScalarFunctionSpec eps_log(double eps);

  /// Throws InvalidInput if a parameter is outside its validity range.
  void validate() const;

  bool in_domain(double x) const;
  /// ω(x), or +∞ outside the domain.
  double value(double x) const;
  /// The constant used for the (n - tr Y)·ω(0) correction.
  double at_zero() const;
  /// An element of ∂ω(x); midpoint of the subdifferential at kinks.
  /// Throws DomainError if x is outside the domain or ∂ω(x) is empty.
  double subgradient(double x) const;
  /// True for the concave kinds (NegPower, EpsLog).
  bool concave() const;

  std::string name() const;
};

/// Parses names such as "square", "ridge", "big-m" (parameters take defaults).
ScalarFunctionSpec scalar_function_from_name(const std::string& name);

}  // namespace lowrank
