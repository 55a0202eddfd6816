#pragma once

// Standard-form conic programs  min cᵀx  s.t.  b − Ax ∈ K  and a first-order
// (ADMM) solver for products of zero, nonnegative, second-order, rotated
// second-order and PSD cones.

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include <json.hpp>

#include "lowrank/specfun.hpp"

namespace lowrank {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

enum class ConeType { Zero, NonNeg, SecondOrder, RotatedSecondOrder, PSD };

struct ConeBlock {
  ConeType type = ConeType::Zero;
  /// Vector length for Zero/NonNeg/SOC/RSOC; matrix side for PSD.
  int size = 1;
  /// Number of slack coordinates occupied by the block.
  int length() const { return type == ConeType::PSD ? size * (size + 1) / 2 : size; }
};

/// Ordered product cone. SecondOrder(d): (t, x) with ‖x‖ ≤ t.
/// RotatedSecondOrder(d): (u, v, w) with 2uv ≥ ‖w‖², u, v ≥ 0.
/// PSD(n): svec of an n×n PSD matrix.
struct ConeSpec {
  std::vector<ConeBlock> blocks;

  int dim() const;
  void validate() const;
  /// Appends a block and returns its first slack row.
  int add(ConeType type, int size);
};

struct ConicProblem {
  Vector c;
  SparseMatrix A;
  Vector b;
  ConeSpec cones;
  double obj_const = 0.0;

  /// Throws InvalidInput on non-conforming dimensions or non-finite data.
  void validate() const;
};

enum class SolveStatus { Optimal, MaxIter, Infeasible, Unbounded };
std::string status_name(SolveStatus s);

struct Solution {
  Vector x;
  /// Dual multiplier in K*, satisfying c + Aᵀy = 0 at optimality.
  Vector y;
  /// Slack b − Ax projected onto K.
  Vector s;
  SolveStatus status = SolveStatus::MaxIter;
  /// Residuals relative to 1 + the norms of the terms involved.
  double primal_res = 0.0;
  double dual_res = 0.0;
  /// cᵀx + bᵀy.
  double gap = 0.0;
  /// cᵀx + obj_const.
  double objective = 0.0;
  int iterations = 0;
};

struct SolverSettings {
  double tol = 1e-6;
  int max_iter = 50000;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.5;
  int scaling_iters = 15;
  /// Normalized certificate threshold for infeasibility/unboundedness.
  double cert_tol = 1e-7;
  int check_every = 10;
  /// Residual-balancing ρ updates every this many iterations; 0 keeps ρ fixed.
  int adapt_every = 0;
  /// Anderson acceleration memory; 0 disables it.
  int anderson_mem = 10;
  /// Print residuals to stderr at every check.
  bool verbose = false;

  /// Throws InvalidInput on non-positive tolerances, step sizes or limits.
  void validate() const;
};

/// Packs the lower triangle column by column with off-diagonals scaled by √2.
Vector svec(const SymMatrix& x);
/// Inverse of svec. Throws InvalidInput if the length is not triangular.
SymMatrix smat(const Vector& v);
/// Side n with n(n+1)/2 = len, or -1.
int svec_side(Eigen::Index len);

/// Blockwise Euclidean projection onto the cone.
Vector project_cone(const Vector& v, const ConeSpec& cones);
/// Same, onto the dual cone (Zero blocks become free).
Vector project_dual_cone(const Vector& v, const ConeSpec& cones);

/// warm, when given, supplies the starting (x, s, y) from an earlier solve of
/// a problem with the same structure.
Solution solve(const ConicProblem& p, const SolverSettings& settings = {},
               const Solution* warm = nullptr);

nlohmann::json problem_to_json(const ConicProblem& p);
ConicProblem problem_from_json(const nlohmann::json& j);

}  // namespace lowrank
