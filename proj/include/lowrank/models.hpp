#pragma once

// Conic relaxations of low-rank problems, tensor unfoldings and the
// objectives of the underlying non-convex problems.

#include <array>
#include <vector>

#include "lowrank/model_builder.hpp"

namespace lowrank {

/// Singular values above this count toward the rank.
inline constexpr double kRankThreshold = 1e-4;
int numerical_rank(const Matrix& m, double threshold = kRankThreshold);

struct RrrInstance {
  Matrix X;  // m×p design
  Matrix Y;  // m×n responses
  double gamma = 1.0;
  double mu = 0.0;
  void validate() const;
};

struct Observation {
  int i = 0, j = 0;
  double value = 0.0;
};

struct CompletionInstance {
  int n = 0;
  std::vector<Observation> observed;  // i ≤ j, no duplicates
  double gamma = 1.0;
  double mu = 0.0;
  void validate() const;
};

/// Dense 3-tensor, row-major: index (i₁, i₂, i₃) ↦ (i₁·n₂ + i₂)·n₃ + i₃.
struct Tensor3 {
  std::array<int, 3> dims{0, 0, 0};
  Vector data;

  Tensor3() = default;
  explicit Tensor3(std::array<int, 3> d);
  int size() const { return dims[0] * dims[1] * dims[2]; }
  int index(int i1, int i2, int i3) const { return (i1 * dims[1] + i2) * dims[2] + i3; }
  double& operator()(int i1, int i2, int i3) { return data(index(i1, i2, i3)); }
  double operator()(int i1, int i2, int i3) const { return data(index(i1, i2, i3)); }
};

struct TensorObservation {
  int i1 = 0, i2 = 0, i3 = 0;
  double value = 0.0;
};

struct TensorInstance {
  std::array<int, 3> dims{1, 1, 1};
  std::vector<TensorObservation> observed;
  std::array<int, 3> k{1, 1, 1};
  /// Weight on Σᵢ ‖X₍ᵢ₎‖²_F.
  double weight = 1.0;
  void validate() const;
};

struct NmfInstance {
  SymMatrix A;
  int k = 1;
  void validate() const;
};

struct FactorInstance {
  SymMatrix Sigma;
  int k = 0;
  double M = 1.0;
  void validate() const;
};

/// Mode-i unfolding (mode ∈ {1,2,3}): index i on rows, the remaining two
/// indices on columns in lexicographic order.
Matrix unfold(const Tensor3& t, int mode);
Tensor3 fold(const Matrix& m, int mode, std::array<int, 3> dims);

/// Variables: beta (p×n), theta (p×p), W (n×n), loss (scalar).
BuiltModel build_rrr_persp(const RrrInstance& inst);
/// Variables: beta, B (p×p), W.
BuiltModel build_rrr_dcl(const RrrInstance& inst);
/// Variables: beta, U (p×p), V (n×n), loss.
BuiltModel build_rrr_nn(const RrrInstance& inst);
/// Variables: X, Y, theta (all n×n symmetric), loss.
BuiltModel build_matrix_completion(const CompletionInstance& inst);
/// Variables: T (vectorized tensor), X1..X3, Y1..Y3, theta1..theta3, loss.
BuiltModel build_tensor_completion(const TensorInstance& inst);
/// Variables: X, Y, theta (n×n symmetric).
BuiltModel build_nmf_dnn(const NmfInstance& inst);
/// Variables: X (m×n), theta (m×m), Y (n×n).
BuiltModel build_rank_k_svd(const Matrix& A, int k);
/// Variables: X, Phi (diagonal), beta, theta1, theta2; Y1, Y2 are fixed.
BuiltModel build_factor_analysis_q2(const FactorInstance& inst);

/// Emits t ≥ k·s + tr Z, Z + sI − X ⪰ 0, Z ⪰ 0 for an n×n expression X.
struct SumTopKEpigraph {
  int k = 1;
  int n = 1;
  /// Adds variables <prefix>_t, <prefix>_s, <prefix>_Z and returns t.
  AffineExpr attach(ModelBuilder& mb, const ExprMatrix& X,
                    const std::string& prefix = "topk") const;
};
SumTopKEpigraph build_sum_top_k_epigraph(int k, int n);
/// min t over the epigraph block at a fixed X.
BuiltModel build_sum_top_k_model(const SymMatrix& X, int k);

// Objectives of the non-convex problems, for certifying bounds.
double rrr_objective(const RrrInstance& inst, const Matrix& beta);
double completion_objective(const CompletionInstance& inst, const SymMatrix& X);
double tensor_objective(const TensorInstance& inst, const Tensor3& t);
double factor_objective(const SymMatrix& Sigma, const SymMatrix& X, const Vector& phi);

}  // namespace lowrank
