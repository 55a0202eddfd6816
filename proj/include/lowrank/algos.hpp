#pragma once

// Heuristics and first-order certified relaxations: ALS for symmetric NMF,
// greedy and Frank-Wolfe methods for D-optimal design, duality gaps.

#include <cstdint>
#include <vector>

#include "lowrank/models.hpp"

namespace lowrank {

/// Columns of A are the candidate experiments aⱼ ∈ ℝⁿ.
struct DoptInstance {
  Matrix A;
  int k = 1;
  double eps = 1e-6;
  void validate() const;
};

/// certified_bound = value_at_iterate + gap_certificate.
struct CertifiedBound {
  double value_at_iterate = 0.0;
  double certified_bound = 0.0;
  double gap_certificate = 0.0;
  Vector iterate;
  int iterations = 0;
};

struct AlsResult {
  Matrix U;
  double ub = 0.0;
  int iterations = 0;
};

/// Alternates min_{U≥0} ‖UVᵀ − A‖² + ρ‖U − V‖² and the same in V with
/// ρ_t = min(1e-4·2^{t−1}, 1e5). Returns the best symmetric factor seen.
AlsResult als_nmf(const NmfInstance& inst, std::uint64_t seed, double tol = 1e-4,
                  int max_iter = 100);

/// argmin_{U≥0} tr(UGUᵀ) − 2⟨C, U⟩ + ρ‖U − V‖²_F, i.e. ‖UVᵀ − A‖²_F + ρ‖U − V‖²_F
/// up to a constant when G = VᵀV and C = AV. Accelerated projected gradient
/// started from V.
Matrix nnls_block(const Matrix& G, const Matrix& C, double rho, const Matrix& V);

/// Indicator of the k largest entries, ties to the lowest index.
Vector greedy_round_topk(const Vector& z, int k);

struct GreedyResult {
  std::vector<int> selected;
  double value = 0.0;
};
GreedyResult submodular_greedy_dopt(const DoptInstance& inst);

/// logdet(A Diag(z) Aᵀ + εI).
double dopt_logdet(const DoptInstance& inst, const Vector& z);

CertifiedBound dopt_boolean_relaxation(const DoptInstance& inst, int iters = 500);

struct WaterfillResult {
  Vector y;
  double value = 0.0;
};
/// max Σ yᵢ log(λᵢ/yᵢ) + (1 − yᵢ) log ε over y ∈ [0,1]ⁿ, Σy ≤ k.
WaterfillResult waterfill_inner(const Vector& lambda, double k, double eps);

/// Waterfill value at the spectrum of A Diag(z) Aᵀ + εI.
double dopt_mprt_value(const DoptInstance& inst, const Vector& z);
CertifiedBound dopt_mprt_relaxation(const DoptInstance& inst, int iters = 500);

/// Exhaustive max of logdet over binary z with Σz = k.
GreedyResult dopt_brute_force(const DoptInstance& inst);

struct Gap {
  double value = 0.0;
  /// The reference value was zero, so value is an absolute difference.
  bool absolute = false;
};
/// (ub − lb)/|ub|; for maximization pass (bound, value).
Gap duality_gap(double ub, double lb);

/// Best rank-k approximation in Frobenius norm.
Matrix truncated_svd(const Matrix& A, int k);

}  // namespace lowrank
