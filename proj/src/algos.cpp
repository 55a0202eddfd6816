#include "lowrank/algos.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lowrank/random.hpp"

namespace lowrank {

void DoptInstance::validate() const {
  if (A.rows() < 1 || A.cols() < 1) throw InvalidInput("D-opt: empty experiment matrix");
  if (k < 1 || k > A.cols()) throw InvalidInput("D-opt: k outside [1, m]");
  if (!(eps > 0)) throw InvalidInput("D-opt: eps must be positive");
  if (!A.allFinite()) throw InvalidInput("D-opt: non-finite data");
}

// ---------------------------------------------------------------- NMF

Matrix nnls_block(const Matrix& G, const Matrix& C, double rho, const Matrix& V) {
  // min_{U≥0} tr(UGUᵀ) − 2⟨C, U⟩ + ρ‖U − V‖²; gradient 2(U(G + ρI) − C − ρV).
  const Eigen::Index k = G.rows();
  const Matrix H = G + rho * Matrix::Identity(k, k);
  const Matrix rhs = C + rho * V;
  const Eigen::LDLT<Matrix> ldlt(H);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    const Matrix free = ldlt.solve(rhs.transpose()).transpose();
    if (free.allFinite() && free.minCoeff() >= 0) return free;
  }
  const double L = 2 * std::max(Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues().maxCoeff(),
                                1e-300);
  auto grad = [&](const Matrix& U) -> Matrix { return 2 * (U * H - rhs); };
  Matrix U = V.cwiseMax(0.0), Uprev = U, W = U;
  double t = 1.0;
  for (int it = 0; it < 500; ++it) {
    Uprev = U;
    U = (W - grad(W) / L).cwiseMax(0.0);
    const double tn = (1 + std::sqrt(1 + 4 * t * t)) / 2;
    W = U + ((t - 1) / tn) * (U - Uprev);
    t = tn;
    if (U.cwiseMin(grad(U)).cwiseAbs().maxCoeff() <= 1e-8) break;
  }
  return U;
}

AlsResult als_nmf(const NmfInstance& inst, std::uint64_t seed, double tol, int max_iter) {
  inst.validate();
  const Matrix& A = inst.A.mat();
  const int n = inst.A.size(), k = inst.k;
  auto err = [&](const Matrix& U) { return (U * U.transpose() - A).squaredNorm(); };

  AlsResult best;
  best.U = Matrix::Zero(n, k);
  best.ub = err(best.U);
  auto consider = [&](const Matrix& U) {
    const double e = err(U);
    if (e < best.ub) {
      best.ub = e;
      best.U = U;
    }
  };

  Rng rng(seed);
  Matrix V = rng.uniform_matrix(n, k);
  Matrix U = V;
  double prev = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= max_iter; ++t) {
    const double rho = std::min(1e-4 * std::ldexp(1.0, t - 1), 1e5);
    // ‖UVᵀ − A‖ = ‖VUᵀ − A‖ for symmetric A, so both halves share one solver.
    U = nnls_block(V.transpose() * V, A * V, rho, V);
    V = nnls_block(U.transpose() * U, A * U, rho, U);
    consider(U);
    consider(V);
    best.iterations = t;
    // A stalled bilinear fit with U ≠ V is not a symmetric solution.
    const double obj = err(U);
    if (std::abs(prev - obj) < tol && (U - V).squaredNorm() < tol) break;
    prev = obj;
  }
  return best;
}

// ---------------------------------------------------------------- D-optimal design

Vector greedy_round_topk(const Vector& z, int k) {
  const int m = static_cast<int>(z.size());
  if (k < 0 || k > m) throw InvalidInput("greedy_round_topk: k outside [0, m]");
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return z(a) > z(b); });
  Vector out = Vector::Zero(m);
  for (int i = 0; i < k; ++i) out(idx[i]) = 1.0;
  return out;
}

namespace {

Matrix information(const DoptInstance& inst, const Vector& z) {
  const Eigen::Index n = inst.A.rows();
  return inst.A * z.asDiagonal() * inst.A.transpose() + inst.eps * Matrix::Identity(n, n);
}

Vector topk_lmo(const Vector& g, int k) {
  // max gᵀs over s ∈ [0,1]^m, Σs ≤ k: the k largest positive coordinates.
  Vector s = greedy_round_topk(g, k);
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    if (g(j) <= 0) s(j) = 0.0;
  }
  return s;
}

// Frank-Wolfe for a concave objective over {z ∈ [0,1]^m, Σz ≤ k}. value_grad
// returns φ(z) and a supergradient.
template <class F>
CertifiedBound frank_wolfe(const DoptInstance& inst, int iters, F value_grad) {
  const int m = static_cast<int>(inst.A.cols());
  Vector z = Vector::Constant(m, double(inst.k) / m);
  CertifiedBound cb;
  double best_value = -std::numeric_limits<double>::infinity();
  double best_bound = std::numeric_limits<double>::infinity();
  for (int t = 0; t <= iters; ++t) {
    Vector g;
    const double v = value_grad(z, g);
    const Vector s = topk_lmo(g, inst.k);
    const double gap = std::max(0.0, g.dot(s - z));
    if (v > best_value) {
      best_value = v;
      cb.iterate = z;
    }
    best_bound = std::min(best_bound, v + gap);
    cb.iterations = t;
    if (gap <= 1e-12 * (1 + std::abs(v)) || t == iters) break;
    const double step = 2.0 / (t + 2);
    z += step * (s - z);
  }
  cb.value_at_iterate = best_value;
  cb.certified_bound = std::max(best_bound, best_value);
  cb.gap_certificate = cb.certified_bound - best_value;
  return cb;
}

}  // namespace

double dopt_logdet(const DoptInstance& inst, const Vector& z) {
  const Eigen::LLT<Matrix> llt(information(inst, z));
  if (llt.info() != Eigen::Success) throw DomainError("dopt_logdet: information matrix not PD");
  return 2 * llt.matrixLLT().diagonal().array().log().sum();
}

GreedyResult submodular_greedy_dopt(const DoptInstance& inst) {
  inst.validate();
  const int m = static_cast<int>(inst.A.cols());
  Vector z = Vector::Zero(m);
  GreedyResult res;
  for (int step = 0; step < inst.k; ++step) {
    // logdet(M + aaᵀ) = logdet(M) + log(1 + aᵀM⁻¹a).
    const Eigen::LLT<Matrix> llt(information(inst, z));
    const Matrix Minv_a = llt.solve(inst.A);
    int arg = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      if (z(j) > 0) continue;
      const double gain = inst.A.col(j).dot(Minv_a.col(j));
      if (gain > best) {
        best = gain;
        arg = j;
      }
    }
    z(arg) = 1.0;
    res.selected.push_back(arg);
  }
  std::sort(res.selected.begin(), res.selected.end());
  res.value = dopt_logdet(inst, z);
  return res;
}

CertifiedBound dopt_boolean_relaxation(const DoptInstance& inst, int iters) {
  inst.validate();
  return frank_wolfe(inst, iters, [&](const Vector& z, Vector& g) {
    const Eigen::LLT<Matrix> llt(information(inst, z));
    const Matrix Minv_a = llt.solve(inst.A);
    g = (inst.A.cwiseProduct(Minv_a)).colwise().sum().transpose();
    return 2 * llt.matrixLLT().diagonal().array().log().sum();
  });
}

WaterfillResult waterfill_inner(const Vector& lambda, double k, double eps) {
  if (lambda.size() == 0 || !(lambda.minCoeff() > 0)) {
    throw InvalidInput("waterfill_inner: eigenvalues must be positive");
  }
  if (!(eps > 0) || !(k >= 0)) throw InvalidInput("waterfill_inner: need eps > 0 and k >= 0");
  const double log_eps = std::log(eps);
  // Stationarity: log(λ/y) − 1 − log ε = ν.
  auto y_of = [&](double nu) -> Vector {
    return (lambda.array() * std::exp(-1 - nu) / eps).min(1.0).matrix();
  };
  Vector y = y_of(0.0);
  if (y.sum() > k) {
    double lo = 0.0, hi = 1.0;
    while (y_of(hi).sum() > k) hi *= 2;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * (1 + hi); ++it) {
      const double mid = (lo + hi) / 2;
      (y_of(mid).sum() > k ? lo : hi) = mid;
    }
    y = y_of(hi);
  }
  WaterfillResult r;
  r.y = y;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) > 0) r.value += y(i) * std::log(lambda(i) / y(i));
    r.value += (1 - y(i)) * log_eps;
  }
  return r;
}

namespace {
double mprt_value_grad(const DoptInstance& inst, const Vector& z, Vector* g) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(information(inst, z));
  // Spectral decomposition with a floor at ε against round-off.
  const Vector lam = es.eigenvalues().cwiseMax(inst.eps);
  const WaterfillResult wf = waterfill_inner(lam, inst.k, inst.eps);
  if (g) {
    // dψ/dzⱼ = Σᵢ (yᵢ/λᵢ)(uᵢᵀaⱼ)².
    const Matrix P = es.eigenvectors().transpose() * inst.A;
    const Vector w = wf.y.cwiseQuotient(lam);
    *g = (P.array().square().colwise() * w.array()).colwise().sum().transpose();
  }
  return wf.value;
}
}  // namespace

double dopt_mprt_value(const DoptInstance& inst, const Vector& z) {
  return mprt_value_grad(inst, z, nullptr);
}

CertifiedBound dopt_mprt_relaxation(const DoptInstance& inst, int iters) {
  inst.validate();
  if (inst.k >= inst.A.rows()) throw InvalidInput("dopt_mprt_relaxation: requires k < n");
  return frank_wolfe(inst, iters,
                     [&](const Vector& z, Vector& g) { return mprt_value_grad(inst, z, &g); });
}

GreedyResult dopt_brute_force(const DoptInstance& inst) {
  inst.validate();
  const int m = static_cast<int>(inst.A.cols());
  std::vector<bool> pick(m, false);
  std::fill(pick.begin(), pick.begin() + inst.k, true);
  GreedyResult best;
  best.value = -std::numeric_limits<double>::infinity();
  // prev_permutation over a sorted-descending mask visits every k-subset once.
  do {
    Vector z = Vector::Zero(m);
    for (int j = 0; j < m; ++j) z(j) = pick[j] ? 1.0 : 0.0;
    const double v = dopt_logdet(inst, z);
    if (v > best.value) {
      best.value = v;
      best.selected.clear();
      for (int j = 0; j < m; ++j) {
        if (pick[j]) best.selected.push_back(j);
      }
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

// ---------------------------------------------------------------- misc

Gap duality_gap(double ub, double lb) {
  if (ub == 0) return {ub - lb, true};
  return {(ub - lb) / std::abs(ub), false};
}

Matrix truncated_svd(const Matrix& A, int k) {
  if (k < 0 || k > std::min(A.rows(), A.cols())) {
    throw InvalidInput("truncated_svd: k outside [0, min(rows, cols)]");
  }
  const Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU().leftCols(k) * svd.singularValues().head(k).asDiagonal() *
         svd.matrixV().leftCols(k).transpose();
}

}  // namespace lowrank
