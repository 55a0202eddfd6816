#include "lowrank/models.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace lowrank {

namespace {

Matrix eye(int n) { return Matrix::Identity(n, n); }

// Entries of an expression matrix in column-major order, each scaled by s.
void append_scaled(std::vector<AffineExpr>& out, const ExprMatrix& e, double s) {
  for (int j = 0; j < e.cols(); ++j) {
    for (int i = 0; i < e.rows(); ++i) out.push_back(s * e(i, j));
  }
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidInput(msg);
}

// Congruence weights (a on the first block, b on the second) that bring the
// entries of [[θ, β], [βᵀ, W]] to comparable size at the expected optimum:
// β ~ s (largest singular value of the ridge fit), W ~ w, θ ~ s²/w.
Vector block_scaling(const RrrInstance& inst, double w_guess_mu_scale) {
  const double m = static_cast<double>(inst.X.rows());
  const int p = static_cast<int>(inst.X.cols()), n = static_cast<int>(inst.Y.cols());
  const Matrix gram = inst.X.transpose() * inst.X / m + eye(p) / inst.gamma;
  const Matrix ridge = gram.ldlt().solve(inst.X.transpose() * inst.Y / m);
  const double s = std::max(Eigen::JacobiSVD<Matrix>(ridge).singularValues()(0), 1e-2);
  double w = 1.0;
  if (w_guess_mu_scale > 0) w = std::clamp(s / std::sqrt(w_guess_mu_scale), 1e-6, 1.0);
  Vector d(p + n);
  d.head(p).setConstant(std::sqrt(w) / s);
  d.tail(n).setConstant(1 / std::sqrt(w));
  return d;
}

}  // namespace

int numerical_rank(const Matrix& m, double threshold) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > threshold) ++r;
  }
  return r;
}

void RrrInstance::validate() const {
  require(X.rows() >= 1 && X.cols() >= 1 && Y.cols() >= 1, "RRR: empty data");
  require(X.rows() == Y.rows(), "RRR: X has " + std::to_string(X.rows()) + " rows but Y has " +
                                    std::to_string(Y.rows()));
  require(gamma > 0, "RRR: gamma must be positive");
  require(mu >= 0, "RRR: mu must be non-negative");
  require(X.allFinite() && Y.allFinite(), "RRR: non-finite data");
}

void CompletionInstance::validate() const {
  require(n >= 1, "completion: n must be >= 1");
  require(gamma > 0 && mu >= 0, "completion: need gamma > 0 and mu >= 0");
  std::set<std::pair<int, int>> seen;
  for (const Observation& o : observed) {
    require(o.i >= 0 && o.j < n && o.i <= o.j, "completion: observation index out of range");
    require(seen.insert({o.i, o.j}).second, "completion: duplicate observation");
    require(std::isfinite(o.value), "completion: non-finite observation");
  }
}

void TensorInstance::validate() const {
  std::set<std::array<int, 3>> seen;
  for (int a = 0; a < 3; ++a) {
    require(dims[a] >= 1, "tensor: dimensions must be >= 1");
    require(k[a] >= 0 && k[a] <= dims[a], "tensor: rank bound outside [0, n_i]");
  }
  require(weight >= 0, "tensor: weight must be non-negative");
  for (const TensorObservation& o : observed) {
    require(o.i1 >= 0 && o.i1 < dims[0] && o.i2 >= 0 && o.i2 < dims[1] && o.i3 >= 0 &&
                o.i3 < dims[2],
            "tensor: observation index out of range");
    require(seen.insert({o.i1, o.i2, o.i3}).second, "tensor: duplicate observation");
  }
}

void NmfInstance::validate() const {
  require(A.size() >= 1, "NMF: empty matrix");
  require(k >= 1 && k <= A.size(), "NMF: k outside [1, n]");
  require(A.mat().minCoeff() >= 0, "NMF: A must be entrywise non-negative");
}

void FactorInstance::validate() const {
  require(Sigma.size() >= 1, "factor analysis: empty Sigma");
  require(M > 0, "factor analysis: M must be positive");
  require(k >= 0 && k <= Sigma.size(), "factor analysis: k outside [0, n]");
  require(min_eigenvalue(Sigma) >= -1e-10, "factor analysis: Sigma is not PSD");
}

Tensor3::Tensor3(std::array<int, 3> d) : dims(d), data(Vector::Zero(d[0] * d[1] * d[2])) {}

namespace {

// (row, col) of entry (i1, i2, i3) in the mode unfolding.
std::pair<int, int> unfold_pos(const std::array<int, 3>& d, int mode, int i1, int i2, int i3) {
  switch (mode) {
    case 1: return {i1, i2 * d[2] + i3};
    case 2: return {i2, i1 * d[2] + i3};
    case 3: return {i3, i1 * d[1] + i2};
  }
  throw InvalidInput("unfold: mode must be 1, 2 or 3");
}

}  // namespace

Matrix unfold(const Tensor3& t, int mode) {
  if (mode < 1 || mode > 3) throw InvalidInput("unfold: mode must be 1, 2 or 3");
  if (t.data.size() != t.size()) throw InvalidInput("unfold: data length does not match dims");
  const int rows = t.dims[mode - 1];
  Matrix m(rows, t.size() / rows);
  for (int a = 0; a < t.dims[0]; ++a) {
    for (int b = 0; b < t.dims[1]; ++b) {
      for (int c = 0; c < t.dims[2]; ++c) {
        const auto [r, col] = unfold_pos(t.dims, mode, a, b, c);
        m(r, col) = t(a, b, c);
      }
    }
  }
  return m;
}

Tensor3 fold(const Matrix& m, int mode, std::array<int, 3> dims) {
  if (mode < 1 || mode > 3) throw InvalidInput("fold: mode must be 1, 2 or 3");
  Tensor3 t(dims);
  if (m.rows() != dims[mode - 1] || m.size() != t.size()) {
    throw InvalidInput("fold: matrix shape does not match dims");
  }
  for (int a = 0; a < dims[0]; ++a) {
    for (int b = 0; b < dims[1]; ++b) {
      for (int c = 0; c < dims[2]; ++c) {
        const auto [r, col] = unfold_pos(dims, mode, a, b, c);
        t(a, b, c) = m(r, col);
      }
    }
  }
  return t;
}

BuiltModel build_rrr_persp(const RrrInstance& inst) {
  inst.validate();
  const int m = static_cast<int>(inst.X.rows()), p = static_cast<int>(inst.X.cols());
  const int n = static_cast<int>(inst.Y.cols());
  ModelBuilder mb;
  const ExprMatrix beta = mb.add_matrix("beta", p, n);
  const ExprMatrix theta = mb.add_symmetric("theta", p);
  const ExprMatrix W = mb.add_symmetric("W", n);
  const AffineExpr loss = mb.add_scalar("loss");

  // 2·loss·1 ≥ ‖Y − Xβ‖²/m
  std::vector<AffineExpr> cone{loss, 1.0};
  append_scaled(cone, ExprMatrix::constant(inst.Y) - inst.X * beta, 1 / std::sqrt(double(m)));
  mb.add_rsoc(cone);
  // W ~ s/√(2γμ) balances (1/2γ)·tr(βW⁻¹βᵀ) against μ·tr(W).
  mb.add_psd(block_expr(theta, beta, W), block_scaling(inst, 2 * inst.gamma * inst.mu));
  mb.add_psd(ExprMatrix::constant(eye(n)) - W);
  mb.add_objective(loss + (1 / (2 * inst.gamma)) * trace(theta) + inst.mu * trace(W));
  return mb.build();
}

BuiltModel build_rrr_dcl(const RrrInstance& inst) {
  inst.validate();
  const double m = static_cast<double>(inst.X.rows());
  const int p = static_cast<int>(inst.X.cols()), n = static_cast<int>(inst.Y.cols());
  ModelBuilder mb;
  const ExprMatrix beta = mb.add_matrix("beta", p, n);
  const ExprMatrix B = mb.add_symmetric("B", p);
  const ExprMatrix W = mb.add_symmetric("W", n);

  const Matrix gram = eye(p) / inst.gamma + inst.X.transpose() * inst.X / m;
  mb.add_objective(0.5 * inner(gram, B));
  mb.add_objective(-(1 / m) * inner(inst.X.transpose() * inst.Y, beta));
  mb.add_objective(inst.mu * trace(W));
  mb.add_objective(AffineExpr(inst.Y.squaredNorm() / (2 * m)));
  mb.add_psd(block_expr(B, beta, W), block_scaling(inst, 0.0));
  mb.add_psd(ExprMatrix::constant(eye(n)) - W);
  return mb.build();
}

BuiltModel build_rrr_nn(const RrrInstance& inst) {
  inst.validate();
  const int m = static_cast<int>(inst.X.rows()), p = static_cast<int>(inst.X.cols());
  const int n = static_cast<int>(inst.Y.cols());
  ModelBuilder mb;
  const ExprMatrix beta = mb.add_matrix("beta", p, n);
  const ExprMatrix U = mb.add_symmetric("U", p);
  const ExprMatrix V = mb.add_symmetric("V", n);
  const AffineExpr loss = mb.add_scalar("loss");

  // 2·loss ≥ ‖Y − Xβ‖²/m + ‖β‖²/γ
  std::vector<AffineExpr> cone{loss, 1.0};
  append_scaled(cone, ExprMatrix::constant(inst.Y) - inst.X * beta, 1 / std::sqrt(double(m)));
  append_scaled(cone, beta, 1 / std::sqrt(inst.gamma));
  mb.add_rsoc(cone);
  // ‖β‖_* = min ½(tr U + tr V) over [[U, β], [βᵀ, V]] ⪰ 0
  mb.add_psd(block_expr(U, beta, V));
  mb.add_objective(loss + (inst.mu / 2) * (trace(U) + trace(V)));
  return mb.build();
}

BuiltModel build_matrix_completion(const CompletionInstance& inst) {
  inst.validate();
  const int n = inst.n;
  ModelBuilder mb;
  const ExprMatrix X = mb.add_symmetric("X", n);
  const ExprMatrix Y = mb.add_symmetric("Y", n);
  const ExprMatrix theta = mb.add_symmetric("theta", n);
  const AffineExpr loss = mb.add_scalar("loss");

  // 2·loss·½ ≥ Σ (X_ij − A_ij)²
  std::vector<AffineExpr> cone{loss, 0.5};
  for (const Observation& o : inst.observed) cone.push_back(X(o.i, o.j) - o.value);
  mb.add_rsoc(cone);
  mb.add_psd(block_expr(Y, X, theta));
  mb.add_psd(ExprMatrix::constant(eye(n)) - Y);
  mb.add_psd(X);
  mb.add_objective(loss + (1 / (2 * inst.gamma)) * trace(theta) + inst.mu * trace(Y));
  return mb.build();
}

BuiltModel build_tensor_completion(const TensorInstance& inst) {
  inst.validate();
  const auto& d = inst.dims;
  const int N = d[0] * d[1] * d[2];
  ModelBuilder mb;
  const ExprMatrix T = mb.add_vector("T", N);
  Tensor3 shape(d);
  AffineExpr reg;
  for (int mode = 1; mode <= 3; ++mode) {
    const std::string s = std::to_string(mode);
    const int rows = d[mode - 1], cols = N / rows;
    const ExprMatrix Xi = mb.add_matrix("X" + s, rows, cols);
    const ExprMatrix Yi = mb.add_symmetric("Y" + s, rows);
    const ExprMatrix thetai = mb.add_symmetric("theta" + s, cols);
    for (int a = 0; a < d[0]; ++a) {
      for (int b = 0; b < d[1]; ++b) {
        for (int c = 0; c < d[2]; ++c) {
          const auto [r, col] = unfold_pos(d, mode, a, b, c);
          mb.add_zero(Xi(r, col) - T(shape.index(a, b, c), 0));
        }
      }
    }
    mb.add_psd(block_expr(Yi, Xi, thetai));
    mb.add_psd(ExprMatrix::constant(eye(rows)) - Yi);
    mb.add_nonneg(AffineExpr(inst.k[mode - 1]) - trace(Yi));
    reg += trace(thetai);
  }
  const AffineExpr loss = mb.add_scalar("loss");
  std::vector<AffineExpr> cone{loss, 0.5};
  for (const TensorObservation& o : inst.observed) {
    cone.push_back(T(shape.index(o.i1, o.i2, o.i3), 0) - o.value);
  }
  mb.add_rsoc(cone);
  mb.add_objective(loss + inst.weight * reg);
  return mb.build();
}

BuiltModel build_nmf_dnn(const NmfInstance& inst) {
  inst.validate();
  const int n = inst.A.size();
  ModelBuilder mb;
  const ExprMatrix X = mb.add_symmetric("X", n);
  const ExprMatrix Y = mb.add_symmetric("Y", n);
  const ExprMatrix theta = mb.add_symmetric("theta", n);
  mb.add_psd(block_expr(Y, X, theta));
  mb.add_psd(ExprMatrix::constant(eye(n)) - Y);
  mb.add_nonneg(AffineExpr(inst.k) - trace(Y));
  mb.add_psd(X);
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) mb.add_nonneg(X(i, j));
  }
  mb.add_objective(0.5 * trace(theta) - inner(inst.A.mat(), X) +
                   AffineExpr(0.5 * inst.A.mat().squaredNorm()));
  return mb.build();
}

BuiltModel build_rank_k_svd(const Matrix& A, int k) {
  const int m = static_cast<int>(A.rows()), n = static_cast<int>(A.cols());
  require(m >= 1 && n >= 1, "rank-k SVD: empty matrix");
  require(k >= 0, "rank-k SVD: k must be non-negative");
  require(A.allFinite(), "rank-k SVD: non-finite data");
  ModelBuilder mb;
  const ExprMatrix X = mb.add_matrix("X", m, n);
  const ExprMatrix theta = mb.add_symmetric("theta", m);
  const ExprMatrix Y = mb.add_symmetric("Y", n);
  mb.add_psd(block_expr(theta, X, Y));
  mb.add_psd(ExprMatrix::constant(eye(n)) - Y);
  mb.add_nonneg(AffineExpr(k) - trace(Y));
  mb.add_objective(0.5 * trace(theta) - inner(A, X) + AffineExpr(0.5 * A.squaredNorm()));
  return mb.build();
}

BuiltModel build_factor_analysis_q2(const FactorInstance& inst) {
  inst.validate();
  const int n = inst.Sigma.size(), k = inst.k;
  // Y₂ projects onto the top-k eigenvectors of Σ. In the basis P = [P₂ P₁]
  // of Σ's eigenvectors both Yᵢ are coordinate projectors, so each block
  // [[θᵢ, Mᵢ], [Mᵢ, Yᵢ]] ⪰ 0 reduces to Mᵢ vanishing off range(Yᵢ) plus a
  // Schur block on range(Yᵢ) with identity corner. This keeps a strictly
  // feasible point, which the singular Yᵢ blocks would not.
  const EigenDecomposition ed = sym_eig(inst.Sigma);
  const Matrix P2 = ed.basis.leftCols(k);
  const Matrix P1 = ed.basis.rightCols(n - k);
  const Matrix Y2 = P2 * P2.transpose();
  const Matrix Y1 = eye(n) - Y2;
  const Matrix S = inst.Sigma.mat();

  ModelBuilder mb;
  const ExprMatrix X = mb.add_symmetric("X", n);
  const ExprMatrix Phi = mb.add_diagonal("Phi", n);
  const ExprMatrix beta = mb.add_symmetric("beta", n);
  const ExprMatrix theta1 = mb.add_symmetric("theta1", n - k);
  const ExprMatrix theta2 = mb.add_symmetric("theta2", k);
  // 0 ⪯ X ⪯ M·Y₂ confines X to range(Y₂), so the cones act on X = P₂ X₂ P₂ᵀ.
  const ExprMatrix X2 = mb.add_symmetric("X_reduced", k);
  mb.fix("Y1", Y1);
  mb.fix("Y2", Y2);

  auto sandwich = [](const Matrix& L, const ExprMatrix& E, const Matrix& R) {
    return (R.transpose() * (L.transpose() * E).transpose()).transpose();
  };
  auto zero = [&](const ExprMatrix& E) {
    for (int i = 0; i < E.rows(); ++i) {
      for (int j = 0; j < E.cols(); ++j) mb.add_zero(E(i, j));
    }
  };
  auto schur = [&](const ExprMatrix& theta, const ExprMatrix& R) {
    if (R.rows() > 0) mb.add_psd(block_expr(theta, R, ExprMatrix::constant(eye(R.rows()))));
  };
  const ExprMatrix M1 = ExprMatrix::constant(Y1 * S * Y1) - beta - Phi;
  const ExprMatrix M2 = ExprMatrix::constant(Y2 * S * Y2) + beta - X;
  zero(sandwich(P1, M1, P2));
  zero(sandwich(P2, M1, P2));
  zero(sandwich(P1, M2, P1));
  zero(sandwich(P2, M2, P1));
  schur(theta1, sandwich(P1, M1, P1));
  schur(theta2, sandwich(P2, M2, P2));
  zero(X - sandwich(P2.transpose(), X2, P2.transpose()));
  if (k > 0) {
    mb.add_psd(ExprMatrix::constant(inst.M * eye(k)) - X2);
    mb.add_psd(X2);
  }
  for (int i = 0; i < n; ++i) mb.add_nonneg(Phi(i, i));
  AffineExpr obj;
  if (n - k > 0) obj = obj + trace(theta1);
  if (k > 0) obj = obj + trace(theta2);
  mb.add_objective(obj);
  return mb.build();
}

SumTopKEpigraph build_sum_top_k_epigraph(int k, int n) {
  require(n >= 1, "sum-top-k epigraph: n must be >= 1");
  require(k >= 1 && k <= n, "sum-top-k epigraph: k outside [1, n]");
  return SumTopKEpigraph{k, n};
}

AffineExpr SumTopKEpigraph::attach(ModelBuilder& mb, const ExprMatrix& X,
                                   const std::string& prefix) const {
  require(X.rows() == n && X.cols() == n, "sum-top-k epigraph: X has the wrong shape");
  const AffineExpr t = mb.add_scalar(prefix + "_t");
  const AffineExpr s = mb.add_scalar(prefix + "_s");
  const ExprMatrix Z = mb.add_symmetric(prefix + "_Z", n);
  mb.add_nonneg(t - double(k) * s - trace(Z));
  ExprMatrix lhs = Z - X;
  for (int i = 0; i < n; ++i) lhs(i, i) += s;
  mb.add_psd(lhs);
  mb.add_psd(Z);
  return t;
}

BuiltModel build_sum_top_k_model(const SymMatrix& X, int k) {
  const SumTopKEpigraph epi = build_sum_top_k_epigraph(k, X.size());
  ModelBuilder mb;
  const AffineExpr t = epi.attach(mb, ExprMatrix::constant(X.mat()));
  mb.add_objective(t);
  return mb.build();
}

double rrr_objective(const RrrInstance& inst, const Matrix& beta) {
  inst.validate();
  const double m = static_cast<double>(inst.X.rows());
  return (inst.Y - inst.X * beta).squaredNorm() / (2 * m) +
         beta.squaredNorm() / (2 * inst.gamma) + inst.mu * numerical_rank(beta);
}

double completion_objective(const CompletionInstance& inst, const SymMatrix& X) {
  inst.validate();
  double v = 0;
  for (const Observation& o : inst.observed) v += std::pow(X(o.i, o.j) - o.value, 2);
  return v + X.mat().squaredNorm() / (2 * inst.gamma) + inst.mu * numerical_rank(X.mat());
}

double tensor_objective(const TensorInstance& inst, const Tensor3& t) {
  inst.validate();
  double v = 0;
  for (const TensorObservation& o : inst.observed) v += std::pow(t(o.i1, o.i2, o.i3) - o.value, 2);
  // every unfolding has the same Frobenius norm
  return v + 3 * inst.weight * t.data.squaredNorm();
}

double factor_objective(const SymMatrix& Sigma, const SymMatrix& X, const Vector& phi) {
  return (Sigma.mat() - Matrix(phi.asDiagonal()) - X.mat()).squaredNorm();
}

}  // namespace lowrank
