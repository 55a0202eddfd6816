#include "lowrank/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>

namespace lowrank {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

std::string cone_type_name(ConeType t) {
  switch (t) {
    case ConeType::Zero: return "zero";
    case ConeType::NonNeg: return "nonneg";
    case ConeType::SecondOrder: return "soc";
    case ConeType::RotatedSecondOrder: return "rsoc";
    case ConeType::PSD: return "psd";
  }
  return "?";
}

ConeType cone_type_from_name(const std::string& s) {
  for (ConeType t : {ConeType::Zero, ConeType::NonNeg, ConeType::SecondOrder,
                     ConeType::RotatedSecondOrder, ConeType::PSD}) {
    if (cone_type_name(t) == s) return t;
  }
  throw InvalidInput("unknown cone type '" + s + "'");
}

void project_soc(Eigen::Ref<Vector> v) {
  const double t = v(0);
  const double nx = v.tail(v.size() - 1).norm();
  if (nx <= t) return;
  if (nx <= -t) {
    v.setZero();
    return;
  }
  const double a = 0.5 * (t + nx);
  v.tail(v.size() - 1) *= a / nx;
  v(0) = a;
}

void project_rsoc(Eigen::Ref<Vector> v) {
  // (u, v, w) ↦ ((u+v)/√2, (u−v)/√2, w) maps the rotated cone onto the SOC
  // and is its own inverse.
  const double u = v(0), w = v(1);
  v(0) = (u + w) / kSqrt2;
  v(1) = (u - w) / kSqrt2;
  project_soc(v);
  const double a = v(0), c = v(1);
  v(0) = (a + c) / kSqrt2;
  v(1) = (a - c) / kSqrt2;
}

void project_psd(Eigen::Ref<Vector> v) {
  const EigenDecomposition ed = sym_eig(smat(v));
  if (ed.values.minCoeff() >= 0) return;
  const Vector clamped = ed.values.cwiseMax(0.0);
  v = svec(SymMatrix(ed.basis * clamped.asDiagonal() * ed.basis.transpose()));
}

Vector project_impl(const Vector& v, const ConeSpec& cones, bool dual) {
  if (v.size() != cones.dim()) {
    throw InvalidInput("project_cone: vector length " + std::to_string(v.size()) +
                       " != cone dimension " + std::to_string(cones.dim()));
  }
  Vector out = v;
  int r = 0;
  for (const ConeBlock& blk : cones.blocks) {
    const int len = blk.length();
    auto seg = out.segment(r, len);
    switch (blk.type) {
      case ConeType::Zero:
        if (!dual) seg.setZero();
        break;
      case ConeType::NonNeg:
        seg = seg.cwiseMax(0.0);
        break;
      case ConeType::SecondOrder:
        project_soc(seg);
        break;
      case ConeType::RotatedSecondOrder:
        project_rsoc(seg);
        break;
      case ConeType::PSD:
        project_psd(seg);
        break;
    }
    r += len;
  }
  return out;
}

struct Residuals {
  double primal = 0, dual = 0, gap = 0, pobj = 0;
  double primal_abs = 0, dual_abs = 0;
  double primal_scale = 1, dual_scale = 1;
};

Residuals residuals(const ConicProblem& p, const Vector& x, const Vector& s, const Vector& y) {
  Residuals r;
  const Vector ax = p.A * x;
  const Vector aty = p.A.transpose() * y;
  r.primal_abs = inf_norm(ax + s - p.b);
  r.dual_abs = inf_norm(p.c + aty);
  r.primal_scale = 1 + std::max({inf_norm(ax), inf_norm(s), inf_norm(p.b)});
  r.dual_scale = 1 + std::max(inf_norm(aty), inf_norm(p.c));
  r.primal = r.primal_abs / r.primal_scale;
  r.dual = r.dual_abs / r.dual_scale;
  r.pobj = p.c.dot(x);
  r.gap = r.pobj + p.b.dot(y);
  return r;
}

// Ruiz equilibration. Rows of SOC/RSOC/PSD blocks share one scale factor so
// that the scaled cone equals the original.
struct Scaling {
  Vector D, E;
  double cost = 1.0;
};

Scaling equilibrate(const SparseMatrix& A, const Vector& c, const ConeSpec& cones, int iters) {
  const Eigen::Index m = A.rows(), n = A.cols();
  Scaling sc{Vector::Ones(m), Vector::Ones(n), 1.0};
  SparseMatrix As = A;
  auto clamp_norm = [](double v) { return v < 1e-8 ? 1.0 : std::clamp(v, 1e-4, 1e4); };
  for (int it = 0; it < iters; ++it) {
    Vector row = Vector::Zero(m), col = Vector::Zero(n);
    for (int k = 0; k < As.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator e(As, k); e; ++e) {
        const double a = std::abs(e.value());
        row(e.row()) = std::max(row(e.row()), a);
        col(e.col()) = std::max(col(e.col()), a);
      }
    }
    int r = 0;
    for (const ConeBlock& blk : cones.blocks) {
      const int len = blk.length();
      if (blk.type != ConeType::Zero && blk.type != ConeType::NonNeg) {
        row.segment(r, len).setConstant(row.segment(r, len).maxCoeff());
      }
      r += len;
    }
    Vector dr(m), dc(n);
    for (Eigen::Index i = 0; i < m; ++i) dr(i) = 1.0 / std::sqrt(clamp_norm(row(i)));
    for (Eigen::Index j = 0; j < n; ++j) dc(j) = 1.0 / std::sqrt(clamp_norm(col(j)));
    As = dr.asDiagonal() * As * dc.asDiagonal();
    sc.D = sc.D.cwiseProduct(dr);
    sc.E = sc.E.cwiseProduct(dc);
  }
  const double cn = inf_norm(sc.E.cwiseProduct(c));
  sc.cost = 1.0 / clamp_norm(cn);
  return sc;
}

}  // namespace

int ConeSpec::dim() const {
  int d = 0;
  for (const ConeBlock& b : blocks) d += b.length();
  return d;
}

void ConeSpec::validate() const {
  for (const ConeBlock& b : blocks) {
    if (b.size < 1) throw InvalidInput("cone block sizes must be >= 1");
    if (b.type == ConeType::RotatedSecondOrder && b.size < 2) {
      throw InvalidInput("rotated second-order cone needs dimension >= 2");
    }
  }
}

int ConeSpec::add(ConeType type, int size) {
  const int start = dim();
  blocks.push_back({type, size});
  return start;
}

void ConicProblem::validate() const {
  cones.validate();
  if (A.rows() != b.size() || A.cols() != c.size()) {
    throw InvalidInput("conic problem: A is " + std::to_string(A.rows()) + "x" +
                       std::to_string(A.cols()) + " but len(b)=" + std::to_string(b.size()) +
                       ", len(c)=" + std::to_string(c.size()));
  }
  if (cones.dim() != b.size()) {
    throw InvalidInput("conic problem: cone dimension " + std::to_string(cones.dim()) +
                       " != len(b) " + std::to_string(b.size()));
  }
  if (!c.allFinite() || !b.allFinite() || !std::isfinite(obj_const)) {
    throw InvalidInput("conic problem: non-finite data");
  }
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator e(A, k); e; ++e) {
      if (!std::isfinite(e.value())) throw InvalidInput("conic problem: non-finite A entry");
    }
  }
}

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "?";
}

int svec_side(Eigen::Index len) {
  const int n = static_cast<int>(std::lround((std::sqrt(8.0 * len + 1) - 1) / 2));
  return n * (n + 1) / 2 == len ? n : -1;
}

Vector svec(const SymMatrix& x) {
  const int n = x.size();
  Vector v(n * (n + 1) / 2);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    v(k++) = x(j, j);
    for (int i = j + 1; i < n; ++i) v(k++) = kSqrt2 * x(i, j);
  }
  return v;
}

SymMatrix smat(const Vector& v) {
  const int n = svec_side(v.size());
  if (n < 0) throw InvalidInput("smat: length " + std::to_string(v.size()) + " is not triangular");
  Matrix m(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    m(j, j) = v(k++);
    for (int i = j + 1; i < n; ++i) {
      m(i, j) = m(j, i) = v(k++) / kSqrt2;
    }
  }
  return SymMatrix(m);
}

Vector project_cone(const Vector& v, const ConeSpec& cones) {
  return project_impl(v, cones, false);
}

Vector project_dual_cone(const Vector& v, const ConeSpec& cones) {
  return project_impl(v, cones, true);
}

namespace {

// Factorization of σI + AᵀRA; sparse LDLᵀ unless the matrix is fairly dense.
class ReducedSystem {
 public:
  void factor(const SparseMatrix& A, const SparseMatrix& At, const Vector& R, double sigma) {
    SparseMatrix K = At * R.asDiagonal() * A;
    const double n = static_cast<double>(K.rows());
    dense_ = K.nonZeros() > 0.25 * n * n;
    if (dense_) {
      Matrix Kd = Matrix(K);
      Kd.diagonal().array() += sigma;
      llt_.compute(Kd);
    } else {
      SparseMatrix I(K.rows(), K.cols());
      I.setIdentity();
      K += sigma * I;
      if (!analyzed_) {
        ldlt_.analyzePattern(K);
        analyzed_ = true;
      }
      ldlt_.factorize(K);
    }
  }
  Vector solve(const Vector& rhs) const { return dense_ ? Vector(llt_.solve(rhs)) : Vector(ldlt_.solve(rhs)); }

 private:
  bool dense_ = false, analyzed_ = false;
  Eigen::LLT<Matrix> llt_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

// Type-II Anderson acceleration with a fixed memory.
class Anderson {
 public:
  explicit Anderson(int mem) : mem_(mem) {}
  void reset() {
    dg_.clear();
    df_.clear();
    has_prev_ = false;
  }
  // Given z and f = T(z), returns the extrapolated next iterate.
  Vector step(const Vector& z, const Vector& f) {
    const Vector g = f - z;
    if (has_prev_) {
      dg_.push_back(g - g_prev_);
      df_.push_back(f - f_prev_);
      if (static_cast<int>(dg_.size()) > mem_) {
        dg_.erase(dg_.begin());
        df_.erase(df_.begin());
      }
    }
    g_prev_ = g;
    f_prev_ = f;
    has_prev_ = true;
    const int k = static_cast<int>(dg_.size());
    if (k == 0) return f;
    Matrix G(g.size(), k), F(g.size(), k);
    for (int i = 0; i < k; ++i) {
      G.col(i) = dg_[i];
      F.col(i) = df_[i];
    }
    Matrix H = G.transpose() * G;
    H.diagonal().array() += 1e-10 * (1 + H.trace());
    const Vector gamma = H.ldlt().solve(G.transpose() * g);
    if (!gamma.allFinite()) {
      reset();
      return f;
    }
    return f - F * gamma;
  }

 private:
  int mem_;
  bool has_prev_ = false;
  Vector g_prev_, f_prev_;
  std::vector<Vector> dg_, df_;
};

}  // namespace

void SolverSettings::validate() const {
  if (!(tol > 0) || !(rho > 0) || !(sigma > 0) || !(cert_tol > 0)) {
    throw InvalidInput("solver settings: tol, rho, sigma and cert_tol must be positive");
  }
  if (!(alpha > 0 && alpha < 2)) throw InvalidInput("solver settings: alpha must lie in (0, 2)");
  if (max_iter < 1 || check_every < 1 || scaling_iters < 0 || adapt_every < 0 || anderson_mem < 0) {
    throw InvalidInput("solver settings: invalid iteration counts");
  }
}

Solution solve(const ConicProblem& p, const SolverSettings& st, const Solution* warm) {
  p.validate();
  st.validate();
  const Eigen::Index n = p.c.size(), m = p.b.size();

  const Scaling sc = equilibrate(p.A, p.c, p.cones, st.scaling_iters);
  const SparseMatrix A = sc.D.asDiagonal() * p.A * sc.E.asDiagonal();
  const SparseMatrix At = A.transpose();
  const Vector b = sc.D.cwiseProduct(p.b);
  const Vector c = sc.cost * sc.E.cwiseProduct(p.c);

  // Equality rows get a much stiffer penalty.
  Vector rho_scale = Vector::Ones(m);
  {
    int r = 0;
    for (const ConeBlock& blk : p.cones.blocks) {
      if (blk.type == ConeType::Zero) rho_scale.segment(r, blk.length()).setConstant(1e3);
      r += blk.length();
    }
  }
  double rho = st.rho;
  Vector R = rho * rho_scale;
  ReducedSystem kkt;
  kkt.factor(A, At, R, st.sigma);

  // Iterate z = (x, s, u) with u = y/R so that all blocks share units.
  const Eigen::Index N = n + 2 * m;
  auto plain_step = [&](const Vector& z) {
    const auto x = z.head(n);
    const auto s = z.segment(n, m);
    const Vector y = R.cwiseProduct(z.tail(m));
    const Vector xt = kkt.solve(st.sigma * x - c + At * (R.cwiseProduct(b - s) + y));
    const Vector s_tilde = b - A * xt;
    const Vector s_rel = st.alpha * s_tilde + (1 - st.alpha) * s;
    const Vector s_new = project_cone(s_rel + z.tail(m), p.cones);
    Vector out(N);
    out.head(n) = st.alpha * xt + (1 - st.alpha) * x;
    out.segment(n, m) = s_new;
    out.tail(m) = z.tail(m) + s_rel - s_new;
    return out;
  };

  auto unscaled = [&](const Vector& z, Vector& xo, Vector& so, Vector& yo) {
    xo = sc.E.cwiseProduct(z.head(n));
    so = z.segment(n, m).cwiseQuotient(sc.D);
    yo = -sc.D.cwiseProduct(R.cwiseProduct(z.tail(m))) / sc.cost;
  };

  Anderson aa(st.anderson_mem);
  Vector z = Vector::Zero(N);
  if (warm) {
    if (warm->x.size() != n || warm->s.size() != m || warm->y.size() != m) {
      throw InvalidInput("solve: warm start has wrong dimensions");
    }
    z.head(n) = warm->x.cwiseQuotient(sc.E);
    z.segment(n, m) = sc.D.cwiseProduct(warm->s);
    z.tail(m) = -(sc.cost * warm->y.cwiseQuotient(sc.D)).cwiseQuotient(R);
  }
  Vector f_safe;           // plain step from the last accepted point
  double res_safe = -1.0;  // its fixed-point residual
  bool pending = false;    // z came from an extrapolation

  Solution sol;
  sol.status = SolveStatus::MaxIter;
  int it = 0;
  for (it = 1; it <= st.max_iter; ++it) {
    Vector f = plain_step(z);
    const double res = (f - z).norm();
    if (pending && res > res_safe) {
      // Extrapolation made things worse: fall back to the plain iterate.
      aa.reset();
      z = f_safe;
      f = plain_step(z);
    }
    pending = false;
    const Vector g = f - z;

    const bool check = it % st.check_every == 0 || it == st.max_iter;
    if (check) {
      unscaled(f, sol.x, sol.s, sol.y);
      const Residuals r = residuals(p, sol.x, sol.s, sol.y);
      sol.primal_res = r.primal;
      sol.dual_res = r.dual;
      sol.gap = r.gap;
      sol.iterations = it;
      if (st.verbose && it % (st.check_every * 50) == 0) {
        std::fprintf(stderr, "%6d  pres %.2e  dres %.2e  gap %.2e  obj %.8e  rho %.1e\n", it,
                     r.primal, r.dual, r.gap, r.pobj + p.obj_const, rho);
      }
      if (r.primal <= st.tol && r.dual <= st.tol &&
          std::abs(r.gap) <= st.tol * (1 + std::abs(r.pobj))) {
        sol.status = SolveStatus::Optimal;
        break;
      }

      // Certificates from successive differences.
      Vector dx, ds, dy;
      unscaled(g, dx, ds, dy);
      const double ny = inf_norm(dy);
      if (ny > 1e-12) {
        const double aty = inf_norm(p.A.transpose() * dy);
        const double bty = p.b.dot(dy);
        const double cone_gap = inf_norm(dy - project_dual_cone(dy, p.cones));
        if (aty <= st.cert_tol * ny && bty < -st.cert_tol * ny && cone_gap <= st.cert_tol * ny) {
          sol.status = SolveStatus::Infeasible;
          sol.y = dy / ny;
          break;
        }
      }
      const double nx = inf_norm(dx);
      if (nx > 1e-12) {
        const Vector adx = -(p.A * dx);
        const double cdx = p.c.dot(dx);
        const double cone_gap = inf_norm(adx - project_cone(adx, p.cones));
        if (cdx < -st.cert_tol * nx && cone_gap <= st.cert_tol * nx) {
          sol.status = SolveStatus::Unbounded;
          sol.x = dx / nx;
          break;
        }
      }
    }

    if (st.adapt_every > 0 && it % st.adapt_every == 0) {
      // Residual balancing in the scaled space.
      const Vector x = f.head(n), s = f.segment(n, m), y = R.cwiseProduct(f.tail(m));
      const Vector ax = A * x, aty = At * y;
      const double rp = inf_norm(ax + s - b) /
                        (1e-10 + std::max({inf_norm(ax), inf_norm(s), inf_norm(b)}));
      const double rd = inf_norm(c - aty) / (1e-10 + std::max(inf_norm(aty), inf_norm(c)));
      const double fac = std::sqrt(rp / std::max(rd, 1e-30));
      if (std::isfinite(fac) && (fac > 5 || fac < 0.2)) {
        const double new_rho = std::clamp(rho * fac, 1e-6, 1e6);
        if (new_rho != rho) {
          // y keeps its value; u = y/R is rescaled.
          f.tail(m) *= rho / new_rho;
          rho = new_rho;
          R = rho * rho_scale;
          kkt.factor(A, At, R, st.sigma);
          aa.reset();
          z = f;
          res_safe = -1.0;
          continue;
        }
      }
    }

    if (st.anderson_mem > 0) {
      f_safe = f;
      res_safe = g.norm();
      z = aa.step(z, f);
      pending = true;
    } else {
      z = f;
    }
  }
  if (it > st.max_iter) it = st.max_iter;
  sol.iterations = it;
  if (sol.status == SolveStatus::Optimal || sol.status == SolveStatus::MaxIter) {
    sol.objective = p.c.dot(sol.x) + p.obj_const;
  } else {
    sol.objective = sol.status == SolveStatus::Infeasible ? std::numeric_limits<double>::infinity()
                                                          : -std::numeric_limits<double>::infinity();
  }
  return sol;
}

nlohmann::json problem_to_json(const ConicProblem& p) {
  nlohmann::json j;
  j["c"] = std::vector<double>(p.c.data(), p.c.data() + p.c.size());
  j["b"] = std::vector<double>(p.b.data(), p.b.data() + p.b.size());
  std::vector<int> rows, cols;
  std::vector<double> vals;
  for (int k = 0; k < p.A.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator e(p.A, k); e; ++e) {
      rows.push_back(static_cast<int>(e.row()));
      cols.push_back(static_cast<int>(e.col()));
      vals.push_back(e.value());
    }
  }
  j["A"] = {{"rows", rows}, {"cols", cols}, {"vals", vals}};
  nlohmann::json cones = nlohmann::json::array();
  for (const ConeBlock& blk : p.cones.blocks) {
    nlohmann::json cj = {{"type", cone_type_name(blk.type)}};
    cj[blk.type == ConeType::PSD ? "n" : "dim"] = blk.size;
    cones.push_back(cj);
  }
  j["cones"] = cones;
  j["obj_const"] = p.obj_const;
  return j;
}

ConicProblem problem_from_json(const nlohmann::json& j) {
  ConicProblem p;
  try {
    const auto c = j.at("c").get<std::vector<double>>();
    const auto b = j.at("b").get<std::vector<double>>();
    p.c = Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
    p.b = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
    const auto& a = j.at("A");
    const auto rows = a.at("rows").get<std::vector<int>>();
    const auto cols = a.at("cols").get<std::vector<int>>();
    const auto vals = a.at("vals").get<std::vector<double>>();
    if (rows.size() != cols.size() || rows.size() != vals.size()) {
      throw InvalidInput("problem JSON: A triplet arrays differ in length");
    }
    std::vector<Triplet> trip;
    for (size_t k = 0; k < rows.size(); ++k) {
      if (rows[k] < 0 || rows[k] >= p.b.size() || cols[k] < 0 || cols[k] >= p.c.size()) {
        throw InvalidInput("problem JSON: A index out of range");
      }
      trip.emplace_back(rows[k], cols[k], vals[k]);
    }
    p.A.resize(p.b.size(), p.c.size());
    p.A.setFromTriplets(trip.begin(), trip.end());
    for (const auto& cj : j.at("cones")) {
      const ConeType t = cone_type_from_name(cj.at("type").get<std::string>());
      const int size = cj.contains("n") ? cj.at("n").get<int>() : cj.at("dim").get<int>();
      p.cones.blocks.push_back({t, size});
    }
    p.obj_const = j.value("obj_const", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("problem JSON: ") + e.what());
  }
  p.validate();
  return p;
}

}  // namespace lowrank
