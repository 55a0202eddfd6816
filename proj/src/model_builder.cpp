#include "lowrank/model_builder.hpp"

#include <cmath>

#include "lowrank/io.hpp"

namespace lowrank {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;

int tri_index(int i, int j, int n) {
  if (i < j) std::swap(i, j);
  // column j starts after columns 0..j-1 of lengths n, n-1, ...
  return j * n - j * (j - 1) / 2 + (i - j);
}
}  // namespace

AffineExpr AffineExpr::var(int index, double coef) {
  AffineExpr e;
  e.terms.emplace_back(index, coef);
  return e;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  constant += o.constant;
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& o) {
  for (const auto& [j, c] : o.terms) terms.emplace_back(j, -c);
  constant -= o.constant;
  return *this;
}

AffineExpr& AffineExpr::operator*=(double a) {
  for (auto& t : terms) t.second *= a;
  constant *= a;
  return *this;
}

double AffineExpr::eval(const Vector& x) const {
  double v = constant;
  for (const auto& [j, c] : terms) v += c * x(j);
  return v;
}

AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
AffineExpr operator-(AffineExpr a) { return a *= -1.0; }
AffineExpr operator*(double s, AffineExpr a) { return a *= s; }

ExprMatrix ExprMatrix::constant(const Matrix& m) {
  ExprMatrix e(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int j = 0; j < e.cols(); ++j) {
    for (int i = 0; i < e.rows(); ++i) e(i, j) = AffineExpr(m(i, j));
  }
  return e;
}

ExprMatrix ExprMatrix::transpose() const {
  ExprMatrix t(cols_, rows_);
  for (int j = 0; j < cols_; ++j) {
    for (int i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
  }
  return t;
}

ExprMatrix ExprMatrix::operator+(const ExprMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw InvalidInput("ExprMatrix +: shape mismatch");
  ExprMatrix r = *this;
  for (size_t k = 0; k < data_.size(); ++k) r.data_[k] += o.data_[k];
  return r;
}

ExprMatrix ExprMatrix::operator-(const ExprMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw InvalidInput("ExprMatrix -: shape mismatch");
  ExprMatrix r = *this;
  for (size_t k = 0; k < data_.size(); ++k) r.data_[k] -= o.data_[k];
  return r;
}

ExprMatrix ExprMatrix::operator*(double s) const {
  ExprMatrix r = *this;
  for (auto& e : r.data_) e *= s;
  return r;
}

Matrix ExprMatrix::eval(const Vector& x) const {
  Matrix m(rows_, cols_);
  for (int j = 0; j < cols_; ++j) {
    for (int i = 0; i < rows_; ++i) m(i, j) = (*this)(i, j).eval(x);
  }
  return m;
}

ExprMatrix operator*(const Matrix& c, const ExprMatrix& e) {
  if (c.cols() != e.rows()) throw InvalidInput("Matrix * ExprMatrix: shape mismatch");
  ExprMatrix r(static_cast<int>(c.rows()), e.cols());
  for (int j = 0; j < e.cols(); ++j) {
    for (int i = 0; i < r.rows(); ++i) {
      AffineExpr& out = r(i, j);
      for (int l = 0; l < e.rows(); ++l) {
        const double a = c(i, l);
        if (a == 0) continue;
        const AffineExpr& src = e(l, j);
        for (const auto& [idx, coef] : src.terms) out.terms.emplace_back(idx, a * coef);
        out.constant += a * src.constant;
      }
    }
  }
  return r;
}

ExprMatrix block_expr(const ExprMatrix& a, const ExprMatrix& b, const ExprMatrix& c) {
  if (a.rows() != a.cols() || c.rows() != c.cols() || b.rows() != a.rows() ||
      b.cols() != c.rows()) {
    throw InvalidInput("block_expr: shape mismatch");
  }
  const int n = a.rows(), m = c.rows();
  ExprMatrix r(n + m, n + m);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) r(i, j) = a(i, j);
  }
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      r(i, n + j) = b(i, j);
      r(n + j, i) = b(i, j);
    }
    for (int i = 0; i < m; ++i) r(n + i, n + j) = c(i, j);
  }
  return r;
}

AffineExpr trace(const ExprMatrix& e) {
  AffineExpr t;
  for (int i = 0; i < std::min(e.rows(), e.cols()); ++i) t += e(i, i);
  return t;
}

AffineExpr inner(const Matrix& c, const ExprMatrix& e) {
  if (c.rows() != e.rows() || c.cols() != e.cols()) throw InvalidInput("inner: shape mismatch");
  AffineExpr t;
  for (int j = 0; j < e.cols(); ++j) {
    for (int i = 0; i < e.rows(); ++i) {
      if (c(i, j) != 0) t += c(i, j) * e(i, j);
    }
  }
  return t;
}

int VarBlock::length() const {
  switch (shape) {
    case VarShape::Scalar: return 1;
    case VarShape::Vector: return rows;
    case VarShape::Matrix: return rows * cols;
    case VarShape::Symmetric: return rows * (rows + 1) / 2;
    case VarShape::Diagonal: return rows;
  }
  return 0;
}

const VarBlock& BuiltModel::var(const std::string& name) const {
  for (const VarBlock& b : varmap) {
    if (b.name == name) return b;
  }
  throw InvalidInput("model has no variable '" + name + "'");
}

bool BuiltModel::has_var(const std::string& name) const {
  for (const VarBlock& b : varmap) {
    if (b.name == name) return true;
  }
  return false;
}

Matrix BuiltModel::matrix(const Vector& x, const std::string& name) const {
  if (x.size() != problem.c.size()) throw InvalidInput("primal vector has wrong length");
  const VarBlock& b = var(name);
  Matrix m = Matrix::Zero(b.rows, b.cols);
  switch (b.shape) {
    case VarShape::Scalar:
    case VarShape::Vector:
      for (int i = 0; i < b.rows; ++i) m(i, 0) = x(b.start + i);
      break;
    case VarShape::Matrix:
      for (int j = 0; j < b.cols; ++j) {
        for (int i = 0; i < b.rows; ++i) m(i, j) = x(b.start + i + j * b.rows);
      }
      break;
    case VarShape::Symmetric:
      for (int j = 0; j < b.rows; ++j) {
        for (int i = j; i < b.rows; ++i) m(i, j) = m(j, i) = x(b.start + tri_index(i, j, b.rows));
      }
      break;
    case VarShape::Diagonal:
      for (int i = 0; i < b.rows; ++i) m(i, i) = x(b.start + i);
      break;
  }
  return m;
}

SymMatrix BuiltModel::sym(const Vector& x, const std::string& name) const {
  return SymMatrix(matrix(x, name));
}

double BuiltModel::scalar(const Vector& x, const std::string& name) const {
  return matrix(x, name)(0, 0);
}

double BuiltModel::max_violation(const Vector& x) const {
  const Vector slack = problem.b - problem.A * x;
  const Vector d = slack - project_cone(slack, problem.cones);
  return d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
}

nlohmann::json BuiltModel::solution_json(const Solution& sol) const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["status"] = status_name(sol.status);
  j["objective"] = sol.objective;
  j["primal_res"] = sol.primal_res;
  j["dual_res"] = sol.dual_res;
  j["gap"] = sol.gap;
  j["iterations"] = sol.iterations;
  nlohmann::json vars;
  for (const VarBlock& b : varmap) vars[b.name] = matrix_to_json(matrix(sol.x, b.name));
  for (const auto& [name, m] : fixed) vars[name] = matrix_to_json(m);
  j["variables"] = vars;
  return j;
}

int ModelBuilder::reserve(const std::string& name, VarShape shape, int rows, int cols) {
  if (rows < 0 || cols < 0) throw InvalidInput("variable '" + name + "' has negative size");
  for (const VarBlock& b : blocks_) {
    if (b.name == name) throw InvalidInput("duplicate variable name '" + name + "'");
  }
  VarBlock b{name, shape, nvars_, rows, cols};
  nvars_ += b.length();
  blocks_.push_back(b);
  return b.start;
}

AffineExpr ModelBuilder::add_scalar(const std::string& name) {
  return AffineExpr::var(reserve(name, VarShape::Scalar, 1, 1));
}

ExprMatrix ModelBuilder::add_vector(const std::string& name, int n) {
  const int s = reserve(name, VarShape::Vector, n, 1);
  ExprMatrix e(n, 1);
  for (int i = 0; i < n; ++i) e(i, 0) = AffineExpr::var(s + i);
  return e;
}

ExprMatrix ModelBuilder::add_matrix(const std::string& name, int rows, int cols) {
  const int s = reserve(name, VarShape::Matrix, rows, cols);
  ExprMatrix e(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) e(i, j) = AffineExpr::var(s + i + j * rows);
  }
  return e;
}

ExprMatrix ModelBuilder::add_symmetric(const std::string& name, int n) {
  const int s = reserve(name, VarShape::Symmetric, n, n);
  ExprMatrix e(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) e(i, j) = AffineExpr::var(s + tri_index(i, j, n));
  }
  return e;
}

ExprMatrix ModelBuilder::add_diagonal(const std::string& name, int n) {
  const int s = reserve(name, VarShape::Diagonal, n, n);
  ExprMatrix e(n, n);
  for (int i = 0; i < n; ++i) e(i, i) = AffineExpr::var(s + i);
  return e;
}

void ModelBuilder::add_objective(const AffineExpr& e) {
  for (const auto& [j, c] : e.terms) obj_[j] += c;
  obj_const_ += e.constant;
}

void ModelBuilder::add_row(const AffineExpr& e) {
  // e(x) = constant + a·x must lie in the cone; as b − Ax: A = −a, b = constant.
  const int r = static_cast<int>(rhs_.size());
  for (const auto& [j, c] : e.terms) {
    if (j < 0 || j >= nvars_) throw InvalidInput("expression references an unknown variable");
    triplets_.emplace_back(r, j, -c);
  }
  rhs_.push_back(e.constant);
}

void ModelBuilder::add_zero(const AffineExpr& e) {
  cones_.add(ConeType::Zero, 1);
  add_row(e);
}

void ModelBuilder::add_nonneg(const AffineExpr& e) {
  cones_.add(ConeType::NonNeg, 1);
  add_row(e);
}

void ModelBuilder::add_soc(const std::vector<AffineExpr>& e) {
  cones_.add(ConeType::SecondOrder, static_cast<int>(e.size()));
  for (const AffineExpr& x : e) add_row(x);
}

void ModelBuilder::add_rsoc(const std::vector<AffineExpr>& e) {
  cones_.add(ConeType::RotatedSecondOrder, static_cast<int>(e.size()));
  for (const AffineExpr& x : e) add_row(x);
}

void ModelBuilder::add_psd(const ExprMatrix& e) {
  add_psd(e, Vector::Ones(e.rows()));
}

void ModelBuilder::add_psd(const ExprMatrix& e, const Vector& d) {
  if (e.rows() != e.cols()) throw InvalidInput("add_psd: matrix is not square");
  const int n = e.rows();
  if (d.size() != n || !(d.minCoeff() > 0)) throw InvalidInput("add_psd: bad congruence scaling");
  cones_.add(ConeType::PSD, n);
  for (int j = 0; j < n; ++j) {
    add_row((d(j) * d(j)) * e(j, j));
    for (int i = j + 1; i < n; ++i) add_row((d(i) * d(j) * kSqrt2 / 2) * (e(i, j) + e(j, i)));
  }
}

BuiltModel ModelBuilder::build() const {
  BuiltModel m;
  ConicProblem& p = m.problem;
  p.c = Vector::Zero(nvars_);
  for (const auto& [j, c] : obj_) p.c(j) = c;
  p.obj_const = obj_const_;
  p.b = Eigen::Map<const Vector>(rhs_.data(), static_cast<Eigen::Index>(rhs_.size()));
  p.A.resize(static_cast<Eigen::Index>(rhs_.size()), nvars_);
  p.A.setFromTriplets(triplets_.begin(), triplets_.end());
  p.A.prune(0.0);
  p.cones = cones_;
  p.validate();
  m.varmap = blocks_;
  m.fixed = fixed_;
  return m;
}

}  // namespace lowrank
