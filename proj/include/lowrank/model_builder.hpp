#pragma once

// Small modeling layer over ConicProblem: named variable blocks, affine
// expressions and cone constraints on them.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lowrank/conic.hpp"

namespace lowrank {

/// constant + Σ coef·x[index]. Duplicate indices are summed on assembly.
struct AffineExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  AffineExpr() = default;
  AffineExpr(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)
  static AffineExpr var(int index, double coef = 1.0);

  AffineExpr& operator+=(const AffineExpr& o);
  AffineExpr& operator-=(const AffineExpr& o);
  AffineExpr& operator*=(double a);
  double eval(const Vector& x) const;
};

AffineExpr operator+(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a);
AffineExpr operator*(double s, AffineExpr a);

/// Dense matrix of affine expressions.
class ExprMatrix {
 public:
  ExprMatrix() = default;
  ExprMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  static ExprMatrix constant(const Matrix& m);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  AffineExpr& operator()(int i, int j) { return data_[i + j * rows_]; }
  const AffineExpr& operator()(int i, int j) const { return data_[i + j * rows_]; }

  ExprMatrix transpose() const;
  ExprMatrix operator+(const ExprMatrix& o) const;
  ExprMatrix operator-(const ExprMatrix& o) const;
  ExprMatrix operator*(double s) const;
  Matrix eval(const Vector& x) const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<AffineExpr> data_;
};

/// C·E for a constant matrix C.
ExprMatrix operator*(const Matrix& c, const ExprMatrix& e);
/// [[a, b], [bᵀ, c]].
ExprMatrix block_expr(const ExprMatrix& a, const ExprMatrix& b, const ExprMatrix& c);
AffineExpr trace(const ExprMatrix& e);
/// Σᵢⱼ Cᵢⱼ Eᵢⱼ.
AffineExpr inner(const Matrix& c, const ExprMatrix& e);

enum class VarShape { Scalar, Vector, Matrix, Symmetric, Diagonal };

/// A named range of the variable vector. Matrix blocks are column-major;
/// symmetric blocks store the lower triangle column by column (unscaled);
/// diagonal blocks store the diagonal.
struct VarBlock {
  std::string name;
  VarShape shape = VarShape::Scalar;
  int start = 0;
  int rows = 1;
  int cols = 1;
  int length() const;
};

struct BuiltModel {
  ConicProblem problem;
  std::vector<VarBlock> varmap;
  /// Matrices fixed by the builder (not optimized) but reported with solutions.
  std::map<std::string, Matrix> fixed;

  const VarBlock& var(const std::string& name) const;
  bool has_var(const std::string& name) const;
  /// Reassembles a named block from a primal vector.
  Matrix matrix(const Vector& x, const std::string& name) const;
  SymMatrix sym(const Vector& x, const std::string& name) const;
  double scalar(const Vector& x, const std::string& name) const;
  /// ‖(b − Ax) − Π_K(b − Ax)‖∞.
  double max_violation(const Vector& x) const;
  /// Named matrices of a solution plus status fields.
  nlohmann::json solution_json(const Solution& sol) const;
};

class ModelBuilder {
 public:
  AffineExpr add_scalar(const std::string& name);
  ExprMatrix add_vector(const std::string& name, int n);
  ExprMatrix add_matrix(const std::string& name, int rows, int cols);
  ExprMatrix add_symmetric(const std::string& name, int n);
  ExprMatrix add_diagonal(const std::string& name, int n);

  void add_objective(const AffineExpr& e);

  void add_zero(const AffineExpr& e);
  void add_nonneg(const AffineExpr& e);
  void add_soc(const std::vector<AffineExpr>& e);
  /// (u, v, w): 2uv ≥ ‖w‖², u, v ≥ 0.
  void add_rsoc(const std::vector<AffineExpr>& e);
  /// Symmetric part of e is PSD.
  void add_psd(const ExprMatrix& e);
  /// Same cone membership, emitted as Diag(d)·e·Diag(d) with d > 0 to balance
  /// entry magnitudes for the solver.
  void add_psd(const ExprMatrix& e, const Vector& d);

  void fix(const std::string& name, const Matrix& m) { fixed_[name] = m; }
  int num_vars() const { return nvars_; }

  BuiltModel build() const;

 private:
  int reserve(const std::string& name, VarShape shape, int rows, int cols);
  void add_row(const AffineExpr& e);

  int nvars_ = 0;
  std::vector<VarBlock> blocks_;
  std::map<int, double> obj_;
  double obj_const_ = 0.0;
  ConeSpec cones_;
  std::vector<Triplet> triplets_;
  std::vector<double> rhs_;
  std::map<std::string, Matrix> fixed_;
};

}  // namespace lowrank
