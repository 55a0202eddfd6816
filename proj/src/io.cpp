#include "lowrank/io.hpp"

#include <cmath>

#include "lowrank/hulls_cuts.hpp"
#include "lowrank/models.hpp"

namespace lowrank {

namespace {

using nlohmann::json;

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw InvalidInput(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, key) : fallback;
}

Matrix matrix_field(const json& j, const char* key) {
  try {
    return matrix_from_json(field(j, key));
  } catch (const InvalidInput& e) {
    throw InvalidInput(std::string("field '") + key + "': " + e.what());
  }
}

SymMatrix sym_field(const json& j, const char* key) {
  const Matrix m = matrix_field(j, key);
  if (m.rows() != m.cols()) throw InvalidInput(std::string("field '") + key + "' must be square");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1 + m.cwiseAbs().maxCoeff())) {
    throw InvalidInput(std::string("field '") + key + "' must be symmetric");
  }
  return SymMatrix(m);
}

void check_schema(const json& j) {
  if (!j.is_object()) throw InvalidInput("expected a JSON object");
  if (j.contains("schema_version") && j["schema_version"] != kSchemaVersion) {
    throw InvalidInput("unsupported schema_version");
  }
}

json result_json(const std::string& set, const HullQueryResult& r) {
  return {{"schema_version", kSchemaVersion},
          {"set", set},
          {"member", r.member},
          {"margin", std::isfinite(r.margin) ? json(r.margin) : json(nullptr)},
          {"witness", r.witness}};
}

}  // namespace

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[j] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw InvalidInput("matrix must be an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidInput("matrix rows must be arrays of equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw InvalidInput("matrix entries must be numbers");
      m(i, c) = row[c].get<double>();
    }
  }
  return m;
}

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {"rrr-persp", "rrr-dcl", "rrr-nn", "completion",
                                                 "tensor",    "nmf-dnn", "svd",    "factor-q2"};
  return names;
}

BuiltModel build_model_from_json(const std::string& model, const json& inst) {
  check_schema(inst);
  if (model == "rrr-persp" || model == "rrr-dcl" || model == "rrr-nn") {
    RrrInstance r;
    r.X = matrix_field(inst, "X");
    r.Y = matrix_field(inst, "Y");
    r.gamma = get<double>(inst, "gamma");
    r.mu = get_or<double>(inst, "mu", 0.0);
    if (model == "rrr-persp") return build_rrr_persp(r);
    if (model == "rrr-dcl") return build_rrr_dcl(r);
    return build_rrr_nn(r);
  }
  if (model == "completion") {
    CompletionInstance c;
    c.n = get<int>(inst, "n");
    c.gamma = get<double>(inst, "gamma");
    c.mu = get_or<double>(inst, "mu", 0.0);
    for (const json& o : field(inst, "observed")) {
      if (!o.is_array() || o.size() != 3) throw InvalidInput("observations are [i, j, value]");
      c.observed.push_back({o[0].get<int>(), o[1].get<int>(), o[2].get<double>()});
    }
    return build_matrix_completion(c);
  }
  if (model == "tensor") {
    TensorInstance t;
    t.dims = get<std::array<int, 3>>(inst, "dims");
    t.k = get<std::array<int, 3>>(inst, "k");
    t.weight = get_or<double>(inst, "weight", 1.0);
    for (const json& o : field(inst, "observed")) {
      if (!o.is_array() || o.size() != 4) throw InvalidInput("observations are [i1, i2, i3, value]");
      t.observed.push_back({o[0].get<int>(), o[1].get<int>(), o[2].get<int>(), o[3].get<double>()});
    }
    return build_tensor_completion(t);
  }
  if (model == "nmf-dnn") {
    NmfInstance n;
    n.A = sym_field(inst, "A");
    n.k = get<int>(inst, "k");
    return build_nmf_dnn(n);
  }
  if (model == "svd") return build_rank_k_svd(matrix_field(inst, "A"), get<int>(inst, "k"));
  if (model == "factor-q2") {
    FactorInstance f;
    f.Sigma = sym_field(inst, "Sigma");
    f.k = get<int>(inst, "k");
    f.M = get<double>(inst, "M");
    return build_factor_analysis_q2(f);
  }
  throw InvalidInput("unknown model '" + model + "'");
}

ScalarFunctionSpec scalar_function_from_json(const json& j) {
  ScalarFunctionSpec f;
  if (j.is_string()) {
    f = scalar_function_from_name(j.get<std::string>());
  } else {
    f = scalar_function_from_name(get<std::string>(j, "name"));
    f.gamma = get_or<double>(j, "gamma", f.gamma);
    f.M = get_or<double>(j, "M", f.M);
    f.p = get_or<double>(j, "p", f.p);
    f.alpha = get_or<double>(j, "alpha", f.alpha);
    f.eps = get_or<double>(j, "eps", f.eps);
  }
  f.validate();
  return f;
}

json hull_check_json(const std::string& set, const json& point) {
  check_schema(point);
  const double tol = get_or<double>(point, "tol", 1e-7);
  if (set == "T") {
    return result_json(set, hull_membership_T(sym_field(point, "X"), sym_field(point, "Y"),
                                              get<double>(point, "t"),
                                              scalar_function_from_json(field(point, "function")),
                                              get<double>(point, "mu"), get<double>(point, "k"), tol));
  }
  if (set == "S") {
    return result_json(set, hull_membership_S(sym_field(point, "Y"), sym_field(point, "X"),
                                              sym_field(point, "theta"), get<double>(point, "l"),
                                              get<double>(point, "u"), get<double>(point, "k"), tol));
  }
  if (set == "Q") {
    std::vector<HullBlock> blocks;
    for (const json& b : field(point, "blocks")) {
      blocks.push_back({sym_field(b, "X"), sym_field(b, "Y"), sym_field(b, "theta"),
                        get<double>(b, "q"), get<double>(b, "l"), get<double>(b, "u"),
                        get<double>(b, "k")});
    }
    return result_json(set, hull_membership_Q(get<double>(point, "rho"), blocks, tol));
  }
  if (set == "scalar") {
    return result_json(
        set, scalar_closure_membership(get<double>(point, "x"), get<double>(point, "y"),
                                       get<double>(point, "z"), get<double>(point, "t"),
                                       get<double>(point, "d"), get<double>(point, "q"),
                                       get<double>(point, "M"), tol));
  }
  throw InvalidInput("unknown set '" + set + "' (expected T, S, Q or scalar)");
}

json cut_demo_json(const std::string& function, const json& at) {
  check_schema(at);
  json spec = at;
  spec["name"] = function;
  const ScalarFunctionSpec f = scalar_function_from_json(spec);
  const json& xbar = field(at, "xbar");
  json out = {{"schema_version", kSchemaVersion}, {"function", f.name()}};
  if (xbar.is_number()) {
    const PerspectiveCut cut = perspective_cut(f, xbar.get<double>(), get_or<double>(at, "c", 0.0));
    // ρ ≥ a·z + b·x
    out["kind"] = "perspective";
    out["a"] = cut.a;
    out["b"] = cut.b;
    return out;
  }
  const Matrix m = matrix_field(at, "xbar");
  const AffineMatrixCut cut = matrix_perspective_cut(f, sym_field(at, "xbar"));
  // θ ⪰ constant + sym(coeff_X·X + coeff_Y·Y)
  out["kind"] = "matrix_perspective";
  out["constant"] = matrix_to_json(cut.constant.mat());
  out["coeff_X"] = matrix_to_json(cut.coeff_X);
  out["coeff_Y"] = matrix_to_json(cut.coeff_Y);
  out["n"] = m.rows();
  return out;
}

}  // namespace lowrank
