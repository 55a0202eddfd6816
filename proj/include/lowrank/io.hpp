#pragma once

// JSON persistence for instances, solutions and the hull/cut commands.
// Matrices are arrays of rows; every document carries "schema_version": 1.

#include <string>

#include <json.hpp>

#include "lowrank/model_builder.hpp"
#include "lowrank/scalar_function.hpp"

namespace lowrank {

inline constexpr int kSchemaVersion = 1;

nlohmann::json matrix_to_json(const Matrix& m);
/// Throws InvalidInput on ragged rows or non-numeric entries.
Matrix matrix_from_json(const nlohmann::json& j);

/// Model names accepted by `lowrank solve`.
const std::vector<std::string>& model_names();

/// Builds the named model from an instance document. Instance fields:
///   rrr-persp, rrr-dcl, rrr-nn: X, Y, gamma, mu
///   completion: n, observed [[i, j, value], ...], gamma, mu
///   tensor: dims [n1, n2, n3], observed [[i1, i2, i3, value], ...], k [k1, k2, k3], weight
///   nmf-dnn: A, k
///   svd: A, k
///   factor-q2: Sigma, k, M
/// Throws InvalidInput on a malformed document or unknown model.
BuiltModel build_model_from_json(const std::string& model, const nlohmann::json& inst);

/// A function given as a name or as {"name": ..., "gamma"|"M"|"p"|"alpha"|"eps": ...}.
ScalarFunctionSpec scalar_function_from_json(const nlohmann::json& j);

/// Membership query for set T, S, Q or scalar. Point fields:
///   T: X, Y, t, function, mu, k
///   S: X, Y, theta, l, u, k
///   Q: rho, blocks [{X, Y, theta, q, l, u, k}, ...]
///   scalar: x, y, z, t, d, q, M
/// Returns {schema_version, set, member, margin, witness}.
nlohmann::json hull_check_json(const std::string& set, const nlohmann::json& point);

/// Cut at {"xbar": number | matrix, "c": number (scalar only)} for the named
/// function; extra keys gamma/M/p/alpha/eps set its parameters.
nlohmann::json cut_demo_json(const std::string& function, const nlohmann::json& at);

}  // namespace lowrank
