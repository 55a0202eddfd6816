#include "lowrank/scalar_function.hpp"

#include <cmath>
#include <limits>

#include "lowrank/errors.hpp"

namespace lowrank {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ScalarFunctionSpec ScalarFunctionSpec::big_m(double M) {
  ScalarFunctionSpec s;
  s.kind = ScalarKind::BigM;
  s.M = M;
  s.validate();
  return s;
}

ScalarFunctionSpec ScalarFunctionSpec::ridge(double gamma) {
  ScalarFunctionSpec s;
  s.kind = ScalarKind::Ridge;
  s.gamma = gamma;
  s.validate();
  return s;
}

ScalarFunctionSpec ScalarFunctionSpec::ridge_big_m(double gamma, double M) {
  ScalarFunctionSpec s;
  s.kind = ScalarKind::RidgeBigM;
  s.gamma = gamma;
  s.M = M;
  s.validate();
  return s;
}

ScalarFunctionSpec ScalarFunctionSpec::power(double p) {
  ScalarFunctionSpec s;
  s.kind = ScalarKind::Power;
  s.p = p;
  s.validate();
  return s;
}

ScalarFunctionSpec ScalarFunctionSpec::log(double eps) {
  ScalarFunctionSpec s;
  s.kind = ScalarKind::Log;
  s.eps = eps;
  s.validate();
  return s;
}

ScalarFunctionSpec ScalarFunctionSpec::entropy() {
  ScalarFunctionSpec s;
  s.kind = ScalarKind::Entropy;
  return s;
}

ScalarFunctionSpec ScalarFunctionSpec::softplus() {
  ScalarFunctionSpec s;
  s.kind = ScalarKind::Softplus;
  return s;
}

ScalarFunctionSpec ScalarFunctionSpec::square() { return ScalarFunctionSpec{}; }

ScalarFunctionSpec ScalarFunctionSpec::neg_power(double alpha) {
  ScalarFunctionSpec s;
  s.kind = ScalarKind::NegPower;
  s.alpha = alpha;
  s.validate();
  return s;
}

ScalarFunctionSpec ScalarFunctionSpec::eps_log(double eps) {
  ScalarFunctionSpec s;
  s.kind = ScalarKind::EpsLog;
  s.eps = eps;
  s.validate();
  return s;
}

void ScalarFunctionSpec::validate() const {
  switch (kind) {
    case ScalarKind::BigM:
      if (!(M > 0)) throw InvalidInput("big-M function needs M > 0");
      break;
    case ScalarKind::Ridge:
      if (!(gamma > 0)) throw InvalidInput("ridge function needs gamma > 0");
      break;
    case ScalarKind::RidgeBigM:
      if (!(gamma > 0) || !(M > 0)) throw InvalidInput("ridge+big-M needs gamma > 0, M > 0");
      break;
    case ScalarKind::Power:
      if (!(p >= 1)) throw InvalidInput("power function needs p >= 1");
      break;
    case ScalarKind::Log:
    case ScalarKind::EpsLog:
      if (!(eps > 0)) throw InvalidInput("logarithm needs eps > 0");
      break;
    case ScalarKind::NegPower:
      if (!(alpha > 0 && alpha < 1)) throw InvalidInput("negative power needs alpha in (0,1)");
      break;
    case ScalarKind::Entropy:
    case ScalarKind::Softplus:
    case ScalarKind::Square:
      break;
  }
}

bool ScalarFunctionSpec::in_domain(double x) const {
  if (!std::isfinite(x)) return false;
  switch (kind) {
    case ScalarKind::BigM:
    case ScalarKind::RidgeBigM:
      return std::abs(x) <= M;
    case ScalarKind::Log:
      return x + eps > 0;
    case ScalarKind::Entropy:
    case ScalarKind::NegPower:
      return x >= 0;
    case ScalarKind::EpsLog:
      return x > 0;
    default:
      return true;
  }
}

double ScalarFunctionSpec::value(double x) const {
  if (!in_domain(x)) return kInf;
  switch (kind) {
    case ScalarKind::BigM:
      return 0.0;
    case ScalarKind::Ridge:
    case ScalarKind::RidgeBigM:
      return x * x / (2 * gamma);
    case ScalarKind::Power:
      return std::pow(std::abs(x), p);
    case ScalarKind::Log:
      return -std::log(x + eps);
    case ScalarKind::Entropy:
      return x > 0 ? x * std::log(x) : 0.0;
    case ScalarKind::Softplus:
      // log(1 + eˣ) without overflow
      return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    case ScalarKind::Square:
      return x * x;
    case ScalarKind::NegPower:
      return -std::pow(x, alpha);
    case ScalarKind::EpsLog:
      return std::log(x);
  }
  return kInf;
}

double ScalarFunctionSpec::at_zero() const {
  if (kind == ScalarKind::EpsLog) return std::log(eps);
  return value(0.0);
}

double ScalarFunctionSpec::subgradient(double x) const {
  if (!in_domain(x)) throw DomainError(name() + ": subgradient requested outside the domain");
  switch (kind) {
    case ScalarKind::BigM:
      // ∂ = {0} inside, [0, ∞) or (-∞, 0] on the boundary; 0 is always a member.
      return 0.0;
    case ScalarKind::Ridge:
    case ScalarKind::RidgeBigM:
      return x / gamma;
    case ScalarKind::Power:
      if (x == 0) return 0.0;  // midpoint of [-1, 1] when p = 1
      return p * std::pow(std::abs(x), p - 1) * (x > 0 ? 1.0 : -1.0);
    case ScalarKind::Log:
      return -1.0 / (x + eps);
    case ScalarKind::Entropy:
      if (x <= 0) throw DomainError("entropy has no subgradient at 0");
      return std::log(x) + 1.0;
    case ScalarKind::Softplus:
      return 1.0 / (1.0 + std::exp(-x));
    case ScalarKind::Square:
      return 2 * x;
    case ScalarKind::NegPower:
      if (x <= 0) throw DomainError("negative power has no supergradient at 0");
      return -alpha * std::pow(x, alpha - 1);
    case ScalarKind::EpsLog:
      return 1.0 / x;
  }
  return 0.0;
}

bool ScalarFunctionSpec::concave() const {
  return kind == ScalarKind::NegPower || kind == ScalarKind::EpsLog;
}

std::string ScalarFunctionSpec::name() const {
  switch (kind) {
    case ScalarKind::BigM: return "big-m";
    case ScalarKind::Ridge: return "ridge";
    case ScalarKind::RidgeBigM: return "ridge-big-m";
    case ScalarKind::Power: return "power";
    case ScalarKind::Log: return "log";
    case ScalarKind::Entropy: return "entropy";
    case ScalarKind::Softplus: return "softplus";
    case ScalarKind::Square: return "square";
    case ScalarKind::NegPower: return "neg-power";
    case ScalarKind::EpsLog: return "eps-log";
  }
  return "unknown";
}

ScalarFunctionSpec scalar_function_from_name(const std::string& name) {
  for (ScalarKind k : {ScalarKind::BigM, ScalarKind::Ridge, ScalarKind::RidgeBigM,
                       ScalarKind::Power, ScalarKind::Log, ScalarKind::Entropy,
                       ScalarKind::Softplus, ScalarKind::Square, ScalarKind::NegPower,
                       ScalarKind::EpsLog}) {
    ScalarFunctionSpec s;
    s.kind = k;
    if (s.name() == name) return s;
  }
  throw InvalidInput("unknown scalar function '" + name + "'");
}

}  // namespace lowrank
