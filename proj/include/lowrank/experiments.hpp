#pragma once

// Experiment drivers behind `lowrank experiment`. Every experiment produces
// rows of one fixed schema; only wall_time_s varies between identical runs.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "lowrank/conic.hpp"

namespace lowrank {

enum class ExperimentKind { Rrr, Nmf, Dopt, Svd, Hull, Cuts };
std::string experiment_name(ExperimentKind k);
/// Throws InvalidInput on an unknown name.
ExperimentKind experiment_from_name(const std::string& name);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Rrr;
  std::vector<std::uint64_t> seeds;

  // rrr
  int n = 20, p = 20, m = 40, k_true = 4;
  double sigma = 0.05;
  double gamma = 1e6;
  /// Empty selects 20 log-spaced values in [1e-4, 1e4].
  std::vector<double> mu_grid;
  std::vector<std::string> methods{"persp", "dcl", "nn"};
  int m_test = 200;

  // nmf: n, k_true above; ranks to fit (empty selects k_true − 2 .. k_true + 2).
  std::vector<int> ks;

  // dopt: dimension n_dopt, m_dopt candidates, budgets ks_dopt.
  int n_dopt = 10, m_dopt = 20;
  std::vector<int> ks_dopt;
  double eps = 1e-6;
  int fw_iters = 500;
  bool brute_force = false;

  // svd: instances have side n_svd and rank k drawn in 1..k_max.
  int n_svd = 15, k_max = 5;

  // hull / cuts: samples per property.
  int samples = 200;

  double tol = 1e-6;
  int max_iter = 10000;
  int jobs = 1;

  void validate() const;
};

/// Reads a config object. Unknown keys are rejected so typos do not silently
/// fall back to defaults.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentKind kind);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Numeric fields that do not apply to a row stay NaN (written as "nan").
struct ResultRow {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string method;
  std::string param_name;
  double param = kNaN;
  std::string status;
  double objective = kNaN;
  double bound = kNaN;
  double gap = kNaN;
  int rank = -1;
  /// Relative error against the reference (β_true for rrr, the SVD oracle for svd).
  double rel_error = kNaN;
  double mse_ratio = kNaN;
  int samples = 0;
  int failures = 0;
  double min_margin = kNaN;
  int iterations = 0;
  double wall_time_s = 0.0;
};

/// Column names in output order.
const std::vector<std::string>& result_columns();

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

/// CSV with a fixed header; undefined numeric fields are written as "nan".
std::string rows_to_csv(const std::vector<ResultRow>& rows);
nlohmann::json rows_to_json(const std::vector<ResultRow>& rows);
/// Writes rows to path in "csv" or "json" format. Throws IOError.
void write_rows(const std::vector<ResultRow>& rows, const std::string& path,
                const std::string& format);

/// The μ grid used when a config leaves it empty.
std::vector<double> default_mu_grid();

}  // namespace lowrank
