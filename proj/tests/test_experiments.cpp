#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lowrank/experiments.hpp"
#include "lowrank/io.hpp"
#include "test_util.hpp"

using namespace lowrank;
using namespace lowrank::testing;

namespace {

ExperimentConfig small(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.seeds = {1, 2};
  switch (kind) {
    case ExperimentKind::Rrr:
      c.n = c.p = 4;
      c.m = 12;
      c.k_true = 2;
      c.m_test = 20;
      c.mu_grid = {0.01, 0.1};
      c.max_iter = 5000;
      break;
    case ExperimentKind::Nmf:
      c.n = 6;
      c.k_true = 2;
      c.ks = {2};
      c.tol = 1e-8;
      c.max_iter = 50000;
      break;
    case ExperimentKind::Dopt:
      c.n_dopt = 4;
      c.m_dopt = 6;
      c.ks_dopt = {1, 2, 4};
      c.brute_force = true;
      c.fw_iters = 100;
      break;
    case ExperimentKind::Svd:
      c.n_svd = 5;
      c.k_max = 3;
      c.tol = 1e-8;
      break;
    case ExperimentKind::Hull:
    case ExperimentKind::Cuts:
      c.samples = 20;
      break;
  }
  return c;
}

std::vector<ResultRow> without_time(std::vector<ResultRow> rows) {
  for (ResultRow& r : rows) r.wall_time_s = 0;
  return rows;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("experiment names round trip") {
  for (ExperimentKind k : {ExperimentKind::Rrr, ExperimentKind::Nmf, ExperimentKind::Dopt, ExperimentKind::Svd,
                           ExperimentKind::Hull, ExperimentKind::Cuts}) {
    CHECK(experiment_from_name(experiment_name(k)) == k);
  }
  CHECK_THROWS_AS(experiment_from_name("tsp"), InvalidInput);
}

TEST_CASE("default mu grid is log-spaced over [1e-4, 1e4]") {
  const std::vector<double> g = default_mu_grid();
  REQUIRE(g.size() == 20);
  CHECK(g.front() == doctest::Approx(1e-4));
  CHECK(g.back() == doctest::Approx(1e4));
  for (size_t i = 1; i + 1 < g.size(); ++i) {
    CHECK(std::log(g[i + 1] / g[i]) == doctest::Approx(std::log(g[i] / g[i - 1])));
  }
}

TEST_CASE("config validation") {
  ExperimentConfig c = small(ExperimentKind::Rrr);
  c.seeds.clear();
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  CHECK_THROWS_AS(run_experiment(c), InvalidInput);

  c = small(ExperimentKind::Rrr);
  c.mu_grid = {0.1, 0.0};
  CHECK_THROWS_AS(c.validate(), InvalidInput);

  CHECK_THROWS_AS(config_from_json({{"seeds", {1}}, {"sedes", 2}}, ExperimentKind::Svd), InvalidInput);
  CHECK_THROWS_AS(config_from_json({{"experiment", "nmf"}}, ExperimentKind::Svd), InvalidInput);
  CHECK_THROWS_AS(config_from_json({{"n", "five"}}, ExperimentKind::Svd), InvalidInput);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::array(), ExperimentKind::Svd), InvalidInput);
}

TEST_CASE("config JSON round trip") {
  ExperimentConfig c = small(ExperimentKind::Dopt);
  const ExperimentConfig back = config_from_json(config_to_json(c), ExperimentKind::Dopt);
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(config_to_json(c)["schema_version"] == kSchemaVersion);
}

TEST_CASE("experiments are deterministic apart from timing") {
  for (ExperimentKind k : {ExperimentKind::Rrr, ExperimentKind::Nmf, ExperimentKind::Dopt, ExperimentKind::Svd,
                           ExperimentKind::Hull, ExperimentKind::Cuts}) {
    ExperimentConfig c = small(k);
    if (k == ExperimentKind::Rrr) c.methods = {"dcl"};
    const auto a = without_time(run_experiment(c));
    c.jobs = 2;
    const auto b = without_time(run_experiment(c));
    CHECK(rows_to_csv(a) == rows_to_csv(b));
    CHECK_FALSE(a.empty());
  }
}

TEST_CASE("svd experiment matches the oracle") {
  const auto rows = run_experiment(small(ExperimentKind::Svd));
  REQUIRE(rows.size() == 2);
  for (const ResultRow& r : rows) {
    CHECK(r.status == "optimal");
    CHECK(r.rel_error <= 1e-4);
  }
}

TEST_CASE("dopt experiment gaps are nonnegative") {
  const auto rows = run_experiment(small(ExperimentKind::Dopt));
  int na = 0;
  for (const ResultRow& r : rows) {
    if (r.status == "not_applicable") {
      ++na;
      CHECK(r.method == "mprt");
      continue;
    }
    if (!std::isnan(r.gap)) CHECK(r.gap >= -1e-8);
  }
  CHECK(na == 2);
}

TEST_CASE("nmf rows pair the ALS objective with a doubled DNN bound") {
  const auto rows = run_experiment(small(ExperimentKind::Nmf));
  REQUIRE(rows.size() == 2);
  for (const ResultRow& r : rows) {
    CHECK(r.method == "als-dnn");
    CHECK(r.bound <= r.objective + 1e-6 * (1 + r.objective));
    CHECK(r.gap >= -1e-6);
  }
}

TEST_CASE("rrr rows cover the grid and a validation pick") {
  ExperimentConfig c = small(ExperimentKind::Rrr);
  c.seeds = {3};
  const auto rows = run_experiment(c);
  CHECK(rows.size() == 3 * (2 + 1));
  for (const ResultRow& r : rows) {
    CHECK(r.rank >= 0);
    CHECK(r.rel_error >= 0);
    CHECK(r.mse_ratio > 0);
  }
  CHECK(rows[2].method == "persp-cv");
  CHECK(rows[0].param < rows[1].param);
}

TEST_CASE("hull and cut suites report no failures") {
  for (ExperimentKind k : {ExperimentKind::Hull, ExperimentKind::Cuts}) {
    for (const ResultRow& r : run_experiment(small(k))) {
      CHECK(r.failures == 0);
      CHECK(r.samples > 0);
    }
  }
}

TEST_CASE("CSV and JSON writers") {
  ResultRow r;
  r.experiment = "svd";
  r.seed = 4;
  r.method = "sdp";
  r.objective = 1.5;
  r.bound = std::numeric_limits<double>::infinity();
  const std::string csv = rows_to_csv({r});
  std::string header;
  for (size_t i = 0; i < result_columns().size(); ++i) header += (i ? "," : "") + result_columns()[i];
  CHECK(csv.rfind(header + "\n", 0) == 0);
  CHECK(csv.find(",nan,") != std::string::npos);
  CHECK(csv.find(",inf,") != std::string::npos);

  const nlohmann::json j = rows_to_json({r});
  REQUIRE(j.is_array());
  CHECK(j[0]["schema_version"] == kSchemaVersion);
  CHECK(j[0]["bound"].is_null());
  CHECK(j[0]["objective"] == 1.5);

  const auto dir = std::filesystem::temp_directory_path() / "lowrank_writer_test";
  std::filesystem::create_directories(dir);
  write_rows({r}, (dir / "a.csv").string(), "csv");
  CHECK(slurp((dir / "a.csv").string()) == csv);
  write_rows({r}, (dir / "a.json").string(), "json");
  CHECK(nlohmann::json::parse(slurp((dir / "a.json").string())) == j);
  CHECK_THROWS_AS(write_rows({r}, (dir / "missing" / "a.csv").string(), "csv"), IOError);
  CHECK_THROWS_AS(write_rows({r}, (dir / "a.txt").string(), "xml"), InvalidInput);
  std::filesystem::remove_all(dir);
}

TEST_CASE("matrix JSON round trip and validation") {
  Rng rng(1);
  const Matrix m = rng.normal_matrix(3, 4);
  CHECK(matrix_from_json(matrix_to_json(m)) == m);
  CHECK_THROWS_AS(matrix_from_json(nlohmann::json::parse("[[1, 2], [3]]")), InvalidInput);
  CHECK_THROWS_AS(matrix_from_json(nlohmann::json::parse("[[1, \"x\"]]")), InvalidInput);
}

TEST_CASE("models build from instance documents") {
  const nlohmann::json svd = {{"schema_version", 1}, {"A", {{3, 0, 0}, {0, 2, 0}, {0, 0, 1}}}, {"k", 2}};
  const Solution s = solve(build_model_from_json("svd", svd).problem);
  CHECK(s.objective == doctest::Approx(0.5).epsilon(1e-4));

  for (const std::string& name : model_names()) CHECK_FALSE(name.empty());
  CHECK_THROWS_AS(build_model_from_json("lasso", svd), InvalidInput);
  CHECK_THROWS_AS(build_model_from_json("svd", {{"A", {{1}}}}), InvalidInput);
  nlohmann::json future = svd;
  future["schema_version"] = 99;
  CHECK_THROWS_AS(build_model_from_json("svd", future), InvalidInput);

  const nlohmann::json comp = {{"n", 2}, {"observed", {{0, 0, 1.0}, {1, 1, 2.0}}}, {"gamma", 10.0}, {"mu", 0.1}};
  CHECK(build_model_from_json("completion", comp).has_var("X"));
  const nlohmann::json ten = {{"dims", {2, 2, 2}}, {"observed", {{0, 0, 0, 1.0}}}, {"k", {1, 1, 1}}, {"weight", 0.1}};
  CHECK(build_model_from_json("tensor", ten).problem.c.size() > 0);
}

TEST_CASE("hull-check and cut-demo documents") {
  const nlohmann::json s = hull_check_json("scalar", {{"x", 0}, {"y", 1}, {"z", 0}, {"t", 0.49}, {"d", 0.3}, {"q", 2}, {"M", 1}});
  CHECK(s["member"] == true);
  CHECK(s["schema_version"] == kSchemaVersion);
  const nlohmann::json out =
      hull_check_json("S", {{"X", {{2.0}}}, {"Y", {{1.0}}}, {"theta", {{4.0}}}, {"l", 0}, {"u", 1}, {"k", 1}});
  CHECK(out["member"] == false);
  CHECK(out["witness"] == "upper_bound");
  const nlohmann::json nc = hull_check_json(
      "T", {{"X", {{1, 0}, {0, 0}}}, {"Y", {{0.5, 0.5}, {0.5, 0.5}}}, {"t", 9}, {"function", "square"}, {"mu", 0}, {"k", 2}});
  CHECK(nc["margin"].is_null());
  CHECK_THROWS_AS(hull_check_json("R", {}), InvalidInput);

  const nlohmann::json c = cut_demo_json("square", {{"xbar", 1.0}});
  CHECK(c["kind"] == "perspective");
  CHECK(c["a"] == doctest::Approx(-1));
  CHECK(c["b"] == doctest::Approx(2));
  const nlohmann::json mc = cut_demo_json("square", {{"xbar", {{1, 0}, {0, 0}}}});
  CHECK(mc["kind"] == "matrix_perspective");
  CHECK(matrix_from_json(mc["coeff_X"])(0, 0) == doctest::Approx(2));
  CHECK(scalar_function_from_json({{"name", "ridge"}, {"gamma", 0.5}}).gamma == 0.5);
  CHECK_THROWS_AS(scalar_function_from_json("cosine"), InvalidInput);
}
