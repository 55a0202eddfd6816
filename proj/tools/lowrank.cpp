// lowrank: solve relaxations, run experiments, query hulls and print cuts.
// Exit codes: 0 success, 2 invalid input (including unreadable or unwritable
// files), 3 solver did not reach optimality.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "lowrank/experiments.hpp"
#include "lowrank/io.hpp"

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitSolver = 3;

using nlohmann::json;
using namespace lowrank;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
  }
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw IOError("cannot open '" + out + "' for writing");
  f << j.dump(2) << "\n";
}

// "1..20" or "1,2,5".
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> seeds;
  try {
    const auto dots = s.find("..");
    if (dots != std::string::npos) {
      const std::uint64_t lo = std::stoull(s.substr(0, dots)), hi = std::stoull(s.substr(dots + 2));
      if (lo > hi) throw InvalidInput("seed range is empty");
      for (std::uint64_t v = lo; v <= hi; ++v) seeds.push_back(v);
    } else {
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ',')) seeds.push_back(std::stoull(tok));
    }
  } catch (const std::logic_error&) {
    throw InvalidInput("cannot parse seeds '" + s + "'");
  }
  return seeds;
}

int run_solve(const std::string& path, const std::string& model, double tol, int max_iter,
              const std::string& out) {
  const BuiltModel bm = build_model_from_json(model, read_json(path));
  SolverSettings st;
  st.tol = tol;
  st.max_iter = max_iter;
  const Solution sol = solve(bm.problem, st);
  json j = bm.solution_json(sol);
  j["model"] = model;
  emit(j, out);
  return sol.status == SolveStatus::Optimal ? 0 : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix perspective relaxations for low-rank optimization"};
  app.require_subcommand(1);

  std::string instance, model, out;
  double tol = 1e-6;
  int max_iter = 50000;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a conic relaxation of an instance");
  solve_cmd->add_option("instance", instance, "Instance JSON")->required();
  solve_cmd->add_option("--model", model, "Relaxation to build")
      ->required()
      ->check(CLI::IsMember(model_names()));
  solve_cmd->add_option("--tol", tol, "Solver tolerance")->capture_default_str();
  solve_cmd->add_option("--max-iter", max_iter, "Iteration limit")->capture_default_str();
  solve_cmd->add_option("--out", out, "Solution JSON (default: stdout)");

  std::string kind, config, results, format = "csv", seeds;
  int jobs = 0;
  auto* exp_cmd = app.add_subcommand("experiment", "Run an experiment and write a result table");
  exp_cmd->add_option("kind", kind, "rrr, nmf, dopt, svd, hull or cuts")
      ->required()
      ->check(CLI::IsMember({"rrr", "nmf", "dopt", "svd", "hull", "cuts"}));
  exp_cmd->add_option("--config", config, "Config JSON (default: built-in defaults)");
  exp_cmd->add_option("--out", results, "Result file")->required();
  exp_cmd->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  exp_cmd->add_option("--seeds", seeds, "Seed range a..b or list a,b,c; overrides the config");
  exp_cmd->add_option("--jobs", jobs, "Worker threads; overrides the config");

  std::string set, point;
  auto* hull_cmd = app.add_subcommand("hull-check", "Test membership in a convex hull");
  hull_cmd->add_option("--set", set, "T, S, Q or scalar")
      ->required()
      ->check(CLI::IsMember({"T", "S", "Q", "scalar"}));
  hull_cmd->add_option("--point", point, "Point JSON")->required();

  std::string function, at;
  auto* cut_cmd = app.add_subcommand("cut-demo", "Print the perspective cut at a point");
  cut_cmd->add_option("--function", function, "Scalar function name, e.g. square")->required();
  cut_cmd->add_option("--at", at, "JSON with xbar (number or matrix)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*solve_cmd) return run_solve(instance, model, tol, max_iter, out);
    if (*exp_cmd) {
      const ExperimentKind k = experiment_from_name(kind);
      ExperimentConfig cfg = config_from_json(config.empty() ? json::object() : read_json(config), k);
      if (!seeds.empty()) cfg.seeds = parse_seeds(seeds);
      if (jobs > 0) cfg.jobs = jobs;
      cfg.validate();
      write_rows(run_experiment(cfg), results, format);
      return 0;
    }
    if (*hull_cmd) {
      emit(hull_check_json(set, read_json(point)), "");
      return 0;
    }
    if (*cut_cmd) {
      emit(cut_demo_json(function, read_json(at)), "");
      return 0;
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const IOError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON field: " << e.what() << "\n";
    return kExitInvalid;
  }
  return 0;
}
