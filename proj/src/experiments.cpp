#include "lowrank/experiments.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "lowrank/algos.hpp"
#include "lowrank/generators.hpp"
#include "lowrank/hulls_cuts.hpp"
#include "lowrank/models.hpp"
#include "lowrank/random.hpp"

namespace lowrank {

namespace {

const std::vector<std::pair<ExperimentKind, std::string>> kNames = {
    {ExperimentKind::Rrr, "rrr"},   {ExperimentKind::Nmf, "nmf"},   {ExperimentKind::Dopt, "dopt"},
    {ExperimentKind::Svd, "svd"},   {ExperimentKind::Hull, "hull"}, {ExperimentKind::Cuts, "cuts"}};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double uniform(Rng& rng, double a, double b) { return a + (b - a) * rng.uniform(); }

Matrix random_orthogonal(Rng& rng, int n) {
  const Eigen::HouseholderQR<Matrix> qr(rng.normal_matrix(n, n));
  return qr.householderQ() * Matrix::Identity(n, n);
}

SymMatrix in_basis(const Matrix& U, const Vector& d) {
  return SymMatrix(U * d.asDiagonal() * U.transpose());
}

}  // namespace

std::string experiment_name(ExperimentKind k) {
  for (const auto& [kind, name] : kNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

ExperimentKind experiment_from_name(const std::string& name) {
  for (const auto& [kind, n] : kNames) {
    if (n == name) return kind;
  }
  throw InvalidInput("unknown experiment '" + name + "'");
}

std::vector<double> default_mu_grid() {
  std::vector<double> g(20);
  for (int i = 0; i < 20; ++i) g[i] = std::pow(10.0, -4.0 + 8.0 * i / 19.0);
  return g;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw InvalidInput("config: seeds must be non-empty");
  for (double mu : mu_grid) {
    if (!(mu > 0)) throw InvalidInput("config: mu grid values must be positive");
  }
  if (!(tol > 0) || max_iter < 1 || jobs < 1) {
    throw InvalidInput("config: need tol > 0, max_iter >= 1, jobs >= 1");
  }
  switch (experiment) {
    case ExperimentKind::Rrr:
      if (n < 1 || p < 1 || m < 1 || k_true < 0 || k_true > std::min(n, p) || m_test < 1) {
        throw InvalidInput("config: invalid rrr sizes");
      }
      for (const std::string& meth : methods) {
        if (meth != "persp" && meth != "dcl" && meth != "nn") {
          throw InvalidInput("config: unknown rrr method '" + meth + "'");
        }
      }
      break;
    case ExperimentKind::Nmf:
      if (n < 1 || k_true < 1 || k_true > n) throw InvalidInput("config: invalid nmf sizes");
      for (int k : ks) {
        if (k < 1 || k > n) throw InvalidInput("config: nmf rank outside [1, n]");
      }
      break;
    case ExperimentKind::Dopt:
      if (n_dopt < 1 || m_dopt < 1 || !(eps > 0) || fw_iters < 0) {
        throw InvalidInput("config: invalid dopt sizes");
      }
      for (int k : ks_dopt) {
        if (k < 1 || k > m_dopt) throw InvalidInput("config: dopt budget outside [1, m]");
      }
      break;
    case ExperimentKind::Svd:
      if (n_svd < 1 || k_max < 1 || k_max > n_svd) throw InvalidInput("config: invalid svd sizes");
      break;
    case ExperimentKind::Hull:
    case ExperimentKind::Cuts:
      if (samples < 1) throw InvalidInput("config: samples must be >= 1");
      break;
  }
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentKind kind) {
  if (!j.is_object()) throw InvalidInput("config: expected a JSON object");
  ExperimentConfig c;
  c.experiment = kind;
  if (kind == ExperimentKind::Nmf) {
    c.k_true = 5;
    // The DNN bound is a difference of two O(‖A‖²) terms.
    c.tol = 1e-10;
    c.max_iter = 300000;
  }
  if (kind == ExperimentKind::Svd) c.max_iter = 50000;
  static const std::set<std::string> known = {
      "schema_version", "experiment", "seeds", "n",     "p",           "m",       "k_true",
      "sigma",          "gamma",      "mu_grid", "methods", "m_test",   "ks",      "n_dopt",
      "m_dopt",         "ks_dopt",    "eps",   "fw_iters", "brute_force", "n_svd", "k_max",
      "samples",        "tol",        "max_iter", "jobs"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw InvalidInput("config: unknown key '" + key + "'");
  }
  try {
    if (j.contains("experiment") && experiment_from_name(j["experiment"].get<std::string>()) != kind) {
      throw InvalidInput("config: experiment field does not match the command");
    }
    auto get = [&](const char* key, auto& out) {
      if (j.contains(key)) out = j[key].get<std::decay_t<decltype(out)>>();
    };
    get("seeds", c.seeds);
    get("n", c.n);
    get("p", c.p);
    get("m", c.m);
    get("k_true", c.k_true);
    get("sigma", c.sigma);
    get("gamma", c.gamma);
    get("mu_grid", c.mu_grid);
    get("methods", c.methods);
    get("m_test", c.m_test);
    get("ks", c.ks);
    get("n_dopt", c.n_dopt);
    get("m_dopt", c.m_dopt);
    get("ks_dopt", c.ks_dopt);
    get("eps", c.eps);
    get("fw_iters", c.fw_iters);
    get("brute_force", c.brute_force);
    get("n_svd", c.n_svd);
    get("k_max", c.k_max);
    get("samples", c.samples);
    get("tol", c.tol);
    get("max_iter", c.max_iter);
    get("jobs", c.jobs);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  return {{"schema_version", 1}, {"experiment", experiment_name(c.experiment)},
          {"seeds", c.seeds},    {"n", c.n},
          {"p", c.p},            {"m", c.m},
          {"k_true", c.k_true},  {"sigma", c.sigma},
          {"gamma", c.gamma},    {"mu_grid", c.mu_grid},
          {"methods", c.methods}, {"m_test", c.m_test},
          {"ks", c.ks},          {"n_dopt", c.n_dopt},
          {"m_dopt", c.m_dopt},  {"ks_dopt", c.ks_dopt},
          {"eps", c.eps},        {"fw_iters", c.fw_iters},
          {"brute_force", c.brute_force}, {"n_svd", c.n_svd},
          {"k_max", c.k_max},    {"samples", c.samples},
          {"tol", c.tol},        {"max_iter", c.max_iter},
          {"jobs", c.jobs}};
}

// ---------------------------------------------------------------- rrr

namespace {

using Task = std::function<std::vector<ResultRow>()>;

BuiltModel build_rrr(const std::string& method, const RrrInstance& inst) {
  if (method == "persp") return build_rrr_persp(inst);
  if (method == "dcl") return build_rrr_dcl(inst);
  return build_rrr_nn(inst);
}

double mse(const RrrInstance& data, const Matrix& beta) {
  return (data.Y - data.X * beta).squaredNorm() / static_cast<double>(data.Y.size());
}

std::vector<ResultRow> rrr_task(const ExperimentConfig& cfg, std::uint64_t seed,
                                const std::string& method) {
  const RrrSample train = gen_rrr(cfg.n, cfg.p, cfg.m, cfg.k_true, cfg.sigma, seed, cfg.gamma);
  const RrrSample val =
      gen_rrr_observations(train.beta_true, cfg.m, cfg.sigma, derive_seed(seed, 1), cfg.gamma);
  const RrrSample test =
      gen_rrr_observations(train.beta_true, cfg.m_test, cfg.sigma, derive_seed(seed, 2), cfg.gamma);
  const double test_floor = mse(test.inst, train.beta_true);

  std::vector<double> grid = cfg.mu_grid.empty() ? default_mu_grid() : cfg.mu_grid;
  // Large μ first: those solves are quick and warm-start the harder ones.
  std::sort(grid.begin(), grid.end(), std::greater<>());

  SolverSettings st;
  st.tol = cfg.tol;
  st.max_iter = cfg.max_iter;
  std::vector<ResultRow> rows;
  Solution prev;
  bool have_prev = false;
  double best_val = std::numeric_limits<double>::infinity();
  ResultRow best;
  for (double mu : grid) {
    Timer timer;
    RrrInstance inst = train.inst;
    inst.mu = mu;
    const BuiltModel bm = build_rrr(method, inst);
    const Solution sol = solve(bm.problem, st, have_prev ? &prev : nullptr);
    prev = sol;
    have_prev = true;
    const Matrix beta = bm.matrix(sol.x, "beta");

    ResultRow r;
    r.experiment = "rrr";
    r.seed = seed;
    r.method = method;
    r.param_name = "mu";
    r.param = mu;
    r.status = status_name(sol.status);
    r.objective = sol.objective;
    r.rank = numerical_rank(beta);
    r.rel_error = (beta - train.beta_true).norm() / train.beta_true.norm();
    r.mse_ratio = mse(test.inst, beta) / test_floor;
    r.iterations = sol.iterations;
    r.wall_time_s = timer.seconds();
    rows.push_back(r);

    const double v = mse(val.inst, beta);
    if (v < best_val) {
      best_val = v;
      best = r;
    }
  }
  std::reverse(rows.begin(), rows.end());
  best.method = method + "-cv";
  rows.push_back(best);
  return rows;
}

// ---------------------------------------------------------------- nmf

std::vector<ResultRow> nmf_task(const ExperimentConfig& cfg, std::uint64_t seed, int k) {
  Timer timer;
  NmfInstance inst = gen_nmf(cfg.n, cfg.k_true, seed);
  inst.k = k;
  const AlsResult als = als_nmf(inst, derive_seed(seed, 3));
  SolverSettings st;
  st.tol = cfg.tol;
  st.max_iter = cfg.max_iter;
  const Solution sol = solve(build_nmf_dnn(inst).problem, st);
  // The relaxation bounds ½‖UUᵀ − A‖², the ALS objective without the ½.
  const double lb = 2 * sol.objective;

  ResultRow r;
  r.experiment = "nmf";
  r.seed = seed;
  r.method = "als-dnn";
  r.param_name = "k";
  r.param = k;
  r.status = status_name(sol.status);
  r.objective = als.ub;
  r.bound = lb;
  r.gap = duality_gap(als.ub, lb).value;
  r.rank = numerical_rank(als.U);
  r.iterations = sol.iterations;
  r.wall_time_s = timer.seconds();
  return {r};
}

// ---------------------------------------------------------------- dopt

std::vector<ResultRow> dopt_task(const ExperimentConfig& cfg, std::uint64_t seed, int k) {
  const DoptInstance inst = gen_dopt(cfg.n_dopt, cfg.m_dopt, seed, k, cfg.eps);
  auto row = [&](const std::string& method) {
    ResultRow r;
    r.experiment = "dopt";
    r.seed = seed;
    r.method = method;
    r.param_name = "k";
    r.param = k;
    r.status = "ok";
    return r;
  };
  std::vector<ResultRow> rows;

  Timer tg;
  const GreedyResult greedy = submodular_greedy_dopt(inst);
  ResultRow rg = row("greedy");
  rg.objective = greedy.value;
  rg.wall_time_s = tg.seconds();
  rows.push_back(rg);

  Timer tb;
  const CertifiedBound boolean = dopt_boolean_relaxation(inst, cfg.fw_iters);
  ResultRow rb = row("boolean");
  rb.objective = boolean.value_at_iterate;
  rb.bound = boolean.certified_bound;
  rb.gap = duality_gap(boolean.certified_bound, greedy.value).value;
  rb.iterations = boolean.iterations;
  rb.wall_time_s = tb.seconds();
  rows.push_back(rb);

  ResultRow rm = row("mprt");
  if (k < cfg.n_dopt) {
    Timer tm;
    const CertifiedBound mprt = dopt_mprt_relaxation(inst, cfg.fw_iters);
    rm.objective = mprt.value_at_iterate;
    rm.bound = mprt.certified_bound;
    rm.gap = duality_gap(mprt.certified_bound, greedy.value).value;
    rm.iterations = mprt.iterations;
    rm.wall_time_s = tm.seconds();
  } else {
    rm.status = "not_applicable";
  }
  rows.push_back(rm);

  if (cfg.brute_force) {
    Timer te;
    const GreedyResult exact = dopt_brute_force(inst);
    ResultRow re = row("exact");
    re.objective = exact.value;
    re.gap = duality_gap(exact.value, greedy.value).value;
    re.wall_time_s = te.seconds();
    rows.push_back(re);
  }
  return rows;
}

// ---------------------------------------------------------------- svd

std::vector<ResultRow> svd_task(const ExperimentConfig& cfg, std::uint64_t seed) {
  Timer timer;
  Rng rng(seed);
  const int k = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(cfg.k_max));
  const Matrix A = rng.normal_matrix(cfg.n_svd, cfg.n_svd);
  SolverSettings st;
  st.tol = cfg.tol;
  st.max_iter = cfg.max_iter;
  const Solution sol = solve(build_rank_k_svd(A, k).problem, st);
  const double oracle = 0.5 * (A - truncated_svd(A, k)).squaredNorm();

  ResultRow r;
  r.experiment = "svd";
  r.seed = seed;
  r.method = "conic";
  r.param_name = "k";
  r.param = k;
  r.status = status_name(sol.status);
  r.objective = sol.objective;
  r.bound = oracle;
  r.rel_error = std::abs(sol.objective - oracle) / std::max(std::abs(oracle), 1e-12);
  r.iterations = sol.iterations;
  r.wall_time_s = timer.seconds();
  return {r};
}

// ---------------------------------------------------------------- hull and cut suites

struct Suite {
  int samples = 0;
  int failures = 0;
  double min_margin = std::numeric_limits<double>::infinity();

  void record(bool ok, double margin) {
    ++samples;
    if (!ok) ++failures;
    min_margin = std::min(min_margin, margin);
  }
};

ResultRow suite_row(const std::string& experiment, std::uint64_t seed, const std::string& name,
                    const Suite& s, double seconds) {
  ResultRow r;
  r.experiment = experiment;
  r.seed = seed;
  r.method = name;
  r.status = s.failures == 0 ? "pass" : "fail";
  r.samples = s.samples;
  r.failures = s.failures;
  r.min_margin = s.min_margin;
  r.wall_time_s = seconds;
  return r;
}

const std::vector<ScalarFunctionSpec>& hull_functions() {
  static const std::vector<ScalarFunctionSpec> fs = {
      ScalarFunctionSpec::square(), ScalarFunctionSpec::ridge(0.5), ScalarFunctionSpec::power(1.5),
      ScalarFunctionSpec::softplus(), ScalarFunctionSpec::entropy()};
  return fs;
}

// A lifted point of T: rank-r X on the support of a projector Y and t equal
// to the exact value. Eigenvalues are drawn in (0.1, 3).
struct TPoint {
  SymMatrix X, Y;
  double t;
};

TPoint lift_T(Rng& rng, const Matrix& U, const ScalarFunctionSpec& f, double mu, int k) {
  const int n = static_cast<int>(U.rows());
  const int r = static_cast<int>(rng.next() % static_cast<std::uint64_t>(k + 1));
  Vector lx = Vector::Zero(n), ly = Vector::Zero(n);
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  // Random support via a partial Fisher-Yates shuffle.
  for (int i = 0; i < r; ++i) {
    const int j = i + static_cast<int>(rng.next() % static_cast<std::uint64_t>(n - i));
    std::swap(idx[i], idx[j]);
  }
  double t = mu * r + (n - r) * f.at_zero();
  for (int i = 0; i < r; ++i) {
    const double lam = uniform(rng, 0.1, 3.0);
    lx(idx[i]) = lam;
    ly(idx[i]) = 1.0;
    t += f.value(lam);
  }
  return {in_basis(U, lx), in_basis(U, ly), t};
}

struct SPoint {
  SymMatrix Y, X, theta;
};

SPoint lift_S(Rng& rng, int n, double l, double u, int k) {
  const Matrix U = random_orthogonal(rng, n);
  const int r = static_cast<int>(rng.next() % static_cast<std::uint64_t>(k + 1));
  Vector ly = Vector::Zero(n), lx = Vector::Zero(n);
  for (int i = 0; i < r; ++i) {
    ly(i) = 1.0;
    lx(i) = uniform(rng, l, u);
  }
  const SymMatrix X = in_basis(U, lx);
  return {in_basis(U, ly), X, SymMatrix(X.mat() * X.mat())};
}

std::vector<ResultRow> hull_task(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  const double tol = 1e-7;
  const int n = 4;
  std::vector<ResultRow> rows;
  const auto& fs = hull_functions();
  auto pick_f = [&]() -> const ScalarFunctionSpec& { return fs[rng.next() % fs.size()]; };

  {
    Timer tm;
    Suite lift, conv, boundary;
    for (int s = 0; s < cfg.samples; ++s) {
      const ScalarFunctionSpec& f = pick_f();
      const double mu = uniform(rng, 0.0, 2.0);
      const int k = 1 + static_cast<int>(rng.next() % n);
      const Matrix U = random_orthogonal(rng, n);
      const TPoint a = lift_T(rng, U, f, mu, k), b = lift_T(rng, U, f, mu, k);
      const HullQueryResult ra = hull_membership_T(a.X, a.Y, a.t, f, mu, k, tol);
      lift.record(ra.member, ra.margin);
      const double al = rng.uniform();
      const HullQueryResult rc =
          hull_membership_T(al * a.X + (1 - al) * b.X, al * a.Y + (1 - al) * b.Y,
                            al * a.t + (1 - al) * b.t, f, mu, k, tol);
      conv.record(rc.member, rc.margin);
      const HullQueryResult rb = hull_membership_T(a.X, a.Y, a.t - 0.1, f, mu, k, tol);
      boundary.record(!rb.member, rb.margin);
    }
    const double secs = tm.seconds();
    rows.push_back(suite_row("hull", seed, "T-lift", lift, secs));
    rows.push_back(suite_row("hull", seed, "T-convex", conv, secs));
    rows.push_back(suite_row("hull", seed, "T-boundary", boundary, secs));
  }
  {
    Timer tm;
    Suite lift, conv, boundary, qlift, qconv, qboundary;
    for (int s = 0; s < cfg.samples; ++s) {
      const double l = uniform(rng, -1.0, 0.5), u = l + uniform(rng, 0.1, 3.0);
      const int k = 1 + static_cast<int>(rng.next() % n);
      const SPoint a = lift_S(rng, n, l, u, k), b = lift_S(rng, n, l, u, k);
      const HullQueryResult ra = hull_membership_S(a.Y, a.X, a.theta, l, u, k, tol);
      lift.record(ra.member, ra.margin);
      const double al = rng.uniform();
      const HullQueryResult rc =
          hull_membership_S(al * a.Y + (1 - al) * b.Y, al * a.X + (1 - al) * b.X,
                            al * a.theta + (1 - al) * b.theta, l, u, k, tol);
      conv.record(rc.member, rc.margin);
      // θ lowered by 0.1 on a nonzero range breaks the Schur complement.
      const SPoint c = a.Y.trace() > 0.5 ? a : lift_S(rng, n, l, u, n);
      if (c.Y.trace() > 0.5) {
        const HullQueryResult rb = hull_membership_S(c.Y, c.X, c.theta - 0.1 * c.Y, l, u, k, tol);
        boundary.record(!rb.member, rb.margin);
      }

      std::vector<HullBlock> qa, qb;
      double rho_a = 0.0, rho_b = 0.0;
      for (int blk = 0; blk < 2; ++blk) {
        const double q = uniform(rng, 0.0, 2.0);
        const SPoint pa = lift_S(rng, n, l, u, k), pb = lift_S(rng, n, l, u, k);
        qa.push_back({pa.X, pa.Y, pa.theta, q, l, u, double(k)});
        qb.push_back({pb.X, pb.Y, pb.theta, q, l, u, double(k)});
        rho_a += q * pa.theta.trace();
        rho_b += q * pb.theta.trace();
      }
      const HullQueryResult qa_r = hull_membership_Q(rho_a, qa, tol);
      qlift.record(qa_r.member, qa_r.margin);
      std::vector<HullBlock> qc = qa;
      for (size_t i = 0; i < qc.size(); ++i) {
        qc[i].X = al * qa[i].X + (1 - al) * qb[i].X;
        qc[i].Y = al * qa[i].Y + (1 - al) * qb[i].Y;
        qc[i].theta = al * qa[i].theta + (1 - al) * qb[i].theta;
      }
      const HullQueryResult qc_r = hull_membership_Q(al * rho_a + (1 - al) * rho_b, qc, tol);
      qconv.record(qc_r.member, qc_r.margin);
      const HullQueryResult qb_r = hull_membership_Q(rho_a - 0.1, qa, tol);
      qboundary.record(!qb_r.member, qb_r.margin);
    }
    const double secs = tm.seconds();
    rows.push_back(suite_row("hull", seed, "S-lift", lift, secs));
    rows.push_back(suite_row("hull", seed, "S-convex", conv, secs));
    rows.push_back(suite_row("hull", seed, "S-boundary", boundary, secs));
    rows.push_back(suite_row("hull", seed, "Q-lift", qlift, secs));
    rows.push_back(suite_row("hull", seed, "Q-convex", qconv, secs));
    rows.push_back(suite_row("hull", seed, "Q-boundary", qboundary, secs));
  }
  {
    Timer tm;
    Suite lift, conv, boundary;
    const double qs[] = {1.0, 1.5, 2.0, 3.0};
    for (int s = 0; s < cfg.samples; ++s) {
      const double q = qs[rng.next() % 4];
      const double d = uniform(rng, -1.0, 1.0), M = uniform(rng, 0.5, 2.0);
      // (0, y₀, 0, |y₀ − d|^q) and (x₁, y₁, 1, |x₁ + y₁ − d|^q).
      const double y0 = uniform(rng, -2.0, 2.0);
      const double x1 = uniform(rng, -M, M), y1 = uniform(rng, -2.0, 2.0);
      const double t0 = std::pow(std::abs(y0 - d), q), t1 = std::pow(std::abs(x1 + y1 - d), q);
      const HullQueryResult r0 = scalar_closure_membership(0, y0, 0, t0, d, q, M, tol);
      const HullQueryResult r1 = scalar_closure_membership(x1, y1, 1, t1, d, q, M, tol);
      lift.record(r0.member, r0.margin);
      lift.record(r1.member, r1.margin);
      const double al = rng.uniform();
      const HullQueryResult rc = scalar_closure_membership(
          (1 - al) * x1, al * y0 + (1 - al) * y1, 1 - al, al * t0 + (1 - al) * t1, d, q, M, tol);
      conv.record(rc.member, rc.margin);
      const HullQueryResult rb = scalar_closure_membership(x1, y1, 1, t1 - 0.1, d, q, M, tol);
      boundary.record(!rb.member, rb.margin);
    }
    const double secs = tm.seconds();
    rows.push_back(suite_row("hull", seed, "scalar-lift", lift, secs));
    rows.push_back(suite_row("hull", seed, "scalar-convex", conv, secs));
    rows.push_back(suite_row("hull", seed, "scalar-boundary", boundary, secs));
  }
  return rows;
}

std::vector<ResultRow> cuts_task(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  const double viol_tol = 1e-8;
  const int n = 4;
  std::vector<ResultRow> rows;
  const std::vector<ScalarFunctionSpec> fs = {
      ScalarFunctionSpec::square(), ScalarFunctionSpec::ridge(0.5), ScalarFunctionSpec::power(3.0),
      ScalarFunctionSpec::softplus(), ScalarFunctionSpec::entropy(),
      ScalarFunctionSpec::ridge_big_m(1.0, 2.0)};
  // Points in the domain of every function above.
  auto draw_x = [&](const ScalarFunctionSpec& f) {
    return f.kind == ScalarKind::Entropy ? uniform(rng, 0.0, 2.0) : uniform(rng, -2.0, 2.0);
  };

  {
    Timer tm;
    Suite valid, tight;
    for (int s = 0; s < cfg.samples; ++s) {
      const ScalarFunctionSpec& f = fs[rng.next() % fs.size()];
      const double xbar = draw_x(f), c = uniform(rng, 0.0, 1.0);
      const PerspectiveCut cut = perspective_cut(f, xbar, c);
      // z = 0 forces x = 0 and ρ = 0; z = 1 gives ρ = ω(x) + c.
      const double s0 = cut.slack(0.0, 0.0, 0.0);
      const double x = draw_x(f);
      const double s1 = cut.slack(x, 1.0, f.value(x) + c);
      valid.record(std::min(s0, s1) >= -viol_tol, std::min(s0, s1));
      const double st = cut.slack(xbar, 1.0, f.value(xbar) + c);
      tight.record(std::abs(st) <= 1e-10 * (1 + std::abs(f.value(xbar))), -std::abs(st));
    }
    const double secs = tm.seconds();
    rows.push_back(suite_row("cuts", seed, "perspective", valid, secs));
    rows.push_back(suite_row("cuts", seed, "perspective-tight", tight, secs));
  }
  {
    Timer tm;
    Suite matrix, trace, trace_free, rank_one, soc;
    for (int s = 0; s < cfg.samples; ++s) {
      const ScalarFunctionSpec& f = fs[rng.next() % fs.size()];
      const Matrix U = random_orthogonal(rng, n);
      Vector lx = Vector::Zero(n), ly = Vector::Zero(n), lbar(n);
      for (int i = 0; i < n; ++i) {
        if (rng.uniform() < 0.5) {
          ly(i) = 1.0;
          lx(i) = draw_x(f);
        }
        lbar(i) = draw_x(f);
      }
      const SymMatrix X = in_basis(U, lx), Y = in_basis(U, ly), xbar = in_basis(U, lbar);
      const std::optional<SymMatrix> theta = matrix_perspective(f, X, Y);
      if (!theta) continue;
      const AffineMatrixCut cut = matrix_perspective_cut(f, xbar);
      const double m_res = min_eigenvalue(cut.residual(X, Y, *theta));
      matrix.record(m_res >= -viol_tol, m_res);
      const double t_res = trace_cut(cut).residual(X, Y, *theta);
      trace.record(t_res >= -viol_tol, t_res);
      const double r_res = rank_one_cut(cut, rng.normal_matrix(n, 1)).residual(X, Y, *theta);
      rank_one.record(r_res >= -viol_tol, r_res);
      const double p_res = min_eigenvalue(
          soc_pair_cut(cut, rng.normal_matrix(n, 1), rng.normal_matrix(n, 1)).residual(X, Y, *theta));
      soc.record(p_res >= -viol_tol, p_res);

      // The trace contraction of the square cut needs no common eigenbasis.
      const SymMatrix free_bar(rng.normal_matrix(n, n));
      const SymMatrix sq_theta = *matrix_perspective(ScalarFunctionSpec::square(), X, Y);
      const double f_res = trace_cut(matrix_perspective_cut(ScalarFunctionSpec::square(), free_bar))
                               .residual(X, Y, sq_theta);
      trace_free.record(f_res >= -viol_tol, f_res);
    }
    const double secs = tm.seconds();
    rows.push_back(suite_row("cuts", seed, "matrix", matrix, secs));
    rows.push_back(suite_row("cuts", seed, "trace", trace, secs));
    rows.push_back(suite_row("cuts", seed, "trace-unrestricted", trace_free, secs));
    rows.push_back(suite_row("cuts", seed, "rank-one", rank_one, secs));
    rows.push_back(suite_row("cuts", seed, "soc-pair", soc, secs));
  }
  return rows;
}

std::vector<Task> make_tasks(const ExperimentConfig& cfg) {
  std::vector<Task> tasks;
  for (std::uint64_t seed : cfg.seeds) {
    switch (cfg.experiment) {
      case ExperimentKind::Rrr:
        for (const std::string& meth : cfg.methods) {
          tasks.push_back([&cfg, seed, meth] { return rrr_task(cfg, seed, meth); });
        }
        break;
      case ExperimentKind::Nmf: {
        std::vector<int> ks = cfg.ks;
        if (ks.empty()) {
          for (int k = std::max(1, cfg.k_true - 2); k <= std::min(cfg.n, cfg.k_true + 2); ++k) {
            ks.push_back(k);
          }
        }
        for (int k : ks) tasks.push_back([&cfg, seed, k] { return nmf_task(cfg, seed, k); });
        break;
      }
      case ExperimentKind::Dopt: {
        std::vector<int> ks = cfg.ks_dopt;
        if (ks.empty()) {
          for (int k = 1; k < std::min(cfg.n_dopt, cfg.m_dopt + 1); ++k) ks.push_back(k);
        }
        for (int k : ks) tasks.push_back([&cfg, seed, k] { return dopt_task(cfg, seed, k); });
        break;
      }
      case ExperimentKind::Svd:
        tasks.push_back([&cfg, seed] { return svd_task(cfg, seed); });
        break;
      case ExperimentKind::Hull:
        tasks.push_back([&cfg, seed] { return hull_task(cfg, seed); });
        break;
      case ExperimentKind::Cuts:
        tasks.push_back([&cfg, seed] { return cuts_task(cfg, seed); });
        break;
    }
  }
  return tasks;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<Task> tasks = make_tasks(cfg);
  std::vector<std::vector<ResultRow>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int jobs = std::min<int>(cfg.jobs, static_cast<int>(tasks.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  // Output order follows task order, independent of scheduling.
  std::vector<ResultRow> rows;
  for (size_t i = 0; i < tasks.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    rows.insert(rows.end(), results[i].begin(), results[i].end());
  }
  return rows;
}

// ---------------------------------------------------------------- output

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = {
      "experiment", "seed",     "method",     "param_name", "param",    "status",
      "objective",  "bound",    "gap",        "rank",       "rel_error", "mse_ratio",
      "samples",    "failures", "min_margin", "iterations", "wall_time_s"};
  return cols;
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  const auto& cols = result_columns();
  for (size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const ResultRow& r : rows) {
    os << r.experiment << "," << r.seed << "," << r.method << "," << r.param_name << ","
       << fmt(r.param) << "," << r.status << "," << fmt(r.objective) << "," << fmt(r.bound) << ","
       << fmt(r.gap) << "," << r.rank << "," << fmt(r.rel_error) << "," << fmt(r.mse_ratio) << ","
       << r.samples << "," << r.failures << "," << fmt(r.min_margin) << "," << r.iterations << ","
       << fmt(r.wall_time_s) << "\n";
  }
  return os.str();
}

nlohmann::json rows_to_json(const std::vector<ResultRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ResultRow& r : rows) {
    arr.push_back({{"schema_version", 1},      {"experiment", r.experiment},
                   {"seed", r.seed},           {"method", r.method},
                   {"param_name", r.param_name}, {"param", num(r.param)},
                   {"status", r.status},       {"objective", num(r.objective)},
                   {"bound", num(r.bound)},    {"gap", num(r.gap)},
                   {"rank", r.rank},           {"rel_error", num(r.rel_error)},
                   {"mse_ratio", num(r.mse_ratio)}, {"samples", r.samples},
                   {"failures", r.failures},   {"min_margin", num(r.min_margin)},
                   {"iterations", r.iterations}, {"wall_time_s", r.wall_time_s}});
  }
  return arr;
}

void write_rows(const std::vector<ResultRow>& rows, const std::string& path,
                const std::string& format) {
  if (format != "csv" && format != "json") throw InvalidInput("unknown output format '" + format + "'");
  std::ofstream out(path);
  if (!out) throw IOError("cannot open '" + path + "' for writing");
  if (format == "csv") {
    out << rows_to_csv(rows);
  } else {
    out << rows_to_json(rows).dump(2) << "\n";
  }
  if (!out) throw IOError("failed writing '" + path + "'");
}

}  // namespace lowrank
