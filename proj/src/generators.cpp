#include "lowrank/generators.hpp"

#include <cmath>
#include <string>

#include "lowrank/random.hpp"

namespace lowrank {

RrrSample gen_rrr(int n, int p, int m, int k_true, double sigma, std::uint64_t seed,
                  double gamma, double mu) {
  if (n < 1 || p < 1 || m < 1 || k_true < 0 || k_true > std::min(n, p)) {
    throw InvalidInput("gen_rrr: need n, p, m >= 1 and 0 <= k_true <= min(n, p)");
  }
  if (!(sigma >= 0)) throw InvalidInput("gen_rrr: sigma must be non-negative");
  Rng rng(seed);
  const Matrix U = rng.normal_matrix(p, k_true);
  const Matrix V = rng.normal_matrix(n, k_true);
  RrrSample s;
  s.beta_true = U * V.transpose();
  s.inst.X = rng.normal_matrix(m, p);
  s.inst.Y = s.inst.X * s.beta_true;
  if (sigma > 0) s.inst.Y += rng.normal_matrix(m, n, sigma);
  s.inst.gamma = gamma;
  s.inst.mu = mu;
  return s;
}

RrrSample gen_rrr_observations(const Matrix& beta_true, int m, double sigma, std::uint64_t seed,
                               double gamma, double mu) {
  if (m < 1 || beta_true.size() == 0) throw InvalidInput("gen_rrr_observations: empty sizes");
  Rng rng(seed);
  RrrSample s;
  s.beta_true = beta_true;
  s.inst.X = rng.normal_matrix(m, static_cast<int>(beta_true.rows()));
  s.inst.Y = s.inst.X * beta_true;
  if (sigma > 0) s.inst.Y += rng.normal_matrix(m, static_cast<int>(beta_true.cols()), sigma);
  s.inst.gamma = gamma;
  s.inst.mu = mu;
  return s;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  return rng.next();
}

NmfInstance gen_nmf(int n, int k_true, std::uint64_t seed, bool noise) {
  if (n < 1 || k_true < 1 || k_true > n) throw InvalidInput("gen_nmf: need 1 <= k_true <= n");
  Rng rng(seed);
  const Matrix U = rng.uniform_matrix(n, k_true);
  Matrix A = U * U.transpose();
  if (noise) {
    const double sd = 0.0125 * k_true;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i <= j; ++i) {
        const double e = sd * rng.normal();
        A(i, j) += e;
        if (i != j) A(j, i) += e;
      }
    }
    A = A.cwiseMax(0.0);
  }
  NmfInstance inst;
  inst.A = SymMatrix(A);
  inst.k = k_true;
  return inst;
}

DoptInstance gen_dopt(int n, int m, std::uint64_t seed, int k, double eps) {
  if (n < 1 || m < 1) throw InvalidInput("gen_dopt: need n, m >= 1");
  Rng rng(seed);
  DoptInstance inst;
  inst.A = rng.normal_matrix(n, m, 1 / std::sqrt(double(n)));
  inst.k = k;
  inst.eps = eps;
  return inst;
}

}  // namespace lowrank
