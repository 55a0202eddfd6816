#pragma once

// Synthetic instances for the experiments. All draws come from Rng, so a
// seed fixes the instance bit for bit.

#include <cstdint>

#include "lowrank/algos.hpp"
#include "lowrank/models.hpp"

namespace lowrank {

struct RrrSample {
  RrrInstance inst;
  Matrix beta_true;  // p×n
};

/// β_true = UVᵀ with standard normal U (p×k), V (n×k); X standard normal;
/// Y = Xβ_true + E with E entries of standard deviation sigma.
RrrSample gen_rrr(int n, int p, int m, int k_true, double sigma, std::uint64_t seed,
                  double gamma = 1e6, double mu = 0.0);

/// Fresh observations (X, Y) of an existing β_true, for validation and test
/// splits.
RrrSample gen_rrr_observations(const Matrix& beta_true, int m, double sigma, std::uint64_t seed,
                               double gamma = 1e6, double mu = 0.0);

/// Deterministic seed for an independent stream derived from (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// A = UUᵀ + E, U uniform on [0,1] (n×k_true), E entries of standard
/// deviation 0.0125·k_true, symmetrized, negative entries set to 0.
NmfInstance gen_nmf(int n, int k_true, std::uint64_t seed, bool noise = true);

/// n×m matrix with entries of standard deviation 1/√n.
DoptInstance gen_dopt(int n, int m, std::uint64_t seed, int k = 1, double eps = 1e-6);

}  // namespace lowrank
