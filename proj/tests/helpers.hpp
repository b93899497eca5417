#pragma once

// Shared test utilities. The oracles here deliberately avoid the library's
// computation paths: determinants and quadratic forms go through LU instead
// of the library's Cholesky-based routines.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ggmcov/model.hpp"
#include "ggmcov/rng.hpp"
#include "ggmcov/statistic.hpp"

namespace testutil {

/// Consistent random clique covariances for an arbitrary decomposable graph:
/// take the clique marginals of one random global SPD matrix. Marginals of a
/// single matrix always agree on the separators.
inline ggmcov::GgmScenario random_consistent_scenario(
    const ggmcov::DecomposableGraph& graph, std::uint64_t seed,
    double eig_lo = 0.5, double eig_hi = 3.0,
    ggmcov::Priors priors = ggmcov::Priors{0.5, 0.5}) {
  const int n = graph.n_nodes;
  ggmcov::rng::SplitMix64 stream(ggmcov::rng::derive(seed, 0xC0FFEE));
  std::vector<double> eigs(n);
  for (int i = 0; i < n; ++i)
    eigs[i] = eig_lo + (eig_hi - eig_lo) * stream.next_uniform();
  const Eigen::MatrixXd global = ggmcov::random_spd_with_spectrum(
      n, eigs, ggmcov::rng::derive(seed, 0xBEEF));
  std::vector<Eigen::MatrixXd> covs;
  covs.reserve(graph.num_cliques());
  for (int k = 1; k <= graph.num_cliques(); ++k) {
    std::vector<int> pos;
    for (int id : graph.clique(k)) pos.push_back(id - 1);
    covs.push_back(ggmcov::submatrix(global, pos));
  }
  return ggmcov::assemble_global(graph, covs, priors);
}

/// log N(x; 0, cov) through LU decomposition (independent of the library's
/// Cholesky-based path).
inline double lu_gaussian_logpdf(const Eigen::VectorXd& x,
                                 const Eigen::MatrixXd& cov) {
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(cov);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i)
    log_det += std::log(std::abs(lu.matrixLU()(i, i)));
  const double quad = x.dot(lu.solve(x));
  const double n = static_cast<double>(x.size());
  return -0.5 * (n * std::log(2.0 * M_PI) + log_det + quad);
}

/// Oracle for the centralized statistic: twice the LLR of the two dense
/// Gaussian log-densities.
inline double oracle_T(const ggmcov::GgmScenario& sc, const Eigen::VectorXd& x) {
  const double lp1 = lu_gaussian_logpdf(x, sc.global_cov);
  const double n = static_cast<double>(x.size());
  const double lp0 = -0.5 * (n * std::log(2.0 * M_PI) + x.squaredNorm());
  return 2.0 * (lp1 - lp0);
}

inline Eigen::VectorXd standard_normal_vector(int n,
                                              ggmcov::rng::SplitMix64& stream) {
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = stream.next_normal();
  return z;
}

}  // namespace testutil
