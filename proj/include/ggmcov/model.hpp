#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ggmcov/errors.hpp"
#include "ggmcov/graph.hpp"
#include "ggmcov/rng.hpp"

namespace ggmcov {

enum class Hypothesis { H0, H1 };

struct Priors {
  double pi0 = 0.5;
  double pi1 = 0.5;
};

inline Priors make_priors(double pi0, double pi1) {
  require(std::isfinite(pi0) && std::isfinite(pi1) && pi0 > 0.0 && pi1 > 0.0,
          Errc::BadPriors, "priors must be positive");
  require(std::abs(pi0 + pi1 - 1.0) <= 1e-12, Errc::BadPriors,
          "priors must sum to 1");
  return Priors{pi0, pi1};
}

inline constexpr double kPdTol = 1e-10;   // minimum-eigenvalue floor
inline constexpr double kSymTol = 1e-10;  // relative symmetry tolerance

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

inline double min_eigenvalue(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(a),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Verifies near-symmetry and positive definiteness; returns the symmetrized
/// matrix that all downstream computation uses.
inline Eigen::MatrixXd check_spd(const Eigen::MatrixXd& a,
                                 const std::string& what) {
  require(a.rows() == a.cols() && a.rows() >= 1, Errc::DimensionMismatch,
          what + " must be square and non-empty");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  require(asym <= kSymTol * scale, Errc::NotSpd,
          what + " is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  Eigen::MatrixXd s = symmetrized(a);
  const double lmin = min_eigenvalue(s);
  require(lmin > kPdTol, Errc::NotSpd,
          what + " is not positive definite (min eigenvalue " +
              std::to_string(lmin) + ")");
  return s;
}

inline double log_det_spd(const Eigen::MatrixXd& a, const std::string& what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  require(llt.info() == Eigen::Success, Errc::CholeskyFailure,
          what + ": Cholesky factorization failed");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

inline Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& a,
                                   const std::string& what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  require(llt.info() == Eigen::Success, Errc::CholeskyFailure,
          what + ": Cholesky factorization failed");
  return symmetrized(
      llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols())));
}

namespace detail {

// target(id_i-1, id_j-1) += weight * m(i, j); ids are 1-based global nodes.
inline void add_embedded(Eigen::MatrixXd& target, const Eigen::MatrixXd& m,
                         const std::vector<int>& ids, double weight = 1.0) {
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = 0; j < ids.size(); ++j)
      target(ids[i] - 1, ids[j] - 1) += weight * m(i, j);
}

inline std::vector<int> zero_based(const std::vector<int>& ids) {
  std::vector<int> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out[i] = ids[i] - 1;
  return out;
}

}  // namespace detail

/// A fully assembled test scenario: the graph, the per-clique covariances
/// under H1 and everything derived from them through the decomposable-model
/// identities (global precision, covariance, log-determinant).
struct GgmScenario {
  DecomposableGraph graph;
  std::vector<Eigen::MatrixXd> clique_covs;  // [k-1] = Σ_{C_k}
  std::vector<Eigen::MatrixXd> sep_covs;     // [k-1] = Σ_{S_k}, k >= 2; [0] empty
  Eigen::MatrixXd global_cov;
  Eigen::MatrixXd global_precision;
  Eigen::MatrixXd chol_lower;  // lower Cholesky factor of global_cov
  double log_det_cov = 0.0;
  Priors priors;

  int num_cliques() const { return graph.num_cliques(); }
  int n_nodes() const { return graph.n_nodes; }
};

/// Builds the global model from per-clique covariances: the precision is
/// Σ_k [Σ_{C_k}^{-1}]ᶻᶠ − Σ_{k≥2} [Σ_{S_k}^{-1}]ᶻᶠ and the covariance is its
/// inverse. Separator marginals taken from Σ_{C_k} and Σ_{C_q(k)} must agree,
/// otherwise no global covariance with these clique marginals exists.
inline GgmScenario assemble_global(const DecomposableGraph& graph,
                                   const std::vector<Eigen::MatrixXd>& clique_covs,
                                   const Priors& priors) {
  const int K = graph.num_cliques();
  const int N = graph.n_nodes;
  require(static_cast<int>(clique_covs.size()) == K, Errc::DimensionMismatch,
          "expected " + std::to_string(K) + " clique covariances, got " +
              std::to_string(clique_covs.size()));

  GgmScenario sc;
  sc.graph = graph;
  sc.priors = make_priors(priors.pi0, priors.pi1);
  sc.clique_covs.reserve(K);
  for (int k = 1; k <= K; ++k) {
    const auto& c = graph.clique(k);
    require(clique_covs[k - 1].rows() == static_cast<Eigen::Index>(c.size()),
            Errc::DimensionMismatch,
            "clique covariance " + std::to_string(k) + " has dimension " +
                std::to_string(clique_covs[k - 1].rows()) + ", clique has " +
                std::to_string(c.size()) + " nodes");
    sc.clique_covs.push_back(
        check_spd(clique_covs[k - 1], "clique covariance " + std::to_string(k)));
  }

  // Separator marginals and their consistency across the two cliques that
  // share them.
  sc.sep_covs.assign(K, Eigen::MatrixXd());
  for (int k = 2; k <= K; ++k) {
    const auto& sep = graph.separator(k);
    const auto pos_in_k = positions_in(sep, graph.clique(k));
    const auto pos_in_q = positions_in(sep, graph.clique(graph.q(k)));
    const Eigen::MatrixXd from_k = submatrix(sc.clique_covs[k - 1], pos_in_k);
    const Eigen::MatrixXd from_q =
        submatrix(sc.clique_covs[graph.q(k) - 1], pos_in_q);
    const double dev = (from_k - from_q).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, from_k.cwiseAbs().maxCoeff());
    require(dev <= 1e-8 * scale, Errc::InconsistentSeparator,
            "separator S_" + std::to_string(k) +
                " marginals disagree between cliques " + std::to_string(k) +
                " and " + std::to_string(graph.q(k)) + " (max deviation " +
                std::to_string(dev) + ")");
    sc.sep_covs[k - 1] = from_k;
  }

  Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(N, N);
  for (int k = 1; k <= K; ++k)
    detail::add_embedded(precision,
                         inverse_spd(sc.clique_covs[k - 1],
                                     "clique covariance " + std::to_string(k)),
                         graph.clique(k));
  for (int k = 2; k <= K; ++k)
    detail::add_embedded(precision,
                         inverse_spd(sc.sep_covs[k - 1],
                                     "separator covariance " + std::to_string(k)),
                         graph.separator(k), -1.0);
  sc.global_precision = symmetrized(precision);

  const double prec_lmin = min_eigenvalue(sc.global_precision);
  require(prec_lmin > kPdTol, Errc::NotSpd,
          "assembled global precision is not positive definite "
          "(min eigenvalue " + std::to_string(prec_lmin) + ")");
  sc.global_cov = inverse_spd(sc.global_precision, "global precision");

  Eigen::LLT<Eigen::MatrixXd> llt(sc.global_cov);
  require(llt.info() == Eigen::Success, Errc::CholeskyFailure,
          "global covariance: Cholesky factorization failed");
  sc.chol_lower = llt.matrixL();
  sc.log_det_cov = 2.0 * sc.chol_lower.diagonal().array().log().sum();

  // Consistency of the assembly itself: clique marginals must round-trip and
  // the determinant must factor over cliques and separators.
  for (int k = 1; k <= K; ++k) {
    const Eigen::MatrixXd marg =
        submatrix(sc.global_cov, detail::zero_based(graph.clique(k)));
    const double dev = (marg - sc.clique_covs[k - 1]).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, sc.clique_covs[k - 1].cwiseAbs().maxCoeff());
    require(dev <= 1e-6 * scale, Errc::NumericalConsistency,
            "clique marginal " + std::to_string(k) +
                " does not round-trip through the global covariance");
  }
  double log_det_factored = 0.0;
  for (int k = 1; k <= K; ++k)
    log_det_factored +=
        log_det_spd(sc.clique_covs[k - 1], "clique covariance");
  for (int k = 2; k <= K; ++k)
    log_det_factored -= log_det_spd(sc.sep_covs[k - 1], "separator covariance");
  require(std::abs(sc.log_det_cov - log_det_factored) <=
              1e-8 * std::max(1.0, std::abs(sc.log_det_cov)),
          Errc::NumericalConsistency,
          "log-determinant factorization mismatch");
  return sc;
}

/// Random symmetric positive definite matrix with a prescribed spectrum:
/// Q diag(λ) Qᵀ where Q orthonormalizes a seeded standard-normal matrix.
/// The sign convention (positive diagonal of the triangular factor) makes the
/// output a deterministic function of (dim, eigenvalues, seed).
inline Eigen::MatrixXd random_spd_with_spectrum(
    int dim, const std::vector<double>& eigenvalues, std::uint64_t seed) {
  require(dim >= 1, Errc::DegenerateInput, "dimension must be >= 1");
  require(static_cast<int>(eigenvalues.size()) == dim, Errc::DimensionMismatch,
          "expected " + std::to_string(dim) + " eigenvalues");
  for (double ev : eigenvalues)
    require(std::isfinite(ev) && ev > 0.0, Errc::DegenerateInput,
            "eigenvalues must be positive");

  rng::SplitMix64 stream(seed);
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = stream.next_normal();

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd qmat = qr.householderQ();
  for (int j = 0; j < dim; ++j)
    if (qr.matrixQR()(j, j) < 0.0) qmat.col(j) = -qmat.col(j);

  Eigen::VectorXd lambda(dim);
  for (int i = 0; i < dim; ++i) lambda(i) = eigenvalues[i];
  return symmetrized(qmat * lambda.asDiagonal() * qmat.transpose());
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return out;
}

/// Chain scenario: K cliques of M sensors coupled by 1-node separators; one
/// random covariance with spectrum on [a, 1.5a] tiled across all cliques.
/// With a single shared node, a global model exists iff the two corner
/// diagonal entries agree, so they are projected to their average; if the
/// projection breaks positive definiteness a fresh seed is drawn (at most 32
/// attempts).
inline GgmScenario make_chain_scenario(int K, int M, double alpha_scale,
                                       const Priors& priors,
                                       std::uint64_t seed) {
  require(K >= 1, Errc::BadShape, "chain scenario: K must be >= 1");
  require(M >= 2, Errc::BadShape, "chain scenario: M must be >= 2");
  require(std::isfinite(alpha_scale) && alpha_scale > 0.0, Errc::DegenerateInput,
          "chain scenario: alpha_scale must be positive");

  const DecomposableGraph graph = chain_graph(K, M, 1);
  const std::vector<double> eigs = linspace(alpha_scale, 1.5 * alpha_scale, M);
  const std::uint64_t base = rng::derive(seed, rng::stream::kScenario);

  Error last(Errc::NotSpd, "unreachable");
  for (int attempt = 0; attempt < 32; ++attempt) {
    Eigen::MatrixXd sigma =
        random_spd_with_spectrum(M, eigs, rng::derive(base, attempt));
    if (K > 1) {
      const double avg = 0.5 * (sigma(0, 0) + sigma(M - 1, M - 1));
      sigma(0, 0) = avg;
      sigma(M - 1, M - 1) = avg;
    }
    try {
      const Eigen::MatrixXd checked = check_spd(sigma, "chain clique covariance");
      return assemble_global(graph,
                             std::vector<Eigen::MatrixXd>(K, checked), priors);
    } catch (const Error& e) {
      if (e.code() != Errc::NotSpd) throw;
      last = e;
    }
  }
  throw Error(Errc::NotSpd,
              std::string("chain scenario: no positive definite covariance "
                          "after 32 attempts (") + last.what() + ")");
}

/// Minimum clique eigenvalue of the tree pattern x² I + (x/10)(1 - I).
inline double tree_lambda_min(double x) { return x * x - x / 10.0; }

/// Binary-tree scenario: clusters of 4 nodes, 1-node separators, every clique
/// covariance equal to the pattern with diagonal x² and off-diagonal x/10.
/// The pattern is deterministic; the seed is accepted for interface symmetry
/// with the chain generator and currently unused.
inline GgmScenario make_tree_scenario(int K, double x, const Priors& priors,
                                      std::uint64_t /*seed*/ = 0) {
  require(K >= 1, Errc::BadShape, "tree scenario: K must be >= 1");
  require(std::isfinite(x) && x > 0.0, Errc::DegenerateInput,
          "tree scenario: x must be positive");
  constexpr int M = 4;
  const DecomposableGraph graph = binary_tree_graph(K, M, 1);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(M, M, x / 10.0);
  sigma.diagonal().setConstant(x * x);
  // pattern eigenvalues: x^2 - x/10 (x3) and x^2 + 3x/10 (x1)
  const Eigen::MatrixXd checked = check_spd(sigma, "tree clique covariance");
  return assemble_global(graph, std::vector<Eigen::MatrixXd>(K, checked),
                         priors);
}

/// One observation vector: z under H0, (chol Σ) z under H1.
inline Eigen::VectorXd sample_one(const GgmScenario& sc, Hypothesis hyp,
                                  rng::SplitMix64& stream) {
  const int N = sc.n_nodes();
  require(sc.chol_lower.rows() == N, Errc::CholeskyFailure,
          "scenario has no Cholesky factor of the global covariance");
  Eigen::VectorXd z(N);
  for (int i = 0; i < N; ++i) z(i) = stream.next_normal();
  if (hyp == Hypothesis::H0) return z;
  return sc.chol_lower.triangularView<Eigen::Lower>() * z;
}

/// n observation vectors; draw i comes from substream derive(seed, i), so the
/// result is independent of how draws are scheduled across workers.
inline std::vector<Eigen::VectorXd> sample(const GgmScenario& sc,
                                           Hypothesis hyp, int n,
                                           std::uint64_t seed) {
  require(n >= 1, Errc::DegenerateInput, "sample: n must be >= 1");
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    rng::SplitMix64 stream(rng::derive(seed, static_cast<std::uint64_t>(i)));
    out.push_back(sample_one(sc, hyp, stream));
  }
  return out;
}

inline double min_clique_eigenvalue(const GgmScenario& sc) {
  double lmin = std::numeric_limits<double>::infinity();
  for (const auto& cov : sc.clique_covs)
    lmin = std::min(lmin, min_eigenvalue(cov));
  return lmin;
}

}  // namespace ggmcov
