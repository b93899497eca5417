#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ggmcov/errors.hpp"
#include "ggmcov/model.hpp"

namespace ggmcov {

enum class Decision { H0, H1 };

inline Hypothesis to_hypothesis(Decision d) {
  return d == Decision::H1 ? Hypothesis::H1 : Hypothesis::H0;
}

/// Separator split coefficients (α_k, β_k) for k = 2..K with α_k + β_k = 1.
/// α_k weighs separator k's term inside clique k, β_k weighs it inside clique
/// q(k); any split with unit sum leaves the total statistic unchanged.
struct SplitCoefficients {
  std::vector<double> alpha;  // [k-2] = α_k
  std::vector<double> beta;   // [k-2] = β_k
  std::optional<double> gamma;

  int num_cliques() const { return static_cast<int>(alpha.size()) + 1; }
  double alpha_k(int k) const { return alpha.at(k - 2); }
  double beta_k(int k) const { return beta.at(k - 2); }
};

/// Coefficients for a single-clique model (no separators).
inline SplitCoefficients empty_coefficients() { return SplitCoefficients{}; }

/// Geometric schedule α_k = 1 - 2^{K-k} γ, β_k = 2^{K-k} γ, admissible for
/// 0 < γ < 1/(2^{K-1} - 1).
inline SplitCoefficients gamma_schedule(int K, double gamma) {
  require(K >= 2, Errc::BadK, "gamma schedule needs K >= 2");
  const double upper = 1.0 / (std::ldexp(1.0, K - 1) - 1.0);
  require(std::isfinite(gamma) && gamma > 0.0 && gamma < upper,
          Errc::GammaOutOfRange,
          "gamma must lie in (0, " + std::to_string(upper) + "), got " +
              std::to_string(gamma));
  SplitCoefficients c;
  c.gamma = gamma;
  c.alpha.resize(K - 1);
  c.beta.resize(K - 1);
  for (int k = 2; k <= K; ++k) {
    const double b = std::ldexp(gamma, K - k);  // 2^{K-k} γ, exact scaling
    c.beta[k - 2] = b;
    c.alpha[k - 2] = 1.0 - b;
  }
  return c;
}

/// γ = 0.5/(2^K - 1), always inside the admissible interval; the value used
/// for the K sweeps.
inline double auto_gamma(int K) {
  return 0.5 / (std::ldexp(1.0, K) - 1.0);
}

/// Explicit per-k α list for k = 2..K; β_k = 1 - α_k. Any finite values are
/// admissible — the decomposition identity holds for every unit-sum split.
inline SplitCoefficients explicit_schedule(const std::vector<double>& alpha) {
  SplitCoefficients c;
  c.alpha = alpha;
  c.beta.resize(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    require(std::isfinite(alpha[i]), Errc::DegenerateInput,
            "alpha coefficients must be finite");
    c.beta[i] = 1.0 - alpha[i];
  }
  return c;
}

inline void check_coefficients(const SplitCoefficients& c, int K) {
  require(c.num_cliques() == K, Errc::DimensionMismatch,
          "coefficients cover K=" + std::to_string(c.num_cliques()) +
              " cliques, scenario has K=" + std::to_string(K));
  for (int k = 2; k <= K; ++k)
    require(std::abs(c.alpha_k(k) + c.beta_k(k) - 1.0) <= 1e-12,
            Errc::DegenerateInput,
            "alpha_k + beta_k must equal 1 at k=" + std::to_string(k));
}

/// Per-cluster statistic machinery: L_k(x_{C_k}) = x_{C_k}ᵀ J_k x_{C_k} - e_k.
/// The J_k sum to I - Σ^{-1} (after zero-fill) and the e_k sum to log det Σ,
/// which is what makes Σ_k L_k equal the centralized statistic.
struct LocalStatisticSet {
  std::vector<std::vector<int>> cliques;  // copy of the graph's cliques
  std::vector<Eigen::MatrixXd> J;         // [k-1] = J_k
  std::vector<double> e;                  // [k-1] = e_k
  SplitCoefficients coeffs;

  int num_cliques() const { return static_cast<int>(cliques.size()); }
};

/// Builds {J_k, e_k} for a scenario under a coefficient split. Every
/// separator term is zero-filled into the owning clique's coordinates:
/// separator j contributes β_j to clique q(j) and α_j to clique j.
inline LocalStatisticSet build_local_set(const GgmScenario& sc,
                                         const SplitCoefficients& coeffs) {
  const int K = sc.num_cliques();
  check_coefficients(coeffs, K);

  const auto& g = sc.graph;
  LocalStatisticSet set;
  set.cliques = g.cliques;
  set.coeffs = coeffs;
  set.J.reserve(K);
  set.e.reserve(K);

  // Separator terms are shared between two cliques; compute them once.
  std::vector<Eigen::MatrixXd> sep_term(K);  // [k-1] = I - Σ_{S_k}^{-1}
  std::vector<double> sep_log_det(K, 0.0);
  for (int k = 2; k <= K; ++k) {
    const auto& cov = sc.sep_covs[k - 1];
    sep_term[k - 1] =
        Eigen::MatrixXd::Identity(cov.rows(), cov.cols()) -
        inverse_spd(cov, "separator covariance " + std::to_string(k));
    sep_log_det[k - 1] = log_det_spd(cov, "separator covariance");
  }

  for (int k = 1; k <= K; ++k) {
    const auto& clique = g.clique(k);
    const auto& cov = sc.clique_covs[k - 1];
    Eigen::MatrixXd jk =
        Eigen::MatrixXd::Identity(cov.rows(), cov.cols()) -
        inverse_spd(cov, "clique covariance " + std::to_string(k));
    double ek = log_det_spd(cov, "clique covariance");
    for (int j : g.q_set(k)) {
      jk -= coeffs.beta_k(j) * zero_fill(sep_term[j - 1], g.separator(j), clique);
      ek -= coeffs.beta_k(j) * sep_log_det[j - 1];
    }
    if (k >= 2) {
      jk -= coeffs.alpha_k(k) *
            zero_fill(sep_term[k - 1], g.separator(k), clique);
      ek -= coeffs.alpha_k(k) * sep_log_det[k - 1];
    }
    set.J.push_back(symmetrized(jk));
    set.e.push_back(ek);
  }

  // Global identities implied by the construction; a failure here is an
  // implementation bug, not a model property.
  Eigen::MatrixXd sum_j = Eigen::MatrixXd::Zero(sc.n_nodes(), sc.n_nodes());
  for (int k = 1; k <= K; ++k)
    detail::add_embedded(sum_j, set.J[k - 1], g.clique(k));
  const Eigen::MatrixXd expected =
      Eigen::MatrixXd::Identity(sc.n_nodes(), sc.n_nodes()) -
      sc.global_precision;
  const double dev = (sum_j - expected).cwiseAbs().maxCoeff();
  require(dev <= 1e-8 * std::max(1.0, expected.cwiseAbs().maxCoeff()),
          Errc::NumericalConsistency,
          "sum of zero-filled J_k does not reproduce I - Σ^{-1}");
  double sum_e = 0.0;
  for (double v : set.e) sum_e += v;
  require(std::abs(sum_e - sc.log_det_cov) <=
              1e-8 * std::max(1.0, std::abs(sc.log_det_cov)),
          Errc::NumericalConsistency,
          "sum of e_k does not reproduce log det Σ");
  return set;
}

inline Eigen::VectorXd extract_subvector(const Eigen::VectorXd& x,
                                         const std::vector<int>& ids) {
  Eigen::VectorXd out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out(i) = x(ids[i] - 1);
  return out;
}

/// L_k(x_{C_k}) for 1-based cluster index k.
inline double local_stat(const LocalStatisticSet& set, int k,
                         const Eigen::VectorXd& x) {
  require(k >= 1 && k <= set.num_cliques(), Errc::IndexMismatch,
          "cluster index out of range");
  const Eigen::VectorXd xc = extract_subvector(x, set.cliques[k - 1]);
  return xc.dot(set.J[k - 1] * xc) - set.e[k - 1];
}

inline std::vector<double> local_stats(const LocalStatisticSet& set,
                                       const Eigen::VectorXd& x) {
  std::vector<double> out(set.num_cliques());
  for (int k = 1; k <= set.num_cliques(); ++k) out[k - 1] = local_stat(set, k, x);
  return out;
}

/// Centralized statistic T(x) = xᵀx - xᵀ Σ^{-1} x - log det Σ, twice the
/// log-likelihood ratio of N(0, Σ) against N(0, I).
inline double centralized_stat(const GgmScenario& sc, const Eigen::VectorXd& x) {
  require(x.size() == sc.n_nodes(), Errc::DimensionMismatch,
          "observation length does not match the scenario");
  return x.squaredNorm() - x.dot(sc.global_precision * x) - sc.log_det_cov;
}

/// τ = ln(π0/π1); the Bayes rule compares T(x) against 2τ.
inline double bayes_threshold(const Priors& priors) {
  const Priors p = make_priors(priors.pi0, priors.pi1);
  return std::log(p.pi0 / p.pi1);
}

/// Ties decide H1: T(x) >= 2τ → H1.
inline Decision decide_from_stat(double t_value, double tau) {
  return t_value >= 2.0 * tau ? Decision::H1 : Decision::H0;
}

inline Decision centralized_decide(const GgmScenario& sc,
                                   const Eigen::VectorXd& x) {
  return decide_from_stat(centralized_stat(sc, x),
                          bayes_threshold(sc.priors));
}

}  // namespace ggmcov
