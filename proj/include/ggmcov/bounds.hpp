#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ggmcov/errors.hpp"
#include "ggmcov/model.hpp"
#include "ggmcov/parallel.hpp"
#include "ggmcov/statistic.hpp"

namespace ggmcov {

/// δ^(0) = min{2τ, 0} and δ^(1) = max{2τ, 0}.
inline std::pair<double, double> deltas(double tau) {
  return {std::min(2.0 * tau, 0.0), std::max(2.0 * tau, 0.0)};
}

/// ⌈K/2⌉ - 1, the limiting lower bound on transmissions saved.
inline double savings_limit(int K) {
  require(K > 1, Errc::BadK, "the savings bounds require K > 1");
  return static_cast<double>((K + 1) / 2 - 1);
}

/// Lower bound on the average number of transmissions saved:
/// max{0, (⌈K/2⌉-1)·[π1 Σ_k P_{D,k} + π0 Σ_k (1 - P_{f,k}) - (K-1)]}.
inline double savings_lower_bound(const std::vector<double>& pd,
                                  const std::vector<double>& pf, int K,
                                  const Priors& priors) {
  require(K > 1, Errc::BadK, "the savings bounds require K > 1");
  require(static_cast<int>(pd.size()) == K && static_cast<int>(pf.size()) == K,
          Errc::DimensionMismatch, "pd/pf lists must have length K");
  const double c = savings_limit(K);
  double sum_pd = 0.0, sum_one_minus_pf = 0.0;
  for (int k = 0; k < K; ++k) {
    sum_pd += pd[k];
    sum_one_minus_pf += 1.0 - pf[k];
  }
  const double raw =
      c * (priors.pi1 * sum_pd + priors.pi0 * sum_one_minus_pf - (K - 1));
  return std::max(0.0, raw);
}

/// Monte Carlo estimates of P_{D,k}(δ^(1)) = Pr(L_k > δ^(1) | H1) and
/// P_{f,k}(δ^(0)) = 1 - Pr(L_k <= δ^(0) | H0), with per-k binomial standard
/// errors. The per-draw sums Σ_k 1{·} are also tracked: their sample variance
/// propagates into the savings bound without assuming the per-k indicators
/// are independent (they share draws).
struct PdPfEstimate {
  std::vector<double> pd, pd_stderr;
  std::vector<double> pf, pf_stderr;
  double sum_pd = 0.0;            // Σ_k pd[k]
  double sum_one_minus_pf = 0.0;  // Σ_k (1 - pf[k])
  double sum_pd_stderr = 0.0;
  double sum_one_minus_pf_stderr = 0.0;
  int n = 0;
};

inline PdPfEstimate estimate_pd_pf(const LocalStatisticSet& set,
                                   const GgmScenario& sc, int n,
                                   std::uint64_t seed, int workers = 1) {
  require(n >= 1, Errc::DegenerateInput, "estimate_pd_pf: n must be >= 1");
  const int K = sc.num_cliques();
  const double tau = bayes_threshold(sc.priors);
  const std::pair<double, double> ds = deltas(tau);
  const double delta0 = ds.first;
  const double delta1 = ds.second;

  PdPfEstimate est;
  est.n = n;
  est.pd.resize(K);
  est.pd_stderr.resize(K);
  est.pf.resize(K);
  est.pf_stderr.resize(K);

  auto run_side = [&](Hypothesis hyp, std::uint64_t side_seed,
                      std::vector<long>& counts, long& s_sum, long& s_sq) {
    std::vector<std::atomic<long>> acc(K);
    std::atomic<long> sum{0}, sq{0};
    parallel_for(n, workers, [&](std::int64_t i) {
      rng::SplitMix64 stream(
          rng::derive(side_seed, static_cast<std::uint64_t>(i)));
      const Eigen::VectorXd x = sample_one(sc, hyp, stream);
      long s = 0;
      for (int k = 1; k <= K; ++k) {
        const double lk = local_stat(set, k, x);
        const bool hit = hyp == Hypothesis::H1 ? (lk > delta1) : (lk <= delta0);
        if (hit) {
          acc[k - 1].fetch_add(1, std::memory_order_relaxed);
          ++s;
        }
      }
      sum.fetch_add(s, std::memory_order_relaxed);
      sq.fetch_add(s * s, std::memory_order_relaxed);
    });
    counts.resize(K);
    for (int k = 0; k < K; ++k) counts[k] = acc[k].load();
    s_sum = sum.load();
    s_sq = sq.load();
  };

  auto binomial_stderr = [n](double p) {
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
  };
  auto mean_stderr = [n](long s_sum, long s_sq) {
    if (n < 2) return 0.0;
    const double mean = static_cast<double>(s_sum) / n;
    const double var =
        (static_cast<double>(s_sq) - n * mean * mean) / (n - 1.0);
    return std::sqrt(std::max(0.0, var) / n);
  };

  std::vector<long> counts;
  long s_sum = 0, s_sq = 0;
  run_side(Hypothesis::H1, rng::derive(seed, rng::stream::kBoundH1), counts,
           s_sum, s_sq);
  for (int k = 0; k < K; ++k) {
    est.pd[k] = static_cast<double>(counts[k]) / n;
    est.pd_stderr[k] = binomial_stderr(est.pd[k]);
  }
  est.sum_pd = static_cast<double>(s_sum) / n;
  est.sum_pd_stderr = mean_stderr(s_sum, s_sq);

  run_side(Hypothesis::H0, rng::derive(seed, rng::stream::kBoundH0), counts,
           s_sum, s_sq);
  for (int k = 0; k < K; ++k) {
    // counts[k] holds #{L_k <= δ0 | H0}, i.e. the non-alarm events.
    est.pf[k] = 1.0 - static_cast<double>(counts[k]) / n;
    est.pf_stderr[k] = binomial_stderr(est.pf[k]);
  }
  est.sum_one_minus_pf = static_cast<double>(s_sum) / n;
  est.sum_one_minus_pf_stderr = mean_stderr(s_sum, s_sq);
  return est;
}

/// Per-clique Kullback-Leibler divergence of H0 from H1:
/// ½ [log det Σ_{C_k} + trace(Σ_{C_k}^{-1}) - M_k].
inline std::vector<double> kl_per_clique(const GgmScenario& sc) {
  std::vector<double> out;
  out.reserve(sc.num_cliques());
  for (const auto& cov : sc.clique_covs) {
    const double mk = static_cast<double>(cov.rows());
    out.push_back(0.5 * (log_det_spd(cov, "clique covariance") +
                         inverse_spd(cov, "clique covariance").trace() - mk));
  }
  return out;
}

/// Numerical diagnostic only: the eigenvalue range of each J_k. The sandwich
/// (1 - Σβ_j - α_k) <= eig{J_k} <= 1 holds asymptotically for large minimum
/// clique eigenvalue; nothing is asserted here.
struct JkSpectrum {
  double min_eig = 0.0;
  double max_eig = 0.0;
  bool positive_definite = false;
};

inline std::vector<JkSpectrum> jk_spectrum_report(const LocalStatisticSet& set) {
  std::vector<JkSpectrum> out;
  out.reserve(set.num_cliques());
  for (const auto& jk : set.J) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jk,
                                                      Eigen::EigenvaluesOnly);
    JkSpectrum s;
    s.min_eig = es.eigenvalues().minCoeff();
    s.max_eig = es.eigenvalues().maxCoeff();
    s.positive_definite = s.min_eig > 0.0;
    out.push_back(s);
  }
  return out;
}

/// The savings bounds bundled for reporting. `ks_lower` is the
/// clamped Eq.-style bound; its standard error is propagated from the
/// per-draw sums of the unclamped expression.
struct BoundReport {
  double delta0 = 0.0, delta1 = 0.0;
  std::vector<double> pd, pd_stderr;
  std::vector<double> pf, pf_stderr;
  double ks_lower = 0.0;
  double ks_lower_stderr = 0.0;
  double ks_limit = 0.0;
  int n_samples = 0;
  std::uint64_t seed = 0;
};

inline BoundReport make_bound_report(const LocalStatisticSet& set,
                                     const GgmScenario& sc, int n,
                                     std::uint64_t seed, int workers = 1) {
  const int K = sc.num_cliques();
  const double tau = bayes_threshold(sc.priors);
  const auto [delta0, delta1] = deltas(tau);
  const PdPfEstimate est = estimate_pd_pf(set, sc, n, seed, workers);

  BoundReport rep;
  rep.delta0 = delta0;
  rep.delta1 = delta1;
  rep.pd = est.pd;
  rep.pd_stderr = est.pd_stderr;
  rep.pf = est.pf;
  rep.pf_stderr = est.pf_stderr;
  rep.n_samples = n;
  rep.seed = seed;
  if (K > 1) {
    rep.ks_limit = savings_limit(K);
    rep.ks_lower = savings_lower_bound(est.pd, est.pf, K, sc.priors);
    const double c = rep.ks_limit;
    rep.ks_lower_stderr =
        c * std::sqrt(sc.priors.pi1 * sc.priors.pi1 * est.sum_pd_stderr *
                          est.sum_pd_stderr +
                      sc.priors.pi0 * sc.priors.pi0 *
                          est.sum_one_minus_pf_stderr *
                          est.sum_one_minus_pf_stderr);
  }
  return rep;
}

}  // namespace ggmcov
