#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ggmcov/bounds.hpp"
#include "ggmcov/io.hpp"
#include "ggmcov/model.hpp"
#include "ggmcov/parallel.hpp"
#include "ggmcov/protocol.hpp"
#include "ggmcov/statistic.hpp"

namespace ggmcov {

struct ScenarioSpec {
  enum class Kind { Chain, Tree, Custom };
  Kind kind = Kind::Chain;
  int K = 0;
  int M = 5;           // chain clique size (tree clusters are fixed at 4)
  double scale = 1.0;  // chain alpha_scale / tree x
  // Custom scenarios carry their structure explicitly.
  DecomposableGraph graph;
  std::vector<Eigen::MatrixXd> clique_covs;
};

struct CoefficientsSpec {
  enum class Kind { GammaAuto, Gamma, Explicit, None };
  Kind kind = Kind::GammaAuto;
  double gamma = 0.0;
  std::vector<double> alpha;
};

struct ExperimentConfig {
  std::string config_id;
  ScenarioSpec scenario;
  CoefficientsSpec coefficients;
  Priors priors;
  int n_runs = 20000;
  std::uint64_t seed = 0;
  double eta = 1.0;
  int workers = 0;  // 0 = available parallelism
  bool stratified = false;
  bool dump_traces = false;
  // sweep inputs (consumed by sweep_k / sweep_eigenvalue)
  std::vector<int> k_values;
  std::vector<double> scale_values;
};

struct ExperimentResult {
  std::string config_id;
  int K = 0;
  double scale = 0.0;
  double lambda_min = 0.0;
  int n_runs = 0;
  std::uint64_t seed = 0;
  double avg_saved = 0.0;
  double frac_saved = 0.0;
  double error_rate = 0.0;
  double centralized_error_rate = 0.0;
  long n_h0 = 0, n_h1 = 0;
  long errors_h0 = 0, errors_h1 = 0;
  std::vector<long> stop_hist;  // [t] = #runs stopping after t receptions; [0] unused
  BoundReport bound;
  bool degenerate = false;  // all local statistics identically zero
  double wall_seconds = 0.0;
  std::vector<std::string> trace_lines;  // filled when dump_traces is set
};

inline GgmScenario build_scenario(const ScenarioSpec& spec,
                                  const Priors& priors, std::uint64_t seed) {
  switch (spec.kind) {
    case ScenarioSpec::Kind::Chain:
      return make_chain_scenario(spec.K, spec.M, spec.scale, priors, seed);
    case ScenarioSpec::Kind::Tree:
      return make_tree_scenario(spec.K, spec.scale, priors, seed);
    case ScenarioSpec::Kind::Custom:
      return assemble_global(spec.graph, spec.clique_covs, priors);
  }
  fail(Errc::ConfigError, "unknown scenario kind");
}

inline SplitCoefficients build_coefficients(const CoefficientsSpec& spec,
                                            int K) {
  switch (spec.kind) {
    case CoefficientsSpec::Kind::GammaAuto:
      return K == 1 ? empty_coefficients() : gamma_schedule(K, auto_gamma(K));
    case CoefficientsSpec::Kind::Gamma:
      return gamma_schedule(K, spec.gamma);
    case CoefficientsSpec::Kind::Explicit:
      return explicit_schedule(spec.alpha);
    case CoefficientsSpec::Kind::None:
      require(K == 1, Errc::DimensionMismatch,
              "empty coefficients are only valid for a single clique");
      return empty_coefficients();
  }
  fail(Errc::ConfigError, "unknown coefficients kind");
}

namespace detail {

inline std::string default_config_id(const ScenarioSpec& spec) {
  switch (spec.kind) {
    case ScenarioSpec::Kind::Chain:
      return "chain_k" + std::to_string(spec.K) + "_m" + std::to_string(spec.M) +
             "_a" + csv_num(spec.scale);
    case ScenarioSpec::Kind::Tree:
      return "tree_k" + std::to_string(spec.K) + "_x" + csv_num(spec.scale);
    case ScenarioSpec::Kind::Custom:
      return "custom_k" + std::to_string(spec.graph.num_cliques());
  }
  return "unknown";
}

}  // namespace detail

/// Monte Carlo evaluation of the ordered-transmission protocol. Per run the
/// hypothesis is drawn from the priors, one observation vector is sampled,
/// the local statistics are fed through the protocol, and the centralized
/// decision is computed on the same observation. The two decisions must agree
/// on every single run; a mismatch aborts with EquivalenceViolation. The same
/// scenario matrices are used for all runs.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  require(cfg.n_runs >= 1, Errc::ConfigError, "n_runs must be >= 1");
  require(std::isfinite(cfg.eta) && cfg.eta > 0.0, Errc::ConfigError,
          "eta must be positive");
  const auto t0 = std::chrono::steady_clock::now();

  const GgmScenario sc = build_scenario(cfg.scenario, cfg.priors, cfg.seed);
  const int K = sc.num_cliques();
  const SplitCoefficients coeffs = build_coefficients(cfg.coefficients, K);
  const LocalStatisticSet set = build_local_set(sc, coeffs);
  const double tau = bayes_threshold(sc.priors);
  const int workers = resolve_workers(cfg.workers);
  const long n = cfg.n_runs;

  ExperimentResult res;
  res.config_id =
      cfg.config_id.empty() ? detail::default_config_id(cfg.scenario) : cfg.config_id;
  res.K = K;
  res.scale = cfg.scenario.kind == ScenarioSpec::Kind::Custom ? 0.0
                                                              : cfg.scenario.scale;
  res.lambda_min = min_clique_eigenvalue(sc);
  res.n_runs = cfg.n_runs;
  res.seed = cfg.seed;

  double max_j = 0.0, max_e = 0.0;
  for (const auto& jk : set.J) max_j = std::max(max_j, jk.cwiseAbs().maxCoeff());
  for (double ek : set.e) max_e = std::max(max_e, std::abs(ek));
  res.degenerate = std::max(max_j, max_e) < 1e-12;

  const std::uint64_t runs_seed = rng::derive(cfg.seed, rng::stream::kRuns);
  const long n_h0_target =
      cfg.stratified ? std::lround(sc.priors.pi0 * static_cast<double>(n)) : 0;

  std::vector<std::atomic<long>> stop_hist(K + 1);
  std::atomic<long> sum_saved{0}, n_h0{0}, n_h1{0}, err_h0{0}, err_h1{0},
      cent_err{0}, disagreements{0};
  std::atomic<long> first_disagreement{-1};
  std::vector<std::string> trace_lines(cfg.dump_traces ? n : 0);

  parallel_for(n, workers, [&](std::int64_t r) {
    rng::SplitMix64 stream(
        rng::derive(runs_seed, static_cast<std::uint64_t>(r)));
    Hypothesis hyp;
    if (cfg.stratified) {
      hyp = r < n_h0_target ? Hypothesis::H0 : Hypothesis::H1;
    } else {
      hyp = stream.next_uniform() < sc.priors.pi0 ? Hypothesis::H0
                                                  : Hypothesis::H1;
    }
    const Eigen::VectorXd x = sample_one(sc, hyp, stream);
    const std::vector<double> values = local_stats(set, x);
    const ProtocolTrace trace = run_ordered(values, tau, cfg.eta);
    const Decision cent = centralized_decide(sc, x);

    if (trace.decision != cent) {
      disagreements.fetch_add(1, std::memory_order_relaxed);
      long expected = -1;
      first_disagreement.compare_exchange_strong(expected, r);
    }
    sum_saved.fetch_add(trace.saved, std::memory_order_relaxed);
    stop_hist[trace.stop_index].fetch_add(1, std::memory_order_relaxed);
    const bool wrong = to_hypothesis(trace.decision) != hyp;
    if (hyp == Hypothesis::H0) {
      n_h0.fetch_add(1, std::memory_order_relaxed);
      if (wrong) err_h0.fetch_add(1, std::memory_order_relaxed);
    } else {
      n_h1.fetch_add(1, std::memory_order_relaxed);
      if (wrong) err_h1.fetch_add(1, std::memory_order_relaxed);
    }
    if (to_hypothesis(cent) != hyp)
      cent_err.fetch_add(1, std::memory_order_relaxed);

    if (cfg.dump_traces) {
      nlohmann::json j = trace_to_json(trace);
      j["run"] = r;
      j["hypothesis"] = hypothesis_name(hyp);
      trace_lines[r] = j.dump();
    }
  });

  if (disagreements.load() > 0)
    fail(Errc::EquivalenceViolation,
         "ordered and centralized decisions disagree on " +
             std::to_string(disagreements.load()) + " of " +
             std::to_string(n) + " runs (first at run " +
             std::to_string(first_disagreement.load()) + ")");

  res.stop_hist.resize(K + 1);
  for (int t = 0; t <= K; ++t) res.stop_hist[t] = stop_hist[t].load();
  res.avg_saved = static_cast<double>(sum_saved.load()) / n;
  res.frac_saved = res.avg_saved / K;
  res.n_h0 = n_h0.load();
  res.n_h1 = n_h1.load();
  res.errors_h0 = err_h0.load();
  res.errors_h1 = err_h1.load();
  res.error_rate =
      static_cast<double>(res.errors_h0 + res.errors_h1) / n;
  res.centralized_error_rate = static_cast<double>(cent_err.load()) / n;
  res.trace_lines = std::move(trace_lines);

  if (K > 1)
    res.bound = make_bound_report(set, sc, cfg.n_runs, cfg.seed, workers);
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

/// One experiment per K. Scenario parameters other than K are taken from the
/// base config; with a gamma-based schedule the sweep uses γ = 0.5/(2^K - 1)
/// per cell. Each cell gets an independent derived seed.
inline std::vector<ExperimentResult> sweep_k(const ExperimentConfig& base,
                                             const std::vector<int>& k_values) {
  require(!k_values.empty(), Errc::ConfigError, "sweep-k: no K values given");
  require(base.scenario.kind != ScenarioSpec::Kind::Custom, Errc::ConfigError,
          "sweep-k requires a generated (chain/tree) scenario");
  require(base.coefficients.kind == CoefficientsSpec::Kind::GammaAuto ||
              base.coefficients.kind == CoefficientsSpec::Kind::Gamma,
          Errc::ConfigError,
          "sweep-k requires a gamma coefficient schedule (explicit alpha "
          "lists do not transfer across K)");
  std::vector<ExperimentResult> out;
  out.reserve(k_values.size());
  const std::string base_id = base.config_id.empty()
                                  ? detail::default_config_id(base.scenario)
                                  : base.config_id;
  for (int k : k_values) {
    require(k >= 2, Errc::ConfigError, "sweep-k: every K must be >= 2");
    ExperimentConfig cell = base;
    cell.scenario.K = k;
    cell.coefficients.kind = CoefficientsSpec::Kind::GammaAuto;
    cell.seed = rng::derive(rng::derive(base.seed, rng::stream::kSweep),
                            static_cast<std::uint64_t>(k));
    cell.config_id = base_id + "_K" + std::to_string(k);
    out.push_back(run_experiment(cell));
  }
  return out;
}

/// One experiment per eigenvalue scale (chain alpha_scale / tree x).
inline std::vector<ExperimentResult> sweep_eigenvalue(
    const ExperimentConfig& base, const std::vector<double>& scale_values) {
  require(!scale_values.empty(), Errc::ConfigError,
          "sweep-eig: no scale values given");
  require(base.scenario.kind != ScenarioSpec::Kind::Custom, Errc::ConfigError,
          "sweep-eig requires a generated (chain/tree) scenario");
  std::vector<ExperimentResult> out;
  out.reserve(scale_values.size());
  const std::string base_id = base.config_id.empty()
                                  ? detail::default_config_id(base.scenario)
                                  : base.config_id;
  std::uint64_t cell_index = 0;
  for (double s : scale_values) {
    require(std::isfinite(s) && s > 0.0, Errc::ConfigError,
            "sweep-eig: scales must be positive");
    ExperimentConfig cell = base;
    cell.scenario.scale = s;
    cell.seed = rng::derive(rng::derive(base.seed, rng::stream::kSweep),
                            0x1000 + cell_index++);
    cell.config_id = base_id + "_s" + csv_num(s);
    out.push_back(run_experiment(cell));
  }
  return out;
}

// --- frozen CSV schemas ----------------------------------------------------

inline std::string results_csv(const std::vector<ExperimentResult>& rows) {
  std::string out = "# ggmcov.results.v1\n";
  out +=
      "config_id,K,scale,lambda_min,n_runs,avg_saved,frac_saved,bound,"
      "bound_stderr,error_rate,seed\n";
  for (const auto& r : rows) {
    out += r.config_id;
    out += ',' + std::to_string(r.K);
    out += ',' + csv_num(r.scale);
    out += ',' + csv_num(r.lambda_min);
    out += ',' + std::to_string(r.n_runs);
    out += ',' + csv_num(r.avg_saved);
    out += ',' + csv_num(r.frac_saved);
    out += ',' + csv_num(r.bound.ks_lower);
    out += ',' + csv_num(r.bound.ks_lower_stderr);
    out += ',' + csv_num(r.error_rate);
    out += ',' + std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

inline std::string stop_hist_csv(const std::vector<ExperimentResult>& rows) {
  std::string out = "# ggmcov.stophist.v1\n";
  out += "config_id,stop_index,count\n";
  for (const auto& r : rows)
    for (int t = 1; t < static_cast<int>(r.stop_hist.size()); ++t)
      out += r.config_id + ',' + std::to_string(t) + ',' +
             std::to_string(r.stop_hist[t]) + '\n';
  return out;
}

/// Gnuplot-friendly sweep data, one row per cell, matching the usual plot
/// axes: the K sweep carries the ⌈K/2⌉-1 reference, the eigenvalue sweep the
/// per-scale bound fraction.
inline std::string sweep_plot_dat(const std::vector<ExperimentResult>& rows,
                                  bool k_sweep) {
  std::string out;
  if (k_sweep) {
    out += "# K avg_saved bound ks_limit\n";
    for (const auto& r : rows)
      out += std::to_string(r.K) + ' ' + csv_num(r.avg_saved) + ' ' +
             csv_num(r.bound.ks_lower) + ' ' + csv_num(r.bound.ks_limit) + '\n';
  } else {
    out += "# scale lambda_min frac_saved bound_frac\n";
    for (const auto& r : rows)
      out += csv_num(r.scale) + ' ' + csv_num(r.lambda_min) + ' ' +
             csv_num(r.frac_saved) + ' ' +
             csv_num(r.K > 0 ? r.bound.ks_lower / r.K : 0.0) + '\n';
  }
  return out;
}

}  // namespace ggmcov
