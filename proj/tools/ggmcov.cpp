// Command-line front end: validate configs, run experiments and sweeps,
// compute savings bounds, and dump statistic decompositions. Every behavior
// here is a thin adapter over the library; results match direct library
// calls exactly.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ggmcov/config.hpp"
#include "ggmcov/experiment.hpp"
#include "ggmcov/io.hpp"
#include "ggmcov/rng.hpp"

namespace {

using namespace ggmcov;

struct CliOptions {
  std::string config_path;
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> n_runs;
  std::optional<double> eta;
  std::optional<int> workers;
  bool dump_traces = false;
  bool verbose = false;
  std::vector<int> k_values;
  std::vector<double> scales;
  std::optional<std::uint64_t> x_from_seed;
};

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Errc::ConfigError, "cannot write " + path.string());
  out << content;
  require(out.good(), Errc::ConfigError, "failed writing " + path.string());
}

ExperimentConfig load_config(const CliOptions& opt) {
  const nlohmann::json doc = load_json_file(opt.config_path);
  require(!is_graph_only_config(doc), Errc::ConfigError,
          "this subcommand needs a full experiment config with a "
          "\"scenario\" section");
  ExperimentConfig cfg = parse_experiment_config(doc);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.n_runs) cfg.n_runs = *opt.n_runs;
  if (opt.eta) cfg.eta = *opt.eta;
  if (opt.workers) cfg.workers = *opt.workers;
  cfg.dump_traces = opt.dump_traces;
  if (!opt.k_values.empty()) cfg.k_values = opt.k_values;
  if (!opt.scales.empty()) cfg.scale_values = opt.scales;
  return cfg;
}

void print_summary(const std::vector<ExperimentResult>& rows) {
  std::printf("%-24s %4s %7s %10s %10s %9s %18s %7s %10s %8s\n", "config_id",
              "K", "n_runs", "avg_saved", "frac_saved", "err_rate",
              "bound(+/-se)", "limit", "lambda_min", "secs");
  for (const auto& r : rows) {
    char bound[40];
    std::snprintf(bound, sizeof(bound), "%.4f+/-%.4f", r.bound.ks_lower,
                  r.bound.ks_lower_stderr);
    std::printf("%-24s %4d %7d %10.4f %10.4f %9.5f %18s %7.0f %10.4g %8.2f%s\n",
                r.config_id.c_str(), r.K, r.n_runs, r.avg_saved, r.frac_saved,
                r.error_rate, bound, r.bound.ks_limit, r.lambda_min,
                r.wall_seconds, r.degenerate ? "  [degenerate]" : "");
  }
}

void write_outputs(const CliOptions& opt, const std::vector<ExperimentResult>& rows) {
  write_file(opt.output_dir, "results.csv", results_csv(rows));
  write_file(opt.output_dir, "stop_hist.csv", stop_hist_csv(rows));
  if (opt.dump_traces) {
    std::string lines;
    for (const auto& r : rows)
      for (const auto& line : r.trace_lines) {
        lines += line;
        lines += '\n';
      }
    write_file(opt.output_dir, "traces.jsonl", lines);
  }
}

int cmd_validate(const CliOptions& opt) {
  const nlohmann::json doc = load_json_file(opt.config_path);
  if (is_graph_only_config(doc)) {
    const DecomposableGraph g = parse_graph_config(doc);
    std::printf("graph OK: N=%d, K=%d\n", g.n_nodes, g.num_cliques());
    for (int k = 2; k <= g.num_cliques(); ++k)
      std::printf("  S_%d: |S|=%zu, q(%d)=%d\n", k, g.separator(k).size(), k,
                  g.q(k));
    return 0;
  }
  ExperimentConfig cfg = load_config(opt);
  const GgmScenario sc = build_scenario(cfg.scenario, cfg.priors, cfg.seed);
  const SplitCoefficients coeffs =
      build_coefficients(cfg.coefficients, sc.num_cliques());
  build_local_set(sc, coeffs);
  std::printf("scenario OK: N=%d, K=%d, lambda_min=%.6g, log det Sigma=%.6g, "
              "seed=%llu\n",
              sc.n_nodes(), sc.num_cliques(), min_clique_eigenvalue(sc),
              sc.log_det_cov, static_cast<unsigned long long>(cfg.seed));
  return 0;
}

int cmd_simulate(const CliOptions& opt) {
  const ExperimentConfig cfg = load_config(opt);
  std::printf("effective seed: %llu\n",
              static_cast<unsigned long long>(cfg.seed));
  const std::vector<ExperimentResult> rows = {run_experiment(cfg)};
  write_outputs(opt, rows);
  print_summary(rows);
  return 0;
}

int cmd_sweep(const CliOptions& opt, bool k_sweep) {
  const ExperimentConfig cfg = load_config(opt);
  std::printf("effective seed: %llu\n",
              static_cast<unsigned long long>(cfg.seed));
  std::vector<ExperimentResult> rows;
  if (k_sweep) {
    require(!cfg.k_values.empty(), Errc::ConfigError,
            "sweep-k: provide k_values in the config or --k-values");
    rows = sweep_k(cfg, cfg.k_values);
  } else {
    require(!cfg.scale_values.empty(), Errc::ConfigError,
            "sweep-eig: provide scale_values in the config or --scales");
    rows = sweep_eigenvalue(cfg, cfg.scale_values);
  }
  write_outputs(opt, rows);
  write_file(opt.output_dir, "sweep_plot.dat", sweep_plot_dat(rows, k_sweep));
  print_summary(rows);
  return 0;
}

int cmd_bound(const CliOptions& opt) {
  const ExperimentConfig cfg = load_config(opt);
  std::printf("effective seed: %llu\n",
              static_cast<unsigned long long>(cfg.seed));
  const GgmScenario sc = build_scenario(cfg.scenario, cfg.priors, cfg.seed);
  const int K = sc.num_cliques();
  const LocalStatisticSet set =
      build_local_set(sc, build_coefficients(cfg.coefficients, K));
  require(K > 1, Errc::BadK, "the savings bounds require K > 1");
  const BoundReport rep = make_bound_report(set, sc, cfg.n_runs, cfg.seed,
                                            resolve_workers(cfg.workers));

  nlohmann::json j = bound_report_to_json(rep);
  j["kl_per_clique"] = kl_per_clique(sc);
  nlohmann::json spec = nlohmann::json::array();
  for (const auto& s : jk_spectrum_report(set))
    spec.push_back({{"min_eig", s.min_eig},
                    {"max_eig", s.max_eig},
                    {"positive_definite", s.positive_definite}});
  j["jk_spectrum"] = spec;
  write_file(opt.output_dir, "bound.json", j.dump(2) + "\n");

  // CSV row in the frozen results schema; simulation-only fields are nan.
  ExperimentResult row;
  row.config_id = cfg.config_id.empty()
                      ? "bound_k" + std::to_string(K)
                      : cfg.config_id;
  row.K = K;
  row.scale = cfg.scenario.kind == ScenarioSpec::Kind::Custom
                  ? 0.0
                  : cfg.scenario.scale;
  row.lambda_min = min_clique_eigenvalue(sc);
  row.n_runs = cfg.n_runs;
  row.seed = cfg.seed;
  row.avg_saved = row.frac_saved = row.error_rate =
      std::numeric_limits<double>::quiet_NaN();
  row.bound = rep;
  write_file(opt.output_dir, "bound.csv", results_csv({row}));

  std::printf("K=%d  delta0=%.6g  delta1=%.6g\n", K, rep.delta0, rep.delta1);
  std::printf("savings lower bound: %.6g +/- %.6g (limit %.6g, n=%d)\n",
              rep.ks_lower, rep.ks_lower_stderr, rep.ks_limit, rep.n_samples);
  if (opt.verbose) {
    for (int k = 1; k <= K; ++k)
      std::printf("  k=%-3d P_D=%.4f+/-%.4f  P_f=%.4f+/-%.4f\n", k,
                  rep.pd[k - 1], rep.pd_stderr[k - 1], rep.pf[k - 1],
                  rep.pf_stderr[k - 1]);
  }
  return 0;
}

int cmd_decompose(const CliOptions& opt) {
  const ExperimentConfig cfg = load_config(opt);
  const GgmScenario sc = build_scenario(cfg.scenario, cfg.priors, cfg.seed);
  const LocalStatisticSet set =
      build_local_set(sc, build_coefficients(cfg.coefficients, sc.num_cliques()));

  const std::uint64_t obs_seed = opt.x_from_seed.value_or(cfg.seed);
  rng::SplitMix64 stream(rng::derive(obs_seed, rng::stream::kObservation));
  const Hypothesis hyp = stream.next_uniform() < sc.priors.pi0
                             ? Hypothesis::H0
                             : Hypothesis::H1;
  const Eigen::VectorXd x = sample_one(sc, hyp, stream);

  std::printf("observation drawn under %s (seed %llu)\n", hypothesis_name(hyp),
              static_cast<unsigned long long>(obs_seed));
  double sum = 0.0;
  for (int k = 1; k <= sc.num_cliques(); ++k) {
    const double lk = local_stat(set, k, x);
    sum += lk;
    std::printf("  L_%-3d = %+.10g\n", k, lk);
  }
  const double t_value = centralized_stat(sc, x);
  const double tol = 1e-8 * (1.0 + std::abs(t_value));
  const bool match = std::abs(t_value - sum) <= tol;
  std::printf("sum(L_k) = %+.10g\n", sum);
  std::printf("T(x)     = %+.10g\n", t_value);
  std::printf("|T - sum| = %.3g (tol %.3g) -> %s\n", std::abs(t_value - sum),
              tol, match ? "MATCH" : "MISMATCH");
  const EquivalenceCheck eq = verify_equivalence(sc, set, x, cfg.eta);
  std::printf("ordered decision: %s   centralized decision: %s   saved: %d/%d\n",
              decision_name(eq.trace.decision), decision_name(eq.centralized),
              eq.trace.saved, sc.num_cliques());
  require(match && eq.agreement, Errc::EquivalenceViolation,
          "decomposition identity or protocol equivalence failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustered GGM covariance testing with ordered transmissions"};
  app.require_subcommand(1);

  CliOptions opt;
  auto add_common = [&](CLI::App* sub, bool with_outputs) {
    sub->add_option("--config", opt.config_path, "JSON config file")
        ->required();
    sub->add_option("--seed", opt.seed, "override the top-level seed");
    sub->add_option("--n-runs", opt.n_runs, "override the number of runs");
    sub->add_option("--eta", opt.eta, "override the timer scale");
    sub->add_option("--workers", opt.workers,
                    "worker threads (default: available parallelism)");
    sub->add_flag("-v,--verbose", opt.verbose, "more detail on stdout");
    if (with_outputs)
      sub->add_option("--output-dir", opt.output_dir,
                      "directory for CSV/JSON outputs (default .)");
  };

  CLI::App* validate = app.add_subcommand("validate", "validate a config file");
  add_common(validate, false);

  CLI::App* simulate =
      app.add_subcommand("simulate", "run one Monte Carlo experiment");
  add_common(simulate, true);
  simulate->add_flag("--dump-traces", opt.dump_traces,
                     "write per-run protocol traces (traces.jsonl)");

  CLI::App* sweepk =
      app.add_subcommand("sweep-k", "sweep the number of clusters");
  add_common(sweepk, true);
  sweepk->add_option("--k-values", opt.k_values, "cluster counts to sweep");

  CLI::App* sweepeig =
      app.add_subcommand("sweep-eig", "sweep the eigenvalue scale");
  add_common(sweepeig, true);
  sweepeig->add_option("--scales", opt.scales, "eigenvalue scales to sweep");

  CLI::App* bound =
      app.add_subcommand("bound", "compute the transmission-savings bounds");
  add_common(bound, true);

  CLI::App* decompose = app.add_subcommand(
      "decompose", "print the local statistic decomposition for one draw");
  add_common(decompose, false);
  decompose->add_option("--x-from-seed", opt.x_from_seed,
                        "seed for the printed observation (default: config seed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
      return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (sweepk->parsed()) return cmd_sweep(opt, true);
    if (sweepeig->parsed()) return cmd_sweep(opt, false);
    if (bound->parsed()) return cmd_bound(opt);
    if (decompose->parsed()) return cmd_decompose(opt);
  } catch (const ggmcov::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  }
  return 0;
}
