#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ggmcov/errors.hpp"
#include "ggmcov/experiment.hpp"

namespace ggmcov {

namespace cfg_detail {

using nlohmann::json;

inline const json& member(const json& j, const std::string& key,
                          const std::string& where) {
  auto it = j.find(key);
  require(it != j.end(), Errc::ConfigError,
          where + ": missing required key \"" + key + "\"");
  return *it;
}

inline void reject_unknown_keys(const json& j,
                                const std::set<std::string>& allowed,
                                const std::string& where) {
  require(j.is_object(), Errc::ConfigError, where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    require(allowed.count(it.key()) != 0, Errc::ConfigError,
            where + ": unknown key \"" + it.key() + "\"");
}

inline int as_int(const json& j, const std::string& where) {
  require(j.is_number_integer(), Errc::ConfigError,
          where + ": expected an integer");
  return j.get<int>();
}

inline double as_num(const json& j, const std::string& where) {
  require(j.is_number(), Errc::ConfigError, where + ": expected a number");
  return j.get<double>();
}

inline std::uint64_t as_seed(const json& j, const std::string& where) {
  require(j.is_number_integer(), Errc::ConfigError,
          where + ": expected an integer seed");
  if (!j.is_number_unsigned())
    require(j.get<long long>() >= 0, Errc::ConfigError,
            where + ": seed must be non-negative");
  return j.get<std::uint64_t>();
}

inline std::vector<double> as_num_list(const json& j, const std::string& where) {
  require(j.is_array(), Errc::ConfigError, where + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(as_num(v, where));
  return out;
}

inline Eigen::MatrixXd as_matrix(const json& j, const std::string& where) {
  require(j.is_array() && !j.empty(), Errc::ConfigError,
          where + ": expected a non-empty array of rows");
  const std::size_t n = j.size();
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    require(j[i].is_array() && j[i].size() == n, Errc::ConfigError,
            where + ": row " + std::to_string(i) + " must have " +
                std::to_string(n) + " entries (square matrix)");
    for (std::size_t k = 0; k < n; ++k)
      m(i, k) = as_num(j[i][k], where);
  }
  return m;
}

}  // namespace cfg_detail

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::ConfigError, "cannot open config file " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::ConfigError, "config file " + path + ": " + e.what());
  }
}

/// True when the document is a bare graph spec ({"n_nodes","cliques"} or a
/// generator shorthand) rather than a full experiment config.
inline bool is_graph_only_config(const nlohmann::json& j) {
  return j.is_object() && !j.contains("scenario");
}

/// Parses {"n_nodes": N, "cliques": [[...]]} or the generator shorthands
/// {"chain": {"k","m","s"}} / {"tree": {"k","m","s"}} into a validated graph.
inline DecomposableGraph parse_graph_config(const nlohmann::json& j) {
  using namespace cfg_detail;
  reject_unknown_keys(j, {"n_nodes", "cliques", "chain", "tree"}, "graph");
  const bool explicit_form = j.contains("n_nodes") || j.contains("cliques");
  const bool generator_form = j.contains("chain") || j.contains("tree");
  require(explicit_form != generator_form, Errc::ConfigError,
          "graph: give either n_nodes+cliques or one generator shorthand");
  if (explicit_form) {
    const int n = as_int(member(j, "n_nodes", "graph"), "graph.n_nodes");
    const auto& cl = member(j, "cliques", "graph");
    require(cl.is_array() && !cl.empty(), Errc::ConfigError,
            "graph.cliques: expected a non-empty array of node lists");
    std::vector<std::vector<int>> cliques;
    for (const auto& c : cl) {
      require(c.is_array(), Errc::ConfigError,
              "graph.cliques: each clique must be an array of node ids");
      std::vector<int> nodes;
      for (const auto& v : c) nodes.push_back(as_int(v, "graph.cliques"));
      cliques.push_back(std::move(nodes));
    }
    return validate_perfect_sequence(cliques, n);
  }
  require(!(j.contains("chain") && j.contains("tree")), Errc::ConfigError,
          "graph: give only one generator shorthand");
  const bool chain = j.contains("chain");
  const auto& g = chain ? j["chain"] : j["tree"];
  const std::string where = chain ? "graph.chain" : "graph.tree";
  reject_unknown_keys(g, {"k", "m", "s"}, where);
  const int k = as_int(member(g, "k", where), where + ".k");
  const int m = as_int(member(g, "m", where), where + ".m");
  const int s = as_int(member(g, "s", where), where + ".s");
  return chain ? chain_graph(k, m, s) : binary_tree_graph(k, m, s);
}

inline ScenarioSpec parse_scenario_spec(const nlohmann::json& j) {
  using namespace cfg_detail;
  reject_unknown_keys(j, {"chain", "tree", "custom"}, "scenario");
  require(j.size() == 1, Errc::ConfigError,
          "scenario: give exactly one of chain/tree/custom");
  ScenarioSpec spec;
  if (j.contains("chain")) {
    const auto& c = j["chain"];
    reject_unknown_keys(c, {"k", "m", "alpha_scale"}, "scenario.chain");
    spec.kind = ScenarioSpec::Kind::Chain;
    spec.K = as_int(member(c, "k", "scenario.chain"), "scenario.chain.k");
    spec.M = as_int(member(c, "m", "scenario.chain"), "scenario.chain.m");
    spec.scale = as_num(member(c, "alpha_scale", "scenario.chain"),
                        "scenario.chain.alpha_scale");
  } else if (j.contains("tree")) {
    const auto& t = j["tree"];
    reject_unknown_keys(t, {"k", "x"}, "scenario.tree");
    spec.kind = ScenarioSpec::Kind::Tree;
    spec.K = as_int(member(t, "k", "scenario.tree"), "scenario.tree.k");
    spec.M = 4;
    spec.scale = as_num(member(t, "x", "scenario.tree"), "scenario.tree.x");
  } else {
    const auto& c = j["custom"];
    reject_unknown_keys(c, {"graph", "clique_covs"}, "scenario.custom");
    spec.kind = ScenarioSpec::Kind::Custom;
    spec.graph = parse_graph_config(member(c, "graph", "scenario.custom"));
    const auto& covs = member(c, "clique_covs", "scenario.custom");
    require(covs.is_array(), Errc::ConfigError,
            "scenario.custom.clique_covs: expected an array of matrices");
    for (std::size_t i = 0; i < covs.size(); ++i)
      spec.clique_covs.push_back(
          as_matrix(covs[i], "scenario.custom.clique_covs[" +
                                 std::to_string(i) + "]"));
    spec.K = spec.graph.num_cliques();
  }
  return spec;
}

inline CoefficientsSpec parse_coefficients_spec(const nlohmann::json& j) {
  using namespace cfg_detail;
  reject_unknown_keys(j, {"gamma", "alpha"}, "coefficients");
  require(j.size() == 1, Errc::ConfigError,
          "coefficients: give exactly one of gamma/alpha");
  CoefficientsSpec spec;
  if (j.contains("gamma")) {
    if (j["gamma"].is_string()) {
      require(j["gamma"].get<std::string>() == "auto", Errc::ConfigError,
              "coefficients.gamma: expected a number or \"auto\"");
      spec.kind = CoefficientsSpec::Kind::GammaAuto;
    } else {
      spec.kind = CoefficientsSpec::Kind::Gamma;
      spec.gamma = as_num(j["gamma"], "coefficients.gamma");
    }
  } else {
    spec.kind = CoefficientsSpec::Kind::Explicit;
    spec.alpha = as_num_list(j["alpha"], "coefficients.alpha");
  }
  return spec;
}

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  using namespace cfg_detail;
  reject_unknown_keys(j,
                      {"id", "scenario", "coefficients", "priors", "n_runs",
                       "seed", "eta", "stratified", "k_values", "scale_values"},
                      "config");
  ExperimentConfig cfg;
  if (j.contains("id")) {
    require(j["id"].is_string(), Errc::ConfigError, "id: expected a string");
    cfg.config_id = j["id"].get<std::string>();
  }
  cfg.scenario = parse_scenario_spec(member(j, "scenario", "config"));
  if (j.contains("coefficients"))
    cfg.coefficients = parse_coefficients_spec(j["coefficients"]);
  if (j.contains("priors")) {
    const auto& p = j["priors"];
    reject_unknown_keys(p, {"pi0", "pi1"}, "priors");
    cfg.priors = make_priors(as_num(member(p, "pi0", "priors"), "priors.pi0"),
                             as_num(member(p, "pi1", "priors"), "priors.pi1"));
  }
  if (j.contains("n_runs")) {
    cfg.n_runs = as_int(j["n_runs"], "n_runs");
    require(cfg.n_runs >= 1, Errc::ConfigError, "n_runs must be >= 1");
  }
  if (j.contains("seed")) cfg.seed = as_seed(j["seed"], "seed");
  if (j.contains("eta")) {
    cfg.eta = as_num(j["eta"], "eta");
    require(cfg.eta > 0.0, Errc::ConfigError, "eta must be positive");
  }
  if (j.contains("stratified")) {
    require(j["stratified"].is_boolean(), Errc::ConfigError,
            "stratified: expected a boolean");
    cfg.stratified = j["stratified"].get<bool>();
  }
  if (j.contains("k_values")) {
    require(j["k_values"].is_array(), Errc::ConfigError,
            "k_values: expected an array of integers");
    for (const auto& v : j["k_values"])
      cfg.k_values.push_back(as_int(v, "k_values"));
  }
  if (j.contains("scale_values"))
    cfg.scale_values = as_num_list(j["scale_values"], "scale_values");
  return cfg;
}

}  // namespace ggmcov
