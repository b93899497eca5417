#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "ggmcov/bounds.hpp"
#include "ggmcov/protocol.hpp"

namespace ggmcov {

/// Fixed CSV number format; keeps emitted files byte-stable for a given
/// build so reproducibility can be checked by file comparison.
inline std::string csv_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline const char* hypothesis_name(Hypothesis h) {
  return h == Hypothesis::H1 ? "H1" : "H0";
}

inline const char* decision_name(Decision d) {
  return d == Decision::H1 ? "H1" : "H0";
}

/// One trace as a JSON object (one line of a .jsonl dump). Infinite timers
/// (zero-magnitude statistics) serialize as null.
inline nlohmann::json trace_to_json(const ProtocolTrace& trace) {
  nlohmann::json j;
  j["order"] = trace.order;
  nlohmann::json timers = nlohmann::json::array();
  for (double t : trace.timers) {
    if (std::isfinite(t))
      timers.push_back(t);
    else
      timers.push_back(nullptr);
  }
  j["timers"] = timers;
  j["received"] = trace.received;
  j["running_sums"] = trace.running_sums;
  nlohmann::json th = nlohmann::json::array();
  for (const auto& [u, l] : trace.thresholds) th.push_back({u, l});
  j["thresholds"] = th;
  j["stop_index"] = trace.stop_index;
  j["decision"] = decision_name(trace.decision);
  j["saved"] = trace.saved;
  j["eta"] = trace.eta;
  j["fc_stop_broadcast"] = trace.fc_stop_broadcast;
  return j;
}

inline nlohmann::json bound_report_to_json(const BoundReport& rep) {
  nlohmann::json j;
  j["delta0"] = rep.delta0;
  j["delta1"] = rep.delta1;
  j["pd"] = rep.pd;
  j["pd_stderr"] = rep.pd_stderr;
  j["pf"] = rep.pf;
  j["pf_stderr"] = rep.pf_stderr;
  j["ks_lower"] = rep.ks_lower;
  j["ks_lower_stderr"] = rep.ks_lower_stderr;
  j["ks_limit"] = rep.ks_limit;
  j["n_samples"] = rep.n_samples;
  j["seed"] = rep.seed;
  return j;
}

}  // namespace ggmcov
