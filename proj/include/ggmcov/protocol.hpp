#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "ggmcov/errors.hpp"
#include "ggmcov/statistic.hpp"

namespace ggmcov {

/// Full record of one ordered-transmission run. Receptions happen in
/// decreasing |L_k| (ties broken by ascending cluster index, zero magnitudes
/// last, matching the η/|L_k| timer semantics in the limit). After the t-th
/// reception the fusion center evaluates
///   τ_U = 2τ + (K-t)·|L̃_t|,   τ_L = 2τ - (K-t)·|L̃_t|
/// and stops with H1 when the running sum is >= τ_U, with H0 when it is
/// < τ_L. At t = K both thresholds collapse to 2τ, so a decision is always
/// reached and it coincides with the centralized rule.
struct ProtocolTrace {
  std::vector<int> order;       // all K cluster indices in reception order
  std::vector<double> timers;   // η/|L_k| along `order`; +inf for |L_k| = 0
  std::vector<int> received;    // transmitted prefix of `order`
  std::vector<double> running_sums;                  // after each reception
  std::vector<std::pair<double, double>> thresholds; // (τ_U, τ_L) per reception
  int stop_index = 0;           // number of transmissions made
  Decision decision = Decision::H0;
  int saved = 0;                // K - stop_index
  double eta = 1.0;
  bool fc_stop_broadcast = false;  // FC sent a halt message (early stop);
                                   // not charged against the savings count
};

/// Runs the ordered-transmission protocol on the K local statistic values.
/// Event-ordered simulation: η only scales the recorded timer values and has
/// no effect on the trace otherwise.
inline ProtocolTrace run_ordered(const std::vector<double>& local_values,
                                 double tau, double eta = 1.0) {
  const int K = static_cast<int>(local_values.size());
  require(K >= 1, Errc::DimensionMismatch, "need at least one local value");
  require(std::isfinite(tau), Errc::DegenerateInput, "tau must be finite");
  require(std::isfinite(eta) && eta > 0.0, Errc::DegenerateInput,
          "eta must be positive");
  for (double v : local_values)
    require(std::isfinite(v), Errc::DegenerateInput,
            "local statistic values must be finite");

  ProtocolTrace trace;
  trace.eta = eta;
  trace.order.resize(K);
  std::iota(trace.order.begin(), trace.order.end(), 1);
  std::sort(trace.order.begin(), trace.order.end(), [&](int a, int b) {
    const double ma = std::abs(local_values[a - 1]);
    const double mb = std::abs(local_values[b - 1]);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  trace.timers.reserve(K);
  for (int k : trace.order) {
    const double mag = std::abs(local_values[k - 1]);
    trace.timers.push_back(mag == 0.0
                               ? std::numeric_limits<double>::infinity()
                               : eta / mag);
  }

  const double two_tau = 2.0 * tau;
  double sum = 0.0;
  for (int t = 1; t <= K; ++t) {
    const int k = trace.order[t - 1];
    sum += local_values[k - 1];
    const int n_ut = K - t;
    const double last_mag = std::abs(local_values[k - 1]);
    const double tau_u = two_tau + n_ut * last_mag;
    const double tau_l = two_tau - n_ut * last_mag;
    trace.received.push_back(k);
    trace.running_sums.push_back(sum);
    trace.thresholds.emplace_back(tau_u, tau_l);
    if (sum >= tau_u) {
      trace.decision = Decision::H1;
      trace.stop_index = t;
      break;
    }
    if (sum < tau_l) {
      trace.decision = Decision::H0;
      trace.stop_index = t;
      break;
    }
  }
  trace.saved = K - trace.stop_index;
  trace.fc_stop_broadcast = trace.stop_index < K;
  return trace;
}

struct EquivalenceCheck {
  ProtocolTrace trace;
  Decision centralized = Decision::H0;
  bool agreement = false;
};

/// Runs the ordered protocol and the centralized rule on the same x. The two
/// decisions agree for every input; a disagreement signals an implementation
/// bug and is surfaced through `agreement` so tests and the Monte Carlo
/// harness can assert on it.
inline EquivalenceCheck verify_equivalence(const GgmScenario& sc,
                                           const LocalStatisticSet& set,
                                           const Eigen::VectorXd& x,
                                           double eta = 1.0) {
  EquivalenceCheck out;
  const double tau = bayes_threshold(sc.priors);
  out.trace = run_ordered(local_stats(set, x), tau, eta);
  out.centralized = centralized_decide(sc, x);
  out.agreement = out.trace.decision == out.centralized;
  return out;
}

}  // namespace ggmcov
