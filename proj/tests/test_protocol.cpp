#include "catch_helpers.hpp"

#include <cmath>
#include <vector>

#include "ggmcov/protocol.hpp"
#include "helpers.hpp"

using namespace ggmcov;

TEST_CASE("hand-traced three-cluster run") {
  // values (10, 1, -1), tau = 0: after the first reception sum=10 and
  // tau_U = 2*10 = 20 (no stop); after the second sum=11 and tau_U = 1,
  // so the protocol stops with H1 having saved one transmission.
  const ProtocolTrace t = run_ordered({10.0, 1.0, -1.0}, 0.0);
  CHECK(t.order == std::vector<int>{1, 2, 3});  // tie |1| vs |-1| -> index
  CHECK(t.stop_index == 2);
  CHECK(t.decision == Decision::H1);
  CHECK(t.saved == 1);
  REQUIRE(t.running_sums.size() == 2);
  CHECK(t.running_sums[0] == 10.0);
  CHECK(t.running_sums[1] == 11.0);
  CHECK(t.thresholds[0].first == 20.0);
  CHECK(t.thresholds[0].second == -20.0);
  CHECK(t.thresholds[1].first == 1.0);
  CHECK(t.thresholds[1].second == -1.0);
  CHECK(t.fc_stop_broadcast);
}

TEST_CASE("all-zero statistics stop after one transmission deciding H1") {
  for (int K : {1, 3, 8}) {
    const ProtocolTrace t = run_ordered(std::vector<double>(K, 0.0), 0.0);
    CHECK(t.stop_index == 1);
    CHECK(t.decision == Decision::H1);
    CHECK(t.saved == K - 1);
    CHECK(std::isinf(t.timers[0]));
  }
  // with nonzero tau the collapsed thresholds still settle in one reception,
  // matching the sign of 0 - 2*tau under the >= convention
  const ProtocolTrace pos = run_ordered(std::vector<double>(4, 0.0), -1.0);
  CHECK(pos.stop_index == 1);
  CHECK(pos.decision == Decision::H1);
  const ProtocolTrace neg = run_ordered(std::vector<double>(4, 0.0), 1.0);
  CHECK(neg.stop_index == 1);
  CHECK(neg.decision == Decision::H0);
}

TEST_CASE("a run that never exits the threshold corridor uses all K") {
  // order is (-1.5, 1, 0.25): sums -1.5, -0.5, -0.25 stay strictly inside
  // (tau_L, tau_U) until the last reception decides by sign against 2*tau.
  const ProtocolTrace t = run_ordered({1.0, -1.5, 0.25}, 0.0);
  CHECK(t.order == std::vector<int>{2, 1, 3});
  CHECK(t.stop_index == 3);
  CHECK(t.decision == Decision::H0);
  CHECK(t.saved == 0);
  CHECK_FALSE(t.fc_stop_broadcast);

  // K=2 boundary: the first sum lands exactly on tau_L, which does not stop
  // (stopping needs sum strictly below tau_L)
  const ProtocolTrace b = run_ordered({1.0, -1.5}, 0.0);
  CHECK(b.running_sums[0] == b.thresholds[0].second);
  CHECK(b.stop_index == 2);
  CHECK(b.decision == Decision::H0);
}

TEST_CASE("zero-magnitude values sort last and collapse the thresholds") {
  const ProtocolTrace t = run_ordered({0.0, -2.0, 1.0}, 0.3);
  CHECK(t.order == std::vector<int>{2, 3, 1});
  CHECK(std::isinf(t.timers[2]));
}

TEST_CASE("eta only scales the recorded timers") {
  const std::vector<double> values = {3.0, -1.0, 0.5, 2.0};
  const ProtocolTrace a = run_ordered(values, 0.2, 1.0);
  const ProtocolTrace b = run_ordered(values, 0.2, 7.5);
  CHECK(a.order == b.order);
  CHECK(a.stop_index == b.stop_index);
  CHECK(a.decision == b.decision);
  for (std::size_t i = 0; i < values.size(); ++i)
    CHECK(b.timers[i] == 7.5 * a.timers[i]);
  CHECK_THROWS_CODE(run_ordered(values, 0.0, 0.0), Errc::DegenerateInput);
  CHECK_THROWS_CODE(run_ordered({1.0, std::nan("")}, 0.0), Errc::DegenerateInput);
}

TEST_CASE("bookkeeping lengths match the stop index") {
  rng::SplitMix64 stream(44);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 1 + static_cast<int>(stream.next_u64() % 10);
    std::vector<double> values(K);
    for (int k = 0; k < K; ++k) values[k] = 3.0 * stream.next_normal();
    const double tau = stream.next_normal();
    const ProtocolTrace t = run_ordered(values, tau);
    CHECK(t.running_sums.size() == static_cast<std::size_t>(t.stop_index));
    CHECK(t.thresholds.size() == static_cast<std::size_t>(t.stop_index));
    CHECK(t.received.size() == static_cast<std::size_t>(t.stop_index));
    CHECK(t.order.size() == static_cast<std::size_t>(K));
    CHECK(t.saved == K - t.stop_index);
    CHECK(t.stop_index >= 1);
    // magnitudes along the order are non-increasing
    for (std::size_t i = 1; i < t.order.size(); ++i)
      CHECK(std::abs(values[t.order[i - 1] - 1]) >=
            std::abs(values[t.order[i] - 1]));
  }
}

TEST_CASE("correctness sandwich: adversarial completion cannot flip a stop") {
  rng::SplitMix64 stream(4711);
  int early_stops = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int K = 2 + static_cast<int>(stream.next_u64() % 9);
    std::vector<double> values(K);
    for (int k = 0; k < K; ++k) values[k] = 2.0 * stream.next_normal();
    const double tau = 0.5 * stream.next_normal();
    const ProtocolTrace t = run_ordered(values, tau);
    if (t.stop_index == K) continue;
    ++early_stops;
    const double last_mag = std::abs(values[t.order[t.stop_index - 1] - 1]);
    // replace every untransmitted value by +/- last_mag, chosen against the
    // decision, and verify the centralized sign test cannot change
    double sum = t.running_sums.back();
    for (int i = t.stop_index; i < K; ++i)
      sum += t.decision == Decision::H1 ? -last_mag : last_mag;
    // slack absorbs the rounding of the sequential re-accumulation only
    const double slack =
        1e-12 * (std::abs(t.running_sums.back()) + K * last_mag + 1.0);
    if (t.decision == Decision::H1)
      CHECK(sum >= 2.0 * tau - slack);
    else
      CHECK(sum < 2.0 * tau + slack);
  }
  CHECK(early_stops > 100);  // the property must actually get exercised
}

TEST_CASE("equivalence with the centralized rule on random draws") {
  const GgmScenario sc = make_chain_scenario(5, 3, 10.0, Priors{0.5, 0.5}, 6);
  const LocalStatisticSet set =
      build_local_set(sc, gamma_schedule(5, auto_gamma(5)));
  int agreements = 0, total = 0;
  for (Hypothesis hyp : {Hypothesis::H0, Hypothesis::H1}) {
    const auto draws = sample(sc, hyp, 5000, 90);
    for (const auto& x : draws) {
      const EquivalenceCheck eq = verify_equivalence(sc, set, x);
      agreements += eq.agreement ? 1 : 0;
      ++total;
    }
  }
  CHECK(agreements == total);
  CHECK(total == 10000);
}

TEST_CASE("identity model: both paths decide H1 on the tie") {
  const DecomposableGraph g = chain_graph(3, 2, 1);
  std::vector<Eigen::MatrixXd> covs(3, Eigen::MatrixXd::Identity(2, 2));
  const GgmScenario sc = assemble_global(g, covs, Priors{0.5, 0.5});
  const LocalStatisticSet set =
      build_local_set(sc, gamma_schedule(3, auto_gamma(3)));
  rng::SplitMix64 stream(12);
  const Eigen::VectorXd x = testutil::standard_normal_vector(sc.n_nodes(), stream);
  const EquivalenceCheck eq = verify_equivalence(sc, set, x);
  CHECK(eq.trace.decision == Decision::H1);
  CHECK(eq.centralized == Decision::H1);
  CHECK(eq.agreement);
  CHECK(eq.trace.stop_index == 1);
}

TEST_CASE("K=1 degenerates to a single transmission") {
  const DecomposableGraph g = validate_perfect_sequence({{1, 2}}, 2);
  const GgmScenario sc = testutil::random_consistent_scenario(g, 8);
  const LocalStatisticSet set = build_local_set(sc, empty_coefficients());
  rng::SplitMix64 stream(77);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd x = testutil::standard_normal_vector(2, stream);
    const EquivalenceCheck eq = verify_equivalence(sc, set, x);
    CHECK(eq.trace.stop_index == 1);
    CHECK(eq.trace.saved == 0);
    CHECK(eq.agreement);
  }
}
