#include "catch_helpers.hpp"

#include <cmath>
#include <vector>

#include "ggmcov/model.hpp"
#include "helpers.hpp"

using namespace ggmcov;

TEST_CASE("identity clique covariances assemble to the identity model") {
  const DecomposableGraph g = chain_graph(3, 3, 1);
  std::vector<Eigen::MatrixXd> covs(3, Eigen::MatrixXd::Identity(3, 3));
  const GgmScenario sc = assemble_global(g, covs, Priors{0.5, 0.5});
  CHECK((sc.global_cov - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() <
        1e-14);
  CHECK(std::abs(sc.log_det_cov) < 1e-14);
}

TEST_CASE("two-clique chain: Markov zeros and determinant factorization") {
  // cliques {1,2,3}, {2,3,4} with separator {2,3}
  const DecomposableGraph g =
      validate_perfect_sequence({{1, 2, 3}, {2, 3, 4}}, 4);
  const GgmScenario sc = testutil::random_consistent_scenario(g, 99, 0.8, 4.0);

  SECTION("precision vanishes where 1 and 4 share no clique") {
    // independent oracle: invert the assembled covariance from scratch
    const Eigen::MatrixXd inv = sc.global_cov.inverse();
    CHECK(std::abs(inv(0, 3)) < 1e-8);
    CHECK(std::abs(inv(3, 0)) < 1e-8);
    CHECK(std::abs(sc.global_precision(0, 3)) < 1e-12);
  }
  SECTION("brute-force 4x4 determinant matches the factorization") {
    const double direct = std::log(sc.global_cov.determinant());
    double factored = log_det_spd(sc.clique_covs[0], "c1") +
                      log_det_spd(sc.clique_covs[1], "c2") -
                      log_det_spd(sc.sep_covs[1], "s2");
    CHECK(std::abs(direct - factored) <= 1e-8 * std::max(1.0, std::abs(direct)));
    CHECK(std::abs(sc.log_det_cov - factored) <=
          1e-8 * std::max(1.0, std::abs(factored)));
  }
  SECTION("clique marginals round-trip") {
    for (int k = 1; k <= 2; ++k) {
      std::vector<int> pos;
      for (int id : g.clique(k)) pos.push_back(id - 1);
      const Eigen::MatrixXd marg = submatrix(sc.global_cov, pos);
      CHECK((marg - sc.clique_covs[k - 1]).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("inconsistent separator marginals are rejected with the clique index") {
  const DecomposableGraph g =
      validate_perfect_sequence({{1, 2, 3}, {2, 3, 4}}, 4);
  const GgmScenario base = testutil::random_consistent_scenario(g, 17);
  std::vector<Eigen::MatrixXd> covs = base.clique_covs;
  covs[1](0, 0) += 0.5;  // separator block of clique 2 no longer matches
  try {
    assemble_global(g, covs, Priors{0.5, 0.5});
    FAIL("expected InconsistentSeparator");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InconsistentSeparator);
    CHECK(std::string(e.what()).find("S_2") != std::string::npos);
  }
}

TEST_CASE("non-SPD clique covariance is rejected") {
  const DecomposableGraph g = validate_perfect_sequence({{1, 2}}, 2);
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  CHECK_THROWS_CODE(
      assemble_global(g, {bad}, Priors{0.5, 0.5}), Errc::NotSpd);
}

TEST_CASE("random_spd_with_spectrum") {
  SECTION("constant spectrum collapses to c*I") {
    const Eigen::MatrixXd m =
        random_spd_with_spectrum(4, {2.5, 2.5, 2.5, 2.5}, 3);
    CHECK((m - 2.5 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <
          1e-12);
  }
  SECTION("spectrum on [alpha, 1.5 alpha] is reproduced") {
    const double alpha = 199.0;
    const std::vector<double> eigs = linspace(alpha, 1.5 * alpha, 5);
    const Eigen::MatrixXd m = random_spd_with_spectrum(5, eigs, 12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    for (int i = 0; i < 5; ++i)
      CHECK(std::abs(es.eigenvalues()(i) - eigs[i]) <= 1e-8 * eigs[i]);
    // genuinely non-diagonal
    CHECK(m.cwiseAbs().sum() > m.diagonal().cwiseAbs().sum() + 1.0);
  }
  SECTION("fixed seed reproduces bit-identical output") {
    const std::vector<double> eigs = {1.0, 2.0, 3.0};
    const Eigen::MatrixXd a = random_spd_with_spectrum(3, eigs, 77);
    const Eigen::MatrixXd b = random_spd_with_spectrum(3, eigs, 77);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXd c = random_spd_with_spectrum(3, eigs, 78);
    CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
  }
  SECTION("degenerate inputs") {
    CHECK_THROWS_CODE(random_spd_with_spectrum(0, {}, 1), Errc::DegenerateInput);
    CHECK_THROWS_CODE(random_spd_with_spectrum(2, {1.0, -1.0}, 1),
                      Errc::DegenerateInput);
    CHECK_THROWS_CODE(random_spd_with_spectrum(2, {1.0}, 1),
                      Errc::DimensionMismatch);
  }
}

TEST_CASE("chain scenario generator") {
  SECTION("single clique equals its covariance") {
    const GgmScenario sc = make_chain_scenario(1, 5, 3.0, Priors{0.5, 0.5}, 5);
    CHECK(sc.num_cliques() == 1);
    CHECK((sc.global_cov - sc.clique_covs[0]).cwiseAbs().maxCoeff() < 1e-9);
  }
  SECTION("corner projection makes the tiled covariance consistent") {
    const GgmScenario sc = make_chain_scenario(2, 3, 2.0, Priors{0.5, 0.5}, 5);
    CHECK(sc.clique_covs[0](0, 0) == sc.clique_covs[0](2, 2));
    CHECK((sc.clique_covs[0] - sc.clique_covs[1]).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("paper-scale configuration assembles") {
    const GgmScenario sc =
        make_chain_scenario(20, 5, 199.0, Priors{0.5, 0.5}, 1);
    CHECK(sc.n_nodes() == 81);
    // spectrum recipe keeps the minimum clique eigenvalue near alpha
    CHECK(min_clique_eigenvalue(sc) > 150.0);
    CHECK(min_clique_eigenvalue(sc) < 250.0);
  }
  SECTION("bad priors are rejected") {
    CHECK_THROWS_CODE(make_chain_scenario(2, 3, 1.0, Priors{0.7, 0.7}, 1),
                      Errc::BadPriors);
  }
}

TEST_CASE("tree scenario generator") {
  SECTION("lambda_min closed form") {
    CHECK(std::abs(tree_lambda_min(1.1) - 1.10) < 1e-12);
    CHECK(std::abs(tree_lambda_min(1.2) - 1.32) < 1e-12);
    CHECK(std::abs(tree_lambda_min(1.4) - 1.82) < 1e-12);
    CHECK(std::abs(tree_lambda_min(1.6) - 2.40) < 1e-12);
  }
  SECTION("numerical spectrum agrees with the closed form") {
    for (double x : {1.1, 1.2, 1.4, 1.6}) {
      const GgmScenario sc = make_tree_scenario(3, x, Priors{0.5, 0.5});
      CHECK(std::abs(min_clique_eigenvalue(sc) - tree_lambda_min(x)) < 1e-10);
    }
  }
  SECTION("separator consistency holds automatically") {
    CHECK_NOTHROW(make_tree_scenario(7, 1.1, Priors{0.5, 0.5}));
  }
  SECTION("without the off-diagonal term the pattern is diagonal with x^2") {
    const double x = 1.3;
    const DecomposableGraph g = binary_tree_graph(3, 4, 1);
    std::vector<Eigen::MatrixXd> covs(
        3, x * x * Eigen::MatrixXd::Identity(4, 4));
    const GgmScenario sc = assemble_global(g, covs, Priors{0.5, 0.5});
    CHECK(std::abs(min_clique_eigenvalue(sc) - x * x) < 1e-12);
  }
  SECTION("x too small loses positive definiteness") {
    CHECK_THROWS_CODE(make_tree_scenario(3, 0.05, Priors{0.5, 0.5}),
                      Errc::NotSpd);
  }
}

TEST_CASE("sampling") {
  SECTION("identity scenario: H0 and H1 have matching sample covariance") {
    const DecomposableGraph g = chain_graph(2, 2, 1);
    std::vector<Eigen::MatrixXd> covs(2, Eigen::MatrixXd::Identity(2, 2));
    const GgmScenario sc = assemble_global(g, covs, Priors{0.5, 0.5});
    const int n = 100000;
    for (Hypothesis hyp : {Hypothesis::H0, Hypothesis::H1}) {
      const auto draws = sample(sc, hyp, n, 31);
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(3, 3);
      for (const auto& x : draws) acc += x * x.transpose();
      acc /= n;
      CHECK((acc - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
            5.0 / std::sqrt(static_cast<double>(n)));
    }
  }
  SECTION("H1 sample covariance matches the global covariance") {
    const GgmScenario sc = make_chain_scenario(3, 3, 2.0, Priors{0.5, 0.5}, 9);
    const int n = 100000;
    const auto draws = sample(sc, Hypothesis::H1, n, 77);
    const int N = sc.n_nodes();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(N, N);
    Eigen::MatrixXd acc_sq = Eigen::MatrixXd::Zero(N, N);
    for (const auto& x : draws) {
      const Eigen::MatrixXd outer = x * x.transpose();
      acc += outer;
      acc_sq += outer.cwiseProduct(outer);
    }
    acc /= n;
    acc_sq /= n;
    // entrywise standard errors from the sampled fourth moments
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const double se = std::sqrt(
            std::max(0.0, acc_sq(i, j) - acc(i, j) * acc(i, j)) / n);
        CHECK(std::abs(acc(i, j) - sc.global_cov(i, j)) <= 5.0 * se + 1e-12);
      }
  }
  SECTION("fixed seed gives identical draws") {
    const GgmScenario sc = make_chain_scenario(2, 3, 1.0, Priors{0.5, 0.5}, 4);
    const auto a = sample(sc, Hypothesis::H1, 10, 123);
    const auto b = sample(sc, Hypothesis::H1, 10, 123);
    for (int i = 0; i < 10; ++i)
      CHECK((a[i] - b[i]).cwiseAbs().maxCoeff() == 0.0);
  }
}
