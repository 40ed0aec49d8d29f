#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "otmc/coupling.hpp"
#include "otmc/envs.hpp"
#include "otmc/markov_chain.hpp"
#include "support/test_utils.hpp"

using namespace otmc;
using namespace otmc_test;

TEST_CASE("validate_chain accepts the identity kernel") {
  MarkovChain chain;
  chain.states = {"s0"};
  chain.kernel = Eigen::MatrixXd::Ones(1, 1);
  chain.init = 0;
  CHECK(validate_chain(chain).empty());
}

TEST_CASE("validate_chain reports a row-sum violation") {
  MarkovChain chain;
  chain.states = {"s0", "s1"};
  chain.kernel.resize(2, 2);
  chain.kernel << 0.5, 0.5, 0.3, 0.6;
  chain.init = 0;
  const auto violations = validate_chain(chain);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("row 1") != std::string::npos);
  CHECK(violations[0].find("0.9") != std::string::npos);
}

TEST_CASE("validate_chain reports negative entries") {
  MarkovChain chain;
  chain.states = {"s0", "s1"};
  chain.kernel.resize(2, 2);
  chain.kernel << 1.1, -0.1, 0.5, 0.5;
  chain.init = 0;
  const auto violations = validate_chain(chain);
  REQUIRE(!violations.empty());
  CHECK(violations[0].find("(0,1)") != std::string::npos);
  CHECK(violations[0].find("negative") != std::string::npos);
}

TEST_CASE("validate_chain rejects a bad init index") {
  MarkovChain chain;
  chain.states = {"s0"};
  chain.kernel = Eigen::MatrixXd::Ones(1, 1);
  chain.init = 3;
  CHECK(validate_chain(chain).size() == 1);
}

TEST_CASE("cost_from_labels absolute differences") {
  MarkovChain x = two_cycle_chain(0.0, 1.0);
  MarkovChain y = two_cycle_chain(1.0, 0.0);

  const GroundCost unscaled = cost_from_labels(x, y, CostScale::none, 0.5);
  Eigen::MatrixXd expected(2, 2);
  expected << 1.0, 0.0, 0.0, 1.0;
  CHECK((unscaled.values - expected).cwiseAbs().maxCoeff() == 0.0);

  const GroundCost scaled = cost_from_labels(x, y, CostScale::one_minus_gamma, 0.5);
  CHECK((scaled.values - 0.5 * expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cost_from_labels of identical labels is zero") {
  MarkovChain x = two_cycle_chain(3.0, 3.0);
  MarkovChain y = two_cycle_chain(3.0, 3.0);
  for (const auto scale : {CostScale::none, CostScale::one_minus_gamma}) {
    CHECK(cost_from_labels(x, y, scale, 0.7).values.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("cost_from_labels requires labels on both chains") {
  MarkovChain x = two_cycle_chain();
  MarkovChain y = two_cycle_chain();
  y.labels.reset();
  CHECK_THROWS_AS(cost_from_labels(x, y, CostScale::none, 0.5), std::invalid_argument);
}

TEST_CASE("cost_from_labels is symmetric under swap plus transpose") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const MarkovChain x = random_chain(3, seed);
    const MarkovChain y = random_chain(4, seed + 100);
    const GroundCost xy = cost_from_labels(x, y, CostScale::none, 0.5);
    const GroundCost yx = cost_from_labels(y, x, CostScale::none, 0.5);
    CHECK((xy.values - yx.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("make_problem enforces gamma bounds and cost shape") {
  MarkovChain x = two_cycle_chain();
  MarkovChain y = two_cycle_chain();
  GroundCost cost = constant_cost(2, 2, 1.0);
  CHECK_THROWS_AS(make_problem(x, y, cost, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_problem(x, y, cost, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_problem(x, y, cost, 1e-9), std::invalid_argument);
  CHECK_THROWS_AS(make_problem(x, y, constant_cost(2, 3, 1.0), 0.5),
                  std::invalid_argument);
  GroundCost negative = constant_cost(2, 2, -1.0);
  CHECK_THROWS_AS(make_problem(x, y, negative, 0.5), std::invalid_argument);
  CHECK_NOTHROW(make_problem(x, y, cost, 0.5));
}

TEST_CASE("product coupling of single self-loop states") {
  const auto problem =
      make_problem(self_loop_chain(), self_loop_chain(), constant_cost(1, 1, 0.0), 0.5);
  const TransitionCoupling pi = product_coupling(problem);
  CHECK(pi.table(0, 0) == 1.0);
}

TEST_CASE("product coupling is an outer product per row") {
  MarkovChain x;
  x.states = {"a", "b"};
  x.kernel.resize(2, 2);
  x.kernel << 0.5, 0.5, 0.5, 0.5;
  x.init = 0;
  MarkovChain y;
  y.states = {"c", "d"};
  y.kernel.resize(2, 2);
  y.kernel << 0.2, 0.8, 0.2, 0.8;
  y.init = 0;
  const auto problem = make_problem(x, y, constant_cost(2, 2, 0.0), 0.5);
  const TransitionCoupling pi = product_coupling(problem);
  Eigen::VectorXd expected(4);
  expected << 0.1, 0.4, 0.1, 0.4;
  CHECK((pi.table.row(0).transpose() - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("product coupling marginals are exact on random problems") {
  for (std::uint64_t seed : {4u, 5u, 6u}) {
    const auto problem = random_problem(3, 4, 0.8, seed);
    const TransitionCoupling pi = product_coupling(problem);
    CHECK(max_marginal_residual(pi, problem) < 1e-15);
    CHECK(is_valid_coupling(pi, problem));
  }
}
