#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "otmc/envs.hpp"
#include "otmc/io.hpp"
#include "support/test_utils.hpp"

using namespace otmc;
using namespace otmc_test;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = "/tmp/otmc_io_" + name;
  std::ofstream out(path);
  out << text;
  return path;
}

}  // namespace

TEST_CASE("chain JSON round trip preserves everything") {
  const MarkovChain chain = random_chain(4, 5);
  const MarkovChain back = parse_chain(chain_to_json_text(chain));
  CHECK(back.states == chain.states);
  CHECK(back.init == chain.init);
  CHECK((back.kernel - chain.kernel).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(back.labels.has_value());
  CHECK((*back.labels - *chain.labels).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("chain parsing accepts the documented format") {
  const std::string text = R"({
    "states": ["a", "b"],
    "P": [[0.25, 0.75], [0.5, 0.5]],
    "init": "b",
    "labels": [1.0, 2.0]
  })";
  const MarkovChain chain = parse_chain(text);
  CHECK(chain.size() == 2);
  CHECK(chain.init == 1);
  CHECK(chain.kernel(0, 1) == 0.75);
  CHECK((*chain.labels)(1) == 2.0);
}

TEST_CASE("chain parsing rejects malformed inputs") {
  CHECK_THROWS_WITH_AS(parse_chain("{"), doctest::Contains("parse error"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_chain(R"({"states": ["a"], "P": [[1.0]]})"),
      doctest::Contains("init"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_chain(R"({"states": ["a"], "P": [[1.0]], "init": "z"})"),
      doctest::Contains("not in state list"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_chain(R"({"states": ["a", "b"], "P": [[0.5, 0.5], [0.3, 0.6]], "init": "a"})"),
      doctest::Contains("row 1"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_chain(R"({"states": ["a"], "P": [[1.0]], "init": "a", "labels": [1, 2]})"),
      doctest::Contains("labels"), std::runtime_error);
}

TEST_CASE("cost specs parse both forms") {
  const CostSpec matrix = parse_cost_spec(R"({"type": "matrix", "values": [[0, 1], [1, 0]]})");
  CHECK(matrix.type == CostSpec::Type::matrix);
  CHECK(matrix.values(0, 1) == 1.0);

  const CostSpec labels = parse_cost_spec(R"({"type": "labels_absdiff", "scale": "none"})");
  CHECK(labels.type == CostSpec::Type::labels_absdiff);
  CHECK(labels.scale == CostScale::none);

  const CostSpec scaled = parse_cost_spec(R"({"type": "labels_absdiff"})");
  CHECK(scaled.scale == CostScale::one_minus_gamma);

  CHECK_THROWS_AS(parse_cost_spec(R"({"type": "nope"})"), std::runtime_error);
  CHECK_THROWS_AS(parse_cost_spec(R"({"type": "labels_absdiff", "scale": "half"})"),
                  std::runtime_error);
}

TEST_CASE("load_problem wires chains, cost, and gamma together") {
  const MarkovChain x = random_chain(2, 21);
  const MarkovChain y = random_chain(2, 22);
  const std::string path_x = write_temp("x.json", chain_to_json_text(x));
  const std::string path_y = write_temp("y.json", chain_to_json_text(y));

  const CostSpec labels = parse_cost_spec(R"({"type": "labels_absdiff", "scale": "none"})");
  const DiscountedProblem problem = load_problem(path_x, path_y, labels, 0.9);
  CHECK(problem.nx() == 2);
  CHECK(problem.gamma == 0.9);
  CHECK(problem.cost.values.minCoeff() >= 0.0);

  // Dimension mismatch: a 2x3 matrix cost against 2x2 chains.
  const CostSpec bad =
      parse_cost_spec(R"({"type": "matrix", "values": [[0, 1, 2], [1, 0, 3]]})");
  CHECK_THROWS_WITH_AS(load_problem(path_x, path_y, bad, 0.9),
                       doctest::Contains("cost matrix"), std::runtime_error);
  CHECK_THROWS_AS(load_problem(path_x, path_y, labels, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(load_problem("/tmp/otmc_io_missing.json", path_y, labels, 0.9),
                  std::runtime_error);

  // A labels spec against an unlabeled chain is rejected.
  MarkovChain unlabeled = x;
  unlabeled.labels.reset();
  const std::string path_u = write_temp("u.json", chain_to_json_text(unlabeled));
  CHECK_THROWS_AS(load_problem(path_u, path_y, labels, 0.9), std::invalid_argument);

  std::remove(path_x.c_str());
  std::remove(path_y.c_str());
  std::remove(path_u.c_str());
}

TEST_CASE("matrix JSON round trip") {
  Rng rng(23);
  const Eigen::MatrixXd m = random_nonneg_matrix(3, 4, rng);
  const Eigen::MatrixXd back = parse_matrix_json(matrix_to_json_text(m));
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("diagnostics CSV has the documented schema") {
  std::vector<IterationRecord> records = {{1, 0.5, 0.25, 0.0, 1.5},
                                          {2, 0.4, 0.125, 0.1, 1.25}};
  const std::string path = "/tmp/otmc_io_diag.csv";
  write_diagnostics_csv(records, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "k,objective,delta,l1_step,wall_ms");
  std::string row;
  std::getline(in, row);
  CHECK(row == "1,0.5,0.25,0,1.5");
  std::remove(path.c_str());
}
