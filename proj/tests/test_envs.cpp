#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <queue>

#include "otmc/envs.hpp"
#include "otmc/markov_chain.hpp"

using namespace otmc;

namespace {

int reachable_count(const MarkovChain& chain, int start) {
  std::vector<bool> seen(chain.size(), false);
  std::queue<int> frontier;
  frontier.push(start);
  seen[start] = true;
  int count = 1;
  while (!frontier.empty()) {
    const int state = frontier.front();
    frontier.pop();
    for (int next = 0; next < chain.size(); ++next) {
      if (!seen[next] && chain.kernel(state, next) > 0.0) {
        seen[next] = true;
        frontier.push(next);
        ++count;
      }
    }
  }
  return count;
}

}  // namespace

TEST_CASE("3x3 grid has nine states and stochastic rows") {
  const MarkovChain grid = grid_chain(3, 3, {}, {0, 0}, {{{2, 0}, 1.0}});
  CHECK(grid.size() == 9);
  CHECK(validate_chain(grid).empty());
  REQUIRE(grid.labels.has_value());
  CHECK(grid.labels->sum() == 1.0);
  // The corner keeps half its mass (two blocked directions).
  CHECK(grid.kernel(grid.init, grid.init) == doctest::Approx(0.5));
}

TEST_CASE("1x1 grid is a single absorbing state") {
  const MarkovChain grid = grid_chain(1, 1, {}, {0, 0}, {});
  CHECK(grid.size() == 1);
  CHECK(grid.kernel(0, 0) == 1.0);
}

TEST_CASE("grid rejects invalid init cells") {
  CHECK_THROWS_AS(grid_chain(3, 3, {{1, 1}}, {1, 1}, {}), std::invalid_argument);
  CHECK_THROWS_AS(grid_chain(3, 3, {}, {5, 0}, {}), std::invalid_argument);
  CHECK_THROWS_AS(grid_chain(0, 3, {}, {0, 0}, {}), std::invalid_argument);
}

TEST_CASE("grid walls remove states and redirect mass") {
  const MarkovChain grid = grid_chain(3, 3, {{1, 1}}, {0, 0}, {});
  CHECK(grid.size() == 8);
  CHECK(validate_chain(grid).empty());
}

TEST_CASE("four rooms with room size 3 has 40 states") {
  const MarkovChain rooms =
      four_rooms(3, default_doors(3), {0, 0}, {{{6, 6}, 1.0}});
  CHECK(rooms.size() == 4 * 9 + 4);
  CHECK(validate_chain(rooms).empty());
  CHECK(reachable_count(rooms, rooms.init) == rooms.size());
}

TEST_CASE("four rooms without doors splits into four components") {
  const MarkovChain rooms = four_rooms(3, {}, {0, 0}, {});
  CHECK(rooms.size() == 36);
  CHECK(reachable_count(rooms, rooms.init) == 9);
}

TEST_CASE("four rooms validates door placements") {
  CHECK_THROWS_AS(four_rooms(3, {{0, 0}}, {0, 0}, {}), std::invalid_argument);
  CHECK_THROWS_AS(four_rooms(3, {{3, 3}}, {0, 0}, {}), std::invalid_argument);
  CHECK_THROWS_AS(four_rooms(3, {{3, 9}}, {0, 0}, {}), std::invalid_argument);
}

TEST_CASE("random chains are reproducible and stochastic") {
  const MarkovChain a = random_chain(5, 99);
  const MarkovChain b = random_chain(5, 99);
  CHECK((a.kernel - b.kernel).cwiseAbs().maxCoeff() == 0.0);
  CHECK((*a.labels - *b.labels).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.init == 0);
  CHECK(validate_chain(a).empty());

  const MarkovChain c = random_chain(5, 100);
  CHECK((a.kernel - c.kernel).cwiseAbs().maxCoeff() > 0.0);

  const MarkovChain single = random_chain(1, 7);
  CHECK(single.kernel(0, 0) == 1.0);
}

TEST_CASE("random problems validate out of the box") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto problem = random_problem(2 + seed % 4, 2 + (seed / 2) % 4, 0.9, seed);
    CHECK(validate_chain(problem.chain_x).empty());
    CHECK(validate_chain(problem.chain_y).empty());
    CHECK(problem.cost.values.minCoeff() >= 0.0);
  }
}
