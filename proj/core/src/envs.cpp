#include "otmc/envs.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "otmc/rng.hpp"

namespace otmc {

MarkovChain grid_chain(int width, int height, const std::set<Cell>& walls,
                       Cell init, const std::map<Cell, double>& rewards) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("grid_chain: dimensions must be >= 1");
  }
  if (walls.count(init) != 0) {
    throw std::invalid_argument("grid_chain: init cell is a wall");
  }
  if (init.first < 0 || init.first >= height || init.second < 0 ||
      init.second >= width) {
    throw std::invalid_argument("grid_chain: init cell outside the grid");
  }

  std::vector<Cell> cells;
  std::map<Cell, int> index;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const Cell cell{r, c};
      if (walls.count(cell) != 0) continue;
      index[cell] = static_cast<int>(cells.size());
      cells.push_back(cell);
    }
  }

  const int n = static_cast<int>(cells.size());
  MarkovChain chain;
  chain.kernel = Eigen::MatrixXd::Zero(n, n);
  chain.labels = Eigen::VectorXd::Zero(n);
  chain.states.reserve(n);
  const Cell moves[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  for (int i = 0; i < n; ++i) {
    const Cell cell = cells[i];
    chain.states.push_back("r" + std::to_string(cell.first) + "c" +
                           std::to_string(cell.second));
    for (const Cell& move : moves) {
      Cell target{cell.first + move.first, cell.second + move.second};
      const bool blocked = target.first < 0 || target.first >= height ||
                           target.second < 0 || target.second >= width ||
                           walls.count(target) != 0;
      if (blocked) target = cell;  // blocked moves stay in place
      chain.kernel(i, index.at(target)) += 0.25;
    }
    const auto reward = rewards.find(cell);
    (*chain.labels)(i) = reward == rewards.end() ? 0.0 : reward->second;
  }
  chain.init = index.at(init);
  return chain;
}

std::vector<Cell> default_doors(int room_size) {
  const int s = room_size;
  const int lo = s / 2;
  const int hi = s + 1 + s / 2;
  return {{s, lo}, {s, hi}, {lo, s}, {hi, s}};
}

MarkovChain four_rooms(int room_size, const std::vector<Cell>& doors, Cell init,
                       const std::map<Cell, double>& rewards) {
  if (room_size < 1) {
    throw std::invalid_argument("four_rooms: room_size must be >= 1");
  }
  const int s = room_size;
  const int side = 2 * s + 1;

  std::set<Cell> walls;
  for (int t = 0; t < side; ++t) {
    walls.insert({s, t});
    walls.insert({t, s});
  }
  for (const Cell& door : doors) {
    const bool on_cross = (door.first == s) != (door.second == s);
    const bool inside = door.first >= 0 && door.first < side && door.second >= 0 &&
                        door.second < side;
    if (!on_cross || !inside) {
      throw std::invalid_argument("four_rooms: door must sit on an internal wall arm");
    }
    walls.erase(door);
  }
  return grid_chain(side, side, walls, init, rewards);
}

MarkovChain random_chain(int n_states, std::uint64_t seed) {
  if (n_states < 1) {
    throw std::invalid_argument("random_chain: n_states must be >= 1");
  }
  Rng rng(seed);
  MarkovChain chain;
  chain.kernel.resize(n_states, n_states);
  chain.labels = Eigen::VectorXd(n_states);
  chain.states.reserve(n_states);
  for (int i = 0; i < n_states; ++i) {
    chain.states.push_back("s" + std::to_string(i));
    double total = 0.0;
    for (int j = 0; j < n_states; ++j) {
      chain.kernel(i, j) = rng.exponential();
      total += chain.kernel(i, j);
    }
    chain.kernel.row(i) /= total;
  }
  for (int i = 0; i < n_states; ++i) (*chain.labels)(i) = rng.uniform();
  chain.init = 0;
  return chain;
}

DiscountedProblem random_problem(int n_states_x, int n_states_y, double gamma,
                                 std::uint64_t seed) {
  MarkovChain x = random_chain(n_states_x, seed * 2 + 1);
  MarkovChain y = random_chain(n_states_y, seed * 2 + 2);
  GroundCost cost = cost_from_labels(x, y, CostScale::none, gamma);
  return make_problem(std::move(x), std::move(y), std::move(cost), gamma);
}

}  // namespace otmc
