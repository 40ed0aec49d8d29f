#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "otmc/markov_chain.hpp"

namespace otmc {

/// Grid cell as (row, col).
using Cell = std::pair<int, int>;

/// Random-walk chain on a rectangular grid. Each of the four principal
/// directions carries probability 1/4; moves into a wall or off the grid
/// stay in place. States are the non-wall cells, labeled by the rewards map
/// (default 0), with identifiers "r<row>c<col>".
MarkovChain grid_chain(int width, int height, const std::set<Cell>& walls,
                       Cell init, const std::map<Cell, double>& rewards);

/// Door positions used by four_rooms when none are given: the middle of
/// each half of the internal wall cross.
std::vector<Cell> default_doors(int room_size);

/// Four room_size x room_size rooms on a (2s+1) x (2s+1) grid separated by
/// an internal wall cross, connected through the given door cells.
MarkovChain four_rooms(int room_size, const std::vector<Cell>& doors, Cell init,
                       const std::map<Cell, double>& rewards);

/// Chain with Dirichlet(1,...,1) rows, uniform [0,1] labels, init state 0.
/// Reproducible: the same seed yields the same chain on every platform.
MarkovChain random_chain(int n_states, std::uint64_t seed);

/// Two independent random chains with the label-difference ground cost;
/// the workhorse instance generator for tests and benchmarks.
DiscountedProblem random_problem(int n_states_x, int n_states_y, double gamma,
                                 std::uint64_t seed);

}  // namespace otmc
