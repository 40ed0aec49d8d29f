#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace otmc {

// Tolerance for row-stochasticity checks on kernels.
inline constexpr double kRowSumTol = 1e-12;
// gamma is clamped away from the degenerate horizons 0 and 1.
inline constexpr double kGammaMargin = 1e-6;

/// A finite stationary Markov chain with a fixed initial state and
/// optional real-valued state labels.
struct MarkovChain {
  std::vector<std::string> states;  // ordered state identifiers
  Eigen::MatrixXd kernel;           // row-stochastic transition matrix
  int init = 0;                     // index of the initial state
  std::optional<Eigen::VectorXd> labels;

  int size() const { return static_cast<int>(kernel.rows()); }
};

/// Checks the chain invariants and returns a human-readable description of
/// every violation. Never throws; an empty result means the chain is valid.
std::vector<std::string> validate_chain(const MarkovChain& chain);

enum class CostScale { none, one_minus_gamma };

struct GroundCost {
  enum class Provenance { explicit_matrix, labels_absdiff };

  Eigen::MatrixXd values;  // |X| x |Y|, nonnegative
  Provenance provenance = Provenance::explicit_matrix;
  CostScale scale = CostScale::none;
};

/// Ground cost c(x,y) = s * |r_X(x) - r_Y(y)| with s = (1-gamma) or 1.
/// Throws std::invalid_argument if either chain lacks labels.
GroundCost cost_from_labels(const MarkovChain& chain_x, const MarkovChain& chain_y,
                            CostScale scale, double gamma);

/// A pair of chains, a ground cost between their states, and a discount.
/// State pairs are indexed as p = x * |Y| + y throughout.
struct DiscountedProblem {
  MarkovChain chain_x;
  MarkovChain chain_y;
  GroundCost cost;
  double gamma = 0.9;
  // Initial distribution over state pairs. The file format only exposes a
  // fixed initial state (a point mass at (init_x, init_y)); the solvers work
  // with any distribution stored here.
  Eigen::VectorXd nu0;

  int nx() const { return chain_x.size(); }
  int ny() const { return chain_y.size(); }
  int npairs() const { return nx() * ny(); }
  int pair(int x, int y) const { return x * ny() + y; }
  int pair_x(int p) const { return p / ny(); }
  int pair_y(int p) const { return p % ny(); }
  int init_pair() const { return pair(chain_x.init, chain_y.init); }

  /// Ground cost flattened over state pairs.
  Eigen::VectorXd pair_cost() const;
  double cost_sup() const { return cost.values.maxCoeff(); }
};

/// Validates all components and assembles a problem. Throws
/// std::invalid_argument on any violation (chain invariants, cost shape or
/// negativity, gamma outside [1e-6, 1-1e-6]).
DiscountedProblem make_problem(MarkovChain chain_x, MarkovChain chain_y,
                               GroundCost cost, double gamma);

}  // namespace otmc
