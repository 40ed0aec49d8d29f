#pragma once

#include <vector>

#include "otmc/markov_chain.hpp"

namespace otmc {

// State pairs with occupancy mass below this threshold fall back to the
// product coupling when conditionals are extracted.
inline constexpr double kOccupancyMassFloor = 1e-14;

/// Per-state-pair distribution over next state pairs: row p holds
/// pi(.|p). Rows sum to one; a coupling is "valid" when every row also
/// matches both kernel marginals.
struct TransitionCoupling {
  Eigen::MatrixXd table;  // |XY| x |XY|

  int npairs() const { return static_cast<int>(table.rows()); }
};

/// Discounted visitation distribution over (pair, next pair) quadruples.
struct OccupancyCoupling {
  Eigen::MatrixXd table;  // |XY| x |XY|, nonnegative, sums to one

  int npairs() const { return static_cast<int>(table.rows()); }
  /// State-pair occupancy nu_mu(p) = sum_{p'} mu(p, p').
  Eigen::VectorXd state_occupancy() const { return table.rowwise().sum(); }
};

struct ConstraintResiduals {
  double flow_l1 = 0.0;
  double delta_x = 0.0;
  double delta_y = 0.0;

  double delta() const { return delta_x + delta_y; }
};

/// The trivial coupling pi(x'y'|xy) = P_X(x'|x) P_Y(y'|y); satisfies both
/// marginal constraints exactly by construction.
TransitionCoupling product_coupling(const DiscountedProblem& problem);

/// True when every row sums to one (1e-12) and both marginal constraints
/// hold within `marginal_tol`.
bool is_valid_coupling(const TransitionCoupling& pi, const DiscountedProblem& problem,
                       double marginal_tol = 1e-9);

/// State-pair occupancy of pi: the unique solution of
/// (I - gamma Z^T) nu = (1 - gamma) nu0 with Z(p,p') = pi(p'|p).
Eigen::VectorXd state_occupancy_of(const TransitionCoupling& pi,
                                   const DiscountedProblem& problem);

/// Occupancy coupling generated by pi: mu(p,p') = nu(p) pi(p'|p).
OccupancyCoupling occupancy_of(const TransitionCoupling& pi,
                               const DiscountedProblem& problem);

/// Conditional transition coupling of mu; rows with occupancy below the
/// mass floor fall back to the product coupling.
TransitionCoupling coupling_of(const OccupancyCoupling& mu,
                               const DiscountedProblem& problem);

/// l1 residuals of the flow and transition-coherence constraints.
ConstraintResiduals constraint_residuals(const OccupancyCoupling& mu,
                                         const DiscountedProblem& problem);

/// Rounding error Delta(mu): the occupancy-weighted l1 distance between
/// pi_mu and its per-row rounding onto the marginal polytopes.
double rounding_error(const OccupancyCoupling& mu, const DiscountedProblem& problem);

struct Divergences {
  double l1 = 0.0;
  double kl = 0.0;              // D(mu || mu_prev)
  double conditional_kl = 0.0;  // H(mu || mu_prev), via the conditionals
  bool support_violation = false;
};

/// l1, relative entropy, and conditional relative entropy between two
/// occupancy couplings. Conventions: 0 log(0/q) = 0 and p log(p/0) = +inf,
/// reported as an infinite value with the support_violation flag set.
/// The problem supplies the product-coupling fallback rows used by the
/// conditionals on zero-mass state pairs.
Divergences divergences(const OccupancyCoupling& mu, const OccupancyCoupling& mu_prev,
                        const DiscountedProblem& problem);

/// Entrywise arithmetic mean. Throws std::invalid_argument on an empty list
/// or mismatched shapes.
OccupancyCoupling average_occupancies(const std::vector<OccupancyCoupling>& mus);

}  // namespace otmc
