#pragma once

#include "otmc/coupling.hpp"
#include "otmc/markov_chain.hpp"

namespace otmc {

enum class Axis { X, Y };

/// Axis value table: row per state pair, column per next marginal state
/// (|XY| x |X| for axis X, |XY| x |Y| for axis Y). Cells whose kernel entry
/// P(x'|x) vanishes are stored as zero and never read.
struct ValueTableAxis {
  Axis axis = Axis::X;
  Eigen::MatrixXd values;
};

/// Value over state pairs (V^pi, V*, ...).
using PairValue = Eigen::VectorXd;

/// Q table over (pair, next pair).
using QTable = Eigen::MatrixXd;

/// Zero-initialized table of the right shape for the axis.
ValueTableAxis zero_axis_value(Axis axis, const DiscountedProblem& problem);

/// One application of the smoothed Bellman operator for the given coupling:
/// a soft-min over the axis-conditional weights pi/P of the one-step values.
ValueTableAxis apply_bellman_sinkhorn(const TransitionCoupling& pi,
                                      const ValueTableAxis& value,
                                      const DiscountedProblem& problem, double eta);

struct FixedPointReport {
  int iterations = 0;
  double residual = 0.0;  // sup-norm change of the final application
  bool converged = true;
};

inline constexpr int kInnerIterationCap = 100000;

/// Applies the operator exactly m times, or, when m < 0, iterates until the
/// sup-norm change drops below tol (iteration cap 1e5; the report carries
/// the final residual either way).
ValueTableAxis solve_bs_fixed_point(const TransitionCoupling& pi, ValueTableAxis value,
                                    const DiscountedProblem& problem, double eta, int m,
                                    double tol, FixedPointReport* report = nullptr);

/// Multiplicative coupling update: reweight pi by exp(-eta Q), renormalize
/// each (pair, x') block, and scale by the projected-axis kernel. The output
/// matches the axis marginals exactly and preserves zeros of pi. Blocks of
/// pi with no mass against a positive kernel entry fall back to the product
/// coupling.
TransitionCoupling multiplicative_update(Axis axis, const TransitionCoupling& pi,
                                         const QTable& q_table,
                                         const DiscountedProblem& problem, double eta);

/// Solves the linear Bellman system V = c + gamma Pi V.
PairValue policy_evaluation(const TransitionCoupling& pi,
                            const DiscountedProblem& problem);

/// Q(p, p') = c(p) + gamma V(p').
QTable q_from_value(const PairValue& value, const DiscountedProblem& problem);

/// Axis variant used by the smoothed value iteration:
/// Q(p, p') = c(p) + gamma sum_{x''} P_X(x''|x') V(p', x'') for axis X,
/// and symmetrically for axis Y.
QTable q_from_axis_value(const ValueTableAxis& value, const DiscountedProblem& problem);

/// Next-state gain vector g(p') used by both Q variants: the axis
/// contraction of an axis table, or the pair value itself. Q = c + gamma g.
Eigen::VectorXd axis_gain(const ValueTableAxis& value, const DiscountedProblem& problem);

struct BellmanStep {
  PairValue value;
  TransitionCoupling greedy;
};

/// Exact Bellman optimality operator: per state pair, an exact optimal
/// transport of V between the kernel rows. Returns the updated value and
/// the greedy transition coupling.
BellmanStep exact_bellman_operator(const PairValue& value,
                                   const DiscountedProblem& problem);

}  // namespace otmc
