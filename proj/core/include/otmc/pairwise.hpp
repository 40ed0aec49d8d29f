#pragma once

#include "otmc/coupling.hpp"
#include "otmc/markov_chain.hpp"

namespace otmc {

/// Projects a nonnegative matrix onto the transportation polytope U_{p,q}
/// by capped row scaling, capped column scaling, and a rank-one correction.
/// Output marginals match p and q exactly (to rounding), and
/// ||G - F||_1 <= 2 (||F 1 - p||_1 + ||F^T 1 - q||_1).
/// Rows (columns) with zero mass keep scale one; the zero matrix rounds to
/// the pure correction term p q^T.
Eigen::MatrixXd round_pair(const Eigen::MatrixXd& F, const Eigen::VectorXd& p,
                           const Eigen::VectorXd& q);

/// Applies round_pair to every row of pi against the kernel marginals of
/// its state pair. The result is a valid transition coupling.
TransitionCoupling round_transition_coupling(const TransitionCoupling& pi,
                                             const DiscountedProblem& problem);

struct OtSolution {
  double value = 0.0;
  Eigen::MatrixXd plan;
  // Dual certificate: u(i) + v(j) <= cost(i,j) with equality on the basis.
  Eigen::VectorXd row_potentials;
  Eigen::VectorXd col_potentials;
};

/// Exact discrete optimal transport by the transportation simplex
/// (north-west-corner start, Bland's anti-cycling rule). Optimality is
/// audited against the dual certificate before returning.
OtSolution exact_ot_pair(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
                         const Eigen::VectorXd& q);

struct SinkhornPairResult {
  Eigen::MatrixXd plan;  // feasible: rounded onto U_{p,q}
  double value = 0.0;    // <plan, cost>, an upper bound on the exact value
};

/// Log-domain Sinkhorn iterations on exp(-eta cost), rounded to exact
/// marginals with round_pair. One iteration is a full row + column sweep.
SinkhornPairResult sinkhorn_pair(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
                                 const Eigen::VectorXd& q, double eta, int iters);

/// Warm-startable variant: when non-null, the potentials seed the scaling
/// (if their sizes match the margins) and receive the final values.
SinkhornPairResult sinkhorn_pair(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
                                 const Eigen::VectorXd& q, double eta, int iters,
                                 Eigen::VectorXd* f_inout, Eigen::VectorXd* g_inout);

}  // namespace otmc
