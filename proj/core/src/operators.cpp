#include "otmc/operators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/LU>

#include "otmc/pairwise.hpp"

namespace otmc {

namespace {

// Views a state-pair index through the axis being projected: proj is the
// kernel whose marginals the update enforces, other the remaining one.
struct AxisView {
  const Eigen::MatrixXd& proj_kernel;
  const Eigen::MatrixXd& other_kernel;
  int proj_size;
  int other_size;
  bool is_x;

  int proj_of(const DiscountedProblem& pr, int p) const {
    return is_x ? pr.pair_x(p) : pr.pair_y(p);
  }
  int other_of(const DiscountedProblem& pr, int p) const {
    return is_x ? pr.pair_y(p) : pr.pair_x(p);
  }
  // Pair index of (projected state k, other state o).
  int pair_of(const DiscountedProblem& pr, int k, int o) const {
    return is_x ? pr.pair(k, o) : pr.pair(o, k);
  }
};

AxisView view_of(Axis axis, const DiscountedProblem& problem) {
  if (axis == Axis::X) {
    return {problem.chain_x.kernel, problem.chain_y.kernel, problem.nx(),
            problem.ny(), true};
  }
  return {problem.chain_y.kernel, problem.chain_x.kernel, problem.ny(),
          problem.nx(), false};
}

// Exponent spread beyond which the shared-shift fast path could underflow.
constexpr double kExpSpreadLimit = 600.0;

}  // namespace

ValueTableAxis zero_axis_value(Axis axis, const DiscountedProblem& problem) {
  ValueTableAxis value;
  value.axis = axis;
  value.values = Eigen::MatrixXd::Zero(
      problem.npairs(), axis == Axis::X ? problem.nx() : problem.ny());
  return value;
}

Eigen::VectorXd axis_gain(const ValueTableAxis& value, const DiscountedProblem& problem) {
  const AxisView view = view_of(value.axis, problem);
  Eigen::VectorXd gain(problem.npairs());
  for (int p = 0; p < problem.npairs(); ++p) {
    gain(p) = view.proj_kernel.row(view.proj_of(problem, p))
                  .dot(value.values.row(p));
  }
  return gain;
}

ValueTableAxis apply_bellman_sinkhorn(const TransitionCoupling& pi,
                                      const ValueTableAxis& value,
                                      const DiscountedProblem& problem, double eta) {
  if (eta <= 0.0) {
    throw std::invalid_argument("apply_bellman_sinkhorn: eta must be positive");
  }
  const AxisView view = view_of(value.axis, problem);
  const Eigen::VectorXd cost = problem.pair_cost();
  const Eigen::VectorXd gain = axis_gain(value, problem);

  // exponent(p') = -eta * gamma * gain(p'); the ground cost is constant
  // within each soft-min block and factors out exactly.
  Eigen::VectorXd exponent = -eta * problem.gamma * gain;
  const double shift = exponent.maxCoeff();
  const bool shared_shift = shift - exponent.minCoeff() <= kExpSpreadLimit;
  Eigen::VectorXd weights_exp;
  if (shared_shift) {
    weights_exp = (exponent.array() - shift).exp();
  }

  ValueTableAxis out = zero_axis_value(value.axis, problem);
  for (int p = 0; p < problem.npairs(); ++p) {
    const int proj = view.proj_of(problem, p);
    const int other = view.other_of(problem, p);
    for (int k = 0; k < view.proj_size; ++k) {
      const double kernel_mass = view.proj_kernel(proj, k);
      if (kernel_mass <= 0.0) continue;  // cell stored as zero, never read

      double log_weighted_sum;
      if (shared_shift) {
        double sum = 0.0;
        for (int o = 0; o < view.other_size; ++o) {
          const int pp = view.pair_of(problem, k, o);
          sum += pi.table(p, pp) * weights_exp(pp);
        }
        if (sum > 0.0) {
          log_weighted_sum = shift + std::log(sum / kernel_mass);
        } else {
          // Dead block: weight by the product coupling instead.
          double fb = 0.0;
          for (int o = 0; o < view.other_size; ++o) {
            fb += view.other_kernel(other, o) *
                  weights_exp(view.pair_of(problem, k, o));
          }
          log_weighted_sum = shift + std::log(fb);
        }
      } else {
        double block_max = -std::numeric_limits<double>::infinity();
        for (int o = 0; o < view.other_size; ++o) {
          const int pp = view.pair_of(problem, k, o);
          if (pi.table(p, pp) > 0.0) block_max = std::max(block_max, exponent(pp));
        }
        if (std::isfinite(block_max)) {
          double sum = 0.0;
          for (int o = 0; o < view.other_size; ++o) {
            const int pp = view.pair_of(problem, k, o);
            if (pi.table(p, pp) > 0.0) {
              sum += pi.table(p, pp) * std::exp(exponent(pp) - block_max);
            }
          }
          log_weighted_sum = block_max + std::log(sum / kernel_mass);
        } else {
          double fb_max = -std::numeric_limits<double>::infinity();
          for (int o = 0; o < view.other_size; ++o) {
            const int pp = view.pair_of(problem, k, o);
            if (view.other_kernel(other, o) > 0.0) {
              fb_max = std::max(fb_max, exponent(pp));
            }
          }
          double sum = 0.0;
          for (int o = 0; o < view.other_size; ++o) {
            const int pp = view.pair_of(problem, k, o);
            if (view.other_kernel(other, o) > 0.0) {
              sum += view.other_kernel(other, o) * std::exp(exponent(pp) - fb_max);
            }
          }
          log_weighted_sum = fb_max + std::log(sum);
        }
      }
      out.values(p, k) = cost(p) - log_weighted_sum / eta;
    }
  }
  return out;
}

ValueTableAxis solve_bs_fixed_point(const TransitionCoupling& pi, ValueTableAxis value,
                                    const DiscountedProblem& problem, double eta, int m,
                                    double tol, FixedPointReport* report) {
  FixedPointReport local;
  if (m >= 0) {
    for (int it = 0; it < m; ++it) {
      ValueTableAxis next = apply_bellman_sinkhorn(pi, value, problem, eta);
      local.residual = (next.values - value.values).cwiseAbs().maxCoeff();
      value = std::move(next);
    }
    local.iterations = m;
  } else {
    for (local.iterations = 0; local.iterations < kInnerIterationCap;) {
      ValueTableAxis next = apply_bellman_sinkhorn(pi, value, problem, eta);
      local.residual = (next.values - value.values).cwiseAbs().maxCoeff();
      value = std::move(next);
      ++local.iterations;
      if (local.residual < tol) break;
    }
    local.converged = local.residual < tol;
  }
  if (report != nullptr) *report = local;
  return value;
}

TransitionCoupling multiplicative_update(Axis axis, const TransitionCoupling& pi,
                                         const QTable& q_table,
                                         const DiscountedProblem& problem, double eta) {
  if (eta < 0.0) {
    throw std::invalid_argument("multiplicative_update: eta must be >= 0");
  }
  const AxisView view = view_of(axis, problem);
  TransitionCoupling out;
  out.table = Eigen::MatrixXd::Zero(problem.npairs(), problem.npairs());

  for (int p = 0; p < problem.npairs(); ++p) {
    const int proj = view.proj_of(problem, p);
    const int other = view.other_of(problem, p);
    for (int k = 0; k < view.proj_size; ++k) {
      const double kernel_mass = view.proj_kernel(proj, k);
      if (kernel_mass <= 0.0) continue;

      double block_max = -std::numeric_limits<double>::infinity();
      for (int o = 0; o < view.other_size; ++o) {
        const int pp = view.pair_of(problem, k, o);
        if (pi.table(p, pp) > 0.0) {
          block_max = std::max(block_max, -eta * q_table(p, pp));
        }
      }
      if (!std::isfinite(block_max)) {
        // No mass anywhere in the block: fall back to the product coupling.
        for (int o = 0; o < view.other_size; ++o) {
          out.table(p, view.pair_of(problem, k, o)) =
              kernel_mass * view.other_kernel(other, o);
        }
        continue;
      }
      double norm = 0.0;
      for (int o = 0; o < view.other_size; ++o) {
        const int pp = view.pair_of(problem, k, o);
        if (pi.table(p, pp) > 0.0) {
          const double w = pi.table(p, pp) * std::exp(-eta * q_table(p, pp) - block_max);
          out.table(p, pp) = w;
          norm += w;
        }
      }
      for (int o = 0; o < view.other_size; ++o) {
        const int pp = view.pair_of(problem, k, o);
        if (out.table(p, pp) > 0.0) {
          out.table(p, pp) *= kernel_mass / norm;
        }
      }
    }
  }
  return out;
}

PairValue policy_evaluation(const TransitionCoupling& pi,
                            const DiscountedProblem& problem) {
  const int n = problem.npairs();
  if (pi.npairs() != n) {
    throw std::invalid_argument("policy_evaluation: coupling size mismatch");
  }
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(n, n) - problem.gamma * pi.table;
  const Eigen::VectorXd cost = problem.pair_cost();
  PairValue value = system.partialPivLu().solve(cost);
  const double residual = (system * value - cost).cwiseAbs().maxCoeff();
  if (residual > 1e-10 * std::max(1.0, cost.cwiseAbs().maxCoeff())) {
    throw std::runtime_error("policy_evaluation: Bellman residual " +
                             std::to_string(residual));
  }
  return value;
}

QTable q_from_value(const PairValue& value, const DiscountedProblem& problem) {
  const int n = problem.npairs();
  const Eigen::VectorXd cost = problem.pair_cost();
  QTable q(n, n);
  for (int p = 0; p < n; ++p) {
    q.row(p) = (problem.gamma * value.array() + cost(p)).transpose();
  }
  return q;
}

QTable q_from_axis_value(const ValueTableAxis& value, const DiscountedProblem& problem) {
  const int n = problem.npairs();
  const Eigen::VectorXd cost = problem.pair_cost();
  const Eigen::VectorXd gain = axis_gain(value, problem);
  QTable q(n, n);
  for (int p = 0; p < n; ++p) {
    q.row(p) = (problem.gamma * gain.array() + cost(p)).transpose();
  }
  return q;
}

BellmanStep exact_bellman_operator(const PairValue& value,
                                   const DiscountedProblem& problem) {
  const int nx = problem.nx();
  const int ny = problem.ny();
  Eigen::MatrixXd next_cost(nx, ny);
  for (int xp = 0; xp < nx; ++xp) {
    for (int yp = 0; yp < ny; ++yp) {
      next_cost(xp, yp) = value(problem.pair(xp, yp));
    }
  }

  BellmanStep step;
  step.value.resize(problem.npairs());
  step.greedy.table.resize(problem.npairs(), problem.npairs());
  const Eigen::VectorXd cost = problem.pair_cost();
  for (int p = 0; p < problem.npairs(); ++p) {
    const int x = problem.pair_x(p);
    const int y = problem.pair_y(p);
    const OtSolution ot = exact_ot_pair(next_cost, problem.chain_x.kernel.row(x),
                                        problem.chain_y.kernel.row(y));
    step.value(p) = cost(p) + problem.gamma * ot.value;
    for (int xp = 0; xp < nx; ++xp) {
      for (int yp = 0; yp < ny; ++yp) {
        step.greedy.table(p, problem.pair(xp, yp)) = ot.plan(xp, yp);
      }
    }
  }
  return step;
}

}  // namespace otmc
