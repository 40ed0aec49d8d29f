#include "otmc/coupling.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/LU>

#include "otmc/pairwise.hpp"

namespace otmc {

TransitionCoupling product_coupling(const DiscountedProblem& problem) {
  const int nx = problem.nx();
  const int ny = problem.ny();
  TransitionCoupling pi;
  pi.table.resize(problem.npairs(), problem.npairs());
  for (int x = 0; x < nx; ++x) {
    for (int y = 0; y < ny; ++y) {
      const int p = problem.pair(x, y);
      for (int xp = 0; xp < nx; ++xp) {
        for (int yp = 0; yp < ny; ++yp) {
          pi.table(p, problem.pair(xp, yp)) =
              problem.chain_x.kernel(x, xp) * problem.chain_y.kernel(y, yp);
        }
      }
    }
  }
  return pi;
}

bool is_valid_coupling(const TransitionCoupling& pi, const DiscountedProblem& problem,
                       double marginal_tol) {
  const int nx = problem.nx();
  const int ny = problem.ny();
  for (int p = 0; p < problem.npairs(); ++p) {
    if (std::abs(pi.table.row(p).sum() - 1.0) > kRowSumTol) return false;
    const int x = problem.pair_x(p);
    const int y = problem.pair_y(p);
    for (int xp = 0; xp < nx; ++xp) {
      double mass = 0.0;
      for (int yp = 0; yp < ny; ++yp) mass += pi.table(p, problem.pair(xp, yp));
      if (std::abs(mass - problem.chain_x.kernel(x, xp)) > marginal_tol) return false;
    }
    for (int yp = 0; yp < ny; ++yp) {
      double mass = 0.0;
      for (int xp = 0; xp < nx; ++xp) mass += pi.table(p, problem.pair(xp, yp));
      if (std::abs(mass - problem.chain_y.kernel(y, yp)) > marginal_tol) return false;
    }
  }
  return true;
}

Eigen::VectorXd state_occupancy_of(const TransitionCoupling& pi,
                                   const DiscountedProblem& problem) {
  const int n = problem.npairs();
  if (pi.npairs() != n) {
    throw std::invalid_argument("state_occupancy_of: coupling size mismatch");
  }
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) -
                           problem.gamma * pi.table.transpose();
  const Eigen::VectorXd rhs = (1.0 - problem.gamma) * problem.nu0;
  Eigen::VectorXd nu = system.partialPivLu().solve(rhs);
  const double residual = (system * nu - rhs).cwiseAbs().sum();
  if (residual > 1e-8) {
    throw std::runtime_error("state_occupancy_of: flow solve residual " +
                             std::to_string(residual));
  }
  // The exact solution is nonnegative (Perron-Frobenius); clip rounding dust.
  nu = nu.cwiseMax(0.0);
  return nu;
}

OccupancyCoupling occupancy_of(const TransitionCoupling& pi,
                               const DiscountedProblem& problem) {
  const Eigen::VectorXd nu = state_occupancy_of(pi, problem);
  OccupancyCoupling mu;
  mu.table = nu.asDiagonal() * pi.table;
  return mu;
}

TransitionCoupling coupling_of(const OccupancyCoupling& mu,
                               const DiscountedProblem& problem) {
  const int n = problem.npairs();
  if (mu.npairs() != n) {
    throw std::invalid_argument("coupling_of: occupancy size mismatch");
  }
  const Eigen::VectorXd nu = mu.state_occupancy();
  TransitionCoupling fallback;  // built lazily; most couplings have full mass
  TransitionCoupling pi;
  pi.table.resize(n, n);
  for (int p = 0; p < n; ++p) {
    if (nu(p) > kOccupancyMassFloor) {
      pi.table.row(p) = mu.table.row(p) / nu(p);
    } else {
      if (fallback.table.size() == 0) fallback = product_coupling(problem);
      pi.table.row(p) = fallback.table.row(p);
    }
  }
  return pi;
}

ConstraintResiduals constraint_residuals(const OccupancyCoupling& mu,
                                         const DiscountedProblem& problem) {
  const int nx = problem.nx();
  const int ny = problem.ny();
  const Eigen::VectorXd nu = mu.state_occupancy();
  const Eigen::VectorXd inflow = mu.table.colwise().sum();

  ConstraintResiduals res;
  for (int p = 0; p < problem.npairs(); ++p) {
    res.flow_l1 += std::abs(nu(p) - problem.gamma * inflow(p) -
                            (1.0 - problem.gamma) * problem.nu0(p));
  }
  for (int p = 0; p < problem.npairs(); ++p) {
    const int x = problem.pair_x(p);
    const int y = problem.pair_y(p);
    for (int xp = 0; xp < nx; ++xp) {
      double mass = 0.0;
      for (int yp = 0; yp < ny; ++yp) mass += mu.table(p, problem.pair(xp, yp));
      res.delta_x += std::abs(nu(p) * problem.chain_x.kernel(x, xp) - mass);
    }
    for (int yp = 0; yp < ny; ++yp) {
      double mass = 0.0;
      for (int xp = 0; xp < nx; ++xp) mass += mu.table(p, problem.pair(xp, yp));
      res.delta_y += std::abs(nu(p) * problem.chain_y.kernel(y, yp) - mass);
    }
  }
  return res;
}

double rounding_error(const OccupancyCoupling& mu, const DiscountedProblem& problem) {
  const int nx = problem.nx();
  const int ny = problem.ny();
  const Eigen::VectorXd nu = mu.state_occupancy();
  double total = 0.0;
  Eigen::MatrixXd row(nx, ny);
  for (int p = 0; p < problem.npairs(); ++p) {
    if (nu(p) <= kOccupancyMassFloor) continue;  // zero weight either way
    const int x = problem.pair_x(p);
    const int y = problem.pair_y(p);
    for (int xp = 0; xp < nx; ++xp) {
      for (int yp = 0; yp < ny; ++yp) {
        row(xp, yp) = mu.table(p, problem.pair(xp, yp)) / nu(p);
      }
    }
    const Eigen::MatrixXd rounded = round_pair(
        row, problem.chain_x.kernel.row(x), problem.chain_y.kernel.row(y));
    total += nu(p) * (rounded - row).cwiseAbs().sum();
  }
  return total;
}

Divergences divergences(const OccupancyCoupling& mu, const OccupancyCoupling& mu_prev,
                        const DiscountedProblem& problem) {
  if (mu.table.rows() != mu_prev.table.rows() ||
      mu.table.cols() != mu_prev.table.cols()) {
    throw std::invalid_argument("divergences: shape mismatch");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  Divergences out;
  out.l1 = (mu.table - mu_prev.table).cwiseAbs().sum();

  for (int p = 0; p < mu.npairs(); ++p) {
    for (int q = 0; q < mu.npairs(); ++q) {
      const double a = mu.table(p, q);
      if (a <= 0.0) continue;
      const double b = mu_prev.table(p, q);
      if (b <= 0.0) {
        out.kl = inf;
        out.support_violation = true;
      } else if (out.kl != inf) {
        out.kl += a * std::log(a / b);
      }
    }
  }

  const TransitionCoupling pi = coupling_of(mu, problem);
  const TransitionCoupling pi_prev = coupling_of(mu_prev, problem);
  for (int p = 0; p < mu.npairs(); ++p) {
    for (int q = 0; q < mu.npairs(); ++q) {
      const double a = mu.table(p, q);
      if (a <= 0.0) continue;
      const double ratio_num = pi.table(p, q);
      const double ratio_den = pi_prev.table(p, q);
      if (ratio_den <= 0.0) {
        out.conditional_kl = inf;
        out.support_violation = true;
      } else if (out.conditional_kl != inf) {
        out.conditional_kl += a * std::log(ratio_num / ratio_den);
      }
    }
  }
  return out;
}

OccupancyCoupling average_occupancies(const std::vector<OccupancyCoupling>& mus) {
  if (mus.empty()) {
    throw std::invalid_argument("average_occupancies: empty list");
  }
  OccupancyCoupling avg;
  avg.table = Eigen::MatrixXd::Zero(mus.front().table.rows(), mus.front().table.cols());
  for (const auto& mu : mus) {
    if (mu.table.rows() != avg.table.rows() || mu.table.cols() != avg.table.cols()) {
      throw std::invalid_argument("average_occupancies: shape mismatch");
    }
    avg.table += mu.table;
  }
  avg.table /= static_cast<double>(mus.size());
  return avg;
}

}  // namespace otmc
