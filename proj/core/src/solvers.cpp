#include "otmc/solvers.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "otmc/pairwise.hpp"

namespace otmc {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Per-iteration occupancy bookkeeping shared by the drivers.
class IterationTracker {
 public:
  IterationTracker(const DiscountedProblem& problem, const SolverConfig& config,
                   bool track_average)
      : problem_(problem),
        config_(config),
        cost_(problem.pair_cost()),
        track_average_(track_average) {
    if (track_average_) {
      sum_ = Eigen::MatrixXd::Zero(problem.npairs(), problem.npairs());
    }
  }

  bool active() const {
    return config_.collect_diagnostics || config_.early_stopping || track_average_;
  }

  /// Consumes the iterate's occupancy; returns the diagnostic triple.
  IterationRecord observe(int k, const TransitionCoupling& pi) {
    IterationRecord record;
    record.k = k;
    OccupancyCoupling mu = occupancy_of(pi, problem_);
    record.objective = mu.state_occupancy().dot(cost_);
    record.delta = constraint_residuals(mu, problem_).delta();
    record.l1_step =
        has_prev_ ? (mu.table - prev_.table).cwiseAbs().sum() : 0.0;
    if (track_average_) {
      sum_ += mu.table;
      ++count_;
    }
    if (config_.early_stopping) {
      if (has_prev_ && record.delta < config_.tol &&
          std::abs(record.objective - prev_objective_) < config_.tol) {
        ++streak_;
      } else {
        streak_ = 0;
      }
      prev_objective_ = record.objective;
    }
    prev_ = std::move(mu);
    has_prev_ = true;
    return record;
  }

  bool should_stop() const { return config_.early_stopping && streak_ >= 10; }

  OccupancyCoupling average() const {
    OccupancyCoupling avg;
    avg.table = sum_ / static_cast<double>(count_);
    return avg;
  }

 private:
  const DiscountedProblem& problem_;
  const SolverConfig& config_;
  Eigen::VectorXd cost_;
  bool track_average_;
  Eigen::MatrixXd sum_;
  int count_ = 0;
  OccupancyCoupling prev_;
  bool has_prev_ = false;
  double prev_objective_ = 0.0;
  int streak_ = 0;
};

void finalize(SolveResult& result, const DiscountedProblem& problem) {
  result.value = policy_evaluation(result.pi_out, problem);
  result.distance = result.value(problem.init_pair());
}

// One application of the evaluation operator on a Q table:
// (T Q)(p, p') = c(p) + gamma sum_{p''} pi(p''|p') Q(p', p'').
QTable q_bellman_apply(const TransitionCoupling& pi, const QTable& q,
                       const DiscountedProblem& problem) {
  const Eigen::VectorXd cost = problem.pair_cost();
  const Eigen::VectorXd next =
      (pi.table.array() * q.array()).rowwise().sum();
  QTable out(q.rows(), q.cols());
  for (int p = 0; p < q.rows(); ++p) {
    out.row(p) = (problem.gamma * next.array() + cost(p)).transpose();
  }
  return out;
}

}  // namespace

double eta_for(const SolverConfig& config, const DiscountedProblem& problem, int k) {
  switch (config.schedule) {
    case EtaSchedule::constant:
      return config.eta;
    case EtaSchedule::inv_sqrt:
      return config.eta / std::sqrt(static_cast<double>(k));
    case EtaSchedule::theory_svi: {
      const double cost_sup = problem.cost_sup();
      if (cost_sup <= 0.0) return 1.0;
      const double log_pairs = std::log(static_cast<double>(std::max(problem.npairs(), 2)));
      const double horizon = 1.0 - problem.gamma;
      return std::sqrt(horizon * horizon * horizon * log_pairs /
                       static_cast<double>(config.iterations)) /
             (4.0 * cost_sup);
    }
    case EtaSchedule::theory_spi: {
      const double cost_sup = problem.cost_sup();
      if (cost_sup <= 0.0) return 1.0;
      const double log_pairs = std::log(static_cast<double>(std::max(problem.npairs(), 2)));
      return (1.0 - problem.gamma) / (3.0 * cost_sup) *
             std::sqrt(8.0 * log_pairs / static_cast<double>(config.iterations));
    }
  }
  throw std::logic_error("eta_for: unknown schedule");
}

SolveResult svi(const DiscountedProblem& problem, const SolverConfig& config) {
  if (config.iterations < 1) {
    throw std::invalid_argument("svi: iterations must be >= 1");
  }
  const int total = config.iterations;
  SolveResult result;
  result.algo = "svi";

  TransitionCoupling pi = product_coupling(problem);
  ValueTableAxis value_x = zero_axis_value(Axis::X, problem);
  ValueTableAxis value_y = zero_axis_value(Axis::Y, problem);
  IterationTracker tracker(problem, config,
                           config.averaging == Averaging::full_average);

  const auto loop_start = Clock::now();
  int k = 1;
  for (;; ++k) {
    const auto iter_start = Clock::now();
    IterationRecord record;
    if (tracker.active()) record = tracker.observe(k, pi);
    const bool stop = k == total || tracker.should_stop();
    if (!stop) {
      const double eta_k = eta_for(config, problem, k);
      if (k % 2 == 1) {
        value_x = solve_bs_fixed_point(pi, std::move(value_x), problem, eta_k,
                                       config.inner_m, config.inner_tol);
        pi = multiplicative_update(Axis::X, pi, q_from_axis_value(value_x, problem),
                                   problem, eta_k);
      } else {
        value_y = solve_bs_fixed_point(pi, std::move(value_y), problem, eta_k,
                                       config.inner_m, config.inner_tol);
        pi = multiplicative_update(Axis::Y, pi, q_from_axis_value(value_y, problem),
                                   problem, eta_k);
      }
    }
    if (config.collect_diagnostics) {
      record.wall_ms = ms_since(iter_start);
      result.diagnostics.push_back(record);
    }
    if (stop) break;
  }
  result.iterations = k;
  result.iteration_seconds = seconds_since(loop_start);

  if (config.averaging == Averaging::full_average) {
    pi = coupling_of(tracker.average(), problem);
  }
  result.pi_out = round_transition_coupling(pi, problem);
  finalize(result, problem);
  return result;
}

SolveResult spi(const DiscountedProblem& problem, const SolverConfig& config) {
  if (config.iterations < 1) {
    throw std::invalid_argument("spi: iterations must be >= 1");
  }
  const int total = config.iterations;
  SolveResult result;
  result.algo = "spi";

  TransitionCoupling pi = product_coupling(problem);
  TransitionCoupling pi_rounded;
  QTable q = QTable::Zero(problem.npairs(), problem.npairs());
  IterationTracker tracker(problem, config,
                           config.averaging == Averaging::full_average);

  const auto loop_start = Clock::now();
  int k = 1;
  for (;; ++k) {
    const auto iter_start = Clock::now();
    pi_rounded = round_transition_coupling(pi, problem);
    IterationRecord record;
    if (tracker.active()) record = tracker.observe(k, pi_rounded);
    const bool stop = k == total || tracker.should_stop();
    if (!stop) {
      if (config.inner_m < 0) {
        q = q_from_value(policy_evaluation(pi_rounded, problem), problem);
      } else {
        for (int it = 0; it < config.inner_m; ++it) {
          q = q_bellman_apply(pi_rounded, q, problem);
        }
      }
      const double eta_k = eta_for(config, problem, k);
      pi = multiplicative_update(k % 2 == 1 ? Axis::X : Axis::Y, pi, q, problem,
                                 eta_k);
    }
    if (config.collect_diagnostics) {
      record.wall_ms = ms_since(iter_start);
      result.diagnostics.push_back(record);
    }
    if (stop) break;
  }
  result.iterations = k;
  result.iteration_seconds = seconds_since(loop_start);

  if (config.averaging == Averaging::full_average) {
    // Each rounded iterate is feasible, so the average needs no rounding.
    result.pi_out = coupling_of(tracker.average(), problem);
  } else {
    result.pi_out = pi_rounded;
  }
  finalize(result, problem);
  return result;
}

SolveResult exact_dp(const DiscountedProblem& problem, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("exact_dp: tol must be positive");
  SolveResult result;
  result.algo = "exact";

  PairValue value = PairValue::Zero(problem.npairs());
  const double threshold = tol * (1.0 - problem.gamma) / (2.0 * problem.gamma);
  const auto loop_start = Clock::now();
  int sweeps = 0;
  for (;;) {
    BellmanStep step = exact_bellman_operator(value, problem);
    ++sweeps;
    const double change = (step.value - value).cwiseAbs().maxCoeff();
    value = std::move(step.value);
    if (change <= threshold) break;
    if (sweeps >= 1000000) {
      throw std::runtime_error("exact_dp: iteration cap exceeded");
    }
  }
  // Greedy with respect to the converged value; evaluated exactly below, so
  // the reported distance is a true upper bound within tol of the optimum.
  result.pi_out = exact_bellman_operator(value, problem).greedy;
  result.iterations = sweeps;
  result.iteration_seconds = seconds_since(loop_start);
  finalize(result, problem);
  return result;
}

SolveResult baseline_vi_sinkhorn(const DiscountedProblem& problem,
                                 const SolverConfig& config, double inner_eta,
                                 int inner_iters) {
  if (inner_eta <= 0.0 || inner_iters < 1) {
    throw std::invalid_argument("baseline_vi_sinkhorn: inner parameters must be positive");
  }
  const int nx = problem.nx();
  const int ny = problem.ny();
  SolveResult result;
  result.algo = "dwl";

  PairValue value = PairValue::Zero(problem.npairs());
  const Eigen::VectorXd cost = problem.pair_cost();
  TransitionCoupling greedy;
  greedy.table.resize(problem.npairs(), problem.npairs());
  std::vector<Eigen::VectorXd> pot_f(problem.npairs()), pot_g(problem.npairs());
  IterationTracker tracker(problem, config, false);

  Eigen::MatrixXd next_cost(nx, ny);
  const auto loop_start = Clock::now();
  int k = 1;
  for (;; ++k) {
    const auto iter_start = Clock::now();
    for (int xp = 0; xp < nx; ++xp) {
      for (int yp = 0; yp < ny; ++yp) {
        next_cost(xp, yp) = value(problem.pair(xp, yp));
      }
    }
    PairValue next(problem.npairs());
    for (int p = 0; p < problem.npairs(); ++p) {
      const int x = problem.pair_x(p);
      const int y = problem.pair_y(p);
      const SinkhornPairResult inner = sinkhorn_pair(
          next_cost, problem.chain_x.kernel.row(x), problem.chain_y.kernel.row(y),
          inner_eta, inner_iters,
          config.warm_start_inner ? &pot_f[p] : nullptr,
          config.warm_start_inner ? &pot_g[p] : nullptr);
      next(p) = cost(p) + problem.gamma * inner.value;
      for (int xp = 0; xp < nx; ++xp) {
        for (int yp = 0; yp < ny; ++yp) {
          greedy.table(p, problem.pair(xp, yp)) = inner.plan(xp, yp);
        }
      }
    }
    const double change = (next - value).cwiseAbs().maxCoeff();
    value = std::move(next);

    IterationRecord record;
    if (tracker.active()) record = tracker.observe(k, greedy);
    const bool stop = k == config.iterations ||
                      (config.early_stopping && change < config.tol) ||
                      tracker.should_stop();
    if (config.collect_diagnostics) {
      record.k = k;
      record.wall_ms = ms_since(iter_start);
      result.diagnostics.push_back(record);
    }
    if (stop) break;
  }
  result.iterations = k;
  result.iteration_seconds = seconds_since(loop_start);
  result.pi_out = greedy;  // rows are rounded plans, already feasible
  finalize(result, problem);
  return result;
}

SolveResult baseline_pi_sinkhorn(const DiscountedProblem& problem,
                                 const SolverConfig& config, double inner_eta,
                                 int inner_iters, int eval_steps) {
  if (inner_eta <= 0.0 || inner_iters < 1 || eval_steps < 1) {
    throw std::invalid_argument("baseline_pi_sinkhorn: inner parameters must be positive");
  }
  const int nx = problem.nx();
  const int ny = problem.ny();
  SolveResult result;
  result.algo = "eotc";

  TransitionCoupling pi = product_coupling(problem);
  PairValue value = PairValue::Zero(problem.npairs());
  const Eigen::VectorXd cost = problem.pair_cost();
  std::vector<Eigen::VectorXd> pot_f(problem.npairs()), pot_g(problem.npairs());
  IterationTracker tracker(problem, config, false);

  Eigen::MatrixXd next_cost(nx, ny);
  const auto loop_start = Clock::now();
  int k = 1;
  for (;; ++k) {
    const auto iter_start = Clock::now();
    for (int step = 0; step < eval_steps; ++step) {
      value = cost + problem.gamma * (pi.table * value);
    }
    for (int xp = 0; xp < nx; ++xp) {
      for (int yp = 0; yp < ny; ++yp) {
        next_cost(xp, yp) = value(problem.pair(xp, yp));
      }
    }
    for (int p = 0; p < problem.npairs(); ++p) {
      const int x = problem.pair_x(p);
      const int y = problem.pair_y(p);
      const SinkhornPairResult inner = sinkhorn_pair(
          next_cost, problem.chain_x.kernel.row(x), problem.chain_y.kernel.row(y),
          inner_eta, inner_iters,
          config.warm_start_inner ? &pot_f[p] : nullptr,
          config.warm_start_inner ? &pot_g[p] : nullptr);
      for (int xp = 0; xp < nx; ++xp) {
        for (int yp = 0; yp < ny; ++yp) {
          pi.table(p, problem.pair(xp, yp)) = inner.plan(xp, yp);
        }
      }
    }

    IterationRecord record;
    if (tracker.active()) record = tracker.observe(k, pi);
    const bool stop = k == config.iterations || tracker.should_stop();
    if (config.collect_diagnostics) {
      record.k = k;
      record.wall_ms = ms_since(iter_start);
      result.diagnostics.push_back(record);
    }
    if (stop) break;
  }
  result.iterations = k;
  result.iteration_seconds = seconds_since(loop_start);
  result.pi_out = pi;
  finalize(result, problem);
  return result;
}

namespace {

std::string format_coefficient(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

// Emits "name: terms = rhs" with sign-prefixed terms, wrapping long rows.
void write_constraint(std::ofstream& out, const std::string& name,
                      const std::vector<std::pair<std::string, double>>& terms,
                      double rhs) {
  out << " " << name << ":";
  int on_line = 0;
  for (const auto& [var, coeff] : terms) {
    if (coeff == 0.0) continue;
    out << (coeff < 0.0 ? " - " : " + ") << format_coefficient(std::abs(coeff))
        << " " << var;
    if (++on_line % 8 == 0) out << "\n   ";
  }
  out << " = " << format_coefficient(rhs) << "\n";
}

}  // namespace

void export_lp(const DiscountedProblem& problem, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_lp: cannot open " + path);
  const int n = problem.npairs();
  const int nx = problem.nx();
  const int ny = problem.ny();
  const Eigen::VectorXd cost = problem.pair_cost();
  const auto var = [](int i, int j) {
    return "mu_" + std::to_string(i) + "_" + std::to_string(j);
  };

  out << "\\ Occupancy-coupling linear program over " << n * n << " variables\n";
  out << "\\ mu_p_q is the discounted visitation mass of (pair p, next pair q),\n";
  out << "\\ pairs indexed p = x * " << ny << " + y.\n";
  out << "\\ The optimal objective equals (1 - gamma) times the transport\n";
  out << "\\ distance; divide by (1 - gamma) = " << format_coefficient(1.0 - problem.gamma)
      << " to recover it.\n";
  out << "Minimize\n obj:";
  {
    int on_line = 0;
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        if (cost(p) == 0.0) continue;
        out << " + " << format_coefficient(cost(p)) << " " << var(p, q);
        if (++on_line % 8 == 0) out << "\n   ";
      }
    }
    if (on_line == 0) out << " 0 " << var(0, 0);
  }
  out << "\nSubject To\n";

  std::vector<std::pair<std::string, double>> terms;
  // Flow: outflow of p minus discounted inflow equals the initial mass.
  for (int p = 0; p < n; ++p) {
    terms.clear();
    for (int q = 0; q < n; ++q) {
      if (q == p) {
        terms.emplace_back(var(p, p), 1.0 - problem.gamma);
      } else {
        terms.emplace_back(var(p, q), 1.0);
        terms.emplace_back(var(q, p), -problem.gamma);
      }
    }
    write_constraint(out, "flow_" + std::to_string(p), terms,
                     (1.0 - problem.gamma) * problem.nu0(p));
  }
  // Transition coherence, one constraint per (pair, next marginal state).
  for (int p = 0; p < n; ++p) {
    const int x = problem.pair_x(p);
    for (int xp = 0; xp < nx; ++xp) {
      terms.clear();
      const double mass = problem.chain_x.kernel(x, xp);
      for (int q = 0; q < n; ++q) {
        const double direct = problem.pair_x(q) == xp ? 1.0 : 0.0;
        terms.emplace_back(var(p, q), direct - mass);
      }
      write_constraint(out, "cohx_" + std::to_string(p) + "_" + std::to_string(xp),
                       terms, 0.0);
    }
  }
  for (int p = 0; p < n; ++p) {
    const int y = problem.pair_y(p);
    for (int yp = 0; yp < ny; ++yp) {
      terms.clear();
      const double mass = problem.chain_y.kernel(y, yp);
      for (int q = 0; q < n; ++q) {
        const double direct = problem.pair_y(q) == yp ? 1.0 : 0.0;
        terms.emplace_back(var(p, q), direct - mass);
      }
      write_constraint(out, "cohy_" + std::to_string(p) + "_" + std::to_string(yp),
                       terms, 0.0);
    }
  }
  terms.clear();
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) terms.emplace_back(var(p, q), 1.0);
  }
  write_constraint(out, "norm", terms, 1.0);
  out << "Bounds\n";
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      out << " 0 <= " << var(p, q) << "\n";
    }
  }
  out << "End\n";
  if (!out.good()) throw std::runtime_error("export_lp: write failed for " + path);
}

}  // namespace otmc
