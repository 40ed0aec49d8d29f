#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "otmc/coupling.hpp"
#include "otmc/markov_chain.hpp"
#include "otmc/operators.hpp"

namespace otmc {

enum class EtaSchedule {
  constant,    // eta_k = eta
  inv_sqrt,    // eta_k = eta / sqrt(k)
  theory_svi,  // eta = sqrt((1-gamma)^3 log|XY| / K) / (4 ||c||_inf)
  theory_spi,  // eta = (1-gamma) sqrt(8 log|XY| / K) / (3 ||c||_inf)
};

enum class Averaging { last_iterate, full_average };

struct SolverConfig {
  EtaSchedule schedule = EtaSchedule::inv_sqrt;
  double eta = 1.0;  // constant value, or the c0 of the inv_sqrt schedule
  int iterations = 1000;  // outer iterations K
  int inner_m = -1;       // projection steps per round; < 0 iterates to inner_tol
  double inner_tol = 1e-10;
  Averaging averaging = Averaging::last_iterate;
  double tol = 1e-6;  // early-stop threshold
  // Stop once delta(mu_k) < tol and the objective change stays < tol for 10
  // consecutive iterations. Off by default; leave off to follow the
  // fixed-iteration schedules exactly.
  bool early_stopping = false;
  bool collect_diagnostics = true;
  bool warm_start_inner = false;  // baselines only: reuse Sinkhorn potentials
  std::uint64_t seed = 0;
};

/// Step size used in outer iteration k (1-based).
double eta_for(const SolverConfig& config, const DiscountedProblem& problem, int k);

struct IterationRecord {
  int k = 0;
  double objective = 0.0;  // <mu_k, c>
  double delta = 0.0;      // coherence violation delta(mu_k)
  double l1_step = 0.0;    // ||mu_k - mu_{k-1}||_1, zero at k = 1
  double wall_ms = 0.0;
};

struct SolveResult {
  TransitionCoupling pi_out;  // always a valid coupling
  PairValue value;            // V^{pi_out}
  double distance = 0.0;      // value at the initial state pair
  std::vector<IterationRecord> diagnostics;
  int iterations = 0;
  double iteration_seconds = 0.0;  // wall time of the iteration loop
  std::string algo;
};

/// Sinkhorn value iteration: alternating smoothed-Bellman projections and
/// multiplicative coupling updates, rounded output, exact final evaluation.
SolveResult svi(const DiscountedProblem& problem, const SolverConfig& config);

/// Sinkhorn policy iteration: per round, round the coupling, evaluate its
/// Q-function (exactly for inner_m < 0, else inner_m Bellman applications),
/// and apply the multiplicative update on alternating axes.
SolveResult spi(const DiscountedProblem& problem, const SolverConfig& config);

/// Value iteration with an exact per-pair optimal-transport inner solve;
/// the returned distance is within tol of the true transport cost.
SolveResult exact_dp(const DiscountedProblem& problem, double tol);

/// Value-iteration baseline where the inner problem is solved approximately
/// by per-pair Sinkhorn; the output coupling is rounded and evaluated
/// exactly, so the reported distance is a true upper bound.
SolveResult baseline_vi_sinkhorn(const DiscountedProblem& problem,
                                 const SolverConfig& config, double inner_eta,
                                 int inner_iters);

/// Policy-iteration baseline: eval_steps applications of the evaluation
/// operator alternate with per-pair Sinkhorn greedy improvement.
SolveResult baseline_pi_sinkhorn(const DiscountedProblem& problem,
                                 const SolverConfig& config, double inner_eta,
                                 int inner_iters, int eval_steps);

/// Writes min <mu, c> over the occupancy-coupling polytope (flow, both
/// coherence constraint families, simplex) in plain-text LP format. The
/// optimal objective equals (1 - gamma) times the transport distance.
void export_lp(const DiscountedProblem& problem, const std::string& path);

}  // namespace otmc
