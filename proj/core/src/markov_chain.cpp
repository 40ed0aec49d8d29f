#include "otmc/markov_chain.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace otmc {

std::vector<std::string> validate_chain(const MarkovChain& chain) {
  std::vector<std::string> violations;
  const int n = chain.size();
  std::ostringstream msg;

  if (chain.kernel.cols() != chain.kernel.rows()) {
    msg << "kernel is " << chain.kernel.rows() << "x" << chain.kernel.cols()
        << ", expected square";
    violations.push_back(msg.str());
    return violations;
  }
  if (!chain.states.empty() && static_cast<int>(chain.states.size()) != n) {
    msg.str("");
    msg << "state list has " << chain.states.size() << " entries for a " << n
        << "-state kernel";
    violations.push_back(msg.str());
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = chain.kernel(i, j);
      if (!(v >= 0.0)) {  // catches NaN as well
        msg.str("");
        msg << "kernel entry (" << i << "," << j << ") is negative: " << v;
        violations.push_back(msg.str());
      }
    }
    const double row_sum = chain.kernel.row(i).sum();
    if (std::abs(row_sum - 1.0) > kRowSumTol) {
      msg.str("");
      msg << "row " << i << " sums to " << row_sum << " (residual "
          << row_sum - 1.0 << ")";
      violations.push_back(msg.str());
    }
  }
  if (chain.init < 0 || chain.init >= n) {
    msg.str("");
    msg << "init index " << chain.init << " outside [0," << n << ")";
    violations.push_back(msg.str());
  }
  if (chain.labels && chain.labels->size() != n) {
    msg.str("");
    msg << "label vector has " << chain.labels->size() << " entries for a "
        << n << "-state chain";
    violations.push_back(msg.str());
  }
  return violations;
}

GroundCost cost_from_labels(const MarkovChain& chain_x, const MarkovChain& chain_y,
                            CostScale scale, double gamma) {
  if (!chain_x.labels || !chain_y.labels) {
    throw std::invalid_argument(
        "cost_from_labels: both chains must carry labels");
  }
  const double s = scale == CostScale::one_minus_gamma ? (1.0 - gamma) : 1.0;
  GroundCost cost;
  cost.provenance = GroundCost::Provenance::labels_absdiff;
  cost.scale = scale;
  cost.values.resize(chain_x.size(), chain_y.size());
  for (int x = 0; x < chain_x.size(); ++x) {
    for (int y = 0; y < chain_y.size(); ++y) {
      cost.values(x, y) = s * std::abs((*chain_x.labels)(x) - (*chain_y.labels)(y));
    }
  }
  return cost;
}

Eigen::VectorXd DiscountedProblem::pair_cost() const {
  Eigen::VectorXd c(npairs());
  for (int x = 0; x < nx(); ++x) {
    for (int y = 0; y < ny(); ++y) {
      c(pair(x, y)) = cost.values(x, y);
    }
  }
  return c;
}

DiscountedProblem make_problem(MarkovChain chain_x, MarkovChain chain_y,
                               GroundCost cost, double gamma) {
  for (const auto* chain : {&chain_x, &chain_y}) {
    const auto violations = validate_chain(*chain);
    if (!violations.empty()) {
      throw std::invalid_argument("make_problem: invalid chain: " + violations.front());
    }
  }
  if (cost.values.rows() != chain_x.size() || cost.values.cols() != chain_y.size()) {
    std::ostringstream msg;
    msg << "make_problem: cost is " << cost.values.rows() << "x"
        << cost.values.cols() << ", expected " << chain_x.size() << "x"
        << chain_y.size();
    throw std::invalid_argument(msg.str());
  }
  if ((cost.values.array() < 0.0).any() || !cost.values.allFinite()) {
    throw std::invalid_argument("make_problem: cost entries must be finite and >= 0");
  }
  if (!(gamma >= kGammaMargin && gamma <= 1.0 - kGammaMargin)) {
    std::ostringstream msg;
    msg << "make_problem: gamma = " << gamma << " outside [" << kGammaMargin
        << ", " << 1.0 - kGammaMargin << "]";
    throw std::invalid_argument(msg.str());
  }

  DiscountedProblem problem;
  problem.chain_x = std::move(chain_x);
  problem.chain_y = std::move(chain_y);
  problem.cost = std::move(cost);
  problem.gamma = gamma;
  problem.nu0 = Eigen::VectorXd::Zero(problem.npairs());
  problem.nu0(problem.init_pair()) = 1.0;
  return problem;
}

}  // namespace otmc
