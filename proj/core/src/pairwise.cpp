#include "otmc/pairwise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace otmc {

Eigen::MatrixXd round_pair(const Eigen::MatrixXd& F, const Eigen::VectorXd& p,
                           const Eigen::VectorXd& q) {
  const int m = static_cast<int>(F.rows());
  const int n = static_cast<int>(F.cols());
  if (p.size() != m || q.size() != n) {
    throw std::invalid_argument("round_pair: margin sizes do not match F");
  }

  Eigen::MatrixXd G = F;
  for (int i = 0; i < m; ++i) {
    const double row_sum = G.row(i).sum();
    if (row_sum > 0.0) G.row(i) *= std::min(p(i) / row_sum, 1.0);
  }
  for (int j = 0; j < n; ++j) {
    const double col_sum = G.col(j).sum();
    if (col_sum > 0.0) G.col(j) *= std::min(q(j) / col_sum, 1.0);
  }

  const Eigen::VectorXd err_p = p - G.rowwise().sum();
  const Eigen::VectorXd err_q = q - G.colwise().sum().transpose();
  const double scale = err_p.cwiseAbs().sum();
  if (scale > 0.0) {
    G += err_p * err_q.transpose() / scale;
  }
  return G.cwiseMax(0.0);
}

TransitionCoupling round_transition_coupling(const TransitionCoupling& pi,
                                             const DiscountedProblem& problem) {
  const int nx = problem.nx();
  const int ny = problem.ny();
  TransitionCoupling rounded;
  rounded.table.resize(problem.npairs(), problem.npairs());
  Eigen::MatrixXd row(nx, ny);
  for (int p = 0; p < problem.npairs(); ++p) {
    const int x = problem.pair_x(p);
    const int y = problem.pair_y(p);
    for (int xp = 0; xp < nx; ++xp) {
      for (int yp = 0; yp < ny; ++yp) {
        row(xp, yp) = pi.table(p, problem.pair(xp, yp));
      }
    }
    const Eigen::MatrixXd out = round_pair(row, problem.chain_x.kernel.row(x),
                                           problem.chain_y.kernel.row(y));
    for (int xp = 0; xp < nx; ++xp) {
      for (int yp = 0; yp < ny; ++yp) {
        rounded.table(p, problem.pair(xp, yp)) = out(xp, yp);
      }
    }
  }
  return rounded;
}

namespace {

// Transportation simplex over the active (positive-mass) rows and columns.
// Nodes 0..m-1 are rows, m..m+n-1 are columns; the basis is a spanning tree
// with m+n-1 cells.
class TransportSimplex {
 public:
  void solve(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
             const Eigen::VectorXd& q, OtSolution& out);

 private:
  struct Cell {
    int i, j;
    double flow;
  };

  int m_ = 0, n_ = 0;
  std::vector<Cell> basis_;
  std::vector<int> cell_index_;              // (i,j) -> basis slot or -1
  std::vector<std::vector<int>> adjacency_;  // node -> incident basis slots
  std::vector<double> u_, v_;
  std::vector<int> parent_node_, parent_cell_;
  std::vector<int> stack_;
  std::vector<int> cycle_;  // basis slots along the pivot cycle

  int& slot(int i, int j) { return cell_index_[i * n_ + j]; }
  void rebuild_adjacency();
  void compute_potentials(const Eigen::MatrixXd& cost);
  bool find_cycle(int enter_i, int enter_j);
};

void TransportSimplex::rebuild_adjacency() {
  adjacency_.assign(m_ + n_, {});
  for (int s = 0; s < static_cast<int>(basis_.size()); ++s) {
    adjacency_[basis_[s].i].push_back(s);
    adjacency_[m_ + basis_[s].j].push_back(s);
  }
}

void TransportSimplex::compute_potentials(const Eigen::MatrixXd& cost) {
  u_.assign(m_, 0.0);
  v_.assign(n_, 0.0);
  std::vector<char> seen(m_ + n_, 0);
  stack_.clear();
  stack_.push_back(0);
  seen[0] = 1;
  while (!stack_.empty()) {
    const int node = stack_.back();
    stack_.pop_back();
    for (const int s : adjacency_[node]) {
      const Cell& cell = basis_[s];
      const int other = node < m_ ? m_ + cell.j : cell.i;
      if (seen[other]) continue;
      seen[other] = 1;
      if (other >= m_) {
        v_[cell.j] = cost(cell.i, cell.j) - u_[cell.i];
      } else {
        u_[cell.i] = cost(cell.i, cell.j) - v_[cell.j];
      }
      stack_.push_back(other);
    }
  }
}

bool TransportSimplex::find_cycle(int enter_i, int enter_j) {
  // Path from row node enter_i to column node m_+enter_j through the tree.
  const int target = m_ + enter_j;
  parent_node_.assign(m_ + n_, -1);
  parent_cell_.assign(m_ + n_, -1);
  stack_.clear();
  stack_.push_back(enter_i);
  parent_node_[enter_i] = enter_i;
  while (!stack_.empty()) {
    const int node = stack_.back();
    stack_.pop_back();
    if (node == target) break;
    for (const int s : adjacency_[node]) {
      const Cell& cell = basis_[s];
      const int other = node < m_ ? m_ + cell.j : cell.i;
      if (parent_node_[other] != -1) continue;
      parent_node_[other] = node;
      parent_cell_[other] = s;
      stack_.push_back(other);
    }
  }
  if (parent_node_[target] == -1) return false;
  cycle_.clear();
  for (int node = target; node != enter_i; node = parent_node_[node]) {
    cycle_.push_back(parent_cell_[node]);
  }
  return true;
}

void TransportSimplex::solve(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
                             const Eigen::VectorXd& q, OtSolution& out) {
  m_ = static_cast<int>(p.size());
  n_ = static_cast<int>(q.size());

  // North-west-corner initial basic solution; advancing one pointer per step
  // yields exactly m+n-1 basic cells, including degenerate zero-flow ones.
  basis_.clear();
  cell_index_.assign(m_ * n_, -1);
  {
    int i = 0, j = 0;
    double a = p(0), b = q(0);
    while (true) {
      const double t = std::min(a, b);
      slot(i, j) = static_cast<int>(basis_.size());
      basis_.push_back({i, j, t});
      a -= t;
      b -= t;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) {
        ++j;
        b = q(j);
      } else if (j == n_ - 1) {
        ++i;
        a = p(i);
      } else if (a <= 0.0) {
        ++i;
        a = p(i);
      } else {
        ++j;
        b = q(j);
      }
    }
  }
  rebuild_adjacency();

  const double cost_scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const double enter_tol = 1e-11 * cost_scale;
  const long max_pivots = 1000L * (m_ + n_) * (m_ + n_) + 10000L;

  for (long pivot = 0;; ++pivot) {
    if (pivot > max_pivots) {
      throw std::runtime_error("exact_ot_pair: pivot limit exceeded");
    }
    compute_potentials(cost);

    // Bland's rule: first cell in row-major order with negative reduced cost.
    int enter_i = -1, enter_j = -1;
    for (int i = 0; i < m_ && enter_i < 0; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (slot(i, j) >= 0) continue;
        if (cost(i, j) - u_[i] - v_[j] < -enter_tol) {
          enter_i = i;
          enter_j = j;
          break;
        }
      }
    }
    if (enter_i < 0) break;  // dual feasible: optimal

    if (!find_cycle(enter_i, enter_j)) {
      throw std::runtime_error("exact_ot_pair: basis lost tree structure");
    }
    // cycle_ lists the tree path from the entering column node back to the
    // entering row. Position 0 shares the entering column, so even positions
    // donate flow and odd positions receive it.
    double theta = std::numeric_limits<double>::infinity();
    int leave_slot = -1;
    for (size_t idx = 0; idx < cycle_.size(); ++idx) {
      if (idx % 2 != 0) continue;  // donors sit at even path offsets
      const Cell& cell = basis_[cycle_[idx]];
      if (cell.flow < theta - 1e-18 ||
          (leave_slot >= 0 && cell.flow <= theta &&
           (cell.i < basis_[leave_slot].i ||
            (cell.i == basis_[leave_slot].i && cell.j < basis_[leave_slot].j)))) {
        theta = cell.flow;
        leave_slot = cycle_[idx];
      }
    }
    for (size_t idx = 0; idx < cycle_.size(); ++idx) {
      basis_[cycle_[idx]].flow += (idx % 2 == 0) ? -theta : theta;
    }
    // Replace the leaving cell with the entering one.
    Cell& replaced = basis_[leave_slot];
    slot(replaced.i, replaced.j) = -1;
    replaced = {enter_i, enter_j, theta};
    slot(enter_i, enter_j) = leave_slot;
    rebuild_adjacency();
  }

  out.plan = Eigen::MatrixXd::Zero(m_, n_);
  for (const Cell& cell : basis_) {
    out.plan(cell.i, cell.j) += std::max(cell.flow, 0.0);
  }
  out.row_potentials = Eigen::Map<const Eigen::VectorXd>(u_.data(), m_);
  out.col_potentials = Eigen::Map<const Eigen::VectorXd>(v_.data(), n_);
  out.value = (out.plan.array() * cost.array()).sum();

  // Complementary-slackness audit of the returned certificate.
  const double audit_tol = 1e-8 * cost_scale;
  for (const Cell& cell : basis_) {
    if (std::abs(cost(cell.i, cell.j) - u_[cell.i] - v_[cell.j]) > audit_tol) {
      throw std::runtime_error("exact_ot_pair: dual certificate failed on basis");
    }
  }
}

}  // namespace

OtSolution exact_ot_pair(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
                         const Eigen::VectorXd& q) {
  const int m = static_cast<int>(p.size());
  const int n = static_cast<int>(q.size());
  if (cost.rows() != m || cost.cols() != n) {
    throw std::invalid_argument("exact_ot_pair: cost shape does not match margins");
  }
  if (!cost.allFinite()) {
    throw std::invalid_argument("exact_ot_pair: cost must be finite");
  }

  // Solve on the positive-mass support and embed the plan back.
  std::vector<int> rows, cols;
  for (int i = 0; i < m; ++i) {
    if (p(i) > 0.0) rows.push_back(i);
  }
  for (int j = 0; j < n; ++j) {
    if (q(j) > 0.0) cols.push_back(j);
  }
  if (rows.empty() || cols.empty()) {
    throw std::invalid_argument("exact_ot_pair: margins must carry mass");
  }

  Eigen::MatrixXd sub_cost(rows.size(), cols.size());
  Eigen::VectorXd sub_p(rows.size()), sub_q(cols.size());
  for (size_t a = 0; a < rows.size(); ++a) {
    sub_p(a) = p(rows[a]);
    for (size_t b = 0; b < cols.size(); ++b) {
      sub_cost(a, b) = cost(rows[a], cols[b]);
    }
  }
  for (size_t b = 0; b < cols.size(); ++b) sub_q(b) = q(cols[b]);

  thread_local TransportSimplex simplex;
  OtSolution sub;
  simplex.solve(sub_cost, sub_p, sub_q, sub);

  OtSolution out;
  out.value = sub.value;
  out.plan = Eigen::MatrixXd::Zero(m, n);
  out.row_potentials.resize(m);
  out.col_potentials.resize(n);
  for (size_t a = 0; a < rows.size(); ++a) {
    out.row_potentials(rows[a]) = sub.row_potentials(a);
    for (size_t b = 0; b < cols.size(); ++b) {
      out.plan(rows[a], cols[b]) = sub.plan(a, b);
    }
  }
  for (size_t b = 0; b < cols.size(); ++b) {
    out.col_potentials(cols[b]) = sub.col_potentials(b);
  }
  // Extend the certificate to zero-mass rows and columns without breaking
  // dual feasibility.
  for (int i = 0; i < m; ++i) {
    if (p(i) > 0.0) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const int j : cols) best = std::min(best, cost(i, j) - out.col_potentials(j));
    out.row_potentials(i) = best;
  }
  for (int j = 0; j < n; ++j) {
    if (q(j) > 0.0) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) best = std::min(best, cost(i, j) - out.row_potentials(i));
    out.col_potentials(j) = best;
  }
  return out;
}

namespace {

double log_sum_exp(const Eigen::VectorXd& z) {
  const double shift = z.maxCoeff();
  if (!std::isfinite(shift)) return shift;
  return shift + std::log((z.array() - shift).exp().sum());
}

}  // namespace

SinkhornPairResult sinkhorn_pair(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
                                 const Eigen::VectorXd& q, double eta, int iters) {
  return sinkhorn_pair(cost, p, q, eta, iters, nullptr, nullptr);
}

SinkhornPairResult sinkhorn_pair(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
                                 const Eigen::VectorXd& q, double eta, int iters,
                                 Eigen::VectorXd* f_inout, Eigen::VectorXd* g_inout) {
  if (eta <= 0.0) throw std::invalid_argument("sinkhorn_pair: eta must be positive");
  if (iters < 1) throw std::invalid_argument("sinkhorn_pair: iters must be >= 1");
  const int m = static_cast<int>(p.size());
  const int n = static_cast<int>(q.size());

  std::vector<int> rows, cols;
  for (int i = 0; i < m; ++i) {
    if (p(i) > 0.0) rows.push_back(i);
  }
  for (int j = 0; j < n; ++j) {
    if (q(j) > 0.0) cols.push_back(j);
  }
  const int ms = static_cast<int>(rows.size());
  const int ns = static_cast<int>(cols.size());
  if (ms == 0 || ns == 0) {
    throw std::invalid_argument("sinkhorn_pair: margins must carry mass");
  }

  Eigen::MatrixXd A(ms, ns);  // -eta * cost on the support
  Eigen::VectorXd log_p(ms), log_q(ns);
  for (int a = 0; a < ms; ++a) {
    log_p(a) = std::log(p(rows[a]));
    for (int b = 0; b < ns; ++b) A(a, b) = -eta * cost(rows[a], cols[b]);
  }
  for (int b = 0; b < ns; ++b) log_q(b) = std::log(q(cols[b]));

  Eigen::VectorXd f = Eigen::VectorXd::Zero(ms);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(ns);
  if (g_inout != nullptr && g_inout->size() == n) {
    for (int b = 0; b < ns; ++b) g(b) = (*g_inout)(cols[b]);
  }
  for (int it = 0; it < iters; ++it) {
    for (int a = 0; a < ms; ++a) {
      f(a) = log_p(a) - log_sum_exp(A.row(a).transpose() + g);
    }
    for (int b = 0; b < ns; ++b) {
      g(b) = log_q(b) - log_sum_exp(A.col(b) + f);
    }
  }
  if (f_inout != nullptr) {
    *f_inout = Eigen::VectorXd::Zero(m);
    for (int a = 0; a < ms; ++a) (*f_inout)(rows[a]) = f(a);
  }
  if (g_inout != nullptr) {
    *g_inout = Eigen::VectorXd::Zero(n);
    for (int b = 0; b < ns; ++b) (*g_inout)(cols[b]) = g(b);
  }

  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(m, n);
  for (int a = 0; a < ms; ++a) {
    for (int b = 0; b < ns; ++b) {
      raw(rows[a], cols[b]) = std::exp(f(a) + g(b) + A(a, b));
    }
  }

  SinkhornPairResult result;
  result.plan = round_pair(raw, p, q);
  result.value = (result.plan.array() * cost.array()).sum();
  return result;
}

}  // namespace otmc
