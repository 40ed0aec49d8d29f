#pragma once

#include <string>
#include <vector>

#include "otmc/markov_chain.hpp"
#include "otmc/solvers.hpp"

namespace otmc {

/// Chain file format:
///   {"states": [...], "P": [[...], ...], "init": "<state-id>",
///    "labels": [... optional ...]}
MarkovChain parse_chain(const std::string& json_text);
MarkovChain load_chain(const std::string& path);
std::string chain_to_json_text(const MarkovChain& chain);
void save_chain(const MarkovChain& chain, const std::string& path);

/// Cost specification:
///   {"type": "matrix", "values": [[...], ...]}
///   {"type": "labels_absdiff", "scale": "none" | "one_minus_gamma"}
struct CostSpec {
  enum class Type { matrix, labels_absdiff };
  Type type = Type::labels_absdiff;
  Eigen::MatrixXd values;                    // matrix type only
  CostScale scale = CostScale::one_minus_gamma;  // labels_absdiff only
};
CostSpec parse_cost_spec(const std::string& json_text);
CostSpec load_cost_spec(const std::string& path);

/// Materializes the spec against a chain pair.
GroundCost resolve_cost(const CostSpec& spec, const MarkovChain& chain_x,
                        const MarkovChain& chain_y, double gamma);

/// Loads and validates a full problem; any chain violation, dimension
/// mismatch, or invalid gamma is rejected with a descriptive error.
DiscountedProblem load_problem(const std::string& chain_x_path,
                               const std::string& chain_y_path,
                               const CostSpec& cost_spec, double gamma);

/// Dense matrices (couplings, plans) as nested JSON arrays.
std::string matrix_to_json_text(const Eigen::MatrixXd& table);
Eigen::MatrixXd parse_matrix_json(const std::string& json_text);

/// Per-iteration diagnostics as CSV with header k,objective,delta,l1_step,wall_ms.
void write_diagnostics_csv(const std::vector<IterationRecord>& records,
                           const std::string& path);

}  // namespace otmc
