#include "otmc/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace otmc {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out.good()) throw std::runtime_error("write failed for " + path);
}

Eigen::MatrixXd matrix_from_json(const json& rows, const std::string& what) {
  if (!rows.is_array() || rows.empty()) {
    throw std::runtime_error(what + " must be a non-empty array of rows");
  }
  const size_t cols = rows.front().is_array() ? rows.front().size() : 0;
  if (cols == 0) throw std::runtime_error(what + " rows must be non-empty arrays");
  Eigen::MatrixXd out(rows.size(), cols);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != cols) {
      throw std::runtime_error(what + " row " + std::to_string(i) +
                               " has inconsistent length");
    }
    for (size_t j = 0; j < cols; ++j) {
      out(static_cast<int>(i), static_cast<int>(j)) = rows[i][j].get<double>();
    }
  }
  return out;
}

}  // namespace

MarkovChain parse_chain(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("chain parse error: ") + e.what());
  }
  if (!doc.contains("states") || !doc.contains("P") || !doc.contains("init")) {
    throw std::runtime_error("chain file needs \"states\", \"P\" and \"init\"");
  }

  MarkovChain chain;
  for (const auto& s : doc["states"]) chain.states.push_back(s.get<std::string>());
  chain.kernel = matrix_from_json(doc["P"], "\"P\"");
  if (chain.kernel.rows() != static_cast<int>(chain.states.size())) {
    throw std::runtime_error("\"P\" has " + std::to_string(chain.kernel.rows()) +
                             " rows for " + std::to_string(chain.states.size()) +
                             " states");
  }

  const std::string init_id = doc["init"].get<std::string>();
  const auto found = std::find(chain.states.begin(), chain.states.end(), init_id);
  if (found == chain.states.end()) {
    throw std::runtime_error("\"init\" state \"" + init_id + "\" not in state list");
  }
  chain.init = static_cast<int>(found - chain.states.begin());

  if (doc.contains("labels")) {
    const auto& labels = doc["labels"];
    if (!labels.is_array() || labels.size() != chain.states.size()) {
      throw std::runtime_error("\"labels\" must list one value per state");
    }
    Eigen::VectorXd vec(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) {
      vec(static_cast<int>(i)) = labels[i].get<double>();
    }
    chain.labels = vec;
  }

  const auto violations = validate_chain(chain);
  if (!violations.empty()) {
    std::string message = "invalid chain:";
    for (const auto& v : violations) message += "\n  " + v;
    throw std::runtime_error(message);
  }
  return chain;
}

MarkovChain load_chain(const std::string& path) {
  try {
    return parse_chain(read_file(path));
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string chain_to_json_text(const MarkovChain& chain) {
  json doc;
  doc["states"] = chain.states;
  json rows = json::array();
  for (int i = 0; i < chain.size(); ++i) {
    json row = json::array();
    for (int j = 0; j < chain.size(); ++j) row.push_back(chain.kernel(i, j));
    rows.push_back(std::move(row));
  }
  doc["P"] = std::move(rows);
  doc["init"] = chain.states.at(chain.init);
  if (chain.labels) {
    json labels = json::array();
    for (int i = 0; i < chain.labels->size(); ++i) labels.push_back((*chain.labels)(i));
    doc["labels"] = std::move(labels);
  }
  return doc.dump(2) + "\n";
}

void save_chain(const MarkovChain& chain, const std::string& path) {
  write_file(path, chain_to_json_text(chain));
}

CostSpec parse_cost_spec(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("cost spec parse error: ") + e.what());
  }
  const std::string type = doc.value("type", "");
  CostSpec spec;
  if (type == "matrix") {
    spec.type = CostSpec::Type::matrix;
    if (!doc.contains("values")) {
      throw std::runtime_error("matrix cost spec needs \"values\"");
    }
    spec.values = matrix_from_json(doc["values"], "\"values\"");
  } else if (type == "labels_absdiff") {
    spec.type = CostSpec::Type::labels_absdiff;
    const std::string scale = doc.value("scale", "one_minus_gamma");
    if (scale == "none") {
      spec.scale = CostScale::none;
    } else if (scale == "one_minus_gamma") {
      spec.scale = CostScale::one_minus_gamma;
    } else {
      throw std::runtime_error("unknown cost scale \"" + scale + "\"");
    }
  } else {
    throw std::runtime_error("cost spec \"type\" must be \"matrix\" or \"labels_absdiff\"");
  }
  return spec;
}

CostSpec load_cost_spec(const std::string& path) {
  try {
    return parse_cost_spec(read_file(path));
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

GroundCost resolve_cost(const CostSpec& spec, const MarkovChain& chain_x,
                        const MarkovChain& chain_y, double gamma) {
  if (spec.type == CostSpec::Type::labels_absdiff) {
    return cost_from_labels(chain_x, chain_y, spec.scale, gamma);
  }
  GroundCost cost;
  cost.provenance = GroundCost::Provenance::explicit_matrix;
  cost.values = spec.values;
  if (cost.values.rows() != chain_x.size() || cost.values.cols() != chain_y.size()) {
    std::ostringstream msg;
    msg << "cost matrix is " << cost.values.rows() << "x" << cost.values.cols()
        << " but the chains have " << chain_x.size() << " and " << chain_y.size()
        << " states";
    throw std::runtime_error(msg.str());
  }
  return cost;
}

DiscountedProblem load_problem(const std::string& chain_x_path,
                               const std::string& chain_y_path,
                               const CostSpec& cost_spec, double gamma) {
  MarkovChain chain_x = load_chain(chain_x_path);
  MarkovChain chain_y = load_chain(chain_y_path);
  GroundCost cost = resolve_cost(cost_spec, chain_x, chain_y, gamma);
  return make_problem(std::move(chain_x), std::move(chain_y), std::move(cost), gamma);
}

std::string matrix_to_json_text(const Eigen::MatrixXd& table) {
  json rows = json::array();
  for (int i = 0; i < table.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < table.cols(); ++j) row.push_back(table(i, j));
    rows.push_back(std::move(row));
  }
  return rows.dump() + "\n";
}

Eigen::MatrixXd parse_matrix_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("matrix parse error: ") + e.what());
  }
  return matrix_from_json(doc, "matrix");
}

void write_diagnostics_csv(const std::vector<IterationRecord>& records,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(17);
  out << "k,objective,delta,l1_step,wall_ms\n";
  for (const auto& r : records) {
    out << r.k << ',' << r.objective << ',' << r.delta << ',' << r.l1_step << ','
        << r.wall_ms << '\n';
  }
  if (!out.good()) throw std::runtime_error("write failed for " + path);
}

}  // namespace otmc
