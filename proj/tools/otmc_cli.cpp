// otmc: discounted optimal-transport distances between finite Markov chains.
//
// Subcommands: dist, matrix, bench, validate, export-lp, gen.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "otmc/coupling.hpp"
#include "otmc/envs.hpp"
#include "otmc/io.hpp"
#include "otmc/markov_chain.hpp"
#include "otmc/solvers.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct SolveOptions {
  std::string algo = "svi";
  double gamma = 0.95;
  double eta = 1.0;
  std::string schedule = "invsqrt";
  int iters = 2000;
  std::string inner_m = "inf";
  double inner_tol = 1e-10;
  std::string averaging = "last";
  double tol = 1e-6;
  std::uint64_t seed = 0;
  bool early_stop = false;
  bool no_diagnostics = false;
  // Baseline inner-solver knobs.
  double inner_eta = 50.0;
  int inner_iters = 50;
  int eval_steps = 20;
  bool warm_start = false;
};

void add_solver_flags(CLI::App* cmd, SolveOptions& opt) {
  cmd->add_option("--algo", opt.algo, "Solver: svi, spi, exact, dwl, eotc")
      ->check(CLI::IsMember({"svi", "spi", "exact", "dwl", "eotc"}));
  cmd->add_option("--gamma", opt.gamma, "Discount factor");
  cmd->add_option("--eta", opt.eta, "Step size (or its c0 for invsqrt)");
  cmd->add_option("--eta-schedule", opt.schedule, "const, invsqrt, or theory")
      ->check(CLI::IsMember({"const", "invsqrt", "theory"}));
  cmd->add_option("--iters", opt.iters, "Outer iterations K");
  cmd->add_option("--inner-m", opt.inner_m, "Projection steps per round, int or 'inf'");
  cmd->add_option("--inner-tol", opt.inner_tol, "Inner fixed-point tolerance");
  cmd->add_option("--averaging", opt.averaging, "last or full")
      ->check(CLI::IsMember({"last", "full"}));
  cmd->add_option("--tol", opt.tol, "Oracle / early-stop tolerance");
  cmd->add_option("--seed", opt.seed, "Seed recorded with the run");
  cmd->add_flag("--early-stop", opt.early_stop, "Stop on stationary diagnostics");
  cmd->add_flag("--no-diagnostics", opt.no_diagnostics, "Skip per-iteration records");
  cmd->add_option("--inner-eta", opt.inner_eta, "Baselines: inner Sinkhorn step size");
  cmd->add_option("--inner-iters", opt.inner_iters, "Baselines: inner Sinkhorn sweeps");
  cmd->add_option("--eval-steps", opt.eval_steps, "eotc: evaluation sweeps per round");
  cmd->add_flag("--warm-start", opt.warm_start, "Baselines: warm-start inner Sinkhorn");
}

int parse_inner_m(const std::string& text) {
  if (text == "inf" || text == "-1") return -1;
  try {
    const int m = std::stoi(text);
    if (m < 1) throw std::invalid_argument("inner-m");
    return m;
  } catch (const std::exception&) {
    throw CLI::ValidationError("--inner-m", "expected a positive integer or 'inf'");
  }
}

otmc::SolverConfig build_config(const SolveOptions& opt, bool for_spi) {
  otmc::SolverConfig config;
  if (opt.schedule == "const") {
    config.schedule = otmc::EtaSchedule::constant;
  } else if (opt.schedule == "invsqrt") {
    config.schedule = otmc::EtaSchedule::inv_sqrt;
  } else {
    config.schedule =
        for_spi ? otmc::EtaSchedule::theory_spi : otmc::EtaSchedule::theory_svi;
  }
  config.eta = opt.eta;
  config.iterations = opt.iters;
  config.inner_m = parse_inner_m(opt.inner_m);
  config.inner_tol = opt.inner_tol;
  config.averaging = opt.averaging == "full" ? otmc::Averaging::full_average
                                             : otmc::Averaging::last_iterate;
  config.tol = opt.tol;
  config.early_stopping = opt.early_stop;
  config.collect_diagnostics = !opt.no_diagnostics;
  config.warm_start_inner = opt.warm_start;
  config.seed = opt.seed;
  return config;
}

otmc::SolveResult run_solver(const otmc::DiscountedProblem& problem,
                             const SolveOptions& opt) {
  if (opt.algo == "svi") return otmc::svi(problem, build_config(opt, false));
  if (opt.algo == "spi") return otmc::spi(problem, build_config(opt, true));
  if (opt.algo == "exact") return otmc::exact_dp(problem, opt.tol);
  if (opt.algo == "dwl") {
    return otmc::baseline_vi_sinkhorn(problem, build_config(opt, false), opt.inner_eta,
                                      opt.inner_iters);
  }
  return otmc::baseline_pi_sinkhorn(problem, build_config(opt, false), opt.inner_eta,
                                    opt.inner_iters, opt.eval_steps);
}

otmc::CostSpec cost_spec_from_arg(const std::string& arg) {
  if (arg.empty()) {
    return otmc::parse_cost_spec(R"({"type": "labels_absdiff"})");
  }
  if (arg.front() == '{') return otmc::parse_cost_spec(arg);
  return otmc::load_cost_spec(arg);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

otmc::Cell parse_cell(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw CLI::ValidationError("cell", "expected 'row,col', got '" + text + "'");
  }
  try {
    return {std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("cell", "expected 'row,col', got '" + text + "'");
  }
}

std::pair<otmc::Cell, double> parse_reward(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw CLI::ValidationError("reward", "expected 'row,col=value', got '" + text + "'");
  }
  return {parse_cell(text.substr(0, eq)), std::stod(text.substr(eq + 1))};
}

// ---------------------------------------------------------------------------

int cmd_dist(const std::string& chain_x, const std::string& chain_y,
             const std::string& cost_arg, const SolveOptions& opt,
             const std::string& out_path, const std::string& diagnostics_path,
             const std::string& format) {
  const otmc::DiscountedProblem problem =
      otmc::load_problem(chain_x, chain_y, cost_spec_from_arg(cost_arg), opt.gamma);
  const otmc::SolveResult result = run_solver(problem, opt);

  if (!diagnostics_path.empty()) {
    otmc::write_diagnostics_csv(result.diagnostics, diagnostics_path);
  }
  std::string rendered;
  if (format == "csv") {
    std::ostringstream csv;
    csv.precision(17);
    csv << "distance,gamma,algo,iterations\n"
        << result.distance << ',' << problem.gamma << ',' << result.algo << ','
        << result.iterations << '\n';
    rendered = csv.str();
  } else {
    json doc;
    doc["distance"] = result.distance;
    doc["gamma"] = problem.gamma;
    doc["algo"] = result.algo;
    doc["iterations"] = result.iterations;
    if (!diagnostics_path.empty()) doc["diagnostics_csv"] = diagnostics_path;
    rendered = doc.dump(2) + "\n";
  }
  if (out_path.empty()) {
    std::cout << rendered;
  } else {
    write_text(out_path, rendered);
    std::cout.precision(17);
    std::cout << result.distance << "\n";
  }
  return 0;
}

int cmd_matrix(const std::string& dir, const SolveOptions& opt,
               const std::string& scale, const std::string& out_path) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) {
    throw std::runtime_error("no .json chain files under " + dir);
  }

  std::vector<otmc::MarkovChain> chains;
  std::vector<std::string> ids;
  for (const auto& path : paths) {
    chains.push_back(otmc::load_chain(path));
    ids.push_back(fs::path(path).stem().string());
  }

  const otmc::CostScale cost_scale =
      scale == "none" ? otmc::CostScale::none : otmc::CostScale::one_minus_gamma;
  std::ostringstream csv;
  csv.precision(17);
  csv << "id";
  for (const auto& id : ids) csv << ',' << id;
  csv << '\n';
  for (size_t i = 0; i < chains.size(); ++i) {
    csv << ids[i];
    for (size_t j = 0; j < chains.size(); ++j) {
      const otmc::GroundCost cost =
          otmc::cost_from_labels(chains[i], chains[j], cost_scale, opt.gamma);
      const otmc::DiscountedProblem problem =
          otmc::make_problem(chains[i], chains[j], cost, opt.gamma);
      csv << ',' << run_solver(problem, opt).distance;
    }
    csv << '\n';
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    write_text(out_path, csv.str());
  }
  return 0;
}

int cmd_bench(const std::vector<int>& sizes, const std::vector<std::string>& algos,
              const SolveOptions& opt, const std::string& out_path) {
  std::ostringstream csv;
  csv.precision(17);
  csv << "instance,n,algo,distance,iterations,wall_ms\n";
  for (size_t idx = 0; idx < sizes.size(); ++idx) {
    const int n = sizes[idx];
    const std::string instance =
        "rnd" + std::to_string(n) + "-s" + std::to_string(opt.seed + idx);
    const otmc::DiscountedProblem problem =
        otmc::random_problem(n, n, opt.gamma, opt.seed + idx);
    for (const auto& algo : algos) {
      SolveOptions local = opt;
      local.algo = algo;
      local.no_diagnostics = true;
      const otmc::SolveResult result = run_solver(problem, local);
      csv << instance << ',' << n << ',' << algo << ',' << result.distance << ','
          << result.iterations << ',' << result.iteration_seconds * 1000.0 << '\n';
    }
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    write_text(out_path, csv.str());
  }
  return 0;
}

int cmd_validate(const std::vector<std::string>& files) {
  int bad = 0;
  for (const auto& path : files) {
    try {
      otmc::load_chain(path);  // parse + validate, throws on violations
      std::cout << path << ": ok\n";
    } catch (const std::exception& e) {
      std::cout << path << ": " << e.what() << "\n";
      ++bad;
    }
  }
  return bad == 0 ? 0 : 1;
}

int cmd_export_lp(const std::string& chain_x, const std::string& chain_y,
                  const std::string& cost_arg, double gamma,
                  const std::string& out_path) {
  const otmc::DiscountedProblem problem =
      otmc::load_problem(chain_x, chain_y, cost_spec_from_arg(cost_arg), gamma);
  otmc::export_lp(problem, out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Discounted optimal-transport / bisimulation distances between Markov chains"};
  app.require_subcommand(1);

  // dist -------------------------------------------------------------------
  SolveOptions dist_opt;
  std::string dist_x, dist_y, dist_cost, dist_out, dist_diag, dist_format = "json";
  auto* dist = app.add_subcommand("dist", "Distance between two chain files");
  dist->add_option("chain_x", dist_x, "Chain JSON for X")->required();
  dist->add_option("chain_y", dist_y, "Chain JSON for Y")->required();
  dist->add_option("--cost", dist_cost,
                   "Cost spec: inline JSON or a path (default labels_absdiff)");
  dist->add_option("--out", dist_out, "Write the result JSON/CSV here");
  dist->add_option("--diagnostics", dist_diag, "Write per-iteration CSV here");
  dist->add_option("--format", dist_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  add_solver_flags(dist, dist_opt);

  // matrix -----------------------------------------------------------------
  SolveOptions matrix_opt;
  std::string matrix_dir, matrix_out, matrix_scale = "one_minus_gamma";
  auto* matrix =
      app.add_subcommand("matrix", "Pairwise distance matrix over a directory of chains");
  matrix->add_option("dir", matrix_dir, "Directory of chain JSON files")->required();
  matrix->add_option("--out", matrix_out, "Write the CSV here");
  matrix->add_option("--cost-scale", matrix_scale, "none or one_minus_gamma")
      ->check(CLI::IsMember({"none", "one_minus_gamma"}));
  add_solver_flags(matrix, matrix_opt);

  // bench --------------------------------------------------------------------
  SolveOptions bench_opt;
  bench_opt.iters = 50;
  bench_opt.inner_m = "3";
  std::vector<int> bench_sizes = {4, 8, 16, 24};
  std::vector<std::string> bench_algos = {"svi", "spi"};
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Runtime/accuracy table on random instances");
  bench->add_option("--sizes", bench_sizes, "Chain sizes")->delimiter(',');
  bench->add_option("--algos", bench_algos, "Algorithms to time")->delimiter(',');
  bench->add_option("--out", bench_out, "Write the CSV here");
  add_solver_flags(bench, bench_opt);

  // validate -------------------------------------------------------------------
  std::vector<std::string> validate_files;
  auto* validate =
      app.add_subcommand("validate", "Check chain files against the invariants");
  validate->add_option("files", validate_files, "Chain JSON files")->required();

  // export-lp --------------------------------------------------------------
  std::string lp_x, lp_y, lp_cost, lp_out;
  double lp_gamma = 0.95;
  auto* lp = app.add_subcommand("export-lp",
                                "Write the occupancy-coupling LP in plain-text format");
  lp->add_option("chain_x", lp_x, "Chain JSON for X")->required();
  lp->add_option("chain_y", lp_y, "Chain JSON for Y")->required();
  lp->add_option("--cost", lp_cost, "Cost spec: inline JSON or a path");
  lp->add_option("--gamma", lp_gamma, "Discount factor");
  lp->add_option("--out", lp_out, "Output LP path")->required();

  // gen ----------------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Generate chain JSON files");
  gen->require_subcommand(1);

  int grid_width = 3, grid_height = 3;
  std::string grid_init = "0,0", grid_out;
  std::vector<std::string> grid_walls, grid_rewards;
  auto* gen_grid = gen->add_subcommand("grid", "Random-walk grid chain");
  gen_grid->add_option("--width", grid_width, "Grid width");
  gen_grid->add_option("--height", grid_height, "Grid height");
  gen_grid->add_option("--init", grid_init, "Initial cell 'row,col'");
  gen_grid->add_option("--wall", grid_walls, "Wall cell 'row,col' (repeatable)");
  gen_grid->add_option("--reward", grid_rewards, "Reward 'row,col=value' (repeatable)");
  gen_grid->add_option("--out", grid_out, "Output chain JSON")->required();

  int rooms_size = 5;
  std::string rooms_init = "0,0", rooms_out;
  std::vector<std::string> rooms_doors, rooms_rewards;
  auto* gen_rooms = gen->add_subcommand("four-rooms", "Four-rooms random walk");
  gen_rooms->add_option("--room-size", rooms_size, "Cells per room side");
  gen_rooms->add_option("--init", rooms_init, "Initial cell 'row,col'");
  gen_rooms->add_option("--door", rooms_doors,
                        "Door cell 'row,col' (repeatable; defaults used if omitted)");
  gen_rooms->add_option("--reward", rooms_rewards, "Reward 'row,col=value' (repeatable)");
  gen_rooms->add_option("--out", rooms_out, "Output chain JSON")->required();

  int random_states = 4;
  std::uint64_t random_seed = 0;
  std::string random_out;
  auto* gen_random = gen->add_subcommand("random", "Dirichlet chain with uniform labels");
  gen_random->add_option("--states", random_states, "Number of states");
  gen_random->add_option("--seed", random_seed, "Generator seed");
  gen_random->add_option("--out", random_out, "Output chain JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (dist->parsed()) {
      return cmd_dist(dist_x, dist_y, dist_cost, dist_opt, dist_out, dist_diag,
                      dist_format);
    }
    if (matrix->parsed()) {
      return cmd_matrix(matrix_dir, matrix_opt, matrix_scale, matrix_out);
    }
    if (bench->parsed()) {
      return cmd_bench(bench_sizes, bench_algos, bench_opt, bench_out);
    }
    if (validate->parsed()) {
      return cmd_validate(validate_files);
    }
    if (lp->parsed()) {
      return cmd_export_lp(lp_x, lp_y, lp_cost, lp_gamma, lp_out);
    }
    if (gen->parsed()) {
      std::map<otmc::Cell, double> rewards;
      if (gen_grid->parsed()) {
        std::set<otmc::Cell> walls;
        for (const auto& w : grid_walls) walls.insert(parse_cell(w));
        for (const auto& r : grid_rewards) rewards.insert(parse_reward(r));
        otmc::save_chain(otmc::grid_chain(grid_width, grid_height, walls,
                                          parse_cell(grid_init), rewards),
                         grid_out);
        std::cout << "wrote " << grid_out << "\n";
      } else if (gen_rooms->parsed()) {
        std::vector<otmc::Cell> doors;
        for (const auto& d : rooms_doors) doors.push_back(parse_cell(d));
        if (doors.empty()) doors = otmc::default_doors(rooms_size);
        for (const auto& r : rooms_rewards) rewards.insert(parse_reward(r));
        otmc::save_chain(
            otmc::four_rooms(rooms_size, doors, parse_cell(rooms_init), rewards),
            rooms_out);
        std::cout << "wrote " << rooms_out << "\n";
      } else {
        otmc::save_chain(otmc::random_chain(random_states, random_seed), random_out);
        std::cout << "wrote " << random_out << "\n";
      }
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
