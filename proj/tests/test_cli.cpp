#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "otmc/io.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string out_path = "/tmp/otmc_cli_out_" + std::to_string(counter++);
  const std::string command =
      std::string(OTMC_CLI_PATH) + " " + args + " > " + out_path + " 2>&1";
  const int status = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  result.out = buffer.str();
  std::remove(out_path.c_str());
  return result;
}

}  // namespace

TEST_CASE("gen random produces a loadable chain") {
  const RunResult gen = run_cli("gen random --states 4 --seed 9 --out /tmp/otmc_cli_a.json");
  REQUIRE(gen.exit_code == 0);
  const otmc::MarkovChain chain = otmc::load_chain("/tmp/otmc_cli_a.json");
  CHECK(chain.size() == 4);
  CHECK(chain.labels.has_value());

  const RunResult check = run_cli("validate /tmp/otmc_cli_a.json");
  CHECK(check.exit_code == 0);
  CHECK(check.out.find("ok") != std::string::npos);
}

TEST_CASE("gen grid produces the nine-state grid") {
  const RunResult gen = run_cli(
      "gen grid --width 3 --height 3 --init 0,0 --reward 2,0=1 --out /tmp/otmc_cli_g.json");
  REQUIRE(gen.exit_code == 0);
  CHECK(otmc::load_chain("/tmp/otmc_cli_g.json").size() == 9);
}

TEST_CASE("gen four-rooms honors the room size") {
  const RunResult gen =
      run_cli("gen four-rooms --room-size 3 --init 0,0 --out /tmp/otmc_cli_r.json");
  REQUIRE(gen.exit_code == 0);
  CHECK(otmc::load_chain("/tmp/otmc_cli_r.json").size() == 40);
}

TEST_CASE("validate rejects a broken chain with exit code 1") {
  {
    std::ofstream bad("/tmp/otmc_cli_bad.json");
    bad << R"({"states": ["a", "b"], "P": [[0.5, 0.5], [0.3, 0.6]], "init": "a"})";
  }
  const RunResult check = run_cli("validate /tmp/otmc_cli_bad.json");
  CHECK(check.exit_code == 1);
  CHECK(check.out.find("row 1") != std::string::npos);
}

TEST_CASE("dist with the exact solver on a constant cost prints kappa/(1-gamma)") {
  run_cli("gen random --states 2 --seed 1 --out /tmp/otmc_cli_x.json");
  run_cli("gen random --states 2 --seed 2 --out /tmp/otmc_cli_y.json");
  const RunResult dist = run_cli(
      "dist /tmp/otmc_cli_x.json /tmp/otmc_cli_y.json --algo exact --gamma 0.5 "
      "--cost '{\"type\": \"matrix\", \"values\": [[1, 1], [1, 1]]}'");
  REQUIRE(dist.exit_code == 0);
  const auto doc = nlohmann::json::parse(dist.out);
  CHECK(doc["algo"] == "exact");
  CHECK(std::abs(doc["distance"].get<double>() - 2.0) < 1e-6);
}

TEST_CASE("dist: svi agrees with exact through the CLI surface") {
  run_cli("gen random --states 4 --seed 31 --out /tmp/otmc_cli_x4.json");
  run_cli("gen random --states 4 --seed 32 --out /tmp/otmc_cli_y4.json");
  const std::string shared =
      "/tmp/otmc_cli_x4.json /tmp/otmc_cli_y4.json --gamma 0.9 "
      "--cost '{\"type\": \"labels_absdiff\", \"scale\": \"none\"}' ";
  const RunResult exact = run_cli("dist " + shared + "--algo exact --tol 1e-8");
  const RunResult approx = run_cli(
      "dist " + shared +
      "--algo svi --iters 3000 --eta-schedule invsqrt --eta 1 --inner-m inf "
      "--diagnostics /tmp/otmc_cli_diag.csv");
  REQUIRE(exact.exit_code == 0);
  REQUIRE(approx.exit_code == 0);
  const double d_exact = nlohmann::json::parse(exact.out)["distance"].get<double>();
  const auto approx_doc = nlohmann::json::parse(approx.out);
  const double d_svi = approx_doc["distance"].get<double>();
  CHECK(d_svi >= d_exact - 1e-8);
  CHECK(d_svi - d_exact < 1e-1);
  CHECK(approx_doc["diagnostics_csv"] == "/tmp/otmc_cli_diag.csv");

  std::ifstream diag("/tmp/otmc_cli_diag.csv");
  std::string header;
  std::getline(diag, header);
  CHECK(header == "k,objective,delta,l1_step,wall_ms");
}

TEST_CASE("dist reproduces bit-identical outputs for a fixed config") {
  const std::string cmd =
      "dist /tmp/otmc_cli_x4.json /tmp/otmc_cli_y4.json --gamma 0.9 --algo svi "
      "--iters 40 --seed 7";
  const RunResult a = run_cli(cmd);
  const RunResult b = run_cli(cmd);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("matrix emits a square CSV with a zero diagonal") {
  REQUIRE(std::system("mkdir -p /tmp/otmc_cli_dir && rm -f /tmp/otmc_cli_dir/*.json") == 0);
  run_cli("gen random --states 2 --seed 41 --out /tmp/otmc_cli_dir/c1.json");
  run_cli("gen random --states 3 --seed 42 --out /tmp/otmc_cli_dir/c2.json");
  run_cli("gen random --states 2 --seed 43 --out /tmp/otmc_cli_dir/c3.json");
  const RunResult matrix =
      run_cli("matrix /tmp/otmc_cli_dir --algo exact --gamma 0.9 --tol 1e-8");
  REQUIRE(matrix.exit_code == 0);

  std::istringstream csv(matrix.out);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "id,c1,c2,c3");
  int row = 0;
  while (std::getline(csv, line)) {
    std::istringstream fields(line);
    std::string field;
    std::getline(fields, field, ',');
    for (int col = 0; std::getline(fields, field, ','); ++col) {
      if (col == row) CHECK(std::abs(std::stod(field)) < 1e-6);
    }
    ++row;
  }
  CHECK(row == 3);
}

TEST_CASE("export-lp writes an LP file") {
  const RunResult lp = run_cli(
      "export-lp /tmp/otmc_cli_x.json /tmp/otmc_cli_y.json --gamma 0.8 "
      "--cost '{\"type\": \"labels_absdiff\", \"scale\": \"none\"}' "
      "--out /tmp/otmc_cli.lp");
  REQUIRE(lp.exit_code == 0);
  std::ifstream in("/tmp/otmc_cli.lp");
  std::string first;
  std::getline(in, first);
  CHECK(first.find("16 variables") != std::string::npos);
}

TEST_CASE("bench emits the documented schema") {
  const RunResult bench =
      run_cli("bench --sizes 2,3 --algos svi,spi --iters 10 --inner-m 2 --gamma 0.8");
  REQUIRE(bench.exit_code == 0);
  std::istringstream csv(bench.out);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "instance,n,algo,distance,iterations,wall_ms");
  int rows = 0;
  std::string line;
  while (std::getline(csv, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 4);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("dist").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("dist a.json b.json --algo nope").exit_code == 2);
  CHECK(run_cli("dist /tmp/otmc_cli_x.json /tmp/otmc_cli_y.json --inner-m zero")
            .exit_code == 2);
}

TEST_CASE("missing files exit with code 1") {
  CHECK(run_cli("dist /tmp/otmc_nope1.json /tmp/otmc_nope2.json").exit_code == 1);
}
