// End-to-end checks of the command-line binary: spawn it the way a user
// would and inspect exit codes and produced files.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GSA_CLI_BINARY) + " " + args + " > cli_stdout.log 2> cli_stderr.log";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path dir = "cli_test_out";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream out(path);
  out << body;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmallCoffee = R"({
  "model": {"kind": "coffee_cup", "t_end_min": 200.0, "time_steps": 20},
  "marginals": [
    {"name": "kappa", "mean": 0.05, "std": 0.008},
    {"name": "t_env", "mean": 20.0, "std": 1.5}
  ],
  "correlation": 0.4,
  "polynomial_order": 2
})";

}  // namespace

TEST_CASE("cli run command") {
  const auto config = write_config("coffee.json", kSmallCoffee);

  SUBCASE("successful run writes the report files") {
    CHECK(run_cli("run --config " + config.string() + " --out cli_test_out/run") == 0);
    CHECK(fs::exists("cli_test_out/run/report.csv"));
    CHECK(fs::exists("cli_test_out/run/report.json"));
    CHECK(fs::exists("cli_test_out/run/moments.csv"));
  }

  SUBCASE("reruns are byte identical") {
    REQUIRE(run_cli("run --config " + config.string() + " --out cli_test_out/rerun_a") == 0);
    REQUIRE(run_cli("run --config " + config.string() + " --out cli_test_out/rerun_b") == 0);
    CHECK(slurp("cli_test_out/rerun_a/report.csv") == slurp("cli_test_out/rerun_b/report.csv"));
  }
}

TEST_CASE("cli exit codes") {
  SUBCASE("validation failure is exit 2") {
    const auto config = write_config("missing_marginals.json",
                                     R"({"model": {"kind": "coffee_cup"}})");
    CHECK(run_cli("run --config " + config.string() + " --out cli_test_out/x") == 2);
  }

  SUBCASE("nonexistent config file is exit 2") {
    CHECK(run_cli("run --config cli_test_out/nope.json --out cli_test_out/x") == 2);
  }

  SUBCASE("unknown subcommand is exit 2") {
    CHECK(run_cli("frobnicate") == 2);
  }

  SUBCASE("invalid rho list is exit 2") {
    const auto config = write_config("coffee2.json", kSmallCoffee);
    CHECK(run_cli("sweep-rho --config " + config.string() +
                  " --rhos 0.2 1.4 --out cli_test_out/x") == 2);
  }
}

TEST_CASE("cli sweep and surface commands") {
  const auto config = write_config("coffee3.json", kSmallCoffee);
  CHECK(run_cli("sweep-rho --config " + config.string() +
                " --rhos 0.0 0.5 --out cli_test_out/sweep") == 0);
  CHECK(fs::exists("cli_test_out/sweep/rho_sweep.csv"));
  CHECK(fs::exists("cli_test_out/sweep/report_rho_00.csv"));
  CHECK(fs::exists("cli_test_out/sweep/report_rho_01.csv"));

  CHECK(run_cli("surface --config " + config.string() +
                " --times 50 150 --out cli_test_out/surface") == 0);
  CHECK(fs::exists("cli_test_out/surface/surface.csv"));
}

TEST_CASE("cli convergence command") {
  const auto config = write_config("coffee4.json", kSmallCoffee);
  CHECK(run_cli("convergence --config " + config.string() +
                " --orders 2 3 --qmc-n 256 --out cli_test_out/conv") == 0);
  CHECK(fs::exists("cli_test_out/conv/convergence.csv"));
}
