#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "nlohmann/json.hpp"

namespace {

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const std::string capture = "cli_capture.txt";
  const std::string cmd =
      std::string(TQFT_CLI_PATH) + " " + args + " > " + capture + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  std::ifstream f(capture);
  std::stringstream ss;
  ss << f.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("special-function evaluation prints a zero at the origin") {
  const RunResult r = run_cli("specfun --fn lobachevsky --x 0");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.output);
  CHECK(j.at("value").get<double>() == 0.0);
}

TEST_CASE("saddle listing classifies the geometric candidate") {
  const RunResult r = run_cli("saddle --t-index 5 --out cli_saddle.json");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp("cli_saddle.json"));
  CHECK(j.at("roots").size() == 7);
  CHECK(j.at("admissible").get<bool>());
  CHECK(j.at("f").at("re").get<double>() ==
        doctest::Approx(2.884158080).epsilon(1e-8));
  CHECK(j.at("f").at("im").get<double>() ==
        doctest::Approx(-4.592125697).epsilon(1e-8));

  // Identical invocations print identical bytes.
  const RunResult again = run_cli("saddle --t-index 5");
  CHECK(again.code == 0);
  CHECK(again.output == slurp("cli_saddle.json"));
}

TEST_CASE("flag errors exit with status 2") {
  CHECK(run_cli("saddle --t-index 0").code == 2);
  CHECK(run_cli("integrate --no-such-flag").code == 2);
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("specfun --fn nope --x 1").code == 2);
  CHECK(run_cli("--help").code == 0);
}

TEST_CASE("angle and gluing reports agree on the volume") {
  const RunResult ra = run_cli("angles --out cli_angles.json");
  REQUIRE(ra.code == 0);
  const auto ja = nlohmann::json::parse(slurp("cli_angles.json"));
  const RunResult rg = run_cli("gluing --out cli_gluing.json");
  REQUIRE(rg.code == 0);
  const auto jg = nlohmann::json::parse(slurp("cli_gluing.json"));
  CHECK(ja.at("objective").get<double>() ==
        doctest::Approx(-jg.at("S")[0].get<double>()).epsilon(1e-9));
  CHECK(jg.at("converged").get<bool>());
}

TEST_CASE("config files feed the parser") {
  {
    std::ofstream cfg("cli_config.ini");
    cfg << "threads=2\n";
  }
  CHECK(run_cli("--config cli_config.ini saddle --t-index 3").code == 0);
  CHECK(run_cli("--config cli_no_such_file.ini saddle").code == 2);
}

TEST_CASE("single quadrature run emits a certified report") {
  const RunResult r = run_cli(
      "integrate --b 0.3 --method 3d --out cli_integrate.json");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp("cli_integrate.json"));
  CHECK(j.at("certified").get<bool>());
  CHECK(j.at("volume_estimate").get<double>() < 0.0);
  CHECK(j.at("rel_err_bound").get<double>() < 1e-6);
}

TEST_CASE("sweep writes CSV plus JSON and gates on err_bound") {
  const RunResult r = run_cli(
      "integrate sweep --b 0.45 --method 3d --out cli_sweep.csv "
      "--json cli_sweep.json --tol 1e-18");
  CHECK(r.code == 1);  // one row, bound far below its err_bound
  const std::string csv = slurp("cli_sweep.csv");
  CHECK(csv.rfind("b,hbar,log_abs_J,volume_estimate,err_bound\n", 0) == 0);
  const auto j = nlohmann::json::parse(slurp("cli_sweep.json"));
  REQUIRE(j.at("rows").size() == 1);
  // With fewer than three rows there is no fit; v0 reports the last row.
  CHECK(j.at("fit").at("v0").get<double>() ==
        j.at("rows")[0].at("volume_estimate").get<double>());

  const RunResult ok = run_cli(
      "integrate sweep --b 0.45 --method 3d --out cli_sweep2.csv --tol 1e-3");
  CHECK(ok.code == 0);
  CHECK(slurp("cli_sweep2.csv") == csv);
}
