#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "wellposed/spec_io.hpp"

using nlohmann::json;

namespace {

std::string env_or_fail(const char* name) {
  const char* value = std::getenv(name);
  REQUIRE_MESSAGE(value != nullptr, name << " must be set by ctest");
  return value;
}

std::string bin() { return env_or_fail("WELLPOSED_BIN"); }
std::string specs() { return env_or_fail("WELLPOSED_SPECS"); }

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string cmd = bin() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) result.out.append(buf, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace

TEST_CASE("check exit codes on the shipped example specs") {
  CHECK(run("check " + specs() + "/identity_wellposed.json").exit_code == 0);
  CHECK(run("check " + specs() + "/identity_illposed.json").exit_code == 1);
  CHECK(run("check " + specs() + "/malformed.json").exit_code == 2);
  CHECK(run("check " + specs() + "/sin_blackbox.json").exit_code == 3);
  CHECK(run("check /nonexistent/path.json").exit_code == 2);
}

TEST_CASE("check table output names the overall verdict") {
  const RunResult r = run("check " + specs() + "/identity_wellposed.json");
  CHECK(r.out.find("overall: well_posed") != std::string::npos);
  const RunResult ill = run("check " + specs() + "/identity_illposed.json");
  CHECK(ill.out.find("overall: ill_posed") != std::string::npos);
}

TEST_CASE("linearizing the black box turns inconclusive into a verdict") {
  const RunResult r = run("check " + specs() + "/sin_blackbox.json --linearize mu");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("overall: well_posed") != std::string::npos);
}

TEST_CASE("--c override can flip the verdict") {
  // tau2 = 4, identity: the exact sum is 2*(4/5)^2 = 1.28 against q/c.
  CHECK(run("check " + specs() + "/identity_wellposed.json --c 1.4").exit_code == 1);
  CHECK(run("check " + specs() + "/identity_wellposed.json --c 4").exit_code == 0);
}

TEST_CASE("json report round-trips through the serializer bit-identically") {
  const std::string spec = specs() + "/identity_wellposed.json";
  const std::string out_path = "cli_report.json";
  const RunResult r = run("check " + spec + " --json " + out_path);
  CHECK(r.exit_code == 0);

  std::ifstream in(out_path);
  REQUIRE(in.good());
  const json original = json::parse(in);

  const wellposed::WellPosednessReport report = wellposed::report_from_json(original);
  const json rebuilt =
      wellposed::report_to_json(report, original.at("input_digest").get<std::string>());
  CHECK(rebuilt.dump() == original.dump());
  std::remove(out_path.c_str());
}

TEST_CASE("json report to stdout is valid and self-consistent") {
  const RunResult r = run("check " + specs() + "/identity_illposed.json --json -");
  CHECK(r.exit_code == 1);
  const json j = json::parse(r.out);
  CHECK(j.at("overall") == "ill_posed");
  CHECK(j.at("conditions").is_array());
  CHECK(!j.at("conditions").empty());
  for (const auto& v : j.at("conditions")) {
    CHECK(v.at("margin").get<double>() ==
          doctest::Approx(v.at("lhs").get<double>() - v.at("rhs").get<double>()));
  }
}

TEST_CASE("fisher subcommand prints the spectral quantities") {
  const RunResult r = run("fisher " + specs() + "/identity_wellposed.json --json -");
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.out.substr(0, r.out.find("\nI_signal")));
  // Identity pair: psi spectrum is (1, 1); I_obs = 0.5 * 2 * (4/5)^2 / 16.
  CHECK(j.at("psi_spectrum").size() == 2);
  CHECK(j.at("psi_spectrum")[0].get<double>() == doctest::Approx(1.0));
  CHECK(j.at("fisher_signal_tau2").get<double>() == doctest::Approx(2.0 / 32.0));
  CHECK(j.at("fisher_observed_tau2").get<double>() == doctest::Approx(0.04));
}

TEST_CASE("oracle subcommands agree with their closed forms") {
  const RunResult sobol = run("oracle " + specs() + "/scalar_sobol.json --what sobol");
  CHECK(sobol.exit_code == 0);
  CHECK(sobol.out.find("[agrees]") != std::string::npos);

  const RunResult fd = run("oracle " + specs() + "/identity_wellposed.json --what fi-fd");
  CHECK(fd.exit_code == 0);
  CHECK(fd.out.find("[agrees]") != std::string::npos);

  const RunResult score =
      run("oracle " + specs() + "/identity_wellposed.json --what fi-score --n 20000");
  CHECK(score.exit_code == 0);
  CHECK(score.out.find("[agrees]") != std::string::npos);
}

TEST_CASE("linearize subcommand fits all three strategies") {
  const std::string spec = specs() + "/sin_blackbox.json";
  for (const std::string strategy : {"taylor", "mse", "kl"}) {
    const RunResult r =
        run("linearize " + spec + " --strategy " + strategy + " --samples 20000");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("strategy: " + strategy) != std::string::npos);
    CHECK(r.out.find("sufficient") != std::string::npos);
  }
}

TEST_CASE("sample-prior draws constrained covariances") {
  const RunResult r = run("sample-prior --lambda " + specs() +
                          "/lambda_identity.json --nu 5 --a 1,0 --sigma2 0.5 --n 3 "
                          "--seed 7 --out -");
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("samples").size() == 3);
  for (const auto& s : j.at("samples")) {
    // Constraint a' Gamma a > sigma2 with a = e1: the (0,0) entry exceeds 0.5.
    CHECK(s[0].get<double>() > 0.5);
  }

  const RunResult impossible =
      run("sample-prior --lambda " + specs() +
          "/lambda_identity.json --nu 50 --a 1,0 --sigma2 1e9 --n 1 --seed 7 "
          "--max-draws 2000 --out -");
  CHECK(impossible.exit_code == 1);
}

TEST_CASE("subprocess forward models speak the line protocol") {
  // `cat` is the identity map: with tau2 = 4 the surrogate matches the
  // identity_wellposed example.
  const std::string spec_path = "cli_subprocess_spec.json";
  {
    std::ofstream f(spec_path);
    f << R"({
      "p": 2, "q": 2, "mu": [0.0, 0.0],
      "gamma": {"tau2": 4.0}, "sigma": {"sigma2": 1.0},
      "forward": {"command": ["cat"]}, "c": 4.0
    })";
  }
  const RunResult r = run("check " + spec_path + " --linearize mu");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("overall: well_posed") != std::string::npos);
  std::remove(spec_path.c_str());
}
