#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stochsym/cli.hpp"

using namespace stochsym;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "stochsym");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Json parse(const Run& r) { return Json::parse(r.out); }

}  // namespace

TEST_CASE("verify writes five passing blocks") {
  for (const char* model : {"bessel", "cir", "ou", "twod"}) {
    CAPTURE(model);
    const auto r = run({"verify", "--model", model, "--points", "200", "--seed", "1"});
    CHECK(r.code == kExitPass);
    const auto j = parse(r);
    CHECK(j["pass"] == true);
    CHECK(j["version"].get<std::string>().rfind("v", 0) == 0);
    CHECK(j["config"]["seed"] == 1);
    const auto& res = j["result"];
    for (const char* block : {"determining", "quasi_doob", "closure", "straightening", "triangular"}) {
      CAPTURE(block);
      REQUIRE(res.contains(block));
      CHECK(res[block]["pass"] == true);
      CHECK_FALSE(res[block]["reports"].empty());
    }
    int blocks = 0;
    for (const auto& [key, value] : res.items()) blocks += value.is_object() && value.contains("reports");
    CHECK(blocks == 5);
    CHECK(res["model"] == model);
  }
}

TEST_CASE("verify: analytic derivatives pass the tight tolerance") {
  const auto r = run({"verify", "--model", "twod", "--derivatives", "analytic"});
  CHECK(r.code == kExitPass);
  CHECK(parse(r)["config"]["tol"] == 1e-9);
}

TEST_CASE("verify: tolerance below the finite-difference floor fails with reports") {
  const auto r = run({"verify", "--model", "ou", "--tol", "1e-12"});
  CHECK(r.code == kExitFailed);
  const auto j = parse(r);
  CHECK(j["pass"] == false);
  CHECK(j["result"].contains("determining"));
}

TEST_CASE("configuration errors exit 2 without a report") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"verify", "--model", "nosuch"},
           {"verify"},
           {"reconstruct", "--model", "ou", "--paths", "1"},
           {"reconstruct", "--model", "ou", "--dt", "0"},
           {"reconstruct", "--model", "ou", "--g", "cube", "--paths", "10"},
           {"verify", "--model", "ou", "--param", "a"},
           {"verify", "--model", "ou", "--param", "a=x"},
           {"verify", "--model", "ou", "--param", "zeta=1"},
           {"verify", "--model", "bessel", "--param", "a=0.1"},
           {"verify", "--model", "ou", "--format", "csv"},
           {"verify", "--model", "ou", "--derivatives", "symbolic"},
           {"all", "--models", ","},
           {"all", "--models", "ou,nosuch"},
           {"all", "--model", "ou"},
           {"frobnicate"},
           {"verify", "--model", "ou", "--points", "many"}}) {
    CAPTURE(args.front());
    const auto r = run(args);
    CHECK(r.code == kExitConfig);
    CHECK(r.out.empty());
  }
}

TEST_CASE("reduce reports the reduction match") {
  const auto r = run({"reduce", "--model", "bessel", "--route", "lamperti"});
  CHECK(r.code == kExitPass);
  const auto j = parse(r);
  CHECK(j["result"].contains("reduction"));
  CHECK(j["result"].contains("triangular"));
}

TEST_CASE("reconstruct: OU example") {
  const auto r = run({"reconstruct", "--model", "ou", "--g", "mean", "--t", "1.0", "--paths", "100000", "--dt", "0.001", "--seed", "7"});
  CHECK(r.code == kExitPass);
  const auto j = parse(r);
  CHECK(j["pass"] == true);
  const auto& row = j["result"]["rows"][0];
  CHECK(std::abs(row["z"].get<double>()) < 3.0);
}

TEST_CASE("reconstruct: Bessel Lamperti report carries the oracle") {
  const auto r = run({"reconstruct", "--model", "bessel", "--route", "lamperti", "--g", "x2", "--t", "1.0", "--paths", "20000"});
  CHECK(r.code == kExitPass);
  const auto row = parse(r)["result"]["rows"][0];
  CHECK(row["oracle"] == 4.0);
  CHECK(row.contains("direct"));
  CHECK(row.contains("reconstructed"));
  CHECK(row["direct"].contains("stderr"));
}

TEST_CASE("reconstruct: csv output") {
  const auto path = std::filesystem::temp_directory_path() / "stochsym_cli_test.csv";
  const auto r = run({"reconstruct", "--model", "ou", "--t", "0.5", "--t", "1", "--paths", "2000", "--format", "csv",
                      "--out", path.string()});
  CHECK(r.out.empty());
  std::ifstream in(path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  std::filesystem::remove(path);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "model,route,time,estimator,value,stderr,n_effective,rejected_frac");
  CHECK(lines[1].rfind("ou,doob,0.5,direct,", 0) == 0);
  CHECK(lines[2].rfind("ou,doob,0.5,reconstructed,", 0) == 0);
  CHECK(lines[3].rfind("ou,doob,0.5,oracle,", 0) == 0);
}

TEST_CASE("reconstruct: json bytes do not depend on the worker count") {
  const std::vector<std::string> args = {"reconstruct", "--model", "cir", "--paths", "4000", "--seed", "3"};
  setenv("STOCHSYM_THREADS", "1", 1);
  const auto one = run(args);
  setenv("STOCHSYM_THREADS", "6", 1);
  const auto six = run(args);
  unsetenv("STOCHSYM_THREADS");
  CHECK(one.code == six.code);
  CHECK(one.out == six.out);
}

TEST_CASE("all: exit code follows the per-model results") {
  const auto r = run({"all", "--models", "ou,cir", "--paths", "2000", "--dt", "0.05", "--points", "50"});
  const auto j = parse(r);
  REQUIRE(j["results"].size() == 2);
  bool every = true;
  for (const auto& m : j["results"]) {
    every = every && m["verify"]["pass"] == true;
    const auto& rows = m["reconstruct"]["rows"];
    for (const auto& row : rows) every = every && std::abs(row["z"].get<double>()) <= 3.0;
    every = every && m["reconstruct"]["degenerate"] == false;
  }
  CHECK(r.code == (every ? kExitPass : kExitFailed));
  CHECK(j["pass"] == (r.code == kExitPass));
}

TEST_CASE("version flag") {
  const auto r = run({"--version"});
  CHECK(r.code == 0);
  CHECK(r.out.find(version()) != std::string::npos);
}
