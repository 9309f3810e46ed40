#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stochsym/catalog.hpp"
#include "stochsym/report_io.hpp"

namespace stochsym {

enum ExitCode : int { kExitPass = 0, kExitFailed = 1, kExitConfig = 2, kExitNumeric = 3 };

struct RunConfig {
  std::string command;
  std::string model;
  std::optional<std::vector<std::string>> models;  // filter for `all`
  std::string route;
  std::map<std::string, double> params;
  Derivatives derivatives = Derivatives::kFiniteDifference;
  int points = 200;
  std::uint64_t seed = 1;
  std::optional<double> tol;
  std::optional<double> closure_tol;
  double triangular_tol = 1e-6;
  double match_tol = 1e-6;
  std::string observable;
  std::vector<double> times{1.0};
  int paths = 100000;
  double dt = 1e-3;
  std::string out;
  std::string format = "json";

  double tolerance() const;
  double closure_tolerance() const;
  void validate() const;
};

Json config_json(const RunConfig& c);

// Each returns the exit code and fills `report`.
int cmd_verify(const RunConfig& c, Json& report);
int cmd_reduce(const RunConfig& c, Json& report);
int cmd_reconstruct(const RunConfig& c, Json& report, std::vector<McReport>* mc = nullptr);
int cmd_all(const RunConfig& c, Json& report, std::vector<McReport>* mc = nullptr);

// Parses argv, dispatches, writes the report; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

const char* version();

}  // namespace stochsym
