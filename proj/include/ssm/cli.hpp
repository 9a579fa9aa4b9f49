#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ssm {

/// One CLI invocation, validated before any computation runs.
struct RunConfig {
  std::string command;  // fit, forecast, simulate, components, generate-example

  std::string input;            // data CSV (fit) or artifact JSON (others)
  std::string exog;             // exogenous CSV, fit only
  std::string matrices;         // user-model JSON (Z, T, R), fit only
  std::string model = "local_level";  // local_level, linear_trend, structural, user
  int seasonal = 0;             // --s, structural only
  std::string filter = "standard";    // standard | sqrt
  int seeds = 3;
  std::uint64_t rng_seed = 1234;
  long horizon = 0;    // --N
  long scenarios = 0;  // --S
  std::vector<double> quantiles;
  int verbosity = 1;
  std::string out;
  std::string example_name;  // generate-example only
  double vehicle_rho = 0.1;
  double vehicle_delta = 1.0;

  void validate() const;
};

/// Executes one validated command; returns a process exit status.
int run(const RunConfig& config);

/// Parses argv-style arguments (without the program name) and runs them.
int run_cli(const std::vector<std::string>& args);

}  // namespace ssm
