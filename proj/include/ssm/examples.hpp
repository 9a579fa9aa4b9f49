#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ssm/numeric.hpp"

namespace ssm::examples {

/// Knobs for the vehicle-tracking generator.
struct VehicleParams {
  double rho = 0.1;    // damping on speed
  double delta = 1.0;  // time step
  Index n = 400;
};

/// In-memory form of a generated dataset, one entry per output file.
struct GeneratedTable {
  std::string filename;
  std::vector<std::string> columns;
  std::string label_column;
  std::vector<std::string> labels;
  Matrix values;
};

struct GeneratedExample {
  std::vector<GeneratedTable> tables;
  std::string system_json;  // user-model matrices, vehicle tracking only
  std::string system_filename;
};

/// Builds one of the named example datasets: "linear_trend_gap" (77-period
/// trend series with periods 10..20 missing), "vehicle_tracking" (bivariate
/// position measurements plus the true states and the system matrices), or
/// "consumption" (monthly series with trend, period-12 seasonality and a
/// temperature regressor extended 24 months past the sample).
GeneratedExample generate_example(const std::string& name, std::uint64_t rng_seed,
                                  const VehicleParams& vehicle = {});

/// Generates and writes the CSV (and JSON) files under out_dir; returns the
/// paths written. Byte-identical across runs for a fixed rng_seed.
std::vector<std::filesystem::path> write_example(const std::string& name, std::uint64_t rng_seed,
                                                 const std::filesystem::path& out_dir,
                                                 const VehicleParams& vehicle = {});

}  // namespace ssm::examples
