#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ssm/cli.hpp"
#include "ssm/estimation.hpp"

namespace ssm {

/// A fit artifact read back from disk: enough to rebuild the filter and
/// smoother exactly and to forecast or simulate from the stored optimum.
struct LoadedArtifact {
  StateSpaceModel model;
  NoiseCovariances covariances;
  FilterConfig filter_config;
  std::string filter_type;
  std::string optimization_method;
  double loglik = 0.0;
  std::vector<SeedTrace> trace;  // seconds are not persisted
};

/// Versioned JSON document with the model (matrices row-major with explicit
/// dims), estimated covariances, log-likelihood, per-seed trace and a config
/// echo. Wall-clock seconds are deliberately left out so identical runs
/// produce byte-identical files.
void save_artifact(const std::filesystem::path& path, const FittedStateSpace& fitted,
                   const FilterConfig& filter_config, const RunConfig& config);

LoadedArtifact load_artifact(const std::filesystem::path& path);

/// Rebuilds the fitted bundle from an artifact: one filter pass at the
/// stored covariances, then the smoother.
FittedStateSpace refit_from_artifact(const LoadedArtifact& artifact);

/// User-model matrices file: JSON object with nested-array "Z" (2-d, or 3-d
/// with one matrix per period), "T" and "R".
struct UserMatrices {
  std::vector<Matrix> Z;  // size 1 when constant
  bool z_time_varying = false;
  Matrix T;
  Matrix R;
};

UserMatrices read_matrices_json(const std::filesystem::path& path);

}  // namespace ssm
