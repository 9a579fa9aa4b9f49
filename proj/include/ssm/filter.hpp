#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssm/model.hpp"

namespace ssm {

enum class FilterVariant { standard, square_root };

std::string to_string(FilterVariant variant);
FilterVariant filter_variant_from_string(const std::string& name);

struct FilterConfig {
  FilterVariant variant = FilterVariant::standard;
  /// kappa of the diffuse prior P_1 = kappa * I.
  double diffuse_scale = 1e6;
  /// Reporting tolerance for the steady-state flag.
  double steady_state_tolerance = 1e-5;
  /// Override the default zero initial state mean.
  std::optional<Vector> initial_state_mean;
  /// Override the default diffuse P_1.
  std::optional<Matrix> initial_state_covariance;
};

struct FilterOutput {
  /// (n+1) x m predictive means; row t holds a_t = E[alpha_t | Y_{t-1}],
  /// so the last row is the one-step-beyond-sample prediction.
  Matrix a;
  /// n+1 predictive covariances P_t.
  std::vector<Matrix> P;
  /// n x m filtered means a_{t|t}.
  Matrix att;
  /// n filtered covariances P_{t|t}.
  std::vector<Matrix> Ptt;
  /// n x p innovations; NaN wherever the observation entry is missing.
  Matrix v;
  /// n innovation covariances. At a partially missing period only the
  /// observed block is filled (missing rows/columns are zero); at a fully
  /// missing period the stored value is H, matching the Z_t = 0 convention.
  std::vector<Matrix> F;
  bool steady_state = false;
  /// First period (0-based) at which P settled, when steady_state is true.
  std::optional<Index> steady_state_period;
  double loglik = 0.0;
};

/// Innovation covariance numerically singular at an observed period.
class SingularInnovationError : public std::runtime_error {
 public:
  SingularInnovationError(Index period, const std::string& message)
      : std::runtime_error(message), period_(period) {}
  Index period() const { return period_; }

 private:
  Index period_;
};

/// Standard Kalman filter. Missing entries follow the Z_t = 0 convention:
/// fully missing periods skip the update; partially missing periods update
/// with the observed rows of y_t, Z_t and the matching block of H.
FilterOutput run_filter(const StateSpaceModel& model, const NoiseCovariances& cov,
                        const FilterConfig& config = {});

/// Square-root variant: propagates Cholesky-style factors of P and F through
/// orthogonal triangularizations, so reported covariances are positive
/// semidefinite by construction. Same mathematical contract as run_filter.
FilterOutput run_sqrt_filter(const StateSpaceModel& model, const NoiseCovariances& cov,
                             const FilterConfig& config = {});

/// First index t with max-abs(P[t+1] - P[t]) < tolerance, if any.
std::optional<Index> detect_steady_state(const std::vector<Matrix>& P, double tolerance);

/// Extension point: third-party filters implement this contract and can be
/// passed to the estimation entry points in place of the built-in variants.
class FilterBackend {
 public:
  virtual ~FilterBackend() = default;
  virtual std::string name() const = 0;
  virtual FilterOutput run(const StateSpaceModel& model, const NoiseCovariances& cov,
                           const FilterConfig& config) const = 0;
  /// Log-likelihood only. The built-in backends override this with a pass
  /// that skips per-period storage.
  virtual double loglik(const StateSpaceModel& model, const NoiseCovariances& cov,
                        const FilterConfig& config) const;
};

const FilterBackend& standard_filter();
const FilterBackend& square_root_filter();
const FilterBackend& filter_for(FilterVariant variant);

}  // namespace ssm
