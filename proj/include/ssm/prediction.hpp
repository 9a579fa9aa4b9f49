#pragma once

#include <cstdint>
#include <vector>

#include "ssm/estimation.hpp"

namespace ssm {

struct ForecastOutput {
  /// N x p minimum-MSE point forecasts.
  Matrix mean;
  /// Per-horizon predictive covariance Z P Z' + H.
  std::vector<Matrix> covariance;
};

/// N-step-ahead forecast, obtained by extending the filter recursion with
/// all future observations treated as missing. Time-varying Z models need
/// enough future Z rows (i.e. exogenous rows past the sample).
ForecastOutput forecast(const FittedStateSpace& fitted, Index horizon);

/// N x S x p array of sampled future observations.
class ScenarioSet {
 public:
  ScenarioSet(Index horizon, Index scenarios, Index variables);

  Index horizon() const { return horizon_; }
  Index scenarios() const { return scenarios_; }
  Index variables() const { return variables_; }

  double& at(Index h, Index s, Index var);
  double at(Index h, Index s, Index var) const;

  /// N x S view for univariate models.
  Matrix matrix(Index var = 0) const;

 private:
  Index horizon_;
  Index scenarios_;
  Index variables_;
  std::vector<double> data_;
};

/// Monte Carlo scenarios: each scenario draws its initial state from
/// Gaussian(a_{n+1}, P_{n+1}) and then propagates the state-space recursions
/// with noise sampled from the estimated H and Q. Scenario s uses an rng
/// stream derived from (rng_seed, s), so results do not depend on evaluation
/// order.
ScenarioSet simulate(const FittedStateSpace& fitted, Index horizon, Index scenarios,
                     std::uint64_t rng_seed);

/// Per-horizon, per-variable empirical quantiles with linear interpolation
/// between order statistics. Result: one N x p matrix per probability.
std::vector<Matrix> scenario_quantiles(const ScenarioSet& scenarios,
                                       const std::vector<double>& probs);

}  // namespace ssm
