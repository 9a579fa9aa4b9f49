#pragma once

#include <optional>

#include "ssm/model.hpp"

namespace ssm {

/// Random-walk level plus observation noise. Multivariate series get one
/// independent level per variable; cross-correlation lives in H and Q.
StateSpaceModel local_level(ObservationSeries y);

/// Local level with a stochastic slope. Multivariate series get one
/// (level, slope) block per variable.
StateSpaceModel linear_trend(ObservationSeries y);

/// Basic structural model: level, slope and dummy seasonal of period s,
/// optionally with exogenous regressors X whose coefficients enter the state
/// as constants. X may carry more rows than the sample; the extra rows are
/// kept so the model can be forecast.
StateSpaceModel structural(ObservationSeries y, int seasonal_period,
                           std::optional<Matrix> exog = std::nullopt);

}  // namespace ssm
