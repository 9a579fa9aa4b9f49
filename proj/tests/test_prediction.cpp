#include <doctest.h>

#include <cmath>
#include <random>

#include "ssm/builders.hpp"
#include "ssm/estimation.hpp"
#include "ssm/prediction.hpp"
#include "support/random_instance.hpp"

using namespace ssm;
using ssm::testing::InstanceOptions;
using ssm::testing::random_instance;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Bundle without estimation: filter and smoother at the given covariances.
FittedStateSpace manual_fit(const StateSpaceModel& model, const NoiseCovariances& cov,
                            const FilterConfig& config = {}) {
  const FilterBackend& backend = filter_for(config.variant);
  FilterOutput filter = backend.run(model, cov, config);
  SmootherOutput smoother = run_smoother(model, cov, filter);
  const double loglik = filter.loglik;
  return FittedStateSpace{model,          std::move(filter),  std::move(smoother), cov,
                          backend.name(), "RandomSeedsLBFGS", loglik,              {}};
}

StateSpaceModel scalar_local_level(const std::vector<double>& y) {
  Matrix values(static_cast<Index>(y.size()), 1);
  for (size_t t = 0; t < y.size(); ++t) values(static_cast<Index>(t), 0) = y[t];
  return local_level(ObservationSeries(values));
}

Matrix with_missing_tail(const Matrix& y, Index extra) {
  Matrix extended(y.rows() + extra, y.cols());
  extended.topRows(y.rows()) = y;
  extended.bottomRows(extra).setConstant(kNaN);
  return extended;
}

}  // namespace

TEST_CASE("forecast means equal refiltering with appended missing rows, exactly") {
  std::mt19937_64 rng(606);
  for (int rep = 0; rep < 6; ++rep) {
    InstanceOptions opts;
    opts.n = 25;
    opts.missing_prob = rep % 2 ? 0.2 : 0.0;
    auto instance = random_instance(rng, opts);
    const Index horizon = 7;

    for (FilterVariant variant : {FilterVariant::standard, FilterVariant::square_root}) {
      FilterConfig config;
      config.variant = variant;
      FittedStateSpace fitted = manual_fit(instance.model, instance.cov, config);
      ForecastOutput forecast_out = forecast(fitted, horizon);

      StateSpaceModel extended(
          ObservationSeries(with_missing_tail(instance.model.observations().values(), horizon)),
          instance.model.z_at(0), instance.model.transition(), instance.model.noise_selection());
      FilterOutput refiltered = filter_for(variant).run(extended, instance.cov, config);

      for (Index h = 0; h < horizon; ++h) {
        Vector mean_refiltered =
            instance.model.z_at(0) * refiltered.a.row(instance.model.n() + h).transpose();
        for (Index var = 0; var < instance.model.p(); ++var)
          CHECK(forecast_out.mean(h, var) == mean_refiltered(var));  // machine equality
      }
    }
  }
}

TEST_CASE("local-level forecast is flat with linearly growing variance") {
  std::vector<double> y{1.0, 1.3, 0.6, 1.8, 0.9, 1.1, 1.4, 0.8};
  StateSpaceModel model = scalar_local_level(y);
  NoiseCovariances cov(Matrix::Constant(1, 1, 0.9), Matrix::Constant(1, 1, 0.4));
  FittedStateSpace fitted = manual_fit(model, cov);
  const Index N = 10;
  ForecastOutput out = forecast(fitted, N);
  for (Index h = 1; h < N; ++h) {
    CHECK(out.mean(h, 0) == doctest::Approx(out.mean(0, 0)).epsilon(1e-12));
    const double step = out.covariance[static_cast<size_t>(h)](0, 0) -
                        out.covariance[static_cast<size_t>(h - 1)](0, 0);
    CHECK(step == doctest::Approx(0.4).epsilon(1e-9));
  }
}

TEST_CASE("noise-free linear trend forecast continues the line") {
  const Index n = 40;
  Matrix y(n, 1);
  for (Index t = 0; t < n; ++t) y(t, 0) = 1.0 + 0.25 * static_cast<double>(t + 1);
  StateSpaceModel model = linear_trend(ObservationSeries(y));
  NoiseCovariances cov(Matrix::Constant(1, 1, 1e-8), 1e-10 * Matrix::Identity(2, 2));
  FittedStateSpace fitted = manual_fit(model, cov);
  ForecastOutput out = forecast(fitted, 12);
  for (Index h = 0; h < 12; ++h)
    CHECK(out.mean(h, 0) == doctest::Approx(1.0 + 0.25 * static_cast<double>(n + h + 1)).epsilon(1e-6));
}

TEST_CASE("forecasting a regressor model past its exogenous rows is an error") {
  const Index n = 20;
  Matrix X(n + 3, 1);
  for (Index t = 0; t < X.rows(); ++t) X(t, 0) = std::cos(0.2 * static_cast<double>(t));
  Matrix y = Matrix::Ones(n, 1);
  StateSpaceModel model = structural(ObservationSeries(y), 4, X);
  NoiseCovariances cov(Matrix::Constant(1, 1, 0.5), 0.1 * Matrix::Identity(3, 3));
  FittedStateSpace fitted = manual_fit(model, cov);
  CHECK_NOTHROW(forecast(fitted, 3));
  CHECK_THROWS_WITH_AS(forecast(fitted, 5),
                       "forecast horizon 5 needs 5 future observation matrices (exogenous rows "
                       "past the sample); only 3 available, 2 missing",
                       std::invalid_argument);
}

TEST_CASE("zero noise and zero state uncertainty collapse all scenarios") {
  std::vector<double> y{2.0, 2.1, 1.9, 2.0, 2.2};
  StateSpaceModel model = scalar_local_level(y);
  // Filter at benign covariances, then force the degenerate corner: H = 0,
  // Q = 0 and P_{n+1} = 0, so every draw is deterministic.
  FittedStateSpace fitted =
      manual_fit(model, NoiseCovariances(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 0.1)));
  fitted.covariances = NoiseCovariances(Matrix::Zero(1, 1), Matrix::Zero(1, 1));
  fitted.filter.P.back().setZero();

  const Index N = 6, S = 12;
  ScenarioSet scenarios = simulate(fitted, N, S, 42);
  ForecastOutput fc = forecast(fitted, N);
  for (Index h = 0; h < N; ++h)
    for (Index s = 0; s < S; ++s)
      CHECK(scenarios.at(h, s, 0) == doctest::Approx(fc.mean(h, 0)).epsilon(1e-12));
}

TEST_CASE("scenario means converge to the forecast mean at the CLT rate") {
  std::mt19937_64 rng(9000);
  std::normal_distribution<double> normal;
  std::vector<double> y(60);
  double level = 0.0;
  for (auto& value : y) {
    value = level + normal(rng);
    level += 0.5 * normal(rng);
  }
  StateSpaceModel model = scalar_local_level(y);
  NoiseCovariances cov(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.25));
  FittedStateSpace fitted = manual_fit(model, cov);

  const Index N = 5, S = 10000;
  ScenarioSet scenarios = simulate(fitted, N, S, 31);
  ForecastOutput fc = forecast(fitted, N);
  for (Index h = 0; h < N; ++h) {
    double sum = 0.0;
    for (Index s = 0; s < S; ++s) sum += scenarios.at(h, s, 0);
    const double mean = sum / static_cast<double>(S);
    const double std_h = std::sqrt(fc.covariance[static_cast<size_t>(h)](0, 0));
    CHECK(std::abs(mean - fc.mean(h, 0)) < 4.0 * std_h / std::sqrt(static_cast<double>(S)));
  }
}

TEST_CASE("simulation is bit-identical for a fixed rng seed") {
  std::vector<double> y{0.4, 0.9, 0.2, 0.7, 0.5, 0.6};
  StateSpaceModel model = scalar_local_level(y);
  NoiseCovariances cov(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 0.1));
  FittedStateSpace fitted = manual_fit(model, cov);
  ScenarioSet first = simulate(fitted, 8, 50, 12345);
  ScenarioSet second = simulate(fitted, 8, 50, 12345);
  for (Index h = 0; h < 8; ++h)
    for (Index s = 0; s < 50; ++s) CHECK(first.at(h, s, 0) == second.at(h, s, 0));
  ScenarioSet other = simulate(fitted, 8, 50, 54321);
  bool any_different = false;
  for (Index h = 0; h < 8 && !any_different; ++h)
    for (Index s = 0; s < 50 && !any_different; ++s)
      any_different = first.at(h, s, 0) != other.at(h, s, 0);
  CHECK(any_different);
}

TEST_CASE("a corrupted fit with an indefinite covariance is caught") {
  std::vector<double> y{0.4, 0.9, 0.2, 0.7};
  StateSpaceModel model = scalar_local_level(y);
  NoiseCovariances cov(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 0.1));
  FittedStateSpace fitted = manual_fit(model, cov);
  fitted.filter.P.back()(0, 0) = -1.0;
  CHECK_THROWS_AS(simulate(fitted, 4, 8, 1), std::invalid_argument);
}

TEST_CASE("empirical quantiles interpolate order statistics") {
  ScenarioSet scenarios(2, 5, 1);
  const double values[5] = {3.0, 1.0, 5.0, 2.0, 4.0};
  for (Index h = 0; h < 2; ++h)
    for (Index s = 0; s < 5; ++s) scenarios.at(h, s, 0) = values[s];
  auto q = scenario_quantiles(scenarios, {0.5});
  CHECK(q[0](0, 0) == doctest::Approx(3.0));
  auto q25 = scenario_quantiles(scenarios, {0.25, 0.75});
  CHECK(q25[0](0, 0) == doctest::Approx(2.0));
  CHECK(q25[1](0, 0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(scenario_quantiles(scenarios, {}), std::invalid_argument);
  CHECK_THROWS_AS(scenario_quantiles(scenarios, {1.5}), std::invalid_argument);
}

TEST_CASE("a single scenario is its own quantile") {
  ScenarioSet scenarios(3, 1, 1);
  for (Index h = 0; h < 3; ++h) scenarios.at(h, 0, 0) = static_cast<double>(h) + 0.5;
  auto q = scenario_quantiles(scenarios, {0.05, 0.5, 0.95});
  for (Index h = 0; h < 3; ++h)
    for (size_t i = 0; i < 3; ++i) CHECK(q[i](h, 0) == doctest::Approx(static_cast<double>(h) + 0.5));
}

TEST_CASE("predictive covariance is nondecreasing over the horizon for predefined models") {
  std::mt19937_64 rng(71);
  std::normal_distribution<double> normal;
  Matrix y(30, 1);
  for (Index t = 0; t < 30; ++t) y(t, 0) = normal(rng);
  for (int which = 0; which < 3; ++which) {
    StateSpaceModel model = which == 0   ? local_level(ObservationSeries(y))
                            : which == 1 ? linear_trend(ObservationSeries(y))
                                         : structural(ObservationSeries(y), 4);
    NoiseCovariances cov(Matrix::Constant(1, 1, 0.5),
                         0.2 * Matrix::Identity(model.r(), model.r()));
    FittedStateSpace fitted = manual_fit(model, cov);
    ForecastOutput out = forecast(fitted, 10);
    for (Index h = 1; h < 10; ++h) {
      const Matrix step = out.covariance[static_cast<size_t>(h)] -
                          out.covariance[static_cast<size_t>(h - 1)];
      CHECK(numeric::min_eigenvalue(step) >= -1e-8);
    }
  }
}

TEST_CASE("simulated quantile band covers fresh draws from the true model") {
  // Consumption-style synthetic: trend + seasonality + temperature regressor.
  // Observation noise dominates, so the band width is driven by what the fit
  // can actually pin down rather than by state-estimate uncertainty.
  const Index n = 240, horizon = 24;
  constexpr double two_pi = 2.0 * 3.14159265358979323846;
  std::mt19937_64 rng(314);
  std::normal_distribution<double> normal;

  Matrix X(n + horizon, 1);
  for (Index t = 0; t < X.rows(); ++t)
    X(t, 0) = 20.0 + 7.0 * std::sin(two_pi * static_cast<double>(t % 12) / 12.0) + normal(rng);

  const double theta = 2.0, sd_eps = 6.0, sd_xi = 0.3, sd_omega = 0.25;
  std::vector<double> gamma;
  for (int j = 0; j < 11; ++j) gamma.push_back(10.0 * std::sin(two_pi * j / 12.0));
  double level = 150.0;
  auto step_seasonal = [&gamma](double noise) {
    double sum = 0.0;
    for (double g : gamma) sum += g;
    const double current = -sum + noise;
    gamma.insert(gamma.begin(), current);
    gamma.pop_back();
    return current;
  };

  Matrix y(n, 1);
  for (Index t = 0; t < n; ++t) {
    const double seasonal = step_seasonal(sd_omega * normal(rng));
    y(t, 0) = level + seasonal + theta * X(t, 0) + sd_eps * normal(rng);
    level += sd_xi * normal(rng);
  }
  const double level_n = level;
  const auto gamma_n = gamma;

  StateSpaceModel model = structural(ObservationSeries(y), 12, X);
  OptimizerConfig opt;
  opt.n_seeds = 1;
  opt.rng_seed = 4;
  opt.verbosity = 0;
  FittedStateSpace fitted = fit(model, FilterConfig{}, opt);

  const Index S = 1000;
  ScenarioSet scenarios = simulate(fitted, horizon, S, 2718);
  auto bands = scenario_quantiles(scenarios, {0.05, 0.95});

  // Fresh continuation paths from the true process, started at its true state.
  const int n_draws = 800;
  int inside = 0, total = 0;
  for (int draw = 0; draw < n_draws; ++draw) {
    double lvl = level_n;
    auto gma = gamma_n;
    for (Index h = 0; h < horizon; ++h) {
      double sum = 0.0;
      for (double g : gma) sum += g;
      const double seasonal = -sum + sd_omega * normal(rng);
      gma.insert(gma.begin(), seasonal);
      gma.pop_back();
      const double value = lvl + seasonal + theta * X(n + h, 0) + sd_eps * normal(rng);
      if (value >= bands[0](h, 0) && value <= bands[1](h, 0)) ++inside;
      ++total;
      lvl += sd_xi * normal(rng);
    }
  }
  const double coverage = static_cast<double>(inside) / static_cast<double>(total);
  CHECK(coverage > 0.87);
  CHECK(coverage < 0.93);
}
