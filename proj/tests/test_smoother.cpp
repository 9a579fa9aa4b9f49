#include <doctest.h>

#include <cmath>
#include <random>

#include "ssm/builders.hpp"
#include "ssm/smoother.hpp"
#include "support/oracle.hpp"
#include "support/random_instance.hpp"

using namespace ssm;
using ssm::testing::InstanceOptions;
using ssm::testing::JointGaussianOracle;
using ssm::testing::random_instance;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

double max_abs(const Matrix& M) { return M.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("smoothing at the final period equals filtering") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    auto instance = random_instance(rng, InstanceOptions{});
    FilterOutput filter = run_filter(instance.model, instance.cov, FilterConfig{});
    SmootherOutput smoother = run_smoother(instance.model, instance.cov, filter);
    const Index last = instance.model.n() - 1;
    CHECK(max_abs(smoother.alpha.row(last) - filter.att.row(last)) <= 1e-12 * (1.0 + max_abs(filter.att.row(last))));
    CHECK(max_abs(smoother.V[static_cast<size_t>(last)] - filter.Ptt[static_cast<size_t>(last)]) <=
          1e-12 * (1.0 + max_abs(filter.Ptt[static_cast<size_t>(last)])));
  }
}

TEST_CASE("local level n=3 smoothed moments match direct conditioning to 1e-10") {
  Matrix y(3, 1);
  y << 0.8, -0.4, 1.7;
  StateSpaceModel model = local_level(ObservationSeries(y));
  NoiseCovariances cov(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 0.2));
  FilterConfig config;
  config.initial_state_mean = Vector::Zero(1);
  config.initial_state_covariance = Matrix::Constant(1, 1, 10.0);
  FilterOutput filter = run_filter(model, cov, config);
  SmootherOutput smoother = run_smoother(model, cov, filter);
  JointGaussianOracle oracle(model, cov, *config.initial_state_mean,
                             *config.initial_state_covariance);
  for (Index t = 0; t < 3; ++t) {
    auto sm = oracle.smoothed_state(t);
    CHECK(max_abs(smoother.alpha.row(t).transpose() - sm.mean) < 1e-10);
    CHECK(max_abs(smoother.V[static_cast<size_t>(t)] - sm.cov) < 1e-10);
  }
}

TEST_CASE("smoother matches the joint-Gaussian oracle on randomized instances") {
  std::mt19937_64 rng(404);
  for (int rep = 0; rep < 25; ++rep) {
    InstanceOptions opts;
    opts.missing_prob = rep % 2 ? 0.3 : 0.0;  // interior gaps exercise the two-sided recursion
    auto instance = random_instance(rng, opts);
    FilterConfig config;
    config.initial_state_mean = instance.a1;
    config.initial_state_covariance = instance.P1;
    FilterOutput filter = run_filter(instance.model, instance.cov, config);
    SmootherOutput smoother = run_smoother(instance.model, instance.cov, filter);
    JointGaussianOracle oracle(instance.model, instance.cov, instance.a1, instance.P1);
    for (Index t = 0; t < instance.model.n(); ++t) {
      auto sm = oracle.smoothed_state(t);
      CHECK(max_abs(smoother.alpha.row(t).transpose() - sm.mean) < 1e-9);
      CHECK(max_abs(smoother.V[static_cast<size_t>(t)] - sm.cov) < 1e-9);
    }
  }
}

TEST_CASE("near-deterministic trend smooths the gap onto the least-squares line") {
  // With state noise pinned near zero the smoothed level is the GLS (here
  // OLS) line fit through the observed points.
  const Index n = 77;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  Matrix y(n, 1);
  for (Index t = 0; t < n; ++t) y(t, 0) = 1.0 + 0.25 * static_cast<double>(t) + 0.5 * normal(rng);
  for (Index t = 9; t <= 19; ++t) y(t, 0) = kNaN;

  StateSpaceModel model = linear_trend(ObservationSeries(y));
  NoiseCovariances cov(Matrix::Constant(1, 1, 0.25), 1e-10 * Matrix::Identity(2, 2));
  FilterOutput filter = run_filter(model, cov, FilterConfig{});
  SmootherOutput smoother = run_smoother(model, cov, filter);

  // ordinary least squares on the observed points
  double sx = 0, sy = 0, sxx = 0, sxy = 0, count = 0;
  for (Index t = 0; t < n; ++t) {
    if (std::isnan(y(t, 0))) continue;
    const double x = static_cast<double>(t);
    sx += x;
    sy += y(t, 0);
    sxx += x * x;
    sxy += x * y(t, 0);
    count += 1;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / count;

  for (Index t = 0; t < n; ++t)
    CHECK(std::abs(smoother.alpha(t, 0) - (intercept + slope * static_cast<double>(t))) < 1e-3);
}

TEST_CASE("smoothing never increases uncertainty past the filter") {
  std::mt19937_64 rng(55);
  for (int rep = 0; rep < 8; ++rep) {
    InstanceOptions opts;
    opts.n = 20;
    opts.missing_prob = 0.15;
    auto instance = random_instance(rng, opts);
    FilterOutput filter = run_filter(instance.model, instance.cov, FilterConfig{});
    SmootherOutput smoother = run_smoother(instance.model, instance.cov, filter);
    for (Index t = 0; t < instance.model.n(); ++t) {
      const Matrix& V = smoother.V[static_cast<size_t>(t)];
      const Matrix& Ptt = filter.Ptt[static_cast<size_t>(t)];
      const Matrix& P = filter.P[static_cast<size_t>(t)];
      const double scale = 1.0 + P.trace();
      CHECK(numeric::min_eigenvalue(V) >= -1e-8 * scale);
      CHECK(numeric::min_eigenvalue(Ptt - V) >= -1e-8 * scale);
      if (instance.model.observations().fully_observed(t))
        CHECK(numeric::min_eigenvalue(P - Ptt) >= -1e-8 * scale);
    }
  }
}

TEST_CASE("mismatched filter output is rejected") {
  Matrix y = Matrix::Zero(6, 1);
  StateSpaceModel model = local_level(ObservationSeries(y));
  NoiseCovariances cov(Matrix::Identity(1, 1), Matrix::Identity(1, 1));
  FilterOutput filter = run_filter(model, cov, FilterConfig{});
  filter.att.resize(5, 1);
  CHECK_THROWS_AS(run_smoother(model, cov, filter), std::invalid_argument);
}

TEST_CASE("component map of the structural model") {
  const Index n = 40;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  Matrix y(n, 1);
  for (Index t = 0; t < n; ++t) y(t, 0) = std::sin(0.5 * static_cast<double>(t)) + 0.1 * normal(rng);
  StateSpaceModel model = structural(ObservationSeries(y), 12);
  NoiseCovariances cov(Matrix::Constant(1, 1, 0.1), 0.05 * Matrix::Identity(3, 3));
  FilterOutput filter = run_filter(model, cov, FilterConfig{});
  SmootherOutput smoother = run_smoother(model, cov, filter);

  ComponentSeries level = smoothed_components(model, smoother, Component::level);
  ComponentSeries seasonal = smoothed_components(model, smoother, Component::seasonal);
  for (Index t = 0; t < n; ++t) {
    CHECK(level.mean(t, 0) == smoother.alpha(t, 0));      // state dim 1
    CHECK(seasonal.mean(t, 0) == smoother.alpha(t, 2));   // state dim 3
    CHECK(level.variance(t, 0) == smoother.V[static_cast<size_t>(t)](0, 0));
  }
}

TEST_CASE("requesting a component the model lacks is an error") {
  Matrix y = Matrix::Zero(8, 1);
  StateSpaceModel model = local_level(ObservationSeries(y));
  NoiseCovariances cov(Matrix::Identity(1, 1), Matrix::Identity(1, 1));
  FilterOutput filter = run_filter(model, cov, FilterConfig{});
  SmootherOutput smoother = run_smoother(model, cov, filter);
  ComponentSeries level = smoothed_components(model, smoother, Component::level);
  CHECK(level.mean.rows() == 8);
  CHECK_THROWS_AS(smoothed_components(model, smoother, Component::slope), std::invalid_argument);
  CHECK_THROWS_AS(smoothed_components(model, smoother, Component::seasonal), std::invalid_argument);
}

TEST_CASE("regression component is theta-hat times the regressor") {
  const Index n = 30;
  Matrix X(n + 4, 1);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal;
  for (Index t = 0; t < X.rows(); ++t) X(t, 0) = normal(rng);
  Matrix y(n, 1);
  for (Index t = 0; t < n; ++t) y(t, 0) = 2.0 + 3.0 * X(t, 0) + 0.1 * normal(rng);

  StateSpaceModel model = structural(ObservationSeries(y), 4, X);
  NoiseCovariances cov(Matrix::Constant(1, 1, 0.1), 0.01 * Matrix::Identity(3, 3));
  FilterOutput filter = run_filter(model, cov, FilterConfig{});
  SmootherOutput smoother = run_smoother(model, cov, filter);
  ComponentSeries regression = smoothed_components(model, smoother, Component::regression);
  for (Index t = 0; t < n; ++t) {
    CHECK(regression.mean(t, 0) == doctest::Approx(smoother.alpha(t, 0) * X(t, 0)).epsilon(1e-12));
    CHECK(regression.variance(t, 0) ==
          doctest::Approx(smoother.V[static_cast<size_t>(t)](0, 0) * X(t, 0) * X(t, 0)).epsilon(1e-12));
  }
}
