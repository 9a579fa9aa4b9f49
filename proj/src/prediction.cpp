#include "ssm/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "internal.hpp"

namespace ssm {

namespace {

void check_future_z(const StateSpaceModel& model, Index horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const Index available = model.z_future();
  if (available < horizon)
    throw std::invalid_argument(
        "forecast horizon " + std::to_string(horizon) + " needs " + std::to_string(horizon) +
        " future observation matrices (exogenous rows past the sample); only " +
        std::to_string(available) + " available, " + std::to_string(horizon - available) +
        " missing");
}

void check_psd(const Matrix& M, const char* name) {
  const double eigmin = numeric::min_eigenvalue(M);
  if (eigmin < -1e-8 * (1.0 + M.cwiseAbs().maxCoeff()))
    throw std::invalid_argument(std::string(name) + " is not positive semidefinite (min eigenvalue " +
                                std::to_string(eigmin) + "); the fit looks corrupted");
}

}  // namespace

ForecastOutput forecast(const FittedStateSpace& fitted, Index horizon) {
  const StateSpaceModel& model = fitted.model;
  check_future_z(model, horizon);
  const Index n = model.n(), p = model.p();
  const Matrix& T = model.transition();
  const Matrix& H = fitted.covariances.H();
  const Matrix RQRt = numeric::symmetrize(model.noise_selection() * fitted.covariances.Q() *
                                          model.noise_selection().transpose());

  // Continue the recursion from the one-step-beyond-sample prediction with
  // every future observation missing; the arithmetic mirrors the filter's
  // missing-period branch step for step.
  Vector a = fitted.filter.a.row(n).transpose();
  Matrix P = fitted.filter.P[static_cast<size_t>(n)];

  ForecastOutput out;
  out.mean.resize(horizon, p);
  out.covariance.assign(static_cast<size_t>(horizon), Matrix());

  Vector a_next(a.size());
  for (Index h = 0; h < horizon; ++h) {
    const Matrix& Z = model.z_extended(n + h);
    out.mean.row(h) = (Z * a).transpose();
    out.covariance[static_cast<size_t>(h)] = numeric::symmetrize(Z * P * Z.transpose() + H);
    a_next.noalias() = T * a;
    a = a_next;
    P = numeric::symmetrize(T * P * T.transpose() + RQRt);
  }
  return out;
}

namespace {
size_t checked_size(Index horizon, Index scenarios, Index variables) {
  if (horizon < 1 || scenarios < 1 || variables < 1)
    throw std::invalid_argument("scenario set dimensions must be positive");
  return static_cast<size_t>(horizon) * static_cast<size_t>(scenarios) *
         static_cast<size_t>(variables);
}
}  // namespace

ScenarioSet::ScenarioSet(Index horizon, Index scenarios, Index variables)
    : horizon_(horizon),
      scenarios_(scenarios),
      variables_(variables),
      data_(checked_size(horizon, scenarios, variables), 0.0) {}

double& ScenarioSet::at(Index h, Index s, Index var) {
  return data_[static_cast<size_t>((h * scenarios_ + s) * variables_ + var)];
}

double ScenarioSet::at(Index h, Index s, Index var) const {
  return data_[static_cast<size_t>((h * scenarios_ + s) * variables_ + var)];
}

Matrix ScenarioSet::matrix(Index var) const {
  Matrix M(horizon_, scenarios_);
  for (Index h = 0; h < horizon_; ++h)
    for (Index s = 0; s < scenarios_; ++s) M(h, s) = at(h, s, var);
  return M;
}

ScenarioSet simulate(const FittedStateSpace& fitted, Index horizon, Index scenarios,
                     std::uint64_t rng_seed) {
  const StateSpaceModel& model = fitted.model;
  check_future_z(model, horizon);
  if (scenarios < 1) throw std::invalid_argument("scenario count must be >= 1");

  const Index n = model.n(), p = model.p(), m = model.m(), r = model.r();
  const Matrix& T = model.transition();
  const Matrix& R = model.noise_selection();
  const Matrix& H = fitted.covariances.H();
  const Matrix& Q = fitted.covariances.Q();
  const Vector a1 = fitted.filter.a.row(n).transpose();
  const Matrix& P1 = fitted.filter.P[static_cast<size_t>(n)];

  check_psd(H, "H");
  check_psd(Q, "Q");
  check_psd(P1, "P_{n+1}");

  const Matrix SP = numeric::psd_sqrt(P1);
  const Matrix SH = numeric::psd_sqrt(H);
  const Matrix SQ = numeric::psd_sqrt(Q);

  ScenarioSet out(horizon, scenarios, p);

  // Each scenario owns an rng stream keyed by (rng_seed, scenario), so the
  // result is independent of evaluation order.
  for (Index s = 0; s < scenarios; ++s) {
    std::seed_seq seq{static_cast<std::uint64_t>(rng_seed), static_cast<std::uint64_t>(s + 1)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    auto draw = [&rng, &normal](Index size) {
      Vector z(size);
      for (Index i = 0; i < size; ++i) z(i) = normal(rng);
      return z;
    };

    Vector alpha = a1 + SP * draw(m);
    for (Index h = 0; h < horizon; ++h) {
      const Matrix& Z = model.z_extended(n + h);
      Vector eta = SQ * draw(r);
      Vector eps = SH * draw(p);
      Vector y = Z * alpha + eps;
      for (Index var = 0; var < p; ++var) out.at(h, s, var) = y(var);
      alpha = T * alpha + R * eta;
    }
  }
  return out;
}

std::vector<Matrix> scenario_quantiles(const ScenarioSet& scenarios,
                                       const std::vector<double>& probs) {
  if (probs.empty()) throw std::invalid_argument("quantile probabilities must be nonempty");
  for (double prob : probs)
    if (!(prob > 0.0 && prob < 1.0))
      throw std::invalid_argument("quantile probability " + std::to_string(prob) +
                                  " outside (0, 1)");

  const Index N = scenarios.horizon(), S = scenarios.scenarios(), p = scenarios.variables();
  std::vector<Matrix> out(probs.size(), Matrix(N, p));
  std::vector<double> sample(static_cast<size_t>(S));

  for (Index h = 0; h < N; ++h) {
    for (Index var = 0; var < p; ++var) {
      for (Index s = 0; s < S; ++s) sample[static_cast<size_t>(s)] = scenarios.at(h, s, var);
      std::sort(sample.begin(), sample.end());
      for (size_t q = 0; q < probs.size(); ++q) {
        // Linear interpolation between order statistics.
        const double pos = probs[q] * static_cast<double>(S - 1);
        const auto lo = static_cast<size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        double value = sample[lo];
        if (lo + 1 < sample.size()) value += frac * (sample[lo + 1] - sample[lo]);
        out[q](h, var) = value;
      }
    }
  }
  return out;
}

}  // namespace ssm
