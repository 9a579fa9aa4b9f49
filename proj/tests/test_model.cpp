#include <doctest.h>

#include <limits>
#include <random>

#include "ssm/model.hpp"

using namespace ssm;

namespace {
const double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix linear_trend_Z() {
  Matrix Z(1, 2);
  Z << 1, 0;
  return Z;
}

Matrix linear_trend_T() {
  Matrix T(2, 2);
  T << 1, 1, 0, 1;
  return T;
}
}  // namespace

TEST_CASE("user-defined linear trend model carries the stated dims") {
  Matrix y = Matrix::Zero(77, 1);
  for (Index t = 0; t < 77; ++t) y(t, 0) = 1.0 + 0.25 * static_cast<double>(t);
  StateSpaceModel model(ObservationSeries(y), linear_trend_Z(), linear_trend_T(),
                        Matrix::Identity(2, 2));
  CHECK(model.n() == 77);
  CHECK(model.p() == 1);
  CHECK(model.m() == 2);
  CHECK(model.r() == 2);
  CHECK(model.kind() == ModelKind::user_defined);
}

TEST_CASE("smallest valid system") {
  Matrix y = Matrix::Zero(10, 1);
  StateSpaceModel model(ObservationSeries(y), Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                        Matrix::Identity(1, 1));
  CHECK(model.n() == 10);
  CHECK(model.m() == 1);
  CHECK(model.r() == 1);
}

TEST_CASE("short time-varying Z sequence is rejected") {
  Matrix y = Matrix::Zero(5, 2);
  std::vector<Matrix> Z(4, Matrix::Zero(2, 3));
  CHECK_THROWS_WITH_AS(
      StateSpaceModel(ObservationSeries(y), Z, Matrix::Identity(3, 3), Matrix::Identity(3, 3)),
      "Z sequence length 4 != n = 5", std::invalid_argument);
}

TEST_CASE("dimension mismatches name the offending pair") {
  Matrix y = Matrix::Zero(6, 1);
  CHECK_THROWS_AS(StateSpaceModel(ObservationSeries(y), linear_trend_Z(), Matrix::Identity(3, 3),
                                  Matrix::Identity(3, 3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(StateSpaceModel(ObservationSeries(y), linear_trend_Z(), linear_trend_T(),
                                  Matrix::Identity(3, 2)),
                  std::invalid_argument);
  Matrix T_rect(2, 3);
  T_rect.setZero();
  CHECK_THROWS_AS(
      StateSpaceModel(ObservationSeries(y), linear_trend_Z(), T_rect, Matrix::Identity(3, 3)),
      std::invalid_argument);
  Matrix y2 = Matrix::Zero(6, 2);
  CHECK_THROWS_AS(StateSpaceModel(ObservationSeries(y2), linear_trend_Z(), linear_trend_T(),
                                  Matrix::Identity(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("series shorter than two periods is rejected") {
  CHECK_THROWS_AS(ObservationSeries(Matrix::Zero(1, 1)), std::invalid_argument);
}

TEST_CASE("construction round trip is bit exact") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  Matrix y(9, 2), Z(2, 3), T(3, 3), R(3, 2);
  for (auto* M : {&y, &Z, &T, &R})
    for (Index i = 0; i < M->rows(); ++i)
      for (Index j = 0; j < M->cols(); ++j) (*M)(i, j) = normal(rng);

  StateSpaceModel model(ObservationSeries(y), Z, T, R);
  CHECK(model.z_at(0) == Z);
  CHECK(model.transition() == T);
  CHECK(model.noise_selection() == R);
  CHECK(model.observations().values() == y);
  CHECK(model.n() == 9);
  CHECK(model.p() == 2);
  CHECK(model.m() == 3);
  CHECK(model.r() == 2);
}

TEST_CASE("z_at over constant Z is independent of t") {
  Matrix y = Matrix::Zero(12, 1);
  StateSpaceModel model(ObservationSeries(y), linear_trend_Z(), linear_trend_T(),
                        Matrix::Identity(2, 2));
  for (Index t = 0; t < model.n(); ++t) CHECK(model.z_at(t) == linear_trend_Z());
}

TEST_CASE("z_at indexes a time-varying sequence directly") {
  Matrix y = Matrix::Zero(4, 1);
  std::vector<Matrix> Z;
  for (int t = 0; t < 4; ++t) {
    Matrix Zt(1, 2);
    Zt << 0.5 * t, 1.0;
    Z.push_back(Zt);
  }
  StateSpaceModel model(ObservationSeries(y), Z, linear_trend_T(), Matrix::Identity(2, 2));
  CHECK(model.z_at(1)(0, 0) == doctest::Approx(0.5));
  CHECK(model.z_at(3)(0, 0) == doctest::Approx(1.5));
  CHECK_THROWS_AS(model.z_at(-1), std::invalid_argument);
  CHECK_THROWS_AS(model.z_at(4), std::invalid_argument);
}

TEST_CASE("trailing Z matrices beyond the sample are kept for forecasting") {
  Matrix y = Matrix::Zero(4, 1);
  std::vector<Matrix> Z(7, linear_trend_Z());
  StateSpaceModel model(ObservationSeries(y), Z, linear_trend_T(), Matrix::Identity(2, 2));
  CHECK(model.z_future() == 3);
  CHECK_NOTHROW(model.z_extended(6));
  CHECK_THROWS_AS(model.z_extended(7), std::invalid_argument);
  CHECK_THROWS_AS(model.z_at(4), std::invalid_argument);
}

TEST_CASE("missingness mask distinguishes full, partial and missing rows") {
  Matrix y(4, 2);
  y << 1.0, 2.0, kNaN, 3.0, kNaN, kNaN, 4.0, 5.0;
  ObservationSeries series(y);
  CHECK(series.fully_observed(0));
  CHECK(!series.fully_observed(1));
  CHECK(!series.fully_missing(1));
  CHECK(series.observed_at(1) == std::vector<Index>{1});
  CHECK(series.fully_missing(2));
  CHECK(series.observed_total() == 5);
  CHECK(series.has_missing());
}

TEST_CASE("noise covariances validate symmetry and positive semidefiniteness") {
  Matrix H(2, 2), Q(1, 1);
  H << 1.0, 0.3, 0.3, 1.0;
  Q << 0.5;
  CHECK_NOTHROW(NoiseCovariances(H, Q));

  Matrix asym = H;
  asym(0, 1) = 0.4;
  CHECK_THROWS_AS(NoiseCovariances(asym, Q), std::invalid_argument);

  Matrix indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(NoiseCovariances(indefinite, Q), std::invalid_argument);

  // zero is positive semidefinite
  CHECK_NOTHROW(NoiseCovariances(Matrix::Zero(2, 2), Matrix::Zero(1, 1)));
}
