#include "ssm/builders.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace ssm {

namespace {

Matrix block_diag(const std::vector<Matrix>& blocks) {
  Index rows = 0, cols = 0;
  for (const Matrix& B : blocks) {
    rows += B.rows();
    cols += B.cols();
  }
  Matrix M = Matrix::Zero(rows, cols);
  Index r0 = 0, c0 = 0;
  for (const Matrix& B : blocks) {
    M.block(r0, c0, B.rows(), B.cols()) = B;
    r0 += B.rows();
    c0 += B.cols();
  }
  return M;
}

std::vector<Matrix> repeat(const Matrix& block, Index count) {
  return std::vector<Matrix>(static_cast<size_t>(count), block);
}

// Level/slope block of the linear trend and structural models.
Matrix trend_transition() {
  Matrix T(2, 2);
  T << 1, 1, 0, 1;
  return T;
}

// Transition of (mu, nu, gamma_t, ..., gamma_{t-s+2}): trend block on top,
// then the dummy-seasonal row of -1's and the shifted identity below it.
Matrix seasonal_transition(int s) {
  const Index m = s + 1;
  Matrix T = Matrix::Zero(m, m);
  T.topLeftCorner(2, 2) = trend_transition();
  T.row(2).segment(2, s - 1).setConstant(-1.0);
  for (Index i = 3; i < m; ++i) T(i, i - 1) = 1.0;
  return T;
}

}  // namespace

StateSpaceModel local_level(ObservationSeries y) {
  const Index p = y.p();
  StateSpaceModel model(std::move(y), Matrix::Identity(p, p), Matrix::Identity(p, p),
                        Matrix::Identity(p, p));
  model.set_kind(ModelKind::local_level);
  return model;
}

StateSpaceModel linear_trend(ObservationSeries y) {
  const Index p = y.p();
  Matrix Z1(1, 2);
  Z1 << 1, 0;
  Matrix Z = block_diag(repeat(Z1, p));
  Matrix T = block_diag(repeat(trend_transition(), p));
  Matrix R = Matrix::Identity(2 * p, 2 * p);
  StateSpaceModel model(std::move(y), std::move(Z), std::move(T), std::move(R));
  model.set_kind(ModelKind::linear_trend);
  return model;
}

StateSpaceModel structural(ObservationSeries y, int seasonal_period, std::optional<Matrix> exog) {
  const int s = seasonal_period;
  if (s < 2) throw std::invalid_argument("seasonal period s must be >= 2, got " + std::to_string(s));

  const Index n = y.n();
  const Index p = y.p();
  Matrix X;
  if (exog && exog->size() > 0) {
    X = std::move(*exog);
    if (X.rows() < n)
      throw std::invalid_argument("exogenous matrix has " + std::to_string(X.rows()) +
                                  " rows but the series has n = " + std::to_string(n));
    if (!X.allFinite()) throw std::invalid_argument("exogenous matrix has non-finite entries");
  }
  const Index k = X.size() == 0 ? 0 : X.cols();

  const Index m1 = k + s + 1;  // per-variable state: theta, mu, nu, seasonal lags
  Matrix T1 = Matrix::Zero(m1, m1);
  T1.topLeftCorner(k, k) = Matrix::Identity(k, k);
  T1.bottomRightCorner(s + 1, s + 1) = seasonal_transition(s);
  Matrix R1 = Matrix::Zero(m1, 3);  // noises feed level, slope, current seasonal
  R1.block(k, 0, 3, 3) = Matrix::Identity(3, 3);

  Matrix T = block_diag(repeat(T1, p));
  Matrix R = block_diag(repeat(R1, p));

  Matrix Z1 = Matrix::Zero(1, m1);
  Z1(0, k) = 1.0;
  Z1(0, k + 2) = 1.0;

  StructuralInfo info;
  info.seasonal_period = s;
  info.exog = X;

  if (k == 0) {
    Matrix Z = block_diag(repeat(Z1, p));
    StateSpaceModel model(std::move(y), std::move(Z), std::move(T), std::move(R));
    model.set_kind(ModelKind::structural, std::move(info));
    return model;
  }

  // Regressors make Z time-varying: the sequence runs over every X row so
  // rows past the sample remain usable for forecasting.
  std::vector<Matrix> Z;
  Z.reserve(static_cast<size_t>(X.rows()));
  for (Index t = 0; t < X.rows(); ++t) {
    Matrix Z1t = Z1;
    Z1t.block(0, 0, 1, k) = X.row(t);
    Z.push_back(block_diag(repeat(Z1t, p)));
  }
  StateSpaceModel model(std::move(y), std::move(Z), std::move(T), std::move(R));
  model.set_kind(ModelKind::structural, std::move(info));
  return model;
}

}  // namespace ssm
