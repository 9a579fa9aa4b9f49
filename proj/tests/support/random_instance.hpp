#pragma once

#include <random>

#include <Eigen/Eigenvalues>

#include "ssm/model.hpp"

namespace ssm::testing {

struct RandomInstance {
  StateSpaceModel model;
  NoiseCovariances cov;
  Vector a1;
  Matrix P1;
};

struct InstanceOptions {
  Index n = 8;
  Index max_p = 3;
  Index max_m = 3;
  double missing_prob = 0.0;         // per-entry probability
  double noise_floor = 0.1;          // keeps H, Q well conditioned
  double spectral_radius_max = 1.05;
};

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal;
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = normal(rng);
  return M;
}

inline Matrix random_spd(std::mt19937_64& rng, Index size, double floor) {
  Matrix A = random_matrix(rng, size, size);
  return Matrix(A * A.transpose() / static_cast<double>(size) + floor * Matrix::Identity(size, size));
}

inline RandomInstance random_instance(std::mt19937_64& rng, const InstanceOptions& opts = {}) {
  std::uniform_int_distribution<Index> pick_p(1, opts.max_p), pick_m(1, opts.max_m);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;

  const Index p = pick_p(rng);
  const Index m = pick_m(rng);
  std::uniform_int_distribution<Index> pick_r(1, m);
  const Index r = pick_r(rng);
  const Index n = opts.n;

  Matrix T = random_matrix(rng, m, m);
  const double radius = T.eigenvalues().cwiseAbs().maxCoeff();
  if (radius > 1e-8) T *= std::uniform_real_distribution<double>(0.4, opts.spectral_radius_max)(rng) / radius;

  Matrix Z = random_matrix(rng, p, m);
  Matrix R = random_matrix(rng, m, r);
  Matrix H = random_spd(rng, p, opts.noise_floor);
  Matrix Q = random_spd(rng, r, opts.noise_floor);
  Vector a1 = random_matrix(rng, m, 1);
  Matrix P1 = random_spd(rng, m, 0.5);

  // Simulate observations from the model itself so the data is realistic.
  const Matrix SP = numeric::psd_sqrt(P1);
  const Matrix SQ = numeric::psd_sqrt(Q);
  const Matrix SH = numeric::psd_sqrt(H);
  auto draw = [&rng, &normal](Index size) {
    Vector z(size);
    for (Index i = 0; i < size; ++i) z(i) = normal(rng);
    return z;
  };

  Vector alpha = a1 + SP * draw(m);
  Matrix y(n, p);
  for (Index t = 0; t < n; ++t) {
    y.row(t) = (Z * alpha + SH * draw(p)).transpose();
    alpha = T * alpha + R * SQ * draw(r);
  }
  if (opts.missing_prob > 0) {
    for (Index t = 0; t < n; ++t)
      for (Index i = 0; i < p; ++i)
        if (unit(rng) < opts.missing_prob) y(t, i) = std::numeric_limits<double>::quiet_NaN();
  }

  return RandomInstance{StateSpaceModel(ObservationSeries(y), Z, T, R),
                        NoiseCovariances(std::move(H), std::move(Q)), std::move(a1),
                        std::move(P1)};
}

}  // namespace ssm::testing
