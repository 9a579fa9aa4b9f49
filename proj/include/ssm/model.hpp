#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssm/numeric.hpp"

namespace ssm {

/// Observed series: n periods by p variables, one row per period.
/// NaN entries mark missing observations. The missingness mask is derived
/// once here so downstream loops never probe for NaN.
class ObservationSeries {
 public:
  explicit ObservationSeries(Matrix values,
                             std::vector<std::string> variable_names = {},
                             std::vector<std::string> period_labels = {},
                             std::string label_column = "t");

  Index n() const { return values_.rows(); }
  Index p() const { return values_.cols(); }
  const Matrix& values() const { return values_; }

  /// Column indices observed at period t, ascending.
  const std::vector<Index>& observed_at(Index t) const { return observed_[static_cast<size_t>(t)]; }
  bool fully_observed(Index t) const { return static_cast<Index>(observed_at(t).size()) == p(); }
  bool fully_missing(Index t) const { return observed_at(t).empty(); }
  bool has_missing() const { return observed_total_ != n() * p(); }
  /// Count of observed scalar entries over the whole sample.
  Index observed_total() const { return observed_total_; }

  /// Column names; empty when the source carried none.
  const std::vector<std::string>& variable_names() const { return variable_names_; }
  /// Row labels (e.g. dates); empty when the source carried none.
  const std::vector<std::string>& period_labels() const { return period_labels_; }
  /// Header name of the label column ("t" unless the source says otherwise).
  const std::string& label_column() const { return label_column_; }

 private:
  Matrix values_;
  std::vector<std::vector<Index>> observed_;
  Index observed_total_ = 0;
  std::vector<std::string> variable_names_;
  std::vector<std::string> period_labels_;
  std::string label_column_;
};

/// System matrices of the observation and state equations. Z is either a
/// single constant p-by-m matrix or one matrix per period; T and R are
/// constant over time.
class SystemMatrices {
 public:
  SystemMatrices(Matrix Z, Matrix T, Matrix R);
  SystemMatrices(std::vector<Matrix> Z, Matrix T, Matrix R);

  bool z_time_varying() const { return z_time_varying_; }
  /// Number of periods the Z sequence covers (constant Z covers any period).
  Index z_length() const { return static_cast<Index>(z_.size()); }
  const Matrix& z(Index t) const { return z_time_varying_ ? z_[static_cast<size_t>(t)] : z_.front(); }
  const Matrix& transition() const { return T_; }
  const Matrix& noise_selection() const { return R_; }

  Index p() const { return z_.front().rows(); }
  Index m() const { return T_.rows(); }
  Index r() const { return R_.cols(); }

 private:
  void validate() const;

  std::vector<Matrix> z_;
  bool z_time_varying_;
  Matrix T_;
  Matrix R_;
};

enum class ModelKind { user_defined, local_level, linear_trend, structural };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Extra bookkeeping carried by structural models: the seasonal period and,
/// when present, the exogenous regressors (possibly extended past the sample
/// for forecasting).
struct StructuralInfo {
  int seasonal_period = 0;
  Matrix exog;  // n_total x k; 0 x 0 when the model has no regressors
  Index n_exog() const { return exog.size() == 0 ? 0 : exog.cols(); }
};

/// A linear Gaussian state-space model: observations plus Z, T, R.
/// Validated on construction; immutable afterwards, so instances can be
/// shared across threads freely.
class StateSpaceModel {
 public:
  StateSpaceModel(ObservationSeries observations, Matrix Z, Matrix T, Matrix R);
  /// Time-varying Z: one p-by-m matrix per period. The sequence must cover
  /// at least the sample; extra trailing matrices are kept for forecasting.
  StateSpaceModel(ObservationSeries observations, std::vector<Matrix> Z, Matrix T, Matrix R);

  Index n() const { return observations_.n(); }
  Index p() const { return observations_.p(); }
  Index m() const { return system_.m(); }
  Index r() const { return system_.r(); }

  const ObservationSeries& observations() const { return observations_; }
  const SystemMatrices& system() const { return system_; }
  const Matrix& transition() const { return system_.transition(); }
  const Matrix& noise_selection() const { return system_.noise_selection(); }

  /// Z for period t, 0 <= t < n. Constant Z returns the same matrix for all t.
  const Matrix& z_at(Index t) const;
  /// Z for period t, 0 <= t < n + z_future(); used when extending the
  /// recursion past the sample.
  const Matrix& z_extended(Index t) const;
  /// How many periods beyond the sample Z can serve. Unbounded for constant Z.
  Index z_future() const;

  ModelKind kind() const { return kind_; }
  const std::optional<StructuralInfo>& structural_info() const { return structural_; }

  /// Used by the predefined-model builders and the artifact loader to tag
  /// the model after construction.
  void set_kind(ModelKind kind, std::optional<StructuralInfo> info = std::nullopt);

 private:
  ObservationSeries observations_;
  SystemMatrices system_;
  ModelKind kind_ = ModelKind::user_defined;
  std::optional<StructuralInfo> structural_;
};

/// Observation and state noise covariances, the parameters estimated by
/// maximum likelihood. Construction checks symmetry (1e-12 relative) and
/// numerical positive semidefiniteness (eigenvalues >= -1e-10).
class NoiseCovariances {
 public:
  NoiseCovariances(Matrix H, Matrix Q);
  /// Skips validation; for callers that construct H and Q as L * L^T.
  static NoiseCovariances unchecked(Matrix H, Matrix Q);

  const Matrix& H() const { return H_; }
  const Matrix& Q() const { return Q_; }

 private:
  struct unchecked_t {};
  NoiseCovariances(Matrix H, Matrix Q, unchecked_t);

  Matrix H_;
  Matrix Q_;
};

}  // namespace ssm
