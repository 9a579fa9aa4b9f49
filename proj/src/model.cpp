#include "ssm/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace ssm {

namespace {

[[noreturn]] void fail(const std::string& message) { throw std::invalid_argument(message); }

std::string dims(const Matrix& M) {
  std::ostringstream os;
  os << M.rows() << "x" << M.cols();
  return os.str();
}

}  // namespace

ObservationSeries::ObservationSeries(Matrix values, std::vector<std::string> variable_names,
                                     std::vector<std::string> period_labels,
                                     std::string label_column)
    : values_(std::move(values)),
      variable_names_(std::move(variable_names)),
      period_labels_(std::move(period_labels)),
      label_column_(std::move(label_column)) {
  const Index n = values_.rows(), p = values_.cols();
  if (n < 2) fail("observation series needs n >= 2 periods, got n = " + std::to_string(n));
  if (p < 1) fail("observation series needs p >= 1 variables");
  if (!variable_names_.empty() && static_cast<Index>(variable_names_.size()) != p)
    fail("got " + std::to_string(variable_names_.size()) + " variable names for p = " +
         std::to_string(p) + " variables");
  if (!period_labels_.empty() && static_cast<Index>(period_labels_.size()) != n)
    fail("got " + std::to_string(period_labels_.size()) + " period labels for n = " +
         std::to_string(n) + " periods");

  observed_.resize(static_cast<size_t>(n));
  for (Index t = 0; t < n; ++t) {
    auto& row = observed_[static_cast<size_t>(t)];
    for (Index i = 0; i < p; ++i) {
      const double value = values_(t, i);
      if (std::isnan(value)) continue;
      if (!std::isfinite(value))
        fail("non-finite observation at period " + std::to_string(t) + ", variable " +
             std::to_string(i));
      row.push_back(i);
    }
    observed_total_ += static_cast<Index>(row.size());
  }
}

SystemMatrices::SystemMatrices(Matrix Z, Matrix T, Matrix R)
    : z_{std::move(Z)}, z_time_varying_(false), T_(std::move(T)), R_(std::move(R)) {
  validate();
}

SystemMatrices::SystemMatrices(std::vector<Matrix> Z, Matrix T, Matrix R)
    : z_(std::move(Z)), z_time_varying_(true), T_(std::move(T)), R_(std::move(R)) {
  if (z_.empty()) fail("time-varying Z needs at least one matrix");
  validate();
}

void SystemMatrices::validate() const {
  if (T_.rows() == 0) fail("T must be nonempty");
  if (T_.rows() != T_.cols()) fail("T is " + dims(T_) + " but must be square");
  const Index m = T_.rows();
  if (R_.rows() != m)
    fail("R is " + dims(R_) + " but T implies m = " + std::to_string(m) + " state rows");
  if (R_.cols() < 1) fail("R needs at least one column");
  const Index p = z_.front().rows();
  if (p < 1) fail("Z needs at least one row");
  for (size_t t = 0; t < z_.size(); ++t) {
    const Matrix& Zt = z_[t];
    if (Zt.rows() != p || Zt.cols() != m)
      fail("Z at period " + std::to_string(t) + " is " + dims(Zt) + " but expected " +
           std::to_string(p) + "x" + std::to_string(m));
  }
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::user_defined: return "user_defined";
    case ModelKind::local_level: return "local_level";
    case ModelKind::linear_trend: return "linear_trend";
    case ModelKind::structural: return "structural";
  }
  return "user_defined";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "user_defined" || name == "user") return ModelKind::user_defined;
  if (name == "local_level") return ModelKind::local_level;
  if (name == "linear_trend") return ModelKind::linear_trend;
  if (name == "structural") return ModelKind::structural;
  fail("unknown model kind '" + name + "'");
}

StateSpaceModel::StateSpaceModel(ObservationSeries observations, Matrix Z, Matrix T, Matrix R)
    : observations_(std::move(observations)),
      system_(std::move(Z), std::move(T), std::move(R)) {
  if (system_.p() != observations_.p())
    fail("y has " + std::to_string(observations_.p()) + " variables but Z has " +
         std::to_string(system_.p()) + " rows");
}

StateSpaceModel::StateSpaceModel(ObservationSeries observations, std::vector<Matrix> Z, Matrix T,
                                 Matrix R)
    : observations_(std::move(observations)),
      system_(std::move(Z), std::move(T), std::move(R)) {
  if (system_.p() != observations_.p())
    fail("y has " + std::to_string(observations_.p()) + " variables but Z has " +
         std::to_string(system_.p()) + " rows");
  // Trailing matrices beyond the sample are allowed; they serve forecasting.
  if (system_.z_length() < n())
    fail("Z sequence length " + std::to_string(system_.z_length()) +
         " != n = " + std::to_string(n()));
}

const Matrix& StateSpaceModel::z_at(Index t) const {
  if (t < 0 || t >= n())
    fail("period " + std::to_string(t) + " out of range [0, " + std::to_string(n()) + ")");
  return system_.z(t);
}

const Matrix& StateSpaceModel::z_extended(Index t) const {
  if (t < 0) fail("period " + std::to_string(t) + " out of range");
  if (system_.z_time_varying() && t >= system_.z_length())
    fail("period " + std::to_string(t) + " beyond the Z sequence (length " +
         std::to_string(system_.z_length()) + ")");
  return system_.z(system_.z_time_varying() ? t : 0);
}

Index StateSpaceModel::z_future() const {
  if (!system_.z_time_varying()) return std::numeric_limits<Index>::max();
  return system_.z_length() - n();
}

void StateSpaceModel::set_kind(ModelKind kind, std::optional<StructuralInfo> info) {
  kind_ = kind;
  structural_ = std::move(info);
}

NoiseCovariances::NoiseCovariances(Matrix H, Matrix Q)
    : NoiseCovariances(std::move(H), std::move(Q), unchecked_t{}) {
  for (const auto* M : {&H_, &Q_}) {
    const char* name = (M == &H_) ? "H" : "Q";
    if (M->rows() != M->cols())
      fail(std::string(name) + " is " + dims(*M) + " but must be square");
    if (M->rows() < 1) fail(std::string(name) + " must be nonempty");
    if (numeric::asymmetry(*M) > 1e-12)
      fail(std::string(name) + " is not symmetric (relative deviation " +
           std::to_string(numeric::asymmetry(*M)) + ")");
    const double eigmin = numeric::min_eigenvalue(*M);
    if (eigmin < -1e-10)
      fail(std::string(name) + " is not positive semidefinite (min eigenvalue " +
           std::to_string(eigmin) + ")");
  }
}

NoiseCovariances::NoiseCovariances(Matrix H, Matrix Q, unchecked_t)
    : H_(std::move(H)), Q_(std::move(Q)) {}

NoiseCovariances NoiseCovariances::unchecked(Matrix H, Matrix Q) {
  return NoiseCovariances(std::move(H), std::move(Q), unchecked_t{});
}

}  // namespace ssm
