#include "ssm/smoother.hpp"

#include <stdexcept>

#include "internal.hpp"

namespace ssm {

namespace {

void validate_filter_output(const StateSpaceModel& model, const FilterOutput& filter) {
  const Index n = model.n(), p = model.p(), m = model.m();
  if (filter.a.rows() != n + 1 || filter.a.cols() != m || filter.att.rows() != n ||
      filter.P.size() != static_cast<size_t>(n + 1) ||
      filter.Ptt.size() != static_cast<size_t>(n) || filter.v.rows() != n ||
      filter.v.cols() != p || filter.F.size() != static_cast<size_t>(n))
    throw std::invalid_argument("filter output does not match the model dimensions");
}

}  // namespace

SmootherOutput run_smoother(const StateSpaceModel& model, const NoiseCovariances& cov,
                            const FilterOutput& filter) {
  // The backward pass reads everything it needs from the stored filter
  // quantities; cov only gets a consistency check.
  if (cov.H().rows() != model.p() || cov.Q().rows() != model.r())
    throw std::invalid_argument("covariance dimensions do not match the model");
  validate_filter_output(model, filter);
  const Index n = model.n(), m = model.m();
  const Matrix& T = model.transition();
  const ObservationSeries& y = model.observations();

  SmootherOutput out;
  out.alpha.resize(n, m);
  out.V.assign(static_cast<size_t>(n), Matrix());

  Vector r = Vector::Zero(m);
  Matrix N = Matrix::Zero(m, m);

  for (Index t = n - 1; t >= 0; --t) {
    const auto& obs = y.observed_at(t);
    const Matrix& P = filter.P[static_cast<size_t>(t)];
    Vector r_prev;
    Matrix N_prev;

    if (obs.empty()) {
      // Z_t = 0 at missing periods, so L_t = T.
      r_prev.noalias() = T.transpose() * r;
      N_prev = numeric::symmetrize(T.transpose() * N * T);
    } else {
      const Index p_obs = static_cast<Index>(obs.size());
      const bool full = p_obs == model.p();
      const Matrix Zt = full ? model.z_at(t) : detail::select_rows(model.z_at(t), obs);
      const Matrix F = full ? filter.F[static_cast<size_t>(t)]
                            : detail::select_square(filter.F[static_cast<size_t>(t)], obs);
      Vector v(p_obs);
      for (Index i = 0; i < p_obs; ++i) v(i) = filter.v(t, obs[static_cast<size_t>(i)]);

      Eigen::LLT<Matrix> llt(F);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("stored innovation covariance not positive definite at period " +
                                 std::to_string(t));
      Matrix K = llt.solve(Zt * P).transpose();  // P Z' F^{-1}
      Matrix L = T - T * K * Zt;
      Matrix FinvZ = llt.solve(Zt);

      r_prev = Zt.transpose() * llt.solve(v) + L.transpose() * r;
      N_prev = numeric::symmetrize(Zt.transpose() * FinvZ + L.transpose() * N * L);
    }

    out.alpha.row(t) = filter.a.row(t) + (P * r_prev).transpose();
    out.V[static_cast<size_t>(t)] = numeric::symmetrize(P - P * N_prev * P);

    r = r_prev;
    N = N_prev;
  }
  return out;
}

std::string to_string(Component component) {
  switch (component) {
    case Component::level: return "level";
    case Component::slope: return "slope";
    case Component::seasonal: return "seasonal";
    case Component::regression: return "regression";
  }
  return "level";
}

namespace {

// Per-variable state block size of the predefined kinds.
Index block_size(const StateSpaceModel& model) { return model.m() / model.p(); }

// Offset of a component inside a per-variable state block, or -1.
Index component_offset(const StateSpaceModel& model, Component component) {
  const Index k = model.structural_info() ? model.structural_info()->n_exog() : 0;
  switch (model.kind()) {
    case ModelKind::local_level:
      return component == Component::level ? 0 : -1;
    case ModelKind::linear_trend:
      if (component == Component::level) return 0;
      if (component == Component::slope) return 1;
      return -1;
    case ModelKind::structural:
      if (component == Component::level) return k;
      if (component == Component::slope) return k + 1;
      if (component == Component::seasonal) return k + 2;
      return -1;  // regression handled separately
    case ModelKind::user_defined:
      return -1;
  }
  return -1;
}

}  // namespace

std::vector<Component> components_of(const StateSpaceModel& model) {
  switch (model.kind()) {
    case ModelKind::local_level:
      return {Component::level};
    case ModelKind::linear_trend:
      return {Component::level, Component::slope};
    case ModelKind::structural: {
      std::vector<Component> list{Component::level, Component::slope, Component::seasonal};
      if (model.structural_info() && model.structural_info()->n_exog() > 0)
        list.push_back(Component::regression);
      return list;
    }
    case ModelKind::user_defined:
      return {};
  }
  return {};
}

ComponentSeries smoothed_components(const StateSpaceModel& model, const SmootherOutput& smoother,
                                    Component component) {
  if (model.kind() == ModelKind::user_defined)
    throw std::invalid_argument("user-defined models have no named components");
  const Index n = model.n(), p = model.p();
  const Index m1 = block_size(model);

  ComponentSeries series;
  series.mean.resize(n, p);
  series.variance.resize(n, p);

  if (component == Component::regression) {
    if (model.kind() != ModelKind::structural || !model.structural_info() ||
        model.structural_info()->n_exog() == 0)
      throw std::invalid_argument("model kind " + to_string(model.kind()) +
                                  " has no regression component");
    const Matrix& X = model.structural_info()->exog;
    const Index k = model.structural_info()->n_exog();
    for (Index t = 0; t < n; ++t) {
      Vector x = X.row(t).transpose();
      for (Index var = 0; var < p; ++var) {
        const Index off = var * m1;
        Vector theta = smoother.alpha.row(t).segment(off, k).transpose();
        const Matrix& V = smoother.V[static_cast<size_t>(t)];
        series.mean(t, var) = theta.dot(x);
        series.variance(t, var) = x.dot(V.block(off, off, k, k) * x);
      }
    }
    return series;
  }

  const Index offset = component_offset(model, component);
  if (offset < 0)
    throw std::invalid_argument("model kind " + to_string(model.kind()) + " has no " +
                                to_string(component) + " component");
  for (Index t = 0; t < n; ++t) {
    for (Index var = 0; var < p; ++var) {
      const Index idx = var * m1 + offset;
      series.mean(t, var) = smoother.alpha(t, idx);
      series.variance(t, var) = smoother.V[static_cast<size_t>(t)](idx, idx);
    }
  }
  return series;
}

}  // namespace ssm
