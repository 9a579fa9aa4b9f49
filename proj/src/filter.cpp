#include "ssm/filter.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "internal.hpp"

namespace ssm {

namespace {

using detail::kFreezeTol;
using detail::kLog2Pi;

std::string singular_message(Index t) {
  std::ostringstream os;
  os << "innovation covariance F is numerically singular at period " << t;
  return os.str();
}

void validate_inputs(const StateSpaceModel& model, const NoiseCovariances& cov,
                     const FilterConfig& config) {
  if (cov.H().rows() != model.p() || cov.H().cols() != model.p())
    throw std::invalid_argument("H is " + std::to_string(cov.H().rows()) + "x" +
                                std::to_string(cov.H().cols()) + " but the model has p = " +
                                std::to_string(model.p()));
  if (cov.Q().rows() != model.r() || cov.Q().cols() != model.r())
    throw std::invalid_argument("Q is " + std::to_string(cov.Q().rows()) + "x" +
                                std::to_string(cov.Q().cols()) + " but the model has r = " +
                                std::to_string(model.r()));
  if (!(config.diffuse_scale > 0))
    throw std::invalid_argument("diffuse_scale must be positive");
  if (!(config.steady_state_tolerance > 0))
    throw std::invalid_argument("steady_state_tolerance must be positive");
  if (config.initial_state_mean && config.initial_state_mean->size() != model.m())
    throw std::invalid_argument("initial state mean has size " +
                                std::to_string(config.initial_state_mean->size()) +
                                " but the model has m = " + std::to_string(model.m()));
  if (config.initial_state_covariance &&
      (config.initial_state_covariance->rows() != model.m() ||
       config.initial_state_covariance->cols() != model.m()))
    throw std::invalid_argument("initial state covariance does not match m = " +
                                std::to_string(model.m()));
}

Vector initial_mean(const StateSpaceModel& model, const FilterConfig& config) {
  return config.initial_state_mean ? *config.initial_state_mean : Vector::Zero(model.m());
}

Matrix initial_covariance(const StateSpaceModel& model, const FilterConfig& config) {
  if (config.initial_state_covariance) return numeric::symmetrize(*config.initial_state_covariance);
  return config.diffuse_scale * Matrix::Identity(model.m(), model.m());
}

void finalize(FilterOutput& out, const FilterConfig& config) {
  auto period = detect_steady_state(out.P, config.steady_state_tolerance);
  out.steady_state = period.has_value();
  out.steady_state_period = period;
}

// Shared by both variants: out == nullptr runs a likelihood-only pass with no
// per-period storage.
double standard_pass(const StateSpaceModel& model, const NoiseCovariances& cov,
                     const FilterConfig& config, FilterOutput* out) {
  validate_inputs(model, cov, config);
  const Index n = model.n(), p = model.p(), m = model.m();
  const ObservationSeries& y = model.observations();
  const Matrix& T = model.transition();
  const Matrix& H = cov.H();
  const Matrix RQRt =
      numeric::symmetrize(model.noise_selection() * cov.Q() * model.noise_selection().transpose());
  const bool z_tv = model.system().z_time_varying();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  Vector a = initial_mean(model, config);
  Matrix P = initial_covariance(model, config);

  if (out) {
    out->a.resize(n + 1, m);
    out->P.assign(static_cast<size_t>(n + 1), Matrix());
    out->att.resize(n, m);
    out->Ptt.assign(static_cast<size_t>(n), Matrix());
    out->v = Matrix::Constant(n, p, nan);
    out->F.assign(static_cast<size_t>(n), Matrix());
    out->a.row(0) = a;
    out->P[0] = P;
  }

  double loglik = 0.0;

  // Frozen steady-state cache; valid only while periods stay fully observed
  // and Z is constant.
  bool frozen = false;
  Matrix K_frozen, F_frozen, Ptt_frozen;
  Eigen::LLT<Matrix> llt_frozen;
  double logdet_frozen = 0.0;

  Vector att(m), a_next(m);
  Matrix Ptt, P_next;

  for (Index t = 0; t < n; ++t) {
    const auto& obs = y.observed_at(t);
    const Index p_obs = static_cast<Index>(obs.size());

    if (p_obs == 0) {
      // Fully missing: Z_t = 0, so the update step collapses.
      att = a;
      Ptt = P;
      a_next.noalias() = T * a;
      P_next = numeric::symmetrize(T * P * T.transpose() + RQRt);
      frozen = false;
      if (out) {
        out->att.row(t) = att;
        out->Ptt[static_cast<size_t>(t)] = Ptt;
        out->F[static_cast<size_t>(t)] = H;
      }
    } else {
      const bool full = p_obs == p;
      Matrix Z_red, H_red;
      Vector y_red;
      if (!full) {
        Z_red = detail::select_rows(model.z_at(t), obs);
        H_red = detail::select_square(H, obs);
        y_red = detail::select_row_entries(y.values(), t, obs);
      }
      const Matrix& Zt = full ? model.z_at(t) : Z_red;
      const Matrix& Ht = full ? H : H_red;
      const Vector yt = full ? Vector(y.values().row(t).transpose()) : y_red;

      const bool can_freeze = full && !z_tv;
      Vector v = yt;
      v.noalias() -= Zt * a;

      if (frozen && can_freeze) {
        att = a;
        att.noalias() += K_frozen * v;
        a_next.noalias() = T * att;
        loglik -= 0.5 * (static_cast<double>(p_obs) * kLog2Pi + logdet_frozen +
                         v.dot(llt_frozen.solve(v)));
        if (out) {
          out->att.row(t) = att;
          out->Ptt[static_cast<size_t>(t)] = Ptt_frozen;
          out->F[static_cast<size_t>(t)] = F_frozen;
          for (Index i = 0; i < p_obs; ++i) out->v(t, obs[static_cast<size_t>(i)]) = v(i);
        }
        P_next = P;
      } else {
        frozen = false;
        Matrix PZt = P * Zt.transpose();
        Matrix F = numeric::symmetrize(Zt * PZt + Ht);
        if (!F.allFinite()) throw SingularInnovationError(t, singular_message(t));
        Eigen::LLT<Matrix> llt(F);
        if (llt.info() != Eigen::Success) throw SingularInnovationError(t, singular_message(t));
        Matrix K = llt.solve(PZt.transpose()).transpose();  // P Z' F^{-1}
        att = a;
        att.noalias() += K * v;
        Ptt = numeric::symmetrize(P - K * PZt.transpose());
        a_next.noalias() = T * att;
        P_next = numeric::symmetrize(T * Ptt * T.transpose() + RQRt);

        double logdet = 0.0;
        for (Index i = 0; i < p_obs; ++i) logdet += 2.0 * std::log(llt.matrixLLT()(i, i));
        loglik -=
            0.5 * (static_cast<double>(p_obs) * kLog2Pi + logdet + v.dot(llt.solve(v)));

        if (out) {
          out->att.row(t) = att;
          out->Ptt[static_cast<size_t>(t)] = Ptt;
          if (full) {
            out->F[static_cast<size_t>(t)] = F;
            out->v.row(t) = v;
          } else {
            Matrix F_full = Matrix::Zero(p, p);
            for (Index i = 0; i < p_obs; ++i)
              for (Index j = 0; j < p_obs; ++j)
                F_full(obs[static_cast<size_t>(i)], obs[static_cast<size_t>(j)]) = F(i, j);
            out->F[static_cast<size_t>(t)] = F_full;
            for (Index i = 0; i < p_obs; ++i) out->v(t, obs[static_cast<size_t>(i)]) = v(i);
          }
        }

        if (can_freeze &&
            detail::max_abs_diff(P_next, P) < kFreezeTol * (1.0 + P.cwiseAbs().maxCoeff())) {
          frozen = true;
          K_frozen = K;
          F_frozen = F;
          Ptt_frozen = Ptt;
          llt_frozen = llt;
          logdet_frozen = logdet;
          P_next = P;  // hold the settled covariance exactly
        }
      }
    }

    a = a_next;
    P = P_next;
    if (out) {
      out->a.row(t + 1) = a;
      out->P[static_cast<size_t>(t + 1)] = P;
    }
  }

  if (out) {
    out->loglik = loglik;
    finalize(*out, config);
  }
  return loglik;
}

Matrix qr_upper_factor(const Matrix& A) {
  Eigen::HouseholderQR<Matrix> qr(A);
  return Matrix(qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>());
}

double sqrt_pass(const StateSpaceModel& model, const NoiseCovariances& cov,
                 const FilterConfig& config, FilterOutput* out) {
  validate_inputs(model, cov, config);
  const Index n = model.n(), p = model.p(), m = model.m();
  const ObservationSeries& y = model.observations();
  const Matrix& T = model.transition();
  const Matrix& H = cov.H();
  const Matrix RSQ = model.noise_selection() * numeric::psd_sqrt(cov.Q());  // m x r
  const Matrix SH_full = numeric::psd_sqrt(H);
  const bool z_tv = model.system().z_time_varying();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const Index r = RSQ.cols();

  Vector a = initial_mean(model, config);
  Matrix SP = numeric::psd_sqrt(initial_covariance(model, config));  // m x m
  Matrix P = numeric::symmetrize(SP * SP.transpose());

  if (out) {
    out->a.resize(n + 1, m);
    out->P.assign(static_cast<size_t>(n + 1), Matrix());
    out->att.resize(n, m);
    out->Ptt.assign(static_cast<size_t>(n), Matrix());
    out->v = Matrix::Constant(n, p, nan);
    out->F.assign(static_cast<size_t>(n), Matrix());
    out->a.row(0) = a;
    out->P[0] = P;
  }

  double loglik = 0.0;

  bool frozen = false;
  Matrix R11_frozen, R12t_frozen, F_frozen, Ptt_frozen;
  double logdet_frozen = 0.0;

  Vector att(m), a_next(m);

  for (Index t = 0; t < n; ++t) {
    const auto& obs = y.observed_at(t);
    const Index p_obs = static_cast<Index>(obs.size());
    Matrix P_next;

    if (p_obs == 0) {
      att = a;
      a_next.noalias() = T * a;
      if (out) {
        out->att.row(t) = att;
        out->Ptt[static_cast<size_t>(t)] = P;
        out->F[static_cast<size_t>(t)] = H;
      }
      Matrix pre(m + r, m);
      pre.topRows(m).noalias() = (T * SP).transpose();
      pre.bottomRows(r) = RSQ.transpose();
      SP = qr_upper_factor(pre).transpose();
      P_next = numeric::symmetrize(SP * SP.transpose());
      frozen = false;
    } else {
      const bool full = p_obs == p;
      Matrix Z_red, H_red;
      Vector y_red;
      if (!full) {
        Z_red = detail::select_rows(model.z_at(t), obs);
        H_red = detail::select_square(H, obs);
        y_red = detail::select_row_entries(y.values(), t, obs);
      }
      const Matrix& Zt = full ? model.z_at(t) : Z_red;
      const Vector yt = full ? Vector(y.values().row(t).transpose()) : y_red;
      const bool can_freeze = full && !z_tv;

      Vector v = yt;
      v.noalias() -= Zt * a;

      if (frozen && can_freeze) {
        Vector w = R11_frozen.transpose().triangularView<Eigen::Lower>().solve(v);
        att = a;
        att.noalias() += R12t_frozen * w;
        a_next.noalias() = T * att;
        loglik -=
            0.5 * (static_cast<double>(p_obs) * kLog2Pi + logdet_frozen + w.squaredNorm());
        if (out) {
          out->att.row(t) = att;
          out->Ptt[static_cast<size_t>(t)] = Ptt_frozen;
          out->F[static_cast<size_t>(t)] = F_frozen;
          for (Index i = 0; i < p_obs; ++i) out->v(t, obs[static_cast<size_t>(i)]) = v(i);
        }
        P_next = P;
      } else {
        frozen = false;
        const Matrix SH = full ? SH_full : numeric::psd_sqrt(H_red);

        // Pre-array whose R factor carries the F factor, the gain numerator
        // and the filtered covariance factor.
        Matrix pre(m + p_obs, p_obs + m);
        pre.topLeftCorner(m, p_obs).noalias() = (Zt * SP).transpose();
        pre.topRightCorner(m, m) = SP.transpose();
        pre.bottomLeftCorner(p_obs, p_obs) = SH.transpose();
        pre.bottomRightCorner(p_obs, m).setZero();
        Matrix Rfac = qr_upper_factor(pre);
        Matrix R11 = Rfac.topLeftCorner(p_obs, p_obs);
        Matrix R12t = Rfac.block(0, p_obs, p_obs, m).transpose();  // P Z' F^{-T/2}
        Matrix SPtt = Rfac.bottomRightCorner(m, m).transpose();

        const double diag_scale = R11.cwiseAbs().maxCoeff();
        double logdet = 0.0;
        for (Index i = 0; i < p_obs; ++i) {
          const double d = std::abs(R11(i, i));
          if (!(d > 1e-14 * (1.0 + diag_scale)))
            throw SingularInnovationError(t, singular_message(t));
          logdet += 2.0 * std::log(d);
        }

        Vector w = R11.transpose().triangularView<Eigen::Lower>().solve(v);
        att = a;
        att.noalias() += R12t * w;
        Matrix F = numeric::symmetrize(R11.transpose() * R11);
        Matrix Ptt = numeric::symmetrize(SPtt * SPtt.transpose());
        a_next.noalias() = T * att;

        Matrix pre2(m + r, m);
        pre2.topRows(m).noalias() = (T * SPtt).transpose();
        pre2.bottomRows(r) = RSQ.transpose();
        Matrix SP_next = qr_upper_factor(pre2).transpose();
        P_next = numeric::symmetrize(SP_next * SP_next.transpose());

        loglik -= 0.5 * (static_cast<double>(p_obs) * kLog2Pi + logdet + w.squaredNorm());

        if (out) {
          out->att.row(t) = att;
          out->Ptt[static_cast<size_t>(t)] = Ptt;
          if (full) {
            out->F[static_cast<size_t>(t)] = F;
            out->v.row(t) = v;
          } else {
            Matrix F_full = Matrix::Zero(p, p);
            for (Index i = 0; i < p_obs; ++i)
              for (Index j = 0; j < p_obs; ++j)
                F_full(obs[static_cast<size_t>(i)], obs[static_cast<size_t>(j)]) = F(i, j);
            out->F[static_cast<size_t>(t)] = F_full;
            for (Index i = 0; i < p_obs; ++i) out->v(t, obs[static_cast<size_t>(i)]) = v(i);
          }
        }

        if (can_freeze &&
            detail::max_abs_diff(P_next, P) < kFreezeTol * (1.0 + P.cwiseAbs().maxCoeff())) {
          frozen = true;
          R11_frozen = R11;
          R12t_frozen = R12t;
          F_frozen = F;
          Ptt_frozen = Ptt;
          logdet_frozen = logdet;
          P_next = P;
        } else {
          SP = SP_next;
        }
      }
    }

    a = a_next;
    P = P_next;
    if (out) {
      out->a.row(t + 1) = a;
      out->P[static_cast<size_t>(t + 1)] = P;
    }
  }

  if (out) {
    out->loglik = loglik;
    finalize(*out, config);
  }
  return loglik;
}

class StandardFilter final : public FilterBackend {
 public:
  std::string name() const override { return "KalmanFilter"; }
  FilterOutput run(const StateSpaceModel& model, const NoiseCovariances& cov,
                   const FilterConfig& config) const override {
    FilterOutput out;
    standard_pass(model, cov, config, &out);
    return out;
  }
  double loglik(const StateSpaceModel& model, const NoiseCovariances& cov,
                const FilterConfig& config) const override {
    return standard_pass(model, cov, config, nullptr);
  }
};

class SquareRootFilter final : public FilterBackend {
 public:
  std::string name() const override { return "SquareRootFilter"; }
  FilterOutput run(const StateSpaceModel& model, const NoiseCovariances& cov,
                   const FilterConfig& config) const override {
    FilterOutput out;
    sqrt_pass(model, cov, config, &out);
    return out;
  }
  double loglik(const StateSpaceModel& model, const NoiseCovariances& cov,
                const FilterConfig& config) const override {
    return sqrt_pass(model, cov, config, nullptr);
  }
};

}  // namespace

std::string to_string(FilterVariant variant) {
  return variant == FilterVariant::standard ? "standard" : "sqrt";
}

FilterVariant filter_variant_from_string(const std::string& name) {
  if (name == "standard") return FilterVariant::standard;
  if (name == "sqrt" || name == "square_root") return FilterVariant::square_root;
  throw std::invalid_argument("unknown filter variant '" + name + "' (use standard or sqrt)");
}

double FilterBackend::loglik(const StateSpaceModel& model, const NoiseCovariances& cov,
                             const FilterConfig& config) const {
  return run(model, cov, config).loglik;
}

FilterOutput run_filter(const StateSpaceModel& model, const NoiseCovariances& cov,
                        const FilterConfig& config) {
  return standard_filter().run(model, cov, config);
}

FilterOutput run_sqrt_filter(const StateSpaceModel& model, const NoiseCovariances& cov,
                             const FilterConfig& config) {
  return square_root_filter().run(model, cov, config);
}

std::optional<Index> detect_steady_state(const std::vector<Matrix>& P, double tolerance) {
  if (P.empty()) throw std::invalid_argument("detect_steady_state: empty covariance sequence");
  if (!(tolerance > 0)) throw std::invalid_argument("detect_steady_state: tolerance must be positive");
  for (size_t t = 0; t + 1 < P.size(); ++t)
    if (detail::max_abs_diff(P[t + 1], P[t]) < tolerance) return static_cast<Index>(t);
  return std::nullopt;
}

const FilterBackend& standard_filter() {
  static const StandardFilter backend;
  return backend;
}

const FilterBackend& square_root_filter() {
  static const SquareRootFilter backend;
  return backend;
}

const FilterBackend& filter_for(FilterVariant variant) {
  return variant == FilterVariant::standard ? standard_filter() : square_root_filter();
}

}  // namespace ssm
