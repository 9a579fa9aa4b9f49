#include "ssm/estimation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "ssm/version.hpp"

namespace ssm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string printf_format(const char* fmt, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), fmt, value);
  return buffer;
}

}  // namespace

NoiseCovariances ParameterCodec::decode(const Vector& psi) const {
  if (psi.size() != dim())
    throw std::invalid_argument("psi has size " + std::to_string(psi.size()) + ", expected " +
                                std::to_string(dim()));
  auto unpack = [&psi](Index size, Index offset) {
    Matrix L = Matrix::Zero(size, size);
    Index k = offset;
    for (Index j = 0; j < size; ++j) {
      L(j, j) = std::exp(psi(k++));
      for (Index i = j + 1; i < size; ++i) L(i, j) = psi(k++);
    }
    return L;
  };
  Matrix LH = unpack(p_, 0);
  Matrix LQ = unpack(r_, p_ * (p_ + 1) / 2);
  return NoiseCovariances::unchecked(numeric::symmetrize(LH * LH.transpose()),
                                     numeric::symmetrize(LQ * LQ.transpose()));
}

Vector ParameterCodec::encode(const NoiseCovariances& cov) const {
  if (cov.H().rows() != p_ || cov.Q().rows() != r_)
    throw std::invalid_argument("covariance dimensions do not match the codec");
  Vector psi(dim());
  Index k = 0;
  auto pack = [&psi, &k](const Matrix& M, const char* name) {
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument(std::string(name) +
                                  " is singular; only positive definite covariances encode");
    Matrix L = llt.matrixL();
    for (Index j = 0; j < M.rows(); ++j) {
      psi(k++) = std::log(L(j, j));
      for (Index i = j + 1; i < M.rows(); ++i) psi(k++) = L(i, j);
    }
  };
  pack(cov.H(), "H");
  pack(cov.Q(), "Q");
  return psi;
}

Vector ParameterCodec::degenerate_start(double log_scale) const {
  Vector psi = Vector::Zero(dim());
  Index k = 0;
  for (Index size : {p_, r_}) {
    for (Index j = 0; j < size; ++j) {
      psi(k) = log_scale;  // diagonal slot
      k += size - j;       // skip the raw off-diagonal slots of this column
    }
  }
  return psi;
}

double log_likelihood(const StateSpaceModel& model, const NoiseCovariances& cov,
                      const FilterConfig& config) {
  double value;
  try {
    value = filter_for(config.variant).loglik(model, cov, config);
  } catch (const SingularInnovationError&) {
    return -kInf;
  }
  return std::isnan(value) ? -kInf : value;
}

namespace log_format {

std::string rule(char fill) { return std::string(width, fill); }

std::string center(const std::string& text) {
  const int pad = std::max(0, (width - static_cast<int>(text.size()) + 1) / 2);
  return std::string(static_cast<size_t>(pad), ' ') + text;
}

std::string table_header() {
  return "||    seed    |     log-likelihood      |      time (s)     ||";
}

namespace {
std::string right_align(const std::string& text, int field) {
  if (static_cast<int>(text.size()) >= field) return text;
  return std::string(static_cast<size_t>(field) - text.size(), ' ') + text;
}
}  // namespace

std::string seed_row(int seed, double loglik, double seconds) {
  std::string ll = std::isfinite(loglik) ? printf_format("%.4f", loglik) : "-inf";
  return "||" + right_align(std::to_string(seed), 8) + "    |" + right_align(ll, 19) +
         "      |" + right_align(printf_format("%.2f", seconds), 14) + "     ||";
}

std::string estimation_header(const std::string& version, int n_seeds) {
  std::ostringstream os;
  os << rule('=') << '\n'
     << center(std::string(kToolName) + " v" + version) << '\n'
     << rule('-') << '\n'
     << center("Starting state-space model estimation.") << '\n'
     << center("Initiating maximum likelihood estimation with " + std::to_string(n_seeds) +
               " seeds.")
     << '\n'
     << rule('-') << '\n'
     << center("Seed 0 is aimed at degenerate cases.") << '\n'
     << rule('-') << '\n'
     << table_header();
  return os.str();
}

std::string estimation_footer(double best_loglik) {
  std::ostringstream os;
  os << rule('-') << '\n'
     << center("Maximum likelihood estimation complete.") << '\n'
     << center("Log-likelihood: " + printf_format("%.4f", best_loglik)) << '\n'
     << center("End of state-space model estimation.") << '\n'
     << rule('=');
  return os.str();
}

}  // namespace log_format

namespace {

struct LbfgsResult {
  Vector x;
  double f = kInf;
  int iterations = 0;
  bool converged = false;
};

// Central-difference gradient with per-coordinate step 1e-6 * (1 + |x_i|).
// Falls back to a one-sided difference when a probe lands outside the
// finite-likelihood region.
Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double fx) {
  Vector g(x.size());
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x(i)));
    probe(i) = x(i) + h;
    const double fp = f(probe);
    probe(i) = x(i) - h;
    const double fm = f(probe);
    probe(i) = x(i);
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g(i) = (fp - fm) / (2.0 * h);
    } else if (std::isfinite(fp)) {
      g(i) = (fp - fx) / h;
    } else if (std::isfinite(fm)) {
      g(i) = (fx - fm) / h;
    } else {
      g(i) = 0.0;
    }
  }
  return g;
}

LbfgsResult lbfgs_minimize(const std::function<double(const Vector&)>& f, Vector x0,
                           double grad_tol, int max_iter, int verbosity, std::ostream* log,
                           int seed_tag) {
  constexpr int kMemory = 10;
  constexpr double kArmijo = 1e-4;

  LbfgsResult result;
  Vector x = std::move(x0);
  double fx = f(x);
  if (!std::isfinite(fx)) {
    result.x = x;
    result.f = fx;
    return result;
  }
  Vector g = fd_gradient(f, x, fx);

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;
  int stagnant = 0;

  int iter = 0;
  for (; iter < max_iter; ++iter) {
    if (g.cwiseAbs().maxCoeff() < grad_tol) {
      result.converged = true;
      break;
    }

    // Two-loop recursion.
    Vector d = -g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[static_cast<size_t>(i)] =
          rho_hist[static_cast<size_t>(i)] * s_hist[static_cast<size_t>(i)].dot(d);
      d -= alpha[static_cast<size_t>(i)] * y_hist[static_cast<size_t>(i)];
    }
    if (!s_hist.empty()) {
      const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      if (std::isfinite(gamma) && gamma > 0) d *= gamma;
    }
    for (size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[i] - beta) * s_hist[i];
    }
    if (d.dot(g) >= 0) {  // not a descent direction; restart from steepest descent
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
    }
    if (s_hist.empty()) {
      // No curvature information yet; keep the first probe inside a sane box
      // so steep corners (e.g. near-zero variances) do not overshoot into
      // overflow.
      const double widest = d.cwiseAbs().maxCoeff();
      if (widest > 1.0) d *= 1.0 / widest;
    }

    const double slope = d.dot(g);
    double step = 1.0;
    double f_new = kInf;
    Vector x_new;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * d;
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new <= fx + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!s_hist.empty()) {  // retry once along steepest descent
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        continue;
      }
      result.converged = true;  // no descent possible at resolution
      break;
    }

    Vector g_new = fd_gradient(f, x_new, f_new);
    Vector s = x_new - x;
    Vector yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-10 * s.norm() * yv.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    if (std::abs(fx - f_new) <= 1e-11 * (1.0 + std::abs(f_new))) {
      if (++stagnant >= 3) {
        x = x_new;
        fx = f_new;
        g = g_new;
        ++iter;
        result.converged = true;
        break;
      }
    } else {
      stagnant = 0;
    }

    x = x_new;
    fx = f_new;
    g = g_new;

    if (verbosity >= 2 && log)
      *log << "    seed " << seed_tag << " iter " << (iter + 1) << "  objective "
           << printf_format("%.6f", -fx) << "  |grad| "
           << printf_format("%.3e", g.cwiseAbs().maxCoeff()) << "  step "
           << printf_format("%.3e", step) << '\n';
  }

  result.x = x;
  result.f = fx;
  result.iterations = iter;
  return result;
}

class RandomSeedsLbfgs final : public OptimizationMethod {
 public:
  std::string name() const override { return "RandomSeedsLBFGS"; }

  Result maximize(const std::function<double(const Vector&)>& objective, Index dim,
                  const Vector& degenerate_start, const OptimizerConfig& config,
                  std::ostream* log) const override {
    if (config.n_seeds < 1) throw std::invalid_argument("n_seeds must be >= 1");
    if (!(config.seed_box > 0)) throw std::invalid_argument("seed_box must be positive");
    if (!(config.gradient_tolerance > 0))
      throw std::invalid_argument("gradient_tolerance must be positive");
    if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");

    const auto t0 = std::chrono::steady_clock::now();
    auto seconds_elapsed = [&t0] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    auto negated = [&objective](const Vector& psi) {
      const double value = objective(psi);
      return std::isnan(value) ? kInf : -value;
    };

    const bool chatty = config.verbosity >= 1 && log;
    if (chatty) *log << log_format::estimation_header(kVersion, config.n_seeds) << '\n';

    Result result;
    result.best_value = -kInf;
    int best_seed = -1;

    for (int seed = 0; seed <= config.n_seeds; ++seed) {
      Vector psi0(dim);
      if (seed == 0) {
        psi0 = degenerate_start;
      } else {
        std::seed_seq seq{static_cast<std::uint64_t>(config.rng_seed),
                          static_cast<std::uint64_t>(seed)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> box(-config.seed_box, config.seed_box);
        for (Index i = 0; i < dim; ++i) psi0(i) = box(rng);
      }

      const double f0 = negated(psi0);
      LbfgsResult opt = lbfgs_minimize(negated, psi0, config.gradient_tolerance,
                                       config.max_iterations, config.verbosity, log, seed);

      SeedTrace trace;
      trace.seed = seed;
      trace.loglik = std::isfinite(opt.f) ? -opt.f : -kInf;
      trace.loglik_start = std::isfinite(f0) ? -f0 : -kInf;
      trace.seconds = seconds_elapsed();
      trace.iterations = opt.iterations;
      trace.converged = opt.converged;
      trace.psi = opt.x;
      if (chatty) *log << log_format::seed_row(seed, trace.loglik, trace.seconds) << std::endl;
      result.trace.push_back(std::move(trace));

      const double loglik = result.trace.back().loglik;
      if (std::isfinite(loglik) && loglik > result.best_value) {
        result.best_value = loglik;
        result.best_psi = opt.x;
        best_seed = seed;
      }
    }

    if (chatty && best_seed >= 0)
      *log << log_format::estimation_footer(result.best_value) << '\n';

    if (best_seed < 0) {
      std::ostringstream os;
      os << "estimation failed: no seed reached a finite likelihood\n";
      for (const auto& trace : result.trace)
        os << "  seed " << trace.seed << ": loglik " << trace.loglik << " after "
           << trace.iterations << " iterations\n";
      throw std::runtime_error(os.str());
    }
    return result;
  }
};

}  // namespace

const OptimizationMethod& random_seeds_lbfgs() {
  static const RandomSeedsLbfgs method;
  return method;
}

EstimationResult estimate(const StateSpaceModel& model, const OptimizerConfig& config,
                          const FilterConfig& filter_config, std::ostream* log,
                          const FilterBackend* backend, const OptimizationMethod* method) {
  const FilterBackend& filter = backend ? *backend : filter_for(filter_config.variant);
  const OptimizationMethod& optimizer = method ? *method : random_seeds_lbfgs();
  ParameterCodec codec(model.p(), model.r());

  auto objective = [&](const Vector& psi) {
    double value;
    try {
      value = filter.loglik(model, codec.decode(psi), filter_config);
    } catch (const SingularInnovationError&) {
      return -kInf;
    }
    return std::isnan(value) ? -kInf : value;
  };

  // Seed 0 starts at decoded variances of about 1e-8.
  const Vector degenerate = codec.degenerate_start(std::log(1e-4));
  OptimizationMethod::Result opt = optimizer.maximize(objective, codec.dim(), degenerate, config, log);

  if (config.verbosity >= 1 && log) {
    *log << log_format::estimation_header(kVersion, config.n_seeds) << '\n';
    for (const auto& trace : opt.trace)
      *log << log_format::seed_row(trace.seed, trace.loglik, trace.seconds) << '\n';
    *log << log_format::estimation_footer(opt.best_value) << '\n';
  }

  return EstimationResult{codec.decode(opt.best_psi), opt.best_value, std::move(opt.trace)};
}

FittedStateSpace fit(const StateSpaceModel& model, const FilterConfig& filter_config,
                     const OptimizerConfig& optimizer_config, std::ostream* log,
                     const FilterBackend* backend, const OptimizationMethod* method) {
  const FilterBackend& filter = backend ? *backend : filter_for(filter_config.variant);
  const OptimizationMethod& optimizer = method ? *method : random_seeds_lbfgs();

  EstimationResult est = estimate(model, optimizer_config, filter_config, log, &filter, &optimizer);
  FilterOutput filter_output = filter.run(model, est.covariances, filter_config);
  filter_output.loglik = est.loglik;
  SmootherOutput smoother = run_smoother(model, est.covariances, filter_output);

  return FittedStateSpace{model,
                          std::move(filter_output),
                          std::move(smoother),
                          est.covariances,
                          filter.name(),
                          optimizer.name(),
                          est.loglik,
                          std::move(est.trace)};
}

ComponentSeries smoothed_components(const FittedStateSpace& fitted, Component component) {
  return smoothed_components(fitted.model, fitted.smoother, component);
}

}  // namespace ssm
