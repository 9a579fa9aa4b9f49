#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ssm/filter.hpp"
#include "ssm/model.hpp"
#include "ssm/smoother.hpp"

namespace ssm {

/// Maps between (H, Q) and an unconstrained vector psi of size
/// p(p+1)/2 + r(r+1)/2. psi holds the lower-triangular Cholesky factors in
/// column-major order, diagonal entries as logarithms, so decode always
/// yields positive semidefinite matrices.
class ParameterCodec {
 public:
  ParameterCodec(Index p, Index r) : p_(p), r_(r) {}

  Index dim() const { return p_ * (p_ + 1) / 2 + r_ * (r_ + 1) / 2; }
  NoiseCovariances decode(const Vector& psi) const;
  Vector encode(const NoiseCovariances& cov) const;

  /// psi whose decoded variances are all exp(2 * log_scale): the
  /// near-zero-noise corner that seed 0 starts from.
  Vector degenerate_start(double log_scale) const;

 private:
  Index p_;
  Index r_;
};

struct OptimizerConfig {
  /// Random seeds beyond the degenerate seed 0, which is always run.
  int n_seeds = 3;
  std::uint64_t rng_seed = 1234;
  /// Random initial psi entries are uniform on [-seed_box, seed_box].
  double seed_box = 5.0;
  double gradient_tolerance = 1e-6;
  int max_iterations = 10000;
  /// 0: silent, 1: progress banner and per-seed table, 2: plus optimizer log.
  int verbosity = 1;
};

struct SeedTrace {
  int seed = 0;
  double loglik = 0.0;
  double loglik_start = 0.0;
  double seconds = 0.0;
  int iterations = 0;
  bool converged = false;
  Vector psi;
};

struct EstimationResult {
  NoiseCovariances covariances;
  double loglik;
  std::vector<SeedTrace> trace;
};

/// Eq.-style Gaussian log-likelihood from a filter pass: fully missing
/// periods drop out of the sum and partially missing periods contribute
/// their reduced innovation block. Returns -inf instead of throwing when an
/// innovation covariance is singular, so optimizer line searches can retreat.
double log_likelihood(const StateSpaceModel& model, const NoiseCovariances& cov,
                      const FilterConfig& config = {});

/// Extension point mirroring the pluggable-optimizer contract: maximizes a
/// black-box objective over R^dim.
class OptimizationMethod {
 public:
  struct Result {
    Vector best_psi;
    double best_value = 0.0;
    std::vector<SeedTrace> trace;
  };

  virtual ~OptimizationMethod() = default;
  virtual std::string name() const = 0;
  /// degenerate_start is the caller-provided seed-0 point; random seeds are
  /// drawn by the method itself.
  virtual Result maximize(const std::function<double(const Vector&)>& objective, Index dim,
                          const Vector& degenerate_start, const OptimizerConfig& config,
                          std::ostream* log) const = 0;
};

/// The in-tree method: seed 0 starts at near-zero noise variances (the
/// degenerate corner), seeds 1..n_seeds start at uniform random psi, and each
/// is refined by limited-memory quasi-Newton ascent with central-difference
/// gradients.
const OptimizationMethod& random_seeds_lbfgs();

/// Maximum-likelihood estimation of H and Q. Deterministic given
/// config.rng_seed. Throws when every seed fails to reach a finite
/// likelihood.
EstimationResult estimate(const StateSpaceModel& model, const OptimizerConfig& config = {},
                          const FilterConfig& filter_config = {}, std::ostream* log = nullptr,
                          const FilterBackend* backend = nullptr,
                          const OptimizationMethod* method = nullptr);

/// Everything the estimation step produces, bundled.
struct FittedStateSpace {
  StateSpaceModel model;
  FilterOutput filter;
  SmootherOutput smoother;
  NoiseCovariances covariances;
  std::string filter_type;
  std::string optimization_method;
  double loglik = 0.0;
  std::vector<SeedTrace> trace;
};

/// estimate, then one filter pass at the optimum, then the smoother.
FittedStateSpace fit(const StateSpaceModel& model, const FilterConfig& filter_config = {},
                     const OptimizerConfig& optimizer_config = {}, std::ostream* log = nullptr,
                     const FilterBackend* backend = nullptr,
                     const OptimizationMethod* method = nullptr);

ComponentSeries smoothed_components(const FittedStateSpace& fitted, Component component);

/// Estimation progress log pieces, exposed so the layout is testable.
namespace log_format {

constexpr int width = 62;

std::string rule(char fill);
std::string center(const std::string& text);
std::string table_header();
std::string seed_row(int seed, double loglik, double seconds);
std::string estimation_header(const std::string& version, int n_seeds);
std::string estimation_footer(double best_loglik);

}  // namespace log_format

}  // namespace ssm
