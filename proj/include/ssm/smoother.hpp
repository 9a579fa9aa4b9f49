#pragma once

#include "ssm/filter.hpp"
#include "ssm/model.hpp"

namespace ssm {

struct SmootherOutput {
  /// n x m smoothed state means alpha_hat_t = E[alpha_t | Y_n].
  Matrix alpha;
  /// n smoothed covariances V_t.
  std::vector<Matrix> V;
};

/// Fixed-interval smoother: backward pass over the output of a filter run on
/// the same model and covariances.
SmootherOutput run_smoother(const StateSpaceModel& model, const NoiseCovariances& cov,
                            const FilterOutput& filter);

enum class Component { level, slope, seasonal, regression };

std::string to_string(Component component);

/// One smoothed component per variable: n x p means with matching variances.
struct ComponentSeries {
  Matrix mean;
  Matrix variance;
};

/// Component series of a predefined model, read off the smoothed state.
/// The regression component is theta_hat' X_t with variance X_t' V_theta X_t.
/// Throws when the model kind does not carry the component.
ComponentSeries smoothed_components(const StateSpaceModel& model, const SmootherOutput& smoother,
                                    Component component);

/// Components a model kind exposes, in output order.
std::vector<Component> components_of(const StateSpaceModel& model);

}  // namespace ssm
