#include "ssm/cli.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "ssm/artifact.hpp"
#include "ssm/builders.hpp"
#include "ssm/csv.hpp"
#include "ssm/estimation.hpp"
#include "ssm/examples.hpp"
#include "ssm/prediction.hpp"

namespace ssm {

namespace {

std::vector<std::string> variable_names(const ObservationSeries& y) {
  if (!y.variable_names().empty()) return y.variable_names();
  std::vector<std::string> names;
  for (Index i = 1; i <= y.p(); ++i) names.push_back("y" + std::to_string(i));
  return names;
}

std::vector<std::string> row_labels(const ObservationSeries& y) {
  if (!y.period_labels().empty()) return y.period_labels();
  std::vector<std::string> labels;
  for (Index t = 1; t <= y.n(); ++t) labels.push_back(std::to_string(t));
  return labels;
}

std::vector<std::string> horizon_labels(Index horizon) {
  std::vector<std::string> labels;
  for (Index h = 1; h <= horizon; ++h) labels.push_back(std::to_string(h));
  return labels;
}

// "level" univariate, "level_passengers" multivariate.
std::string varying(const std::string& base, const std::vector<std::string>& names, Index var,
                    Index p) {
  return p == 1 ? base : base + "_" + names[static_cast<size_t>(var)];
}

std::string quantile_name(double prob) {
  const double pct = prob * 100.0;
  char buffer[32];
  if (pct == std::floor(pct))
    std::snprintf(buffer, sizeof(buffer), "q%02.0f", pct);
  else
    std::snprintf(buffer, sizeof(buffer), "q%g", pct);
  return buffer;
}

std::filesystem::path components_path(const std::filesystem::path& artifact_path) {
  std::filesystem::path path = artifact_path;
  path.replace_extension();
  path += "_components.csv";
  return path;
}

void write_components_csv(const FittedStateSpace& fitted, const std::filesystem::path& path) {
  const StateSpaceModel& model = fitted.model;
  const ObservationSeries& y = model.observations();
  const Index n = model.n(), p = model.p();
  const std::vector<std::string> names = variable_names(y);

  std::vector<std::string> columns;
  std::vector<Matrix> blocks;

  if (model.kind() == ModelKind::user_defined) {
    // No named components; emit the raw smoothed state with variances.
    const Index m = model.m();
    Matrix values(n, 2 * m);
    for (Index j = 0; j < m; ++j) {
      columns.push_back("state_" + std::to_string(j + 1));
      columns.push_back("state_" + std::to_string(j + 1) + "_var");
      for (Index t = 0; t < n; ++t) {
        values(t, 2 * j) = fitted.smoother.alpha(t, j);
        values(t, 2 * j + 1) = fitted.smoother.V[static_cast<size_t>(t)](j, j);
      }
    }
    write_csv(path, columns, values, y.label_column(), row_labels(y));
    return;
  }

  const std::vector<Component> list = components_of(model);
  Matrix values(n, static_cast<Index>(list.size()) * 2 * p);
  Index col = 0;
  for (Component component : list) {
    ComponentSeries series = smoothed_components(fitted, component);
    for (Index var = 0; var < p; ++var) {
      columns.push_back(varying(to_string(component), names, var, p));
      columns.push_back(varying(to_string(component) + "_var", names, var, p));
      values.col(col++) = series.mean.col(var);
      values.col(col++) = series.variance.col(var);
    }
  }
  write_csv(path, columns, values, y.label_column(), row_labels(y));
}

void note(const RunConfig& config, const std::string& message) {
  if (config.verbosity >= 1) std::cout << message << '\n';
}

int run_fit(const RunConfig& config) {
  ObservationSeries y = load_csv(config.input);

  std::optional<StateSpaceModel> model;
  if (config.model == "local_level") {
    model.emplace(local_level(std::move(y)));
  } else if (config.model == "linear_trend") {
    model.emplace(linear_trend(std::move(y)));
  } else if (config.model == "structural") {
    std::optional<Matrix> X;
    if (!config.exog.empty()) X = read_csv(config.exog).values;
    model.emplace(structural(std::move(y), config.seasonal, std::move(X)));
  } else {  // user
    UserMatrices um = read_matrices_json(config.matrices);
    if (um.z_time_varying)
      model.emplace(std::move(y), std::move(um.Z), std::move(um.T), std::move(um.R));
    else
      model.emplace(std::move(y), std::move(um.Z.front()), std::move(um.T), std::move(um.R));
  }

  FilterConfig filter_config;
  filter_config.variant = filter_variant_from_string(config.filter);

  OptimizerConfig optimizer_config;
  optimizer_config.n_seeds = config.seeds;
  optimizer_config.rng_seed = config.rng_seed;
  optimizer_config.verbosity = config.verbosity;

  std::ostream* log = config.verbosity >= 1 ? &std::cout : nullptr;
  FittedStateSpace fitted = fit(*model, filter_config, optimizer_config, log);

  const std::filesystem::path artifact_path = config.out.empty() ? "fitted.json" : config.out;
  save_artifact(artifact_path, fitted, filter_config, config);
  note(config, "wrote " + artifact_path.string());

  const std::filesystem::path comp_path = components_path(artifact_path);
  write_components_csv(fitted, comp_path);
  note(config, "wrote " + comp_path.string());
  return 0;
}

int run_forecast(const RunConfig& config) {
  LoadedArtifact artifact = load_artifact(config.input);
  FittedStateSpace fitted = refit_from_artifact(artifact);
  ForecastOutput out = forecast(fitted, config.horizon);

  const Index p = fitted.model.p();
  const std::vector<std::string> names = variable_names(fitted.model.observations());
  std::vector<std::string> columns;
  Matrix values(config.horizon, 2 * p);
  for (Index var = 0; var < p; ++var) columns.push_back(varying("mean", names, var, p));
  for (Index var = 0; var < p; ++var) columns.push_back(varying("std", names, var, p));
  for (Index h = 0; h < config.horizon; ++h)
    for (Index var = 0; var < p; ++var) {
      values(h, var) = out.mean(h, var);
      values(h, p + var) = std::sqrt(out.covariance[static_cast<size_t>(h)](var, var));
    }

  const std::filesystem::path path = config.out.empty() ? "forecast.csv" : config.out;
  write_csv(path, columns, values, "h", horizon_labels(config.horizon));
  note(config, "wrote " + path.string());
  return 0;
}

int run_simulate(const RunConfig& config) {
  LoadedArtifact artifact = load_artifact(config.input);
  FittedStateSpace fitted = refit_from_artifact(artifact);

  ScenarioSet scenarios = simulate(fitted, config.horizon, config.scenarios, config.rng_seed);
  ForecastOutput fc = forecast(fitted, config.horizon);
  std::vector<Matrix> quantiles;
  if (!config.quantiles.empty()) quantiles = scenario_quantiles(scenarios, config.quantiles);

  const Index p = fitted.model.p();
  const Index N = config.horizon, S = config.scenarios;
  const std::vector<std::string> names = variable_names(fitted.model.observations());

  std::vector<std::string> columns;
  const Index n_cols = p * (1 + static_cast<Index>(quantiles.size()) + S);
  Matrix values(N, n_cols);
  Index col = 0;
  for (Index var = 0; var < p; ++var) {
    columns.push_back(varying("mean", names, var, p));
    values.col(col++) = fc.mean.col(var);
  }
  for (size_t q = 0; q < quantiles.size(); ++q)
    for (Index var = 0; var < p; ++var) {
      columns.push_back(varying(quantile_name(config.quantiles[q]), names, var, p));
      values.col(col++) = quantiles[q].col(var);
    }
  for (Index s = 0; s < S; ++s)
    for (Index var = 0; var < p; ++var) {
      columns.push_back(varying("s" + std::to_string(s + 1), names, var, p));
      for (Index h = 0; h < N; ++h) values(h, col) = scenarios.at(h, s, var);
      ++col;
    }

  const std::filesystem::path path = config.out.empty() ? "scenarios.csv" : config.out;
  write_csv(path, columns, values, "h", horizon_labels(N));
  note(config, "wrote " + path.string());
  return 0;
}

int run_components(const RunConfig& config) {
  LoadedArtifact artifact = load_artifact(config.input);
  FittedStateSpace fitted = refit_from_artifact(artifact);
  const std::filesystem::path path = config.out.empty() ? "components.csv" : config.out;
  write_components_csv(fitted, path);
  note(config, "wrote " + path.string());
  return 0;
}

int run_generate(const RunConfig& config) {
  examples::VehicleParams vehicle;
  vehicle.rho = config.vehicle_rho;
  vehicle.delta = config.vehicle_delta;
  const std::filesystem::path out_dir = config.out.empty() ? "." : config.out;
  const auto written = examples::write_example(config.example_name, config.rng_seed, out_dir, vehicle);
  for (const auto& path : written) note(config, "wrote " + path.string());
  return 0;
}

}  // namespace

void RunConfig::validate() const {
  static const std::set<std::string> commands{"fit", "forecast", "simulate", "components",
                                              "generate-example"};
  if (!commands.count(command)) throw std::invalid_argument("unknown command '" + command + "'");
  if (verbosity < 0 || verbosity > 2)
    throw std::invalid_argument("verbosity must be 0, 1 or 2");

  if (command == "generate-example") {
    if (example_name.empty()) throw std::invalid_argument("generate-example needs an example name");
    return;
  }
  if (input.empty()) throw std::invalid_argument(command + " needs an input path");

  if (command == "fit") {
    static const std::set<std::string> models{"local_level", "linear_trend", "structural", "user"};
    if (!models.count(model)) throw std::invalid_argument("unknown model '" + model + "'");
    if (model == "structural" && seasonal < 2)
      throw std::invalid_argument("structural models need --s >= 2");
    if (model == "user" && matrices.empty())
      throw std::invalid_argument("user models need --matrices with the Z/T/R JSON file");
    if (!exog.empty() && model != "structural")
      throw std::invalid_argument("--exog only applies to structural models");
    if (seeds < 1) throw std::invalid_argument("--seeds must be >= 1");
    filter_variant_from_string(filter);
  }
  if (command == "forecast" && horizon < 1)
    throw std::invalid_argument("forecast needs --N >= 1");
  if (command == "simulate") {
    if (horizon < 1) throw std::invalid_argument("simulate needs --N >= 1");
    if (scenarios < 1) throw std::invalid_argument("simulate needs --S >= 1");
    for (double prob : quantiles)
      if (!(prob > 0.0 && prob < 1.0))
        throw std::invalid_argument("quantiles must lie strictly inside (0, 1)");
  }
}

int run(const RunConfig& config) {
  config.validate();
  if (config.command == "fit") return run_fit(config);
  if (config.command == "forecast") return run_forecast(config);
  if (config.command == "simulate") return run_simulate(config);
  if (config.command == "components") return run_components(config);
  return run_generate(config);
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"state-space time series modeling, estimation, forecasting and simulation"};
  app.require_subcommand(1);
  RunConfig config;

  auto* fit_cmd = app.add_subcommand("fit", "estimate a model from a CSV series");
  fit_cmd->add_option("input", config.input, "observations CSV")->required();
  fit_cmd->add_option("--model", config.model,
                      "local_level, linear_trend, structural or user");
  fit_cmd->add_option("--s", config.seasonal, "seasonal period (structural)");
  fit_cmd->add_option("--exog", config.exog, "exogenous regressors CSV (structural)");
  fit_cmd->add_option("--matrices", config.matrices, "user-model Z/T/R JSON");
  fit_cmd->add_option("--filter", config.filter, "standard or sqrt");
  fit_cmd->add_option("--seeds", config.seeds, "random seeds beyond seed 0");
  fit_cmd->add_option("--rng-seed", config.rng_seed, "rng seed");
  fit_cmd->add_option("--verbosity", config.verbosity, "0, 1 or 2");
  fit_cmd->add_option("--out", config.out, "artifact path (default fitted.json)");

  auto* forecast_cmd = app.add_subcommand("forecast", "point forecasts with predictive stds");
  forecast_cmd->add_option("input", config.input, "fit artifact JSON")->required();
  forecast_cmd->add_option("--N", config.horizon, "horizon")->required();
  forecast_cmd->add_option("--verbosity", config.verbosity, "0, 1 or 2");
  forecast_cmd->add_option("--out", config.out, "output CSV (default forecast.csv)");

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo scenarios");
  simulate_cmd->add_option("input", config.input, "fit artifact JSON")->required();
  simulate_cmd->add_option("--N", config.horizon, "horizon")->required();
  simulate_cmd->add_option("--S", config.scenarios, "scenario count")->required();
  simulate_cmd->add_option("--quantiles", config.quantiles, "e.g. 0.05,0.95")->delimiter(',');
  simulate_cmd->add_option("--rng-seed", config.rng_seed, "rng seed");
  simulate_cmd->add_option("--verbosity", config.verbosity, "0, 1 or 2");
  simulate_cmd->add_option("--out", config.out, "output CSV (default scenarios.csv)");

  auto* components_cmd = app.add_subcommand("components", "smoothed component table");
  components_cmd->add_option("input", config.input, "fit artifact JSON")->required();
  components_cmd->add_option("--verbosity", config.verbosity, "0, 1 or 2");
  components_cmd->add_option("--out", config.out, "output CSV (default components.csv)");

  auto* generate_cmd = app.add_subcommand("generate-example", "write a bundled example dataset");
  generate_cmd->add_option("name", config.example_name,
                           "linear_trend_gap, vehicle_tracking or consumption")
      ->required();
  generate_cmd->add_option("--rng-seed", config.rng_seed, "rng seed");
  generate_cmd->add_option("--rho", config.vehicle_rho, "vehicle damping");
  generate_cmd->add_option("--delta", config.vehicle_delta, "vehicle time step");
  generate_cmd->add_option("--verbosity", config.verbosity, "0, 1 or 2");
  generate_cmd->add_option("--out", config.out, "output directory (default .)");

  std::vector<std::string> argv_storage = args;
  std::vector<char*> argv;
  argv.push_back(const_cast<char*>("ssm"));
  for (auto& arg : argv_storage) argv.push_back(arg.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  config.command = app.get_subcommands().front()->get_name();
  try {
    return run(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ssm
