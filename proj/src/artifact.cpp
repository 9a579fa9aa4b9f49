#include "ssm/artifact.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ssm/version.hpp"

namespace ssm {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;
constexpr const char* kFormatName = "ssm-artifact";

json matrix_json(const Matrix& M) {
  json data = json::array();
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) {
      const double value = M(i, j);
      if (std::isnan(value))
        data.push_back(nullptr);
      else
        data.push_back(value);
    }
  return json{{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const json& data = j.at("data");
  if (static_cast<Index>(data.size()) != rows * cols)
    throw std::invalid_argument("matrix data length does not match dims");
  Matrix M(rows, cols);
  Index k = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j2 = 0; j2 < cols; ++j2, ++k)
      M(i, j2) = data[static_cast<size_t>(k)].is_null()
                     ? std::numeric_limits<double>::quiet_NaN()
                     : data[static_cast<size_t>(k)].get<double>();
  return M;
}

Matrix matrix_from_nested(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw std::invalid_argument("'" + name + "' must be a nested array of rows");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j.front().size());
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<size_t>(i)];
    if (static_cast<Index>(row.size()) != cols)
      throw std::invalid_argument("'" + name + "' has ragged rows");
    for (Index c = 0; c < cols; ++c) M(i, c) = row[static_cast<size_t>(c)].get<double>();
  }
  return M;
}

}  // namespace

void save_artifact(const std::filesystem::path& path, const FittedStateSpace& fitted,
                   const FilterConfig& filter_config, const RunConfig& config) {
  const StateSpaceModel& model = fitted.model;
  const ObservationSeries& y = model.observations();

  json doc;
  doc["format"] = kFormatName;
  doc["format_version"] = kFormatVersion;
  doc["tool_version"] = kVersion;

  doc["command"] = json{{"command", config.command},     {"input", config.input},
                        {"exog", config.exog},           {"matrices", config.matrices},
                        {"model", config.model},         {"s", config.seasonal},
                        {"filter", config.filter},       {"seeds", config.seeds},
                        {"rng_seed", config.rng_seed},   {"verbosity", config.verbosity},
                        {"out", config.out}};

  json model_doc;
  model_doc["kind"] = to_string(model.kind());
  model_doc["dims"] =
      json{{"n", model.n()}, {"p", model.p()}, {"m", model.m()}, {"r", model.r()}};
  model_doc["variables"] = y.variable_names();
  model_doc["labels"] = y.period_labels();
  model_doc["label_column"] = y.label_column();
  model_doc["observations"] = matrix_json(y.values());

  const SystemMatrices& system = model.system();
  json z_doc;
  z_doc["time_varying"] = system.z_time_varying();
  json slices = json::array();
  if (system.z_time_varying())
    for (Index t = 0; t < system.z_length(); ++t) slices.push_back(matrix_json(system.z(t)));
  else
    slices.push_back(matrix_json(system.z(0)));
  z_doc["matrices"] = std::move(slices);
  model_doc["Z"] = std::move(z_doc);
  model_doc["T"] = matrix_json(system.transition());
  model_doc["R"] = matrix_json(system.noise_selection());

  if (model.kind() == ModelKind::structural && model.structural_info()) {
    const StructuralInfo& info = *model.structural_info();
    json structural{{"s", info.seasonal_period}};
    if (info.exog.size() > 0)
      structural["exog"] = matrix_json(info.exog);
    else
      structural["exog"] = nullptr;
    model_doc["structural"] = std::move(structural);
  }
  doc["model"] = std::move(model_doc);

  doc["covariances"] =
      json{{"H", matrix_json(fitted.covariances.H())}, {"Q", matrix_json(fitted.covariances.Q())}};
  doc["loglik"] = fitted.loglik;
  doc["filter"] = json{{"type", fitted.filter_type},
                       {"variant", to_string(filter_config.variant)},
                       {"diffuse_scale", filter_config.diffuse_scale},
                       {"steady_state_tolerance", filter_config.steady_state_tolerance}};

  json trace = json::array();
  // wall-clock seconds stay out of the artifact so reruns are byte-identical
  for (const auto& seed : fitted.trace)
    trace.push_back(json{{"seed", seed.seed},
                         {"loglik", seed.loglik},
                         {"iterations", seed.iterations},
                         {"converged", seed.converged}});
  doc["estimation"] = json{{"method", fitted.optimization_method}, {"trace", std::move(trace)}};

  json steady{{"attained", fitted.filter.steady_state}};
  if (fitted.filter.steady_state_period)
    steady["period"] = *fitted.filter.steady_state_period;
  else
    steady["period"] = nullptr;
  doc["steady_state"] = std::move(steady);

  std::ofstream file(path);
  if (!file) throw std::invalid_argument("cannot write '" + path.string() + "'");
  file << doc.dump(2) << '\n';
}

LoadedArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw std::invalid_argument("cannot open '" + path.string() + "'");
  json doc;
  try {
    file >> doc;
  } catch (const json::exception& e) {
    throw std::invalid_argument("'" + path.string() + "' is not valid JSON: " + e.what());
  }

  if (!doc.contains("format") || doc["format"] != kFormatName)
    throw std::invalid_argument("'" + path.string() + "' is not an " + kFormatName + " file");
  if (doc.at("format_version").get<int>() != kFormatVersion)
    throw std::invalid_argument("artifact format version " +
                                std::to_string(doc.at("format_version").get<int>()) +
                                " does not match supported version " +
                                std::to_string(kFormatVersion));

  const json& model_doc = doc.at("model");
  ObservationSeries y(matrix_from_json(model_doc.at("observations")),
                      model_doc.at("variables").get<std::vector<std::string>>(),
                      model_doc.at("labels").get<std::vector<std::string>>(),
                      model_doc.at("label_column").get<std::string>());

  Matrix T = matrix_from_json(model_doc.at("T"));
  Matrix R = matrix_from_json(model_doc.at("R"));

  const json& z_doc = model_doc.at("Z");
  std::optional<StateSpaceModel> model;
  if (z_doc.at("time_varying").get<bool>()) {
    std::vector<Matrix> Z;
    for (const auto& slice : z_doc.at("matrices")) Z.push_back(matrix_from_json(slice));
    model.emplace(std::move(y), std::move(Z), std::move(T), std::move(R));
  } else {
    model.emplace(std::move(y), matrix_from_json(z_doc.at("matrices").at(0)), std::move(T),
                  std::move(R));
  }

  const ModelKind kind = model_kind_from_string(model_doc.at("kind").get<std::string>());
  if (kind == ModelKind::structural) {
    StructuralInfo info;
    const json& structural = model_doc.at("structural");
    info.seasonal_period = structural.at("s").get<int>();
    if (!structural.at("exog").is_null()) info.exog = matrix_from_json(structural.at("exog"));
    model->set_kind(kind, std::move(info));
  } else {
    model->set_kind(kind);
  }

  NoiseCovariances cov(matrix_from_json(doc.at("covariances").at("H")),
                       matrix_from_json(doc.at("covariances").at("Q")));

  FilterConfig filter_config;
  filter_config.variant =
      filter_variant_from_string(doc.at("filter").at("variant").get<std::string>());
  filter_config.diffuse_scale = doc.at("filter").at("diffuse_scale").get<double>();
  filter_config.steady_state_tolerance =
      doc.at("filter").at("steady_state_tolerance").get<double>();

  std::vector<SeedTrace> trace;
  for (const auto& entry : doc.at("estimation").at("trace")) {
    SeedTrace seed;
    seed.seed = entry.at("seed").get<int>();
    // JSON has no -inf; a failed seed's likelihood round-trips through null
    seed.loglik = entry.at("loglik").is_null() ? -std::numeric_limits<double>::infinity()
                                               : entry.at("loglik").get<double>();
    seed.iterations = entry.at("iterations").get<int>();
    seed.converged = entry.at("converged").get<bool>();
    trace.push_back(std::move(seed));
  }

  return LoadedArtifact{std::move(*model),
                        std::move(cov),
                        filter_config,
                        doc.at("filter").at("type").get<std::string>(),
                        doc.at("estimation").at("method").get<std::string>(),
                        doc.at("loglik").get<double>(),
                        std::move(trace)};
}

FittedStateSpace refit_from_artifact(const LoadedArtifact& artifact) {
  const FilterBackend& backend = filter_for(artifact.filter_config.variant);
  FilterOutput filter = backend.run(artifact.model, artifact.covariances, artifact.filter_config);
  SmootherOutput smoother = run_smoother(artifact.model, artifact.covariances, filter);
  return FittedStateSpace{artifact.model,
                          std::move(filter),
                          std::move(smoother),
                          artifact.covariances,
                          artifact.filter_type,
                          artifact.optimization_method,
                          artifact.loglik,
                          artifact.trace};
}

UserMatrices read_matrices_json(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw std::invalid_argument("cannot open '" + path.string() + "'");
  json doc;
  try {
    file >> doc;
  } catch (const json::exception& e) {
    throw std::invalid_argument("'" + path.string() + "' is not valid JSON: " + e.what());
  }

  UserMatrices out;
  out.T = matrix_from_nested(doc.at("T"), "T");
  out.R = matrix_from_nested(doc.at("R"), "R");

  const json& z = doc.at("Z");
  if (!z.is_array() || z.empty()) throw std::invalid_argument("'Z' must be a nested array");
  if (z.front().is_array() && !z.front().empty() && z.front().front().is_array()) {
    out.z_time_varying = true;
    for (size_t t = 0; t < z.size(); ++t)
      out.Z.push_back(matrix_from_nested(z[t], "Z[" + std::to_string(t) + "]"));
  } else {
    out.Z.push_back(matrix_from_nested(z, "Z"));
  }
  return out;
}

}  // namespace ssm
