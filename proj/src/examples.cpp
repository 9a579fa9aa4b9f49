#include "ssm/examples.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ssm/csv.hpp"

namespace ssm::examples {

namespace {

using nlohmann::json;

std::vector<std::string> period_labels(Index n) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<size_t>(n));
  for (Index t = 1; t <= n; ++t) labels.push_back(std::to_string(t));
  return labels;
}

json nested(const Matrix& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

GeneratedExample linear_trend_gap(std::uint64_t rng_seed) {
  const Index n = 77;
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal;

  Matrix truth(n, 1), y(n, 1);
  for (Index t = 0; t < n; ++t) {
    truth(t, 0) = 1.0 + 0.25 * static_cast<double>(t);
    y(t, 0) = truth(t, 0) + 0.5 * normal(rng);
  }
  // periods 10 through 20, counting from 1
  for (Index t = 9; t <= 19; ++t) y(t, 0) = std::numeric_limits<double>::quiet_NaN();

  GeneratedExample out;
  out.tables.push_back({"linear_trend_gap.csv", {"y"}, "t", period_labels(n), y});
  out.tables.push_back({"linear_trend_gap_truth.csv", {"truth"}, "t", period_labels(n), truth});
  return out;
}

GeneratedExample vehicle_tracking(std::uint64_t rng_seed, const VehicleParams& params) {
  const double rho = params.rho, delta = params.delta;
  const Index n = params.n;
  if (n < 2) throw std::invalid_argument("vehicle example needs n >= 2");

  Matrix T1(2, 2), R1(2, 1), Z1(1, 2);
  T1 << 1.0, (1.0 - rho * delta / 2.0) * delta, 0.0, 1.0 - rho * delta;
  R1 << delta * delta / 2.0, delta;
  Z1 << 1.0, 0.0;

  auto kron2 = [](const Matrix& B) {
    Matrix M = Matrix::Zero(2 * B.rows(), 2 * B.cols());
    M.topLeftCorner(B.rows(), B.cols()) = B;
    M.bottomRightCorner(B.rows(), B.cols()) = B;
    return M;
  };
  const Matrix T = kron2(T1), R = kron2(R1), Z = kron2(Z1);

  const double h_std = std::sqrt(2.0), q_std = std::sqrt(0.5);
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal;

  Vector alpha = Vector::Zero(4);
  Matrix y(n, 2), truth(n, 4);
  for (Index t = 0; t < n; ++t) {
    truth.row(t) = alpha.transpose();
    Vector eps(2), eta(2);
    for (Index i = 0; i < 2; ++i) eps(i) = h_std * normal(rng);
    for (Index i = 0; i < 2; ++i) eta(i) = q_std * normal(rng);
    y.row(t) = (Z * alpha + eps).transpose();
    alpha = T * alpha + R * eta;
  }

  GeneratedExample out;
  out.tables.push_back(
      {"vehicle_tracking_measurements.csv", {"y1", "y2"}, "t", period_labels(n), y});
  out.tables.push_back({"vehicle_tracking_truth.csv",
                        {"pos1", "speed1", "pos2", "speed2"},
                        "t",
                        period_labels(n),
                        truth});
  json system;
  system["Z"] = nested(Z);
  system["T"] = nested(T);
  system["R"] = nested(R);
  out.system_json = system.dump(2) + "\n";
  out.system_filename = "vehicle_tracking_system.json";
  return out;
}

GeneratedExample consumption(std::uint64_t rng_seed) {
  const Index n = 156;       // 13 years of monthly data
  const Index extra = 24;    // future regressor rows kept for forecasting
  const Index n_total = n + extra;
  constexpr double two_pi = 2.0 * std::numbers::pi;

  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal;

  Matrix temperature(n_total, 1);
  for (Index t = 0; t < n_total; ++t) {
    const double month = static_cast<double>(t % 12);
    temperature(t, 0) = 22.0 + 8.0 * std::sin(two_pi * (month + 1.0) / 12.0) + 1.5 * normal(rng);
  }

  // Trend + dummy seasonal + temperature effect, simulated from the same
  // recursions the structural model assumes.
  const double theta = 2.5;
  const double sd_eps = 3.0, sd_xi = 1.2, sd_zeta = 0.05, sd_omega = 0.8;

  std::vector<double> seasonal(12);
  for (int j = 0; j < 12; ++j)
    seasonal[static_cast<size_t>(j)] =
        18.0 * std::sin(two_pi * j / 12.0) + 6.0 * std::cos(two_pi * j / 12.0);

  double level = 300.0, slope = 0.6;
  std::vector<double> gamma(seasonal.begin(), seasonal.end() - 1);  // last s-1 values, newest first

  Matrix y(n, 1);
  for (Index t = 0; t < n; ++t) {
    double gamma_t;
    if (t == 0) {
      gamma_t = seasonal.back();
    } else {
      double sum = 0.0;
      for (double g : gamma) sum += g;
      gamma_t = -sum + sd_omega * normal(rng);
    }
    y(t, 0) = level + gamma_t + theta * temperature(t, 0) + sd_eps * normal(rng);
    level += slope + sd_xi * normal(rng);
    slope += sd_zeta * normal(rng);
    gamma.insert(gamma.begin(), gamma_t);
    gamma.pop_back();
  }

  GeneratedExample out;
  out.tables.push_back({"consumption.csv", {"consumption"}, "t", period_labels(n), y});
  out.tables.push_back(
      {"consumption_temperature.csv", {"temperature"}, "t", period_labels(n_total), temperature});
  return out;
}

}  // namespace

GeneratedExample generate_example(const std::string& name, std::uint64_t rng_seed,
                                  const VehicleParams& vehicle) {
  if (name == "linear_trend_gap") return linear_trend_gap(rng_seed);
  if (name == "vehicle_tracking") return vehicle_tracking(rng_seed, vehicle);
  if (name == "consumption") return consumption(rng_seed);
  throw std::invalid_argument("unknown example '" + name +
                              "' (expected linear_trend_gap, vehicle_tracking or consumption)");
}

std::vector<std::filesystem::path> write_example(const std::string& name, std::uint64_t rng_seed,
                                                 const std::filesystem::path& out_dir,
                                                 const VehicleParams& vehicle) {
  GeneratedExample example = generate_example(name, rng_seed, vehicle);
  std::filesystem::create_directories(out_dir);

  std::vector<std::filesystem::path> written;
  for (const auto& table : example.tables) {
    const auto path = out_dir / table.filename;
    write_csv(path, table.columns, table.values, table.label_column, table.labels);
    written.push_back(path);
  }
  if (!example.system_filename.empty()) {
    const auto path = out_dir / example.system_filename;
    std::ofstream file(path);
    if (!file) throw std::invalid_argument("cannot write '" + path.string() + "'");
    file << example.system_json;
    written.push_back(path);
  }
  return written;
}

}  // namespace ssm::examples
