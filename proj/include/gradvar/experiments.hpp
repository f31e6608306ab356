#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gradvar/estimators.hpp"
#include "gradvar/models.hpp"
#include "gradvar/optimizer.hpp"
#include "gradvar/variance.hpp"

namespace gradvar {

struct QuadraticConfig {
  double c0 = 0.0;
  std::vector<double> g0 = {0.0};
  std::vector<std::vector<double>> h0 = {{2.0}};
  std::vector<double> theta0 = {0.0};
};

struct LogisticConfig {
  std::int64_t n = 10;
  std::vector<double> theta_true = {1.0, -2.0};
  double prior_sd = 5.0;
  std::uint64_t data_seed = 1;
};

struct SoftmaxConfig {
  std::string data;    // cache written by mnist-ingest
  std::string images;  // or raw IDX files
  std::string labels;
  std::int64_t subsample = 1000;
  int pool = 4;
  int classes = 10;
  double prior_sd = 40.0;
};

struct BnnConfig {
  std::int64_t n = 40;
  std::vector<int> hidden = {20, 20};
  double prior_sd = 40.0;
  double noise_var = 1.0;
  std::uint64_t data_seed = 0;
};

/// Validated settings shared by every command. JSON keys mirror the field
/// names; unknown keys are rejected with ConfigError.
struct ExperimentConfig {
  std::string model = "quadratic";
  std::vector<EstimatorKind> estimators = {EstimatorKind::Score, EstimatorKind::RP};
  std::uint64_t seed = 0;
  std::int64_t samples = 10000;
  std::int64_t reps = 1;
  std::string out = "-";
  std::string format = "csv";
  std::int64_t workers = 1;

  // variational parameters; empty means zeros / ones of the model dimension
  std::vector<double> mu;
  std::vector<double> sigma;

  // var-table
  std::vector<double> sigma_grid = {0.1, 0.5, 1.0, 2.0};

  // sweep / cross-section
  std::string axis = "mu_i";
  std::int64_t index = 0;
  std::vector<double> values;
  std::int64_t points = 61;

  // fit / iterations sweep
  std::int64_t iters = 200;
  std::int64_t log_every = 10;
  std::string schedule = "adam";
  double step = 0.01;
  double rm_a = 1.0;
  double rm_b = 10.0;
  std::int64_t window = 50;
  double rel_tol = 1e-4;
  std::int64_t elbo_samples = 10;
  std::int64_t average_from = -1;  // first iteration of the iterate average; -1 disables
  std::string params_out;

  // mnist-ingest
  std::string images;
  std::string labels;
  std::int64_t subsample = 0;

  QuadraticConfig quadratic;
  LogisticConfig logistic;
  SoftmaxConfig softmax;
  BnnConfig bnn;
};

ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

std::unique_ptr<ModelSpec> build_model(const ExperimentConfig& c);
/// q(mu, sigma) from the config, defaulting to mu = 0 and sigma = 1.
Gaussian config_gaussian(const ExperimentConfig& c, Eigen::Index k);
EstimatorKind primary_estimator(const ExperimentConfig& c);

// -- var-table -------------------------------------------------------------

struct VarTableRow {
  double sigma = 0.0;
  EstimatorKind kind = EstimatorKind::Score;
  std::string target;  // "true" or "approx"
  VarianceReport report;
};

/// Per sigma in the grid, MC variances of Delta under the true log-joint and
/// under its quadratic expansion at mu. Both targets share the same draws.
std::vector<VarTableRow> var_table(const ExperimentConfig& c);
void cmd_var_table(const ExperimentConfig& c, std::ostream& os);

// -- sweep -----------------------------------------------------------------

struct SweepRow {
  std::string axis;
  double value = 0.0;
  EstimatorKind kind = EstimatorKind::Score;
  VarianceMethod method = VarianceMethod::MonteCarlo;
  Eigen::Index param_index = 0;
  Block block = Block::Mu;
  double variance = 0.0;
  double h_row_norm2 = 0.0;  // ||H_i(mu)||^2
  double sigma_norm2 = 0.0;  // ||sigma^2||^2
};

std::vector<SweepRow> sweep(const ExperimentConfig& c);
void cmd_sweep(const ExperimentConfig& c, std::ostream& os);

// -- cross-section ---------------------------------------------------------

struct CrossSectionCurve {
  EstimatorKind kind = EstimatorKind::Score;
  Block block = Block::Mu;
  Eigen::VectorXd x;      // theta_i for score, z_i for RP
  Eigen::VectorXd delta;
  double region_lo = 0.0;
  double region_hi = 0.0;

  double range() const { return delta.maxCoeff() - delta.minCoeff(); }
};

/// Delta_{mu_i}, Delta_{phi_i} along coordinate i over its sampling region
/// (mu_i +- 3 sigma_i for score, [-3, 3] for RP), other coordinates at the centre.
/// RB entries in the estimator list are skipped.
std::vector<CrossSectionCurve> cross_section(const ExperimentConfig& c);
void cmd_cross_section(const ExperimentConfig& c, std::ostream& os);

// -- fit -------------------------------------------------------------------

FitOptions fit_options(const ExperimentConfig& c);
FitTrace fit(const ExperimentConfig& c);
/// Writes the trace as CSV (or a JSON document) to `os`; returns the final lambda as JSON.
nlohmann::json cmd_fit(const ExperimentConfig& c, std::ostream& os);

// -- mnist-ingest ----------------------------------------------------------

/// Validates the IDX pair, applies `subsample` and writes the cache file to `c.out`.
void cmd_mnist_ingest(const ExperimentConfig& c);

}  // namespace gradvar
