#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gradvar/estimators.hpp"
#include "gradvar/gauss_moments.hpp"
#include "gradvar/models.hpp"

namespace gradvar {

enum class Block { Mu, Phi };
enum class VarianceMethod { ClosedForm, ExactMoment, MonteCarlo };

std::string to_string(Block b);
std::string to_string(VarianceMethod m);

/// Marginal variances of the single-draw Delta, in the (mu, phi) layout.
struct VarianceReport {
  EstimatorKind kind = EstimatorKind::Score;
  VarianceMethod method = VarianceMethod::ClosedForm;
  Eigen::VectorXd per_element;
  double trace = 0.0;
  // Monte Carlo only
  std::optional<std::ptrdiff_t> samples;
  std::optional<std::ptrdiff_t> replications;
  Eigen::VectorXd standard_error;

  Eigen::Index dim() const { return per_element.size() / 2; }
};

VarianceReport make_report(EstimatorKind kind, VarianceMethod method, Eigen::VectorXd per_element);

/// Gradient entry and Hessian row for one coordinate; all the closed forms need.
struct ElementCurvature {
  Eigen::Index i = 0;
  double g_i = 0.0;
  Eigen::VectorXd h_row;
};

ElementCurvature element_curvature(const Expansion& e, Eigen::Index i);
/// Uses ModelSpec::hessian_row, so no k x k Hessian is formed.
ElementCurvature element_curvature(const ModelSpec& model, const Eigen::VectorXd& mu, Eigen::Index i);

double analytic_var_rp_mu(const ElementCurvature& c, const Eigen::VectorXd& sigma);
double analytic_var_rp_phi(const ElementCurvature& c, const Eigen::VectorXd& sigma);
double analytic_var_rb_mu(const ElementCurvature& c, const Eigen::VectorXd& sigma);
double analytic_var_rb_phi(const ElementCurvature& c, const Eigen::VectorXd& sigma);

// Closed forms under the quadratic log-joint. `sigma` is the scale vector of
// q, whose mean is the expansion point.

/// sum_m H_im^2 sigma_m^2
double analytic_var_rp_mu(const Expansion& e, const Eigen::VectorXd& sigma, Eigen::Index i);
/// sigma_i^2 (sum_m H_im^2 sigma_m^2 + H_ii^2 sigma_i^2 + G_i^2)
double analytic_var_rp_phi(const Expansion& e, const Eigen::VectorXd& sigma, Eigen::Index i);
/// 3 sum_m H_im^2 sigma_m^2 + 3/4 H_ii^2 sigma_i^2 + 2 G_i^2
double analytic_var_rb_mu(const Expansion& e, const Eigen::VectorXd& sigma, Eigen::Index i);
/// sigma_i^2 (10 sum_{m != i} H_im^2 sigma_m^2 + 37/2 H_ii^2 sigma_i^2 + 10 G_i^2)
double analytic_var_rb_phi(const Expansion& e, const Eigen::VectorXd& sigma, Eigen::Index i);

/// h(theta) as a polynomial in u = theta - mu.
Polynomial log_joint_polynomial(const Expansion& e);

/// Delta_{block, i} of the given estimator as a polynomial in u. For RP the
/// base variate enters through sigma_m z_m = u_m.
Polynomial delta_polynomial(EstimatorKind kind, const Expansion& e, const Eigen::VectorXd& sigma, Eigen::Index i,
                            Block block);

/// Variance of delta_polynomial under u ~ N(0, diag(sigma^2)), by exact moments.
double exact_var(EstimatorKind kind, const Expansion& e, const Eigen::VectorXd& sigma, Eigen::Index i, Block block);

/// Score-function marginal variance, including every remainder term.
inline double exact_var_score(const Expansion& e, const Eigen::VectorXd& sigma, Eigen::Index i, Block block) {
  return exact_var(EstimatorKind::Score, e, sigma, i, block);
}

/// Closed-form report; Score has no closed form and throws std::invalid_argument.
VarianceReport closed_form_report(EstimatorKind kind, const Expansion& e, const Eigen::VectorXd& sigma);
VarianceReport exact_moment_report(EstimatorKind kind, const Expansion& e, const Eigen::VectorXd& sigma);

/// Per-element sample variance (n - 1 divisor) of Delta over S * R draws.
/// Replication r draws its S samples from rng.substream(r).
VarianceReport mc_variance(EstimatorKind kind, const Gaussian& q, const ModelSpec& model, std::ptrdiff_t S,
                           std::ptrdiff_t R, const RngStream& rng, const EstimatorOptions& opts = {});

double trace_metric(const VarianceReport& report);

enum class TraceOrdering { FirstSmaller, SecondSmaller, Tie };
/// Compares trace(a) with trace(b); reports must cover the same dimension.
TraceOrdering compare_traces(const VarianceReport& a, const VarianceReport& b);

/// Columns: param_index, block, kind, method, variance. Header written when `header` is set.
void write_variance_csv(std::ostream& os, const std::vector<VarianceReport>& reports, bool header = true);
nlohmann::json to_json(const VarianceReport& report);

}  // namespace gradvar
