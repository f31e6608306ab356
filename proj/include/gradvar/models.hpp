#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gradvar/rng.hpp"

namespace gradvar {

/// Log-joint density h(theta) = log p(y, theta) of a model.
///
/// Implementations are immutable after construction and safe to evaluate
/// concurrently.
class ModelSpec {
 public:
  virtual ~ModelSpec() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double log_joint(const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::VectorXd grad_log_joint(const Eigen::VectorXd& theta) const = 0;
  /// Analytic Hessian, or nullopt when the model has none.
  virtual std::optional<Eigen::MatrixXd> hessian_log_joint(const Eigen::VectorXd& theta) const {
    (void)theta;
    return std::nullopt;
  }
  /// Row i of the Hessian. The default goes through the full Hessian (or
  /// finite differences of the gradient when it is unavailable).
  virtual Eigen::VectorXd hessian_row(const Eigen::VectorXd& theta, Eigen::Index i) const;

  virtual std::string name() const = 0;

 protected:
  void check_theta(const Eigen::VectorXd& theta) const;
};

/// Second-order expansion of h at mu:
/// h(theta) ~= C + G^T (theta - mu) + 1/2 (theta - mu)^T H (theta - mu).
template <typename Scalar>
struct QuadraticExpansion {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Scalar C{};
  Vector G;
  Matrix H;
  Vector mu;

  Eigen::Index dim() const { return G.size(); }

  Scalar evaluate(const Vector& theta) const {
    const Vector u = theta - mu;
    return C + G.dot(u) + Scalar(0.5) * u.dot(H * u);
  }
  Vector gradient(const Vector& theta) const { return G + H * (theta - mu); }
};

using Expansion = QuadraticExpansion<double>;

/// h(theta) = c0 + g0^T (theta - theta0) + 1/2 (theta - theta0)^T h0 (theta - theta0)
class ExactQuadratic final : public ModelSpec {
 public:
  ExactQuadratic(double c0, Eigen::VectorXd g0, Eigen::MatrixXd h0, Eigen::VectorXd theta0);
  explicit ExactQuadratic(const Expansion& e) : ExactQuadratic(e.C, e.G, e.H, e.mu) {}

  /// Gaussian log density log N(theta | mean, precision^-1), including its normaliser.
  static ExactQuadratic gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& precision);

  Eigen::Index dim() const override { return g0_.size(); }
  double log_joint(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd grad_log_joint(const Eigen::VectorXd& theta) const override;
  std::optional<Eigen::MatrixXd> hessian_log_joint(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd hessian_row(const Eigen::VectorXd&, Eigen::Index i) const override { return h0_.row(i).transpose(); }
  std::string name() const override { return "quadratic"; }

  double c0() const { return c0_; }
  const Eigen::VectorXd& g0() const { return g0_; }
  const Eigen::MatrixXd& h0() const { return h0_; }
  const Eigen::VectorXd& theta0() const { return theta0_; }

 private:
  double c0_;
  Eigen::VectorXd g0_;
  Eigen::MatrixXd h0_;
  Eigen::VectorXd theta0_;
};

/// Binary logistic regression with a N(0, prior_sd^2 I) prior.
///
/// P(y = 1 | x) = 1 / (1 + exp(x^T theta)): a large positive linear
/// predictor drives y to 0. Rows of `inputs` are design vectors (for the
/// two-parameter model, [1, x]).
class BayesianLogisticRegression final : public ModelSpec {
 public:
  BayesianLogisticRegression(Eigen::MatrixXd inputs, Eigen::VectorXd responses, double prior_sd = 5.0);

  Eigen::Index dim() const override { return inputs_.cols(); }
  double log_joint(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd grad_log_joint(const Eigen::VectorXd& theta) const override;
  std::optional<Eigen::MatrixXd> hessian_log_joint(const Eigen::VectorXd& theta) const override;
  std::string name() const override { return "logistic2d"; }

  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& responses() const { return responses_; }

 private:
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd responses_;
  double prior_sd_;
};

/// Softmax regression over `num_classes` classes with a N(0, prior_sd^2 I)
/// prior. theta is class-major: coefficient (class c, feature j) sits at
/// index c * num_features + j.
class MultinomialLogistic final : public ModelSpec {
 public:
  MultinomialLogistic(Eigen::MatrixXd inputs, std::vector<int> labels, int num_classes = 10, double prior_sd = 40.0);

  Eigen::Index dim() const override { return inputs_.cols() * num_classes_; }
  double log_joint(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd grad_log_joint(const Eigen::VectorXd& theta) const override;
  std::optional<Eigen::MatrixXd> hessian_log_joint(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd hessian_row(const Eigen::VectorXd& theta, Eigen::Index i) const override;
  std::string name() const override { return "softmax"; }

  /// n x num_classes matrix of class probabilities; rows sum to one.
  Eigen::MatrixXd probabilities(const Eigen::VectorXd& theta) const;
  int num_classes() const { return num_classes_; }
  Eigen::Index num_features() const { return inputs_.cols(); }

 private:
  Eigen::MatrixXd inputs_;
  std::vector<int> labels_;
  int num_classes_;
  double prior_sd_;
};

/// Regression network x -> tanh layers -> linear output with Gaussian noise
/// and a N(0, prior_sd^2 I) prior on all weights.
///
/// Packing is layer-major; within a layer the weight matrix (row-major,
/// out x in) comes before the bias vector.
class BayesianNeuralNet final : public ModelSpec {
 public:
  BayesianNeuralNet(Eigen::VectorXd inputs, Eigen::VectorXd responses, std::vector<int> hidden = {20, 20},
                    double noise_var = 1.0, double prior_sd = 40.0);

  Eigen::Index dim() const override { return num_params_; }
  double log_joint(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd grad_log_joint(const Eigen::VectorXd& theta) const override;
  std::string name() const override { return "bnn"; }

  Eigen::VectorXd predict(const Eigen::VectorXd& theta) const;
  const std::vector<int>& widths() const { return widths_; }

 private:
  Eigen::VectorXd inputs_;
  Eigen::VectorXd responses_;
  std::vector<int> widths_;  // 1, hidden..., 1
  double noise_var_;
  double prior_sd_;
  Eigen::Index num_params_;
};

struct LogisticData {
  Eigen::MatrixXd inputs;  // n x 2, rows [1, x]
  Eigen::VectorXd responses;
};

/// x ~ N(0, 1), y ~ Bernoulli(1 / (1 + exp(theta_1 + theta_2 x))).
LogisticData simulate_logistic_data(Eigen::Index n, const Eigen::Vector2d& theta_true, RngStream& rng);

struct RegressionData {
  Eigen::VectorXd inputs;
  Eigen::VectorXd responses;
};

/// Two clusters of inputs (20 points on [0, 2], 20 on [6, 8] for n = 40),
/// targets cos(x) + 0.1 noise, inputs rescaled by (x - 4) / 4.
RegressionData simulate_bnn_toy_data(Eigen::Index n, RngStream& rng);

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;
using VectorFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Per-coordinate central-difference step: rel_step * max(1, |theta_i|).
double fd_step(double theta_i, double rel_step = 1e-4);

Eigen::VectorXd finite_diff_grad(const ScalarFunction& f, const Eigen::VectorXd& theta, double rel_step = 1e-4);
/// Second central differences of f; symmetrised.
Eigen::MatrixXd finite_diff_hessian(const ScalarFunction& f, const Eigen::VectorXd& theta, double rel_step = 1e-3);
/// Central differences of a gradient; symmetrised.
Eigen::MatrixXd finite_diff_jacobian(const VectorFunction& grad, const Eigen::VectorXd& theta, double rel_step = 1e-4);

/// (C, G, H) = (h(mu), grad h(mu), Hessian(mu)) with H symmetrised.
/// Falls back to finite differences of the gradient when the model has no
/// analytic Hessian, unless `allow_finite_difference` is false.
Expansion quadratic_expansion_at(const ModelSpec& model, const Eigen::VectorXd& mu,
                                 bool allow_finite_difference = true);

}  // namespace gradvar
