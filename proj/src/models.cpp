#include "gradvar/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gradvar {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// log(1 + exp(x)) without overflow
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double gaussian_log_prior(const Eigen::VectorXd& theta, double sd) {
  const double k = static_cast<double>(theta.size());
  return -0.5 * k * (kLog2Pi + 2.0 * std::log(sd)) - 0.5 * theta.squaredNorm() / (sd * sd);
}

}  // namespace

void ModelSpec::check_theta(const Eigen::VectorXd& theta) const {
  if (theta.size() != dim()) {
    throw std::invalid_argument(name() + ": expected theta of length " + std::to_string(dim()) + ", got " +
                                std::to_string(theta.size()));
  }
}

Eigen::VectorXd ModelSpec::hessian_row(const Eigen::VectorXd& theta, Eigen::Index i) const {
  if (auto h = hessian_log_joint(theta)) return h->row(i).transpose();
  // column i of the Hessian by central differences of the gradient
  const double step = fd_step(theta[i]);
  Eigen::VectorXd plus = theta, minus = theta;
  plus[i] += step;
  minus[i] -= step;
  return (grad_log_joint(plus) - grad_log_joint(minus)) / (2.0 * step);
}

// ---------------------------------------------------------------------------

ExactQuadratic::ExactQuadratic(double c0, Eigen::VectorXd g0, Eigen::MatrixXd h0, Eigen::VectorXd theta0)
    : c0_(c0), g0_(std::move(g0)), h0_(std::move(h0)), theta0_(std::move(theta0)) {
  const Eigen::Index k = g0_.size();
  if (h0_.rows() != k || h0_.cols() != k || theta0_.size() != k) {
    throw std::invalid_argument("ExactQuadratic: inconsistent dimensions");
  }
  if (k > 0 && (h0_ - h0_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, h0_.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("ExactQuadratic: h0 must be symmetric");
  }
  h0_ = 0.5 * (h0_ + h0_.transpose());
}

ExactQuadratic ExactQuadratic::gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& precision) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("ExactQuadratic::gaussian: precision not SPD");
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double k = static_cast<double>(mean.size());
  const double c0 = -0.5 * k * kLog2Pi + 0.5 * log_det;
  return ExactQuadratic(c0, Eigen::VectorXd::Zero(mean.size()), -precision, mean);
}

double ExactQuadratic::log_joint(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  const Eigen::VectorXd u = theta - theta0_;
  return c0_ + g0_.dot(u) + 0.5 * u.dot(h0_ * u);
}

Eigen::VectorXd ExactQuadratic::grad_log_joint(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  return g0_ + h0_ * (theta - theta0_);
}

std::optional<Eigen::MatrixXd> ExactQuadratic::hessian_log_joint(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  return h0_;
}

// ---------------------------------------------------------------------------

BayesianLogisticRegression::BayesianLogisticRegression(Eigen::MatrixXd inputs, Eigen::VectorXd responses,
                                                       double prior_sd)
    : inputs_(std::move(inputs)), responses_(std::move(responses)), prior_sd_(prior_sd) {
  if (inputs_.rows() != responses_.size()) throw std::invalid_argument("logistic: row count mismatch");
  if (!(prior_sd_ > 0)) throw std::invalid_argument("logistic: prior_sd must be positive");
  for (Eigen::Index n = 0; n < responses_.size(); ++n) {
    if (responses_[n] != 0.0 && responses_[n] != 1.0) throw std::invalid_argument("logistic: responses must be 0/1");
  }
}

double BayesianLogisticRegression::log_joint(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  const Eigen::VectorXd eta = inputs_ * theta;
  double ll = 0.0;
  for (Eigen::Index n = 0; n < eta.size(); ++n) {
    // log P(y=1) = -softplus(eta), log P(y=0) = -softplus(-eta)
    ll -= responses_[n] > 0.5 ? softplus(eta[n]) : softplus(-eta[n]);
  }
  return ll + gaussian_log_prior(theta, prior_sd_);
}

Eigen::VectorXd BayesianLogisticRegression::grad_log_joint(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  const Eigen::VectorXd eta = inputs_ * theta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index n = 0; n < eta.size(); ++n) resid[n] = sigmoid(-eta[n]) - responses_[n];
  return inputs_.transpose() * resid - theta / (prior_sd_ * prior_sd_);
}

std::optional<Eigen::MatrixXd> BayesianLogisticRegression::hessian_log_joint(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  const Eigen::VectorXd eta = inputs_ * theta;
  Eigen::VectorXd w(eta.size());
  for (Eigen::Index n = 0; n < eta.size(); ++n) {
    const double p = sigmoid(-eta[n]);
    w[n] = p * (1.0 - p);
  }
  Eigen::MatrixXd h = -(inputs_.transpose() * w.asDiagonal() * inputs_);
  h.diagonal().array() -= 1.0 / (prior_sd_ * prior_sd_);
  return h;
}

// ---------------------------------------------------------------------------

MultinomialLogistic::MultinomialLogistic(Eigen::MatrixXd inputs, std::vector<int> labels, int num_classes,
                                         double prior_sd)
    : inputs_(std::move(inputs)), labels_(std::move(labels)), num_classes_(num_classes), prior_sd_(prior_sd) {
  if (static_cast<Eigen::Index>(labels_.size()) != inputs_.rows()) {
    throw std::invalid_argument("softmax: label count mismatch");
  }
  if (num_classes_ < 2) throw std::invalid_argument("softmax: need at least two classes");
  for (int y : labels_) {
    if (y < 0 || y >= num_classes_) throw std::invalid_argument("softmax: label out of range");
  }
}

Eigen::MatrixXd MultinomialLogistic::probabilities(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w(
      theta.data(), num_classes_, inputs_.cols());
  Eigen::MatrixXd p = inputs_ * w.transpose();
  for (Eigen::Index n = 0; n < p.rows(); ++n) {
    const double m = p.row(n).maxCoeff();
    p.row(n) = (p.row(n).array() - m).exp();
    p.row(n) /= p.row(n).sum();
  }
  return p;
}

double MultinomialLogistic::log_joint(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w(
      theta.data(), num_classes_, inputs_.cols());
  const Eigen::MatrixXd scores = inputs_ * w.transpose();
  double ll = 0.0;
  for (Eigen::Index n = 0; n < scores.rows(); ++n) {
    const double m = scores.row(n).maxCoeff();
    const double lse = m + std::log((scores.row(n).array() - m).exp().sum());
    ll += scores(n, labels_[static_cast<std::size_t>(n)]) - lse;
  }
  return ll + gaussian_log_prior(theta, prior_sd_);
}

Eigen::VectorXd MultinomialLogistic::grad_log_joint(const Eigen::VectorXd& theta) const {
  Eigen::MatrixXd resid = -probabilities(theta);
  for (Eigen::Index n = 0; n < resid.rows(); ++n) resid(n, labels_[static_cast<std::size_t>(n)]) += 1.0;
  // (C x d), flattened row-major to match the class-major packing
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> g = resid.transpose() * inputs_;
  return Eigen::Map<const Eigen::VectorXd>(g.data(), g.size()) - theta / (prior_sd_ * prior_sd_);
}

Eigen::VectorXd MultinomialLogistic::hessian_row(const Eigen::VectorXd& theta, Eigen::Index i) const {
  const Eigen::MatrixXd p = probabilities(theta);
  const Eigen::Index d = inputs_.cols();
  const Eigen::Index c = i / d;
  const Eigen::Index j = i % d;
  Eigen::VectorXd row(dim());
  for (Eigen::Index c2 = 0; c2 < num_classes_; ++c2) {
    Eigen::VectorXd w = p.col(c).array() * ((c2 == c ? 1.0 : 0.0) - p.col(c2).array()) * inputs_.col(j).array();
    row.segment(c2 * d, d) = -(inputs_.transpose() * w);
  }
  row[i] -= 1.0 / (prior_sd_ * prior_sd_);
  return row;
}

std::optional<Eigen::MatrixXd> MultinomialLogistic::hessian_log_joint(const Eigen::VectorXd& theta) const {
  const Eigen::MatrixXd p = probabilities(theta);
  const Eigen::Index d = inputs_.cols();
  Eigen::MatrixXd h(dim(), dim());
  for (Eigen::Index c = 0; c < num_classes_; ++c) {
    for (Eigen::Index c2 = c; c2 < num_classes_; ++c2) {
      Eigen::VectorXd w = p.col(c).array() * ((c2 == c ? 1.0 : 0.0) - p.col(c2).array());
      Eigen::MatrixXd block = -(inputs_.transpose() * w.asDiagonal() * inputs_);
      h.block(c * d, c2 * d, d, d) = block;
      h.block(c2 * d, c * d, d, d) = block.transpose();
    }
  }
  h.diagonal().array() -= 1.0 / (prior_sd_ * prior_sd_);
  return h;
}

// ---------------------------------------------------------------------------

namespace {

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Layer activations for all inputs; acts[0] is the 1 x n input row, acts.back() the output.
std::vector<Eigen::MatrixXd> bnn_forward(const Eigen::VectorXd& theta, const std::vector<int>& widths,
                                         const Eigen::VectorXd& x) {
  std::vector<Eigen::MatrixXd> acts;
  acts.push_back(x.transpose());
  Eigen::Index off = 0;
  for (std::size_t l = 1; l < widths.size(); ++l) {
    const int in = widths[l - 1], out = widths[l];
    RowMajorMap w(theta.data() + off, out, in);
    off += static_cast<Eigen::Index>(out) * in;
    const Eigen::Map<const Eigen::VectorXd> b(theta.data() + off, out);
    off += out;
    Eigen::MatrixXd z = w * acts.back();
    z.colwise() += b;
    if (l + 1 < widths.size()) z = z.array().tanh();
    acts.push_back(std::move(z));
  }
  return acts;
}

}  // namespace

BayesianNeuralNet::BayesianNeuralNet(Eigen::VectorXd inputs, Eigen::VectorXd responses, std::vector<int> hidden,
                                     double noise_var, double prior_sd)
    : inputs_(std::move(inputs)), responses_(std::move(responses)), noise_var_(noise_var), prior_sd_(prior_sd) {
  if (inputs_.size() != responses_.size()) throw std::invalid_argument("bnn: input/response length mismatch");
  if (!(noise_var_ > 0) || !(prior_sd_ > 0)) throw std::invalid_argument("bnn: variances must be positive");
  widths_.push_back(1);
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("bnn: hidden widths must be positive");
    widths_.push_back(h);
  }
  widths_.push_back(1);
  num_params_ = 0;
  for (std::size_t l = 1; l < widths_.size(); ++l) num_params_ += widths_[l] * (widths_[l - 1] + 1);
}

Eigen::VectorXd BayesianNeuralNet::predict(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  return bnn_forward(theta, widths_, inputs_).back().row(0).transpose();
}

double BayesianNeuralNet::log_joint(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd resid = responses_ - predict(theta);
  const double n = static_cast<double>(resid.size());
  const double ll = -0.5 * n * (kLog2Pi + std::log(noise_var_)) - 0.5 * resid.squaredNorm() / noise_var_;
  return ll + gaussian_log_prior(theta, prior_sd_);
}

Eigen::VectorXd BayesianNeuralNet::grad_log_joint(const Eigen::VectorXd& theta) const {
  check_theta(theta);
  const auto acts = bnn_forward(theta, widths_, inputs_);
  Eigen::VectorXd grad = -theta / (prior_sd_ * prior_sd_);

  // d loglik / d (pre-activation) of the current layer, width x n
  Eigen::MatrixXd delta = (responses_.transpose() - acts.back()) / noise_var_;
  Eigen::Index off = num_params_;
  for (std::size_t l = widths_.size() - 1; l >= 1; --l) {
    const int in = widths_[l - 1], out = widths_[l];
    off -= out;
    grad.segment(off, out) += delta.rowwise().sum();
    off -= static_cast<Eigen::Index>(out) * in;
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> dw = delta * acts[l - 1].transpose();
    grad.segment(off, static_cast<Eigen::Index>(out) * in) += Eigen::Map<const Eigen::VectorXd>(dw.data(), dw.size());
    if (l > 1) {
      RowMajorMap w(theta.data() + off, out, in);
      delta = (w.transpose() * delta).array() * (1.0 - acts[l - 1].array().square());
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------

LogisticData simulate_logistic_data(Eigen::Index n, const Eigen::Vector2d& theta_true, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("simulate_logistic_data: n must be >= 1");
  LogisticData data{Eigen::MatrixXd(n, 2), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = rng.normal();
    const double p1 = sigmoid(-(theta_true[0] + theta_true[1] * x));
    data.inputs(i, 0) = 1.0;
    data.inputs(i, 1) = x;
    data.responses[i] = rng.uniform() < p1 ? 1.0 : 0.0;
  }
  return data;
}

RegressionData simulate_bnn_toy_data(Eigen::Index n, RngStream& rng) {
  if (n < 2) throw std::invalid_argument("simulate_bnn_toy_data: n must be >= 2");
  const Eigen::Index half = n / 2;
  RegressionData data{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  data.inputs.head(half) = Eigen::VectorXd::LinSpaced(half, 0.0, 2.0);
  data.inputs.tail(n - half) = Eigen::VectorXd::LinSpaced(n - half, 6.0, 8.0);
  for (Eigen::Index i = 0; i < n; ++i) data.responses[i] = std::cos(data.inputs[i]) + 0.1 * rng.normal();
  data.inputs = (data.inputs.array() - 4.0) / 4.0;
  return data;
}

// ---------------------------------------------------------------------------

double fd_step(double theta_i, double rel_step) {
  if (!(rel_step > 0)) throw std::invalid_argument("finite differences: step must be positive");
  return rel_step * std::max(1.0, std::abs(theta_i));
}

Eigen::VectorXd finite_diff_grad(const ScalarFunction& f, const Eigen::VectorXd& theta, double rel_step) {
  Eigen::VectorXd g(theta.size());
  Eigen::VectorXd x = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = fd_step(theta[i], rel_step);
    x[i] = theta[i] + h;
    const double fp = f(x);
    x[i] = theta[i] - h;
    const double fm = f(x);
    x[i] = theta[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd finite_diff_hessian(const ScalarFunction& f, const Eigen::VectorXd& theta, double rel_step) {
  const Eigen::Index k = theta.size();
  Eigen::MatrixXd h(k, k);
  Eigen::VectorXd x = theta;
  const double f0 = f(theta);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double hi = fd_step(theta[i], rel_step);
    x[i] = theta[i] + hi;
    const double fp = f(x);
    x[i] = theta[i] - hi;
    const double fm = f(x);
    x[i] = theta[i];
    h(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double hj = fd_step(theta[j], rel_step);
      auto eval = [&](double si, double sj) {
        x[i] = theta[i] + si * hi;
        x[j] = theta[j] + sj * hj;
        const double v = f(x);
        x[i] = theta[i];
        x[j] = theta[j];
        return v;
      };
      h(i, j) = h(j, i) = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * hi * hj);
    }
  }
  return h;
}

Eigen::MatrixXd finite_diff_jacobian(const VectorFunction& grad, const Eigen::VectorXd& theta, double rel_step) {
  const Eigen::Index k = theta.size();
  Eigen::MatrixXd jac(k, k);
  Eigen::VectorXd x = theta;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double h = fd_step(theta[i], rel_step);
    x[i] = theta[i] + h;
    const Eigen::VectorXd gp = grad(x);
    x[i] = theta[i] - h;
    const Eigen::VectorXd gm = grad(x);
    x[i] = theta[i];
    jac.col(i) = (gp - gm) / (2.0 * h);
  }
  return 0.5 * (jac + jac.transpose());
}

Expansion quadratic_expansion_at(const ModelSpec& model, const Eigen::VectorXd& mu, bool allow_finite_difference) {
  Expansion e;
  e.mu = mu;
  e.C = model.log_joint(mu);
  e.G = model.grad_log_joint(mu);
  if (auto h = model.hessian_log_joint(mu)) {
    e.H = 0.5 * (*h + h->transpose());
  } else if (allow_finite_difference) {
    e.H = finite_diff_jacobian([&model](const Eigen::VectorXd& t) { return model.grad_log_joint(t); }, mu);
  } else {
    throw std::runtime_error("quadratic_expansion_at: " + model.name() + " has no Hessian and finite differences are disabled");
  }
  return e;
}

}  // namespace gradvar
