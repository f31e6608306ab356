#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "gradvar/rng.hpp"

namespace gradvar {

/// Diagonal Gaussian q(theta) = prod_i N(theta_i | mu_i, exp(2 phi_i)).
///
/// Every 2k-vector in the library (gradients, Delta samples, variances) uses
/// the layout (mu_1..mu_k, phi_1..phi_k).
template <typename Scalar>
struct MeanFieldGaussian {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector mu;
  Vector phi;

  MeanFieldGaussian() = default;
  MeanFieldGaussian(Vector mu_in, Vector phi_in) : mu(std::move(mu_in)), phi(std::move(phi_in)) {
    if (mu.size() != phi.size()) throw std::invalid_argument("MeanFieldGaussian: mu/phi size mismatch");
  }

  static MeanFieldGaussian from_sigma(const Vector& mu, const Vector& sigma) {
    return MeanFieldGaussian(mu, sigma.array().log().matrix());
  }
  static MeanFieldGaussian from_packed(const Vector& lambda) {
    if (lambda.size() % 2 != 0) throw std::invalid_argument("MeanFieldGaussian: packed length must be even");
    const Eigen::Index k = lambda.size() / 2;
    return MeanFieldGaussian(lambda.head(k), lambda.tail(k));
  }

  Eigen::Index dim() const { return mu.size(); }
  Vector sigma() const { return phi.array().exp().matrix(); }

  Vector packed() const {
    Vector lambda(2 * dim());
    lambda << mu, phi;
    return lambda;
  }
};

using Gaussian = MeanFieldGaussian<double>;

template <typename Scalar>
void check_dim(const MeanFieldGaussian<Scalar>& q, Eigen::Index n, const char* what) {
  if (n != q.dim()) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

/// T(z; lambda) = mu + exp(phi) o z
template <typename Scalar>
typename MeanFieldGaussian<Scalar>::Vector transform(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z,
                                                     const MeanFieldGaussian<Scalar>& q) {
  check_dim(q, z.size(), "transform");
  return q.mu + (q.phi.array().exp() * z.array()).matrix();
}

/// Inverse of transform: z = (theta - mu) / sigma.
template <typename Scalar>
typename MeanFieldGaussian<Scalar>::Vector inverse_transform(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta,
                                                             const MeanFieldGaussian<Scalar>& q) {
  check_dim(q, theta.size(), "inverse_transform");
  return ((theta - q.mu).array() * (-q.phi.array()).exp()).matrix();
}

/// Draws kept alongside the base variates so the RP path can reuse them.
struct Draws {
  Eigen::MatrixXd z;      // k x S
  Eigen::MatrixXd theta;  // k x S
};

/// S draws theta(s) = T(z(s)); z(s) comes from substream s of `rng`.
inline Draws sample(const Gaussian& q, std::ptrdiff_t S, const RngStream& rng) {
  if (S < 1) throw std::invalid_argument("sample: S must be >= 1");
  Draws d{Eigen::MatrixXd(q.dim(), S), Eigen::MatrixXd(q.dim(), S)};
  const Eigen::ArrayXd sigma = q.phi.array().exp();
  for (std::ptrdiff_t s = 0; s < S; ++s) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(s));
    d.z.col(s) = standard_normal_vec(sub, q.dim());
    d.theta.col(s) = q.mu.array() + sigma * d.z.col(s).array();
  }
  return d;
}

template <typename Scalar>
Scalar log_density(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta, const MeanFieldGaussian<Scalar>& q) {
  check_dim(q, theta.size(), "log_density");
  const auto u = (theta - q.mu).array();
  const auto inv_var = (-2.0 * q.phi.array()).exp();
  const Scalar half_log_2pi = Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  return (-q.phi.array() - half_log_2pi - Scalar(0.5) * u.square() * inv_var).sum();
}

/// grad_lambda log q(theta; lambda): ((theta-mu)/sigma^2, -1 + (theta-mu)^2/sigma^2)
template <typename Scalar>
typename MeanFieldGaussian<Scalar>::Vector score_grad(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta,
                                                      const MeanFieldGaussian<Scalar>& q) {
  check_dim(q, theta.size(), "score_grad");
  const Eigen::Index k = q.dim();
  const auto u = (theta - q.mu).array();
  const auto inv_var = (-2.0 * q.phi.array()).exp();
  typename MeanFieldGaussian<Scalar>::Vector g(2 * k);
  g.head(k) = u * inv_var;
  g.tail(k) = u.square() * inv_var - Scalar(1);
  return g;
}

template <typename Scalar>
Scalar entropy(const MeanFieldGaussian<Scalar>& q) {
  const Scalar k = static_cast<Scalar>(q.dim());
  return q.phi.sum() + Scalar(0.5) * k * std::log(Scalar(2) * std::numbers::pi_v<Scalar> * std::numbers::e_v<Scalar>);
}

template <typename Scalar>
typename MeanFieldGaussian<Scalar>::Vector entropy_grad(const MeanFieldGaussian<Scalar>& q) {
  const Eigen::Index k = q.dim();
  typename MeanFieldGaussian<Scalar>::Vector g(2 * k);
  g.head(k).setZero();
  g.tail(k).setOnes();
  return g;
}

}  // namespace gradvar
