#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "gradvar/models.hpp"
#include "gradvar/rng.hpp"
#include "gradvar/variational.hpp"

namespace gradvar {

enum class EstimatorKind { Score, RP, RB };

std::string to_string(EstimatorKind kind);
/// Accepts "score", "rp", "rb" (case-sensitive); throws std::invalid_argument otherwise.
EstimatorKind parse_estimator(const std::string& name);

/// h(theta) * grad_lambda log q(theta; lambda)
Eigen::VectorXd delta_score(const Eigen::VectorXd& theta, const Gaussian& q, const ModelSpec& model);

/// grad_lambda T(z) grad_theta h(T(z)): mu block g, phi block sigma o z o g.
Eigen::VectorXd delta_rp(const Eigen::VectorXd& z, const Gaussian& q, const ModelSpec& model);

/// Terms of the quadratic expansion that contain theta_i:
/// G_i u_i + u_i sum_{m != i} H_im u_m + 1/2 H_ii u_i^2, with u = theta - mu.
double h_minus_i(const Expansion& e, const Eigen::VectorXd& theta, Eigen::Index i);

/// (mu_i, phi_i) entries of the Rao-Blackwellised Delta.
Eigen::Vector2d delta_rb(const Eigen::VectorXd& theta, const Gaussian& q, const Expansion& e, Eigen::Index i);

/// All k (mu_i, phi_i) pairs merged into the 2k layout, from a single draw.
Eigen::VectorXd delta_rb_full(const Eigen::VectorXd& theta, const Gaussian& q, const Expansion& e);

struct EstimatorOptions {
  /// Threads used to evaluate Delta; results do not depend on this.
  std::size_t workers = 1;
  /// Expansion used by RB. When null, RB expands the model at q.mu.
  const Expansion* expansion = nullptr;
};

/// 2k x N matrix whose column s is Delta at the draw taken from rng.substream(s).
Eigen::MatrixXd sample_deltas(EstimatorKind kind, const Gaussian& q, const ModelSpec& model, std::ptrdiff_t N,
                              const RngStream& rng, const EstimatorOptions& opts = {});

/// (1/S) sum_s Delta(draw s) + entropy gradient, reduced in sample order.
Eigen::VectorXd estimate_gradient(EstimatorKind kind, const Gaussian& q, const ModelSpec& model, std::ptrdiff_t S,
                                  const RngStream& rng, const EstimatorOptions& opts = {});

/// grad_lambda ELBO for a globally quadratic h (the expansion is exact):
/// mu block G(mu), phi block sigma^2 o diag(H) + 1.
Eigen::VectorXd exact_elbo_gradient(const Expansion& e, const Gaussian& q);

}  // namespace gradvar
