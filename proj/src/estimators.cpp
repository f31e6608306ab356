#include "gradvar/estimators.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>
#include <vector>

namespace gradvar {

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Score:
      return "score";
    case EstimatorKind::RP:
      return "rp";
    case EstimatorKind::RB:
      return "rb";
  }
  return "unknown";
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "score") return EstimatorKind::Score;
  if (name == "rp") return EstimatorKind::RP;
  if (name == "rb") return EstimatorKind::RB;
  throw std::invalid_argument("unknown estimator '" + name + "' (expected score|rp|rb)");
}

Eigen::VectorXd delta_score(const Eigen::VectorXd& theta, const Gaussian& q, const ModelSpec& model) {
  return model.log_joint(theta) * score_grad(theta, q);
}

Eigen::VectorXd delta_rp(const Eigen::VectorXd& z, const Gaussian& q, const ModelSpec& model) {
  const Eigen::Index k = q.dim();
  const Eigen::VectorXd sigma = q.sigma();
  const Eigen::VectorXd g = model.grad_log_joint(transform(z, q));
  Eigen::VectorXd out(2 * k);
  out.head(k) = g;
  out.tail(k) = sigma.array() * z.array() * g.array();
  return out;
}

double h_minus_i(const Expansion& e, const Eigen::VectorXd& theta, Eigen::Index i) {
  if (theta.size() != e.dim()) throw std::invalid_argument("h_minus_i: dimension mismatch");
  const Eigen::VectorXd u = theta - e.mu;
  return u[i] * (e.G[i] + e.H.row(i).dot(u) - 0.5 * e.H(i, i) * u[i]);
}

Eigen::Vector2d delta_rb(const Eigen::VectorXd& theta, const Gaussian& q, const Expansion& e, Eigen::Index i) {
  check_dim(q, theta.size(), "delta_rb");
  const double u = theta[i] - q.mu[i];
  const double inv_var = std::exp(-2.0 * q.phi[i]);
  const double h = h_minus_i(e, theta, i);
  return {h * u * inv_var, h * (u * u * inv_var - 1.0)};
}

Eigen::VectorXd delta_rb_full(const Eigen::VectorXd& theta, const Gaussian& q, const Expansion& e) {
  check_dim(q, theta.size(), "delta_rb_full");
  if (e.dim() != q.dim()) throw std::invalid_argument("delta_rb_full: expansion dimension mismatch");
  const Eigen::Index k = q.dim();
  const Eigen::ArrayXd u = (theta - e.mu).array();
  const Eigen::ArrayXd hu = (e.H * (theta - e.mu)).array();
  const Eigen::ArrayXd h_minus = u * (e.G.array() + hu - 0.5 * e.H.diagonal().array() * u);
  const Eigen::ArrayXd uq = theta.array() - q.mu.array();
  const Eigen::ArrayXd inv_var = (-2.0 * q.phi.array()).exp();
  Eigen::VectorXd out(2 * k);
  out.head(k) = h_minus * uq * inv_var;
  out.tail(k) = h_minus * (uq.square() * inv_var - 1.0);
  return out;
}

Eigen::MatrixXd sample_deltas(EstimatorKind kind, const Gaussian& q, const ModelSpec& model, std::ptrdiff_t N,
                              const RngStream& rng, const EstimatorOptions& opts) {
  if (N < 1) throw std::invalid_argument("sample_deltas: sample count must be >= 1");
  if (model.dim() != q.dim()) throw std::invalid_argument("sample_deltas: model/q dimension mismatch");
  const Eigen::Index k = q.dim();

  Expansion local;
  const Expansion* expansion = opts.expansion;
  if (kind == EstimatorKind::RB && expansion == nullptr) {
    local = quadratic_expansion_at(model, q.mu);
    expansion = &local;
  }

  Eigen::MatrixXd out(2 * k, N);
  const Eigen::ArrayXd sigma = q.sigma().array();
  auto run = [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    for (std::ptrdiff_t s = begin; s < end; ++s) {
      RngStream sub = rng.substream(static_cast<std::uint64_t>(s));
      const Eigen::VectorXd z = standard_normal_vec(sub, k);
      const Eigen::VectorXd theta = q.mu.array() + sigma * z.array();
      switch (kind) {
        case EstimatorKind::Score:
          out.col(s) = delta_score(theta, q, model);
          break;
        case EstimatorKind::RP:
          out.col(s) = delta_rp(z, q, model);
          break;
        case EstimatorKind::RB:
          out.col(s) = delta_rb_full(theta, q, *expansion);
          break;
      }
    }
  };

  const std::ptrdiff_t workers =
      std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(opts.workers), 1, N);
  if (workers == 1) {
    run(0, N);
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (std::ptrdiff_t w = 0; w < workers; ++w) {
    pool.emplace_back(run, N * w / workers, N * (w + 1) / workers);
  }
  pool.clear();  // joins
  return out;
}

Eigen::VectorXd estimate_gradient(EstimatorKind kind, const Gaussian& q, const ModelSpec& model, std::ptrdiff_t S,
                                  const RngStream& rng, const EstimatorOptions& opts) {
  const Eigen::MatrixXd deltas = sample_deltas(kind, q, model, S, rng, opts);
  // ordered sum over samples
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(deltas.rows());
  for (Eigen::Index s = 0; s < deltas.cols(); ++s) sum += deltas.col(s);
  return sum / static_cast<double>(S) + entropy_grad(q);
}

Eigen::VectorXd exact_elbo_gradient(const Expansion& e, const Gaussian& q) {
  const Eigen::Index k = q.dim();
  Eigen::VectorXd g(2 * k);
  g.head(k) = e.G + e.H * (q.mu - e.mu);
  g.tail(k) = q.sigma().array().square() * e.H.diagonal().array() + 1.0;
  return g;
}

}  // namespace gradvar
