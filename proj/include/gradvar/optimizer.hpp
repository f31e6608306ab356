#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gradvar/estimators.hpp"
#include "gradvar/models.hpp"
#include "gradvar/rng.hpp"
#include "gradvar/variational.hpp"

namespace gradvar {

/// eta_t = a / (b + t); satisfies the Robbins-Monro conditions for a, b > 0.
struct RobbinsMonro {
  double a = 1.0;
  double b = 1.0;
};

struct Adam {
  double step = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

using Schedule = std::variant<RobbinsMonro, Adam>;

/// Iteration counter plus the Adam moment estimates.
struct ScheduleState {
  Schedule schedule = Adam{};
  std::size_t t = 0;
  Eigen::VectorXd m;
  Eigen::VectorXd v;

  explicit ScheduleState(Schedule s = Adam{}) : schedule(s) {}
};

/// (1/S) sum_s h(theta_s) + entropy(q), theta_s drawn from rng's substreams.
double estimate_elbo(const Gaussian& q, const ModelSpec& model, std::ptrdiff_t S, const RngStream& rng);

/// ELBO of a globally quadratic h: C + G^T (mu - mu_e) + quadratic terms + entropy.
double exact_elbo(const Expansion& e, const Gaussian& q);

/// Ascent step lambda <- lambda + eta_t o grad; advances `state`.
Gaussian step(const Gaussian& q, const Eigen::VectorXd& grad, ScheduleState& state);

struct FitRecord {
  std::size_t iter = 0;
  Eigen::VectorXd lambda;
  double elbo = 0.0;
  double grad_norm = 0.0;
  double seconds = 0.0;       // wall clock since start; not serialised
  Eigen::VectorXd variance;   // per-element MC variance of Delta, when requested
};

struct FitTrace {
  std::vector<FitRecord> records;
  Gaussian final_q;
  /// Polyak-Ruppert average of the iterates from FitOptions::average_from on.
  std::optional<Gaussian> averaged_q;
  bool converged = false;
};

struct FitOptions {
  EstimatorKind kind = EstimatorKind::RP;
  std::ptrdiff_t samples = 10;
  std::size_t iters = 1000;
  Schedule schedule = Adam{};
  /// Samples used for the per-iteration ELBO estimate.
  std::ptrdiff_t elbo_samples = 10;
  /// Moving-average window for the convergence test; 0 disables early stopping.
  std::size_t window = 50;
  double rel_tol = 1e-4;
  /// Record the per-element MC variance of Delta every `variance_every`
  /// iterations (0 = never) using `variance_samples` draws.
  std::size_t variance_every = 0;
  std::ptrdiff_t variance_samples = 1000;
  std::size_t workers = 1;
  double divergence_bound = 1e6;
  std::optional<std::size_t> average_from;
};

/// Stochastic-gradient ascent on the ELBO. Iteration t draws its gradient
/// from rng.substream(3t), its ELBO from 3t+1 and variances from 3t+2.
/// Throws DivergenceError if any |lambda_j| exceeds the divergence bound.
FitTrace run_vi(const ModelSpec& model, const Gaussian& init, const FitOptions& opts, const RngStream& rng);

/// Columns: iter, elbo, grad_norm, then lambda_0..lambda_{2k-1} when `with_lambda`.
void write_trace_csv(std::ostream& os, const FitTrace& trace, bool with_lambda = true);

}  // namespace gradvar
