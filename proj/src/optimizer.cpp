#include "gradvar/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "gradvar/errors.hpp"
#include "gradvar/format.hpp"
#include "gradvar/variance.hpp"

namespace gradvar {

double estimate_elbo(const Gaussian& q, const ModelSpec& model, std::ptrdiff_t S, const RngStream& rng) {
  if (S < 1) throw std::invalid_argument("estimate_elbo: S must be >= 1");
  const Draws d = sample(q, S, rng);
  double sum = 0.0;
  for (std::ptrdiff_t s = 0; s < S; ++s) sum += model.log_joint(d.theta.col(s));
  return sum / static_cast<double>(S) + entropy(q);
}

double exact_elbo(const Expansion& e, const Gaussian& q) {
  const Eigen::VectorXd sigma2 = q.sigma().array().square();
  return e.evaluate(q.mu) + 0.5 * (e.H.diagonal().array() * sigma2.array()).sum() + entropy(q);
}

Gaussian step(const Gaussian& q, const Eigen::VectorXd& grad, ScheduleState& state) {
  const Eigen::VectorXd lambda = q.packed();
  if (grad.size() != lambda.size()) throw std::invalid_argument("step: gradient length mismatch");
  Eigen::VectorXd next;
  if (const auto* rm = std::get_if<RobbinsMonro>(&state.schedule)) {
    const double eta = rm->a / (rm->b + static_cast<double>(state.t));
    next = lambda + eta * grad;
  } else {
    const auto& adam = std::get<Adam>(state.schedule);
    if (state.m.size() != grad.size()) {
      state.m = Eigen::VectorXd::Zero(grad.size());
      state.v = Eigen::VectorXd::Zero(grad.size());
    }
    state.m = adam.beta1 * state.m + (1.0 - adam.beta1) * grad;
    state.v = adam.beta2 * state.v + (1.0 - adam.beta2) * grad.cwiseProduct(grad);
    const double t = static_cast<double>(state.t + 1);
    const Eigen::ArrayXd m_hat = state.m.array() / (1.0 - std::pow(adam.beta1, t));
    const Eigen::ArrayXd v_hat = state.v.array() / (1.0 - std::pow(adam.beta2, t));
    next = lambda.array() + adam.step * m_hat / (v_hat.sqrt() + adam.eps);
  }
  ++state.t;
  return Gaussian::from_packed(next);
}

FitTrace run_vi(const ModelSpec& model, const Gaussian& init, const FitOptions& opts, const RngStream& rng) {
  if (opts.iters < 1) throw std::invalid_argument("run_vi: iters must be >= 1");
  if (init.dim() != model.dim()) throw std::invalid_argument("run_vi: init dimension mismatch");

  const auto start = std::chrono::steady_clock::now();
  FitTrace trace;
  Gaussian q = init;
  ScheduleState state(opts.schedule);
  EstimatorOptions est;
  est.workers = opts.workers;

  Eigen::VectorXd lambda_sum = Eigen::VectorXd::Zero(2 * init.dim());
  std::size_t averaged = 0;
  std::vector<double> elbos;
  elbos.reserve(opts.iters);
  for (std::size_t t = 0; t < opts.iters; ++t) {
    const auto base = static_cast<std::uint64_t>(3 * t);
    const Eigen::VectorXd grad = estimate_gradient(opts.kind, q, model, opts.samples, rng.substream(base), est);

    FitRecord rec;
    rec.iter = t;
    rec.elbo = estimate_elbo(q, model, opts.elbo_samples, rng.substream(base + 1));
    rec.grad_norm = grad.norm();
    if (opts.variance_every > 0 && t % opts.variance_every == 0) {
      rec.variance = mc_variance(opts.kind, q, model, opts.variance_samples, 1, rng.substream(base + 2), est).per_element;
    }

    q = step(q, grad, state);
    rec.lambda = q.packed();
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!rec.lambda.allFinite() || rec.lambda.cwiseAbs().maxCoeff() > opts.divergence_bound) {
      throw DivergenceError("run_vi: variational parameters diverged at iteration " + std::to_string(t));
    }
    if (opts.average_from && t >= *opts.average_from) {
      lambda_sum += rec.lambda;
      ++averaged;
    }
    elbos.push_back(rec.elbo);
    trace.records.push_back(std::move(rec));

    // Compare the mean ELBO of the last two non-overlapping windows.
    const std::size_t w = opts.window;
    if (w > 0 && elbos.size() >= 2 * w) {
      double recent = 0.0, previous = 0.0;
      for (std::size_t j = elbos.size() - w; j < elbos.size(); ++j) recent += elbos[j];
      for (std::size_t j = elbos.size() - 2 * w; j < elbos.size() - w; ++j) previous += elbos[j];
      recent /= static_cast<double>(w);
      previous /= static_cast<double>(w);
      if (std::abs(recent - previous) <= opts.rel_tol * std::abs(previous)) {
        trace.converged = true;
        break;
      }
    }
  }
  trace.final_q = q;
  if (averaged > 0) trace.averaged_q = Gaussian::from_packed(lambda_sum / static_cast<double>(averaged));
  return trace;
}

void write_trace_csv(std::ostream& os, const FitTrace& trace, bool with_lambda) {
  os << "iter,elbo,grad_norm";
  const Eigen::Index n = trace.records.empty() ? 0 : trace.records.front().lambda.size();
  if (with_lambda) {
    for (Eigen::Index j = 0; j < n; ++j) os << ",lambda_" << j;
  }
  os << '\n';
  for (const auto& r : trace.records) {
    os << r.iter << ',' << format_double(r.elbo) << ',' << format_double(r.grad_norm);
    if (with_lambda) {
      for (Eigen::Index j = 0; j < r.lambda.size(); ++j) os << ',' << format_double(r.lambda[j]);
    }
    os << '\n';
  }
}

}  // namespace gradvar
