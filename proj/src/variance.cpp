#include "gradvar/variance.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "gradvar/format.hpp"

namespace gradvar {

std::string to_string(Block b) { return b == Block::Mu ? "mu" : "phi"; }

std::string to_string(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::ClosedForm:
      return "closed_form";
    case VarianceMethod::ExactMoment:
      return "exact_moment";
    case VarianceMethod::MonteCarlo:
      return "monte_carlo";
  }
  return "unknown";
}

VarianceReport make_report(EstimatorKind kind, VarianceMethod method, Eigen::VectorXd per_element) {
  VarianceReport r;
  r.kind = kind;
  r.method = method;
  r.per_element = std::move(per_element);
  r.trace = r.per_element.sum();
  return r;
}

namespace {

void check_expansion(const Expansion& e, const Eigen::VectorXd& sigma, Eigen::Index i) {
  if (sigma.size() != e.dim() || e.H.rows() != e.dim() || e.H.cols() != e.dim()) {
    throw std::invalid_argument("variance: expansion/sigma dimension mismatch");
  }
  if (i < 0 || i >= e.dim()) throw std::out_of_range("variance: element index out of range");
}

void check_curvature(const ElementCurvature& c, const Eigen::VectorXd& sigma) {
  if (c.h_row.size() != sigma.size()) throw std::invalid_argument("variance: Hessian row/sigma length mismatch");
  if (c.i < 0 || c.i >= sigma.size()) throw std::out_of_range("variance: element index out of range");
}

// sum_m H_im^2 sigma_m^2
double row_energy(const ElementCurvature& c, const Eigen::VectorXd& sigma) {
  return (c.h_row.array().square() * sigma.array().square()).sum();
}

}  // namespace

ElementCurvature element_curvature(const Expansion& e, Eigen::Index i) {
  if (i < 0 || i >= e.dim()) throw std::out_of_range("element_curvature: index out of range");
  return {i, e.G[i], e.H.row(i).transpose()};
}

ElementCurvature element_curvature(const ModelSpec& model, const Eigen::VectorXd& mu, Eigen::Index i) {
  if (i < 0 || i >= model.dim()) throw std::out_of_range("element_curvature: index out of range");
  ElementCurvature c{i, model.grad_log_joint(mu)[i], model.hessian_row(mu, i)};
  return c;
}

double analytic_var_rp_mu(const ElementCurvature& c, const Eigen::VectorXd& sigma) {
  check_curvature(c, sigma);
  return row_energy(c, sigma);
}

double analytic_var_rp_phi(const ElementCurvature& c, const Eigen::VectorXd& sigma) {
  check_curvature(c, sigma);
  const double s2 = sigma[c.i] * sigma[c.i];
  const double hii = c.h_row[c.i];
  return s2 * (row_energy(c, sigma) + hii * hii * s2 + c.g_i * c.g_i);
}

double analytic_var_rb_mu(const ElementCurvature& c, const Eigen::VectorXd& sigma) {
  check_curvature(c, sigma);
  const double s2 = sigma[c.i] * sigma[c.i];
  const double hii = c.h_row[c.i];
  return 3.0 * row_energy(c, sigma) + 0.75 * hii * hii * s2 + 2.0 * c.g_i * c.g_i;
}

double analytic_var_rb_phi(const ElementCurvature& c, const Eigen::VectorXd& sigma) {
  check_curvature(c, sigma);
  const double s2 = sigma[c.i] * sigma[c.i];
  const double hii = c.h_row[c.i];
  // the m = i term of the row sum is carried by the 37/2 coefficient alone
  const double off_diag = row_energy(c, sigma) - hii * hii * s2;
  return s2 * (10.0 * off_diag + 18.5 * hii * hii * s2 + 10.0 * c.g_i * c.g_i);
}

double analytic_var_rp_mu(const Expansion& e, const Eigen::VectorXd& sigma, Eigen::Index i) {
  check_expansion(e, sigma, i);
  return analytic_var_rp_mu(element_curvature(e, i), sigma);
}

double analytic_var_rp_phi(const Expansion& e, const Eigen::VectorXd& sigma, Eigen::Index i) {
  check_expansion(e, sigma, i);
  return analytic_var_rp_phi(element_curvature(e, i), sigma);
}

double analytic_var_rb_mu(const Expansion& e, const Eigen::VectorXd& sigma, Eigen::Index i) {
  check_expansion(e, sigma, i);
  return analytic_var_rb_mu(element_curvature(e, i), sigma);
}

double analytic_var_rb_phi(const Expansion& e, const Eigen::VectorXd& sigma, Eigen::Index i) {
  check_expansion(e, sigma, i);
  return analytic_var_rb_phi(element_curvature(e, i), sigma);
}

Polynomial log_joint_polynomial(const Expansion& e) {
  Polynomial h = Polynomial::constant(e.C);
  const auto k = static_cast<std::size_t>(e.dim());
  for (std::size_t m = 0; m < k; ++m) {
    h.add_term({{m, 1}}, e.G[static_cast<Eigen::Index>(m)]);
    for (std::size_t n = 0; n < k; ++n) {
      h.add_term({{m, 1}, {n, 1}}, 0.5 * e.H(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)));
    }
  }
  return h;
}

namespace {

// d/d(mu_i, phi_i) log q as a polynomial in u_i
Polynomial score_factor(const Eigen::VectorXd& sigma, Eigen::Index i, Block block) {
  const double inv_var = 1.0 / (sigma[i] * sigma[i]);
  const auto var = static_cast<std::size_t>(i);
  if (block == Block::Mu) return Polynomial::monomial(inv_var, var, 1);
  Polynomial f = Polynomial::monomial(inv_var, var, 2);
  f.add_term({}, -1.0);
  return f;
}

// grad_theta_i h = G_i + sum_m H_im u_m
Polynomial gradient_polynomial(const Expansion& e, Eigen::Index i) {
  Polynomial g = Polynomial::constant(e.G[i]);
  for (Eigen::Index m = 0; m < e.dim(); ++m) g.add_term({{static_cast<std::size_t>(m), 1}}, e.H(i, m));
  return g;
}

Polynomial h_minus_i_polynomial(const Expansion& e, Eigen::Index i) {
  const auto vi = static_cast<std::size_t>(i);
  Polynomial h = Polynomial::monomial(e.G[i], vi, 1);
  for (Eigen::Index m = 0; m < e.dim(); ++m) {
    if (m == i) continue;
    h.add_term({{vi, 1}, {static_cast<std::size_t>(m), 1}}, e.H(i, m));
  }
  h.add_term({{vi, 2}}, 0.5 * e.H(i, i));
  return h;
}

}  // namespace

Polynomial delta_polynomial(EstimatorKind kind, const Expansion& e, const Eigen::VectorXd& sigma, Eigen::Index i,
                            Block block) {
  check_expansion(e, sigma, i);
  switch (kind) {
    case EstimatorKind::Score:
      return log_joint_polynomial(e) * score_factor(sigma, i, block);
    case EstimatorKind::RB:
      return h_minus_i_polynomial(e, i) * score_factor(sigma, i, block);
    case EstimatorKind::RP: {
      Polynomial g = gradient_polynomial(e, i);
      if (block == Block::Mu) return g;
      return Polynomial::monomial(1.0, static_cast<std::size_t>(i), 1) * g;
    }
  }
  throw std::invalid_argument("delta_polynomial: unknown estimator");
}

double exact_var(EstimatorKind kind, const Expansion& e, const Eigen::VectorXd& sigma, Eigen::Index i, Block block) {
  return variance_polynomial(delta_polynomial(kind, e, sigma, i, block), sigma);
}

VarianceReport closed_form_report(EstimatorKind kind, const Expansion& e, const Eigen::VectorXd& sigma) {
  if (kind == EstimatorKind::Score) {
    throw std::invalid_argument("closed_form_report: score variances are only available by exact moments");
  }
  const Eigen::Index k = e.dim();
  Eigen::VectorXd v(2 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (kind == EstimatorKind::RP) {
      v[i] = analytic_var_rp_mu(e, sigma, i);
      v[k + i] = analytic_var_rp_phi(e, sigma, i);
    } else {
      v[i] = analytic_var_rb_mu(e, sigma, i);
      v[k + i] = analytic_var_rb_phi(e, sigma, i);
    }
  }
  return make_report(kind, VarianceMethod::ClosedForm, std::move(v));
}

VarianceReport exact_moment_report(EstimatorKind kind, const Expansion& e, const Eigen::VectorXd& sigma) {
  const Eigen::Index k = e.dim();
  Eigen::VectorXd v(2 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    v[i] = exact_var(kind, e, sigma, i, Block::Mu);
    v[k + i] = exact_var(kind, e, sigma, i, Block::Phi);
  }
  return make_report(kind, VarianceMethod::ExactMoment, std::move(v));
}

VarianceReport mc_variance(EstimatorKind kind, const Gaussian& q, const ModelSpec& model, std::ptrdiff_t S,
                           std::ptrdiff_t R, const RngStream& rng, const EstimatorOptions& opts) {
  if (S < 1 || R < 1 || S * R < 2) throw std::invalid_argument("mc_variance: need S * R >= 2");
  const Eigen::Index dim = 2 * q.dim();

  EstimatorOptions local = opts;
  Expansion expansion;
  if (kind == EstimatorKind::RB && local.expansion == nullptr) {
    expansion = quadratic_expansion_at(model, q.mu);
    local.expansion = &expansion;
  }

  // power sums about the first draw
  Eigen::VectorXd shift;
  Eigen::Matrix<long double, Eigen::Dynamic, 4> sums = Eigen::Matrix<long double, Eigen::Dynamic, 4>::Zero(dim, 4);
  for (std::ptrdiff_t r = 0; r < R; ++r) {
    const Eigen::MatrixXd d = sample_deltas(kind, q, model, S, rng.substream(static_cast<std::uint64_t>(r)), local);
    if (r == 0) shift = d.col(0);
    for (Eigen::Index s = 0; s < d.cols(); ++s) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        const long double x = static_cast<long double>(d(j, s)) - shift[j];
        const long double x2 = x * x;
        sums(j, 0) += x;
        sums(j, 1) += x2;
        sums(j, 2) += x2 * x;
        sums(j, 3) += x2 * x2;
      }
    }
  }

  const auto n = static_cast<long double>(S * R);
  Eigen::VectorXd var(dim), se(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const long double m1 = sums(j, 0) / n;
    const long double r2 = sums(j, 1) / n, r3 = sums(j, 2) / n, r4 = sums(j, 3) / n;
    const long double c2 = r2 - m1 * m1;
    const long double c4 = r4 - 4 * m1 * r3 + 6 * m1 * m1 * r2 - 3 * m1 * m1 * m1 * m1;
    var[j] = static_cast<double>(std::max<long double>(0, c2 * n / (n - 1)));
    se[j] = static_cast<double>(std::sqrt(std::max<long double>(0, (c4 - c2 * c2) / n)));
  }
  VarianceReport report = make_report(kind, VarianceMethod::MonteCarlo, std::move(var));
  report.samples = S;
  report.replications = R;
  report.standard_error = std::move(se);
  return report;
}

double trace_metric(const VarianceReport& report) { return report.per_element.sum(); }

TraceOrdering compare_traces(const VarianceReport& a, const VarianceReport& b) {
  if (a.per_element.size() != b.per_element.size()) {
    throw std::invalid_argument("compare_traces: reports have different dimensions");
  }
  const double ta = trace_metric(a), tb = trace_metric(b);
  if (ta < tb) return TraceOrdering::FirstSmaller;
  if (tb < ta) return TraceOrdering::SecondSmaller;
  return TraceOrdering::Tie;
}

void write_variance_csv(std::ostream& os, const std::vector<VarianceReport>& reports, bool header) {
  if (header) os << "param_index,block,kind,method,variance\n";
  for (const auto& r : reports) {
    const Eigen::Index k = r.dim();
    for (Eigen::Index j = 0; j < r.per_element.size(); ++j) {
      os << (j % k) << ',' << (j < k ? "mu" : "phi") << ',' << to_string(r.kind) << ',' << to_string(r.method) << ','
         << format_double(r.per_element[j]) << '\n';
    }
  }
}

nlohmann::json to_json(const VarianceReport& r) {
  nlohmann::json j;
  j["kind"] = to_string(r.kind);
  j["method"] = to_string(r.method);
  j["per_element"] = std::vector<double>(r.per_element.data(), r.per_element.data() + r.per_element.size());
  j["trace"] = r.trace;
  if (r.samples) j["samples"] = *r.samples;
  if (r.replications) j["replications"] = *r.replications;
  if (r.standard_error.size() > 0) {
    j["standard_error"] =
        std::vector<double>(r.standard_error.data(), r.standard_error.data() + r.standard_error.size());
  }
  return j;
}

}  // namespace gradvar
