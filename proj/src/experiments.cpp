#include "gradvar/experiments.hpp"

#include <cmath>
#include <ostream>
#include <set>

#include "gradvar/errors.hpp"
#include "gradvar/format.hpp"
#include "gradvar/mnist.hpp"

namespace gradvar {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown config key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

// number or array of numbers
void read_vector(const json& j, const char* key, std::vector<double>& dst) {
  if (!j.contains(key)) return;
  if (j.at(key).is_number()) {
    dst = {j.at(key).get<double>()};
    return;
  }
  read(j, key, dst);
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Length-1 vectors broadcast to k; empty vectors take `fill`.
Eigen::VectorXd broadcast(const std::vector<double>& v, Eigen::Index k, double fill, const char* what) {
  if (v.empty()) return Eigen::VectorXd::Constant(k, fill);
  if (v.size() == 1) return Eigen::VectorXd::Constant(k, v[0]);
  if (static_cast<Eigen::Index>(v.size()) != k) {
    throw ConfigError(std::string(what) + " has length " + std::to_string(v.size()) + ", model dimension is " +
                      std::to_string(k));
  }
  return to_eigen(v);
}

void write_json_or(const ExperimentConfig& c, std::ostream& os, const json& doc) {
  (void)c;
  os << doc.dump(2) << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration

ExperimentConfig parse_config(const json& j) {
  reject_unknown(j,
                 {"model", "estimators", "estimator", "seed", "samples", "reps", "out", "format", "workers", "mu",
                  "sigma", "sigma_grid", "axis", "index", "values", "points", "iters", "log_every", "schedule", "step",
                  "rm_a", "rm_b", "window", "rel_tol", "elbo_samples", "average_from", "params_out", "images", "labels",
                  "subsample", "quadratic", "logistic", "softmax", "bnn"},
                 "config");
  ExperimentConfig c;
  read(j, "model", c.model);
  std::vector<std::string> names;
  if (j.contains("estimator")) {
    if (j.at("estimator").is_string()) {
      names = {j.at("estimator").get<std::string>()};
    } else {
      read(j, "estimator", names);
    }
  }
  if (j.contains("estimators")) read(j, "estimators", names);
  if (!names.empty()) {
    c.estimators.clear();
    for (const auto& n : names) {
      try {
        c.estimators.push_back(parse_estimator(n));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
  }
  read(j, "seed", c.seed);
  read(j, "samples", c.samples);
  read(j, "reps", c.reps);
  read(j, "out", c.out);
  read(j, "format", c.format);
  read(j, "workers", c.workers);
  read_vector(j, "mu", c.mu);
  read_vector(j, "sigma", c.sigma);
  read_vector(j, "sigma_grid", c.sigma_grid);
  read(j, "axis", c.axis);
  read(j, "index", c.index);
  read_vector(j, "values", c.values);
  read(j, "points", c.points);
  read(j, "iters", c.iters);
  read(j, "log_every", c.log_every);
  read(j, "schedule", c.schedule);
  read(j, "step", c.step);
  read(j, "rm_a", c.rm_a);
  read(j, "rm_b", c.rm_b);
  read(j, "window", c.window);
  read(j, "rel_tol", c.rel_tol);
  read(j, "elbo_samples", c.elbo_samples);
  read(j, "average_from", c.average_from);
  read(j, "params_out", c.params_out);
  read(j, "images", c.images);
  read(j, "labels", c.labels);
  read(j, "subsample", c.subsample);

  if (j.contains("quadratic")) {
    const json& q = j.at("quadratic");
    reject_unknown(q, {"c0", "g0", "h0", "theta0"}, "quadratic");
    read(q, "c0", c.quadratic.c0);
    read_vector(q, "g0", c.quadratic.g0);
    read(q, "h0", c.quadratic.h0);
    read_vector(q, "theta0", c.quadratic.theta0);
  }
  if (j.contains("logistic")) {
    const json& l = j.at("logistic");
    reject_unknown(l, {"n", "theta_true", "prior_sd", "data_seed"}, "logistic");
    read(l, "n", c.logistic.n);
    read_vector(l, "theta_true", c.logistic.theta_true);
    read(l, "prior_sd", c.logistic.prior_sd);
    read(l, "data_seed", c.logistic.data_seed);
  }
  if (j.contains("softmax")) {
    const json& s = j.at("softmax");
    reject_unknown(s, {"data", "images", "labels", "subsample", "pool", "classes", "prior_sd"}, "softmax");
    read(s, "data", c.softmax.data);
    read(s, "images", c.softmax.images);
    read(s, "labels", c.softmax.labels);
    read(s, "subsample", c.softmax.subsample);
    read(s, "pool", c.softmax.pool);
    read(s, "classes", c.softmax.classes);
    read(s, "prior_sd", c.softmax.prior_sd);
  }
  if (j.contains("bnn")) {
    const json& b = j.at("bnn");
    reject_unknown(b, {"n", "hidden", "prior_sd", "noise_var", "data_seed"}, "bnn");
    read(b, "n", c.bnn.n);
    read(b, "hidden", c.bnn.hidden);
    read(b, "prior_sd", c.bnn.prior_sd);
    read(b, "noise_var", c.bnn.noise_var);
    read(b, "data_seed", c.bnn.data_seed);
  }

  static const std::set<std::string> models = {"quadratic", "logistic2d", "softmax", "bnn"};
  if (!models.contains(c.model)) throw ConfigError("unknown model '" + c.model + "'");
  if (c.format != "csv" && c.format != "json") throw ConfigError("format must be csv or json");
  if (c.samples < 1) throw ConfigError("samples must be >= 1");
  if (c.reps < 1) throw ConfigError("reps must be >= 1");
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  if (c.estimators.empty()) throw ConfigError("at least one estimator is required");
  if (c.axis != "iterations" && c.axis != "mu_i" && c.axis != "phi_all") {
    throw ConfigError("axis must be one of iterations|mu_i|phi_all");
  }
  if (c.index < 0) throw ConfigError("index must be >= 0");
  if (c.points < 2) throw ConfigError("points must be >= 2");
  if (c.iters < 1) throw ConfigError("iters must be >= 1");
  if (c.log_every < 1) throw ConfigError("log_every must be >= 1");
  if (c.schedule != "adam" && c.schedule != "robbins_monro") throw ConfigError("schedule must be adam|robbins_monro");
  if (!(c.step > 0) || !(c.rm_a > 0) || !(c.rm_b > 0)) throw ConfigError("step sizes must be positive");
  if (c.window < 0) throw ConfigError("window must be >= 0");
  if (c.elbo_samples < 1) throw ConfigError("elbo_samples must be >= 1");
  if (c.average_from < -1) throw ConfigError("average_from must be >= 0, or -1 to disable");
  for (double s : c.sigma) {
    if (!(s > 0)) throw ConfigError("sigma entries must be positive");
  }
  for (double s : c.sigma_grid) {
    if (!(s > 0)) throw ConfigError("sigma_grid entries must be positive");
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = c.model;
  std::vector<std::string> names;
  for (auto k : c.estimators) names.push_back(to_string(k));
  j["estimators"] = names;
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["reps"] = c.reps;
  j["out"] = c.out;
  j["format"] = c.format;
  j["workers"] = c.workers;
  j["mu"] = c.mu;
  j["sigma"] = c.sigma;
  j["sigma_grid"] = c.sigma_grid;
  j["axis"] = c.axis;
  j["index"] = c.index;
  j["values"] = c.values;
  j["points"] = c.points;
  j["iters"] = c.iters;
  j["log_every"] = c.log_every;
  j["schedule"] = c.schedule;
  j["step"] = c.step;
  j["rm_a"] = c.rm_a;
  j["rm_b"] = c.rm_b;
  j["window"] = c.window;
  j["rel_tol"] = c.rel_tol;
  j["elbo_samples"] = c.elbo_samples;
  j["average_from"] = c.average_from;
  j["params_out"] = c.params_out;
  j["images"] = c.images;
  j["labels"] = c.labels;
  j["subsample"] = c.subsample;
  j["quadratic"] = {{"c0", c.quadratic.c0}, {"g0", c.quadratic.g0}, {"h0", c.quadratic.h0},
                    {"theta0", c.quadratic.theta0}};
  j["logistic"] = {{"n", c.logistic.n}, {"theta_true", c.logistic.theta_true}, {"prior_sd", c.logistic.prior_sd},
                   {"data_seed", c.logistic.data_seed}};
  j["softmax"] = {{"data", c.softmax.data},       {"images", c.softmax.images}, {"labels", c.softmax.labels},
                  {"subsample", c.softmax.subsample}, {"pool", c.softmax.pool},     {"classes", c.softmax.classes},
                  {"prior_sd", c.softmax.prior_sd}};
  j["bnn"] = {{"n", c.bnn.n}, {"hidden", c.bnn.hidden}, {"prior_sd", c.bnn.prior_sd},
              {"noise_var", c.bnn.noise_var}, {"data_seed", c.bnn.data_seed}};
  return j;
}

std::unique_ptr<ModelSpec> build_model(const ExperimentConfig& c) {
  if (c.model == "quadratic") {
    const auto& q = c.quadratic;
    const auto k = static_cast<Eigen::Index>(q.g0.size());
    if (k == 0) throw ConfigError("quadratic.g0 must be non-empty");
    if (static_cast<Eigen::Index>(q.h0.size()) != k) throw ConfigError("quadratic.h0 must be k x k");
    Eigen::MatrixXd h(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
      if (static_cast<Eigen::Index>(q.h0[static_cast<std::size_t>(r)].size()) != k) {
        throw ConfigError("quadratic.h0 must be k x k");
      }
      for (Eigen::Index col = 0; col < k; ++col) h(r, col) = q.h0[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
    }
    try {
      return std::make_unique<ExactQuadratic>(q.c0, to_eigen(q.g0), h, broadcast(q.theta0, k, 0.0, "quadratic.theta0"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (c.model == "logistic2d") {
    const auto& l = c.logistic;
    if (l.theta_true.size() != 2) throw ConfigError("logistic.theta_true must have two entries");
    if (l.n < 1) throw ConfigError("logistic.n must be >= 1");
    if (!(l.prior_sd > 0)) throw ConfigError("logistic.prior_sd must be positive");
    RngStream rng = make_rng(l.data_seed);
    LogisticData data = simulate_logistic_data(l.n, Eigen::Vector2d(l.theta_true[0], l.theta_true[1]), rng);
    return std::make_unique<BayesianLogisticRegression>(std::move(data.inputs), std::move(data.responses), l.prior_sd);
  }
  if (c.model == "softmax") {
    const auto& s = c.softmax;
    ImageDataset data;
    if (!s.data.empty()) {
      data = load_dataset(s.data);
      if (s.subsample > 0 && s.subsample < data.size()) {
        data.images.conservativeResize(s.subsample, Eigen::NoChange);
        data.labels.resize(static_cast<std::size_t>(s.subsample));
      }
    } else if (!s.images.empty() && !s.labels.empty()) {
      data = load_mnist(s.images, s.labels, s.subsample);
    } else {
      throw ConfigError("softmax model needs softmax.data or softmax.images + softmax.labels");
    }
    for (int y : data.labels) {
      if (y < 0 || y >= s.classes) throw DataError("label " + std::to_string(y) + " outside the class range");
    }
    return std::make_unique<MultinomialLogistic>(pooled_features(data, s.pool), data.labels, s.classes, s.prior_sd);
  }
  const auto& b = c.bnn;
  if (b.n < 2) throw ConfigError("bnn.n must be >= 2");
  RngStream rng = make_rng(b.data_seed);
  RegressionData data = simulate_bnn_toy_data(b.n, rng);
  try {
    return std::make_unique<BayesianNeuralNet>(data.inputs, data.responses, b.hidden, b.noise_var, b.prior_sd);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Gaussian config_gaussian(const ExperimentConfig& c, Eigen::Index k) {
  return Gaussian::from_sigma(broadcast(c.mu, k, 0.0, "mu"), broadcast(c.sigma, k, 1.0, "sigma"));
}

EstimatorKind primary_estimator(const ExperimentConfig& c) { return c.estimators.front(); }

// ---------------------------------------------------------------------------
// var-table

std::vector<VarTableRow> var_table(const ExperimentConfig& c) {
  const auto model = build_model(c);
  const Eigen::Index k = model->dim();
  const Eigen::VectorXd mu = broadcast(c.mu, k, 0.0, "mu");
  const ExactQuadratic approx(quadratic_expansion_at(*model, mu));
  const RngStream rng = make_rng(c.seed);
  if (c.samples * c.reps < 2) throw ConfigError("var-table needs samples * reps >= 2");

  EstimatorOptions opts;
  opts.workers = static_cast<std::size_t>(c.workers);
  std::vector<VarTableRow> rows;
  for (double s : c.sigma_grid) {
    const Gaussian q = Gaussian::from_sigma(mu, Eigen::VectorXd::Constant(k, s));
    for (EstimatorKind kind : c.estimators) {
      rows.push_back({s, kind, "true", mc_variance(kind, q, *model, c.samples, c.reps, rng, opts)});
      rows.push_back({s, kind, "approx", mc_variance(kind, q, approx, c.samples, c.reps, rng, opts)});
    }
  }
  return rows;
}

void cmd_var_table(const ExperimentConfig& c, std::ostream& os) {
  const auto rows = var_table(c);
  if (c.format == "json") {
    json doc = json::array();
    for (const auto& r : rows) {
      json e = to_json(r.report);
      e["sigma"] = r.sigma;
      e["target"] = r.target;
      doc.push_back(e);
    }
    write_json_or(c, os, doc);
    return;
  }
  os << "sigma,estimator,target,param_index,block,variance,std_error\n";
  for (const auto& r : rows) {
    const Eigen::Index k = r.report.dim();
    for (Eigen::Index j = 0; j < 2 * k; ++j) {
      os << format_double(r.sigma) << ',' << to_string(r.kind) << ',' << r.target << ',' << (j % k) << ','
         << (j < k ? "mu" : "phi") << ',' << format_double(r.report.per_element[j]) << ','
         << format_double(r.report.standard_error[j]) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// sweep

namespace {

void sweep_point(const ExperimentConfig& c, const ModelSpec& model, const Gaussian& q, const std::string& axis,
                 double value, const RngStream& rng, std::vector<SweepRow>& rows) {
  const Eigen::Index k = q.dim();
  const Eigen::Index i = c.index;
  const Eigen::VectorXd sigma = q.sigma();
  const ElementCurvature curv = element_curvature(model, q.mu, i);
  const double h_norm2 = curv.h_row.squaredNorm();
  const double s_norm2 = sigma.array().square().matrix().squaredNorm();

  EstimatorOptions opts;
  opts.workers = static_cast<std::size_t>(c.workers);
  for (EstimatorKind kind : c.estimators) {
    const VarianceReport r = mc_variance(kind, q, model, c.samples, c.reps, rng, opts);
    rows.push_back({axis, value, kind, VarianceMethod::MonteCarlo, i, Block::Mu, r.per_element[i], h_norm2, s_norm2});
    rows.push_back(
        {axis, value, kind, VarianceMethod::MonteCarlo, i, Block::Phi, r.per_element[k + i], h_norm2, s_norm2});
  }
  rows.push_back({axis, value, EstimatorKind::RP, VarianceMethod::ClosedForm, i, Block::Mu,
                  analytic_var_rp_mu(curv, sigma), h_norm2, s_norm2});
  rows.push_back({axis, value, EstimatorKind::RP, VarianceMethod::ClosedForm, i, Block::Phi,
                  analytic_var_rp_phi(curv, sigma), h_norm2, s_norm2});
}

}  // namespace

std::vector<SweepRow> sweep(const ExperimentConfig& c) {
  const auto model = build_model(c);
  const Eigen::Index k = model->dim();
  if (c.index >= k) throw ConfigError("index " + std::to_string(c.index) + " out of range for dimension " + std::to_string(k));
  if (c.samples * c.reps < 2) throw ConfigError("sweep needs samples * reps >= 2");
  const RngStream rng = make_rng(c.seed);
  std::vector<SweepRow> rows;

  if (c.axis == "iterations") {
    Gaussian init = config_gaussian(c, k);
    if (c.sigma.empty()) init.phi.setConstant(std::log(0.1));
    FitOptions opts = fit_options(c);
    opts.window = 0;
    const FitTrace trace = run_vi(*model, init, opts, rng.substream(0));
    const RngStream var_rng = rng.substream(1);
    sweep_point(c, *model, init, c.axis, 0.0, var_rng, rows);
    for (const auto& rec : trace.records) {
      const std::size_t it = rec.iter + 1;
      if (it % static_cast<std::size_t>(c.log_every) != 0) continue;
      sweep_point(c, *model, Gaussian::from_packed(rec.lambda), c.axis, static_cast<double>(it), var_rng, rows);
    }
    return rows;
  }

  const Gaussian base = config_gaussian(c, k);
  for (double v : c.values) {
    Gaussian q = base;
    if (c.axis == "mu_i") {
      q.mu[c.index] = v;
    } else {
      q.phi.setConstant(v);
    }
    sweep_point(c, *model, q, c.axis, v, rng, rows);
  }
  return rows;
}

void cmd_sweep(const ExperimentConfig& c, std::ostream& os) {
  const auto rows = sweep(c);
  if (c.format == "json") {
    json doc = json::array();
    for (const auto& r : rows) {
      doc.push_back({{"axis", r.axis},
                     {"value", r.value},
                     {"estimator", to_string(r.kind)},
                     {"method", to_string(r.method)},
                     {"param_index", r.param_index},
                     {"block", to_string(r.block)},
                     {"variance", r.variance},
                     {"log_variance", std::log(r.variance)},
                     {"h_row_norm2", r.h_row_norm2},
                     {"sigma_norm2", r.sigma_norm2}});
    }
    write_json_or(c, os, doc);
    return;
  }
  os << "axis,value,estimator,method,param_index,block,variance,log_variance,h_row_norm2,sigma_norm2\n";
  for (const auto& r : rows) {
    os << r.axis << ',' << format_double(r.value) << ',' << to_string(r.kind) << ',' << to_string(r.method) << ','
       << r.param_index << ',' << to_string(r.block) << ',' << format_double(r.variance) << ','
       << format_double(std::log(r.variance)) << ',' << format_double(r.h_row_norm2) << ','
       << format_double(r.sigma_norm2) << '\n';
  }
}

// ---------------------------------------------------------------------------
// cross-section

std::vector<CrossSectionCurve> cross_section(const ExperimentConfig& c) {
  const auto model = build_model(c);
  const Eigen::Index k = model->dim();
  const Eigen::Index i = c.index;
  if (i >= k) throw ConfigError("index " + std::to_string(i) + " out of range for dimension " + std::to_string(k));
  const Gaussian q = config_gaussian(c, k);
  const double sigma_i = std::exp(q.phi[i]);
  const auto n = static_cast<Eigen::Index>(c.points);

  std::vector<CrossSectionCurve> curves;
  for (EstimatorKind kind : c.estimators) {
    if (kind == EstimatorKind::RB) continue;
    const bool score = kind == EstimatorKind::Score;
    const double lo = score ? q.mu[i] - 3.0 * sigma_i : -3.0;
    const double hi = score ? q.mu[i] + 3.0 * sigma_i : 3.0;
    CrossSectionCurve mu_curve{kind, Block::Mu, Eigen::VectorXd::LinSpaced(n, lo, hi), Eigen::VectorXd(n), lo, hi};
    CrossSectionCurve phi_curve = mu_curve;
    phi_curve.block = Block::Phi;
    for (Eigen::Index p = 0; p < n; ++p) {
      Eigen::VectorXd d;
      if (score) {
        Eigen::VectorXd theta = q.mu;
        theta[i] = mu_curve.x[p];
        d = delta_score(theta, q, *model);
      } else {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(k);
        z[i] = mu_curve.x[p];
        d = delta_rp(z, q, *model);
      }
      mu_curve.delta[p] = d[i];
      phi_curve.delta[p] = d[k + i];
    }
    curves.push_back(std::move(mu_curve));
    curves.push_back(std::move(phi_curve));
  }
  return curves;
}

void cmd_cross_section(const ExperimentConfig& c, std::ostream& os) {
  const auto curves = cross_section(c);
  if (c.format == "json") {
    json doc = json::array();
    for (const auto& cv : curves) {
      doc.push_back({{"estimator", to_string(cv.kind)},
                     {"param_index", c.index},
                     {"block", to_string(cv.block)},
                     {"x", to_std(cv.x)},
                     {"delta", to_std(cv.delta)},
                     {"region_lo", cv.region_lo},
                     {"region_hi", cv.region_hi},
                     {"range", cv.range()}});
    }
    write_json_or(c, os, doc);
    return;
  }
  os << "estimator,param_index,block,x,delta,region_lo,region_hi\n";
  for (const auto& cv : curves) {
    for (Eigen::Index p = 0; p < cv.x.size(); ++p) {
      os << to_string(cv.kind) << ',' << c.index << ',' << to_string(cv.block) << ',' << format_double(cv.x[p]) << ','
         << format_double(cv.delta[p]) << ',' << format_double(cv.region_lo) << ',' << format_double(cv.region_hi)
         << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// fit

FitOptions fit_options(const ExperimentConfig& c) {
  FitOptions o;
  o.kind = primary_estimator(c);
  o.samples = c.samples;
  o.iters = static_cast<std::size_t>(c.iters);
  if (c.schedule == "adam") {
    o.schedule = Adam{c.step};
  } else {
    o.schedule = RobbinsMonro{c.rm_a, c.rm_b};
  }
  o.elbo_samples = c.elbo_samples;
  o.window = static_cast<std::size_t>(c.window);
  o.rel_tol = c.rel_tol;
  o.workers = static_cast<std::size_t>(c.workers);
  if (c.average_from >= 0) o.average_from = static_cast<std::size_t>(c.average_from);
  return o;
}

FitTrace fit(const ExperimentConfig& c) {
  const auto model = build_model(c);
  Gaussian init = config_gaussian(c, model->dim());
  if (c.sigma.empty()) init.phi.setConstant(std::log(0.1));
  return run_vi(*model, init, fit_options(c), make_rng(c.seed));
}

json cmd_fit(const ExperimentConfig& c, std::ostream& os) {
  const FitTrace trace = fit(c);
  json params = {{"mu", to_std(trace.final_q.mu)},
                 {"phi", to_std(trace.final_q.phi)},
                 {"sigma", to_std(trace.final_q.sigma())},
                 {"iterations", trace.records.size()},
                 {"converged", trace.converged},
                 {"final_elbo", trace.records.back().elbo}};
  if (trace.averaged_q) {
    params["averaged"] = {{"mu", to_std(trace.averaged_q->mu)},
                          {"phi", to_std(trace.averaged_q->phi)},
                          {"sigma", to_std(trace.averaged_q->sigma())}};
  }
  if (c.format == "json") {
    json doc = params;
    json rows = json::array();
    for (const auto& r : trace.records) {
      rows.push_back({{"iter", r.iter}, {"elbo", r.elbo}, {"grad_norm", r.grad_norm}, {"lambda", to_std(r.lambda)}});
    }
    doc["trace"] = rows;
    write_json_or(c, os, doc);
  } else {
    write_trace_csv(os, trace);
  }
  return params;
}

// ---------------------------------------------------------------------------
// mnist-ingest

void cmd_mnist_ingest(const ExperimentConfig& c) {
  if (c.images.empty() || c.labels.empty()) throw ConfigError("mnist-ingest needs --images and --labels");
  if (c.out.empty() || c.out == "-") throw ConfigError("mnist-ingest needs an --out file path");
  if (c.subsample < 0) throw ConfigError("subsample must be >= 0");
  save_dataset(c.out, load_mnist(c.images, c.labels, c.subsample));
}

}  // namespace gradvar
