#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "gradvar/errors.hpp"
#include "gradvar/experiments.hpp"

namespace {

using nlohmann::json;

// Flags land in a JSON object with the config-file schema and override it key by key.
struct Flags {
  std::string config;
  json overrides = json::object();
  std::vector<std::function<void()>> collect;

  template <typename T>
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<std::optional<T>>();
    app->add_option(flag, *value, help);
    collect.push_back([this, value, key] {
      if (value->has_value()) overrides[key] = **value;
    });
  }
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file (same keys as the flags)");
  f.add<std::uint64_t>(app, "--seed", "seed", "RNG seed");
  f.add<std::int64_t>(app, "--samples", "samples", "Monte Carlo samples S");
  f.add<std::int64_t>(app, "--reps", "reps", "replications R");
  f.add<std::string>(app, "--model", "model", "quadratic|logistic2d|softmax|bnn");
  f.add<std::vector<std::string>>(app, "--estimator", "estimators", "score|rp|rb (repeatable)");
  f.add<std::string>(app, "--out", "out", "output path, - for stdout");
  f.add<std::string>(app, "--format", "format", "csv|json");
  f.add<std::int64_t>(app, "--workers", "workers", "worker threads");
  f.add<std::vector<double>>(app, "--mu", "mu", "variational means (one value broadcasts)");
  f.add<std::vector<double>>(app, "--sigma", "sigma", "variational scales (one value broadcasts)");
}

json load_config(const Flags& f) {
  json j = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw gradvar::ConfigError("cannot open config file " + f.config);
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw gradvar::ConfigError("config file " + f.config + ": " + e.what());
    }
    if (!j.is_object()) throw gradvar::ConfigError("config file must hold a JSON object");
  }
  for (const auto& [key, value] : f.overrides.items()) j[key] = value;
  return j;
}

template <typename Fn>
void with_output(const gradvar::ExperimentConfig& c, Fn&& fn) {
  if (c.out == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream os(c.out, std::ios::binary);
  if (!os) throw gradvar::ConfigError("cannot open output file " + c.out);
  fn(os);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variance of ELBO gradient estimators for mean-field Gaussian VI"};
  app.require_subcommand(1);
  Flags f;

  auto* var_table = app.add_subcommand("var-table", "MC variances over a sigma grid, true vs quadratic target");
  add_common(var_table, f);
  f.add<std::vector<double>>(var_table, "--sigma-grid", "sigma_grid", "sigma values");

  auto* sweep = app.add_subcommand("sweep", "marginal variances along a sweep axis");
  add_common(sweep, f);
  f.add<std::string>(sweep, "--axis", "axis", "iterations|mu_i|phi_all");
  f.add<std::int64_t>(sweep, "--index", "index", "parameter index i");
  f.add<std::vector<double>>(sweep, "--values", "values", "sweep values");
  f.add<std::int64_t>(sweep, "--iters", "iters", "iterations (axis=iterations)");
  f.add<std::int64_t>(sweep, "--log-every", "log_every", "variance logging cadence (axis=iterations)");

  auto* cross = app.add_subcommand("cross-section", "Delta functions along one coordinate");
  add_common(cross, f);
  f.add<std::int64_t>(cross, "--index", "index", "parameter index i");
  f.add<std::int64_t>(cross, "--points", "points", "grid points");

  auto* fit = app.add_subcommand("fit", "run stochastic-gradient VI");
  add_common(fit, f);
  f.add<std::int64_t>(fit, "--iters", "iters", "iterations");
  f.add<std::string>(fit, "--schedule", "schedule", "adam|robbins_monro");
  f.add<double>(fit, "--step", "step", "Adam step size");
  f.add<double>(fit, "--rm-a", "rm_a", "Robbins-Monro a in a / (b + t)");
  f.add<double>(fit, "--rm-b", "rm_b", "Robbins-Monro b in a / (b + t)");
  f.add<std::int64_t>(fit, "--window", "window", "convergence window, 0 disables early stopping");
  f.add<double>(fit, "--rel-tol", "rel_tol", "relative ELBO change for convergence");
  f.add<std::int64_t>(fit, "--average-from", "average_from", "average iterates from this iteration on");
  f.add<std::string>(fit, "--params-out", "params_out", "final lambda JSON path");

  auto* ingest = app.add_subcommand("mnist-ingest", "validate IDX files and write the binary cache");
  add_common(ingest, f);
  f.add<std::string>(ingest, "--images", "images", "IDX3 image file");
  f.add<std::string>(ingest, "--labels", "labels", "IDX1 label file");
  f.add<std::int64_t>(ingest, "--subsample", "subsample", "keep the first N records");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (auto& c : f.collect) c();
    const gradvar::ExperimentConfig c = gradvar::parse_config(load_config(f));

    if (var_table->parsed()) {
      with_output(c, [&](std::ostream& os) { gradvar::cmd_var_table(c, os); });
    } else if (sweep->parsed()) {
      with_output(c, [&](std::ostream& os) { gradvar::cmd_sweep(c, os); });
    } else if (cross->parsed()) {
      with_output(c, [&](std::ostream& os) { gradvar::cmd_cross_section(c, os); });
    } else if (fit->parsed()) {
      json params;
      with_output(c, [&](std::ostream& os) { params = gradvar::cmd_fit(c, os); });
      std::string path = c.params_out;
      if (path.empty() && c.out != "-") path = c.out + ".params.json";
      if (path.empty()) {
        std::cerr << params.dump(2) << '\n';
      } else {
        std::ofstream ps(path, std::ios::binary);
        if (!ps) throw gradvar::ConfigError("cannot open " + path);
        ps << params.dump(2) << '\n';
      }
    } else if (ingest->parsed()) {
      gradvar::cmd_mnist_ingest(c);
    }
  } catch (const gradvar::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const gradvar::DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return 3;
  } catch (const gradvar::DivergenceError& e) {
    fmt::print(stderr, "divergence: {}\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
