#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gradvar/models.hpp"

using namespace gradvar;

namespace {

Eigen::VectorXd random_theta(Eigen::Index k, std::uint64_t seed, double scale = 0.5) {
  RngStream r = make_rng(seed);
  return scale * standard_normal_vec(r, k);
}

void check_gradient(const ModelSpec& m, const Eigen::VectorXd& theta, double tol = 1e-5) {
  const Eigen::VectorXd g = m.grad_log_joint(theta);
  const Eigen::VectorXd fd = finite_diff_grad([&](const Eigen::VectorXd& t) { return m.log_joint(t); }, theta);
  CHECK((g - fd).lpNorm<Eigen::Infinity>() <= tol * std::max(1.0, g.lpNorm<Eigen::Infinity>()));
}

void check_hessian(const ModelSpec& m, const Eigen::VectorXd& theta, double tol = 1e-5) {
  const auto h = m.hessian_log_joint(theta);
  REQUIRE(h.has_value());
  const Eigen::MatrixXd fd =
      finite_diff_jacobian([&](const Eigen::VectorXd& t) { return m.grad_log_joint(t); }, theta);
  CHECK((*h - fd).lpNorm<Eigen::Infinity>() <= tol * std::max(1.0, h->lpNorm<Eigen::Infinity>()));
  CHECK((*h - h->transpose()).norm() <= 1e-12 * std::max(1.0, h->norm()));
}

BayesianLogisticRegression small_logistic() {
  RngStream r = make_rng(1);
  LogisticData d = simulate_logistic_data(10, Eigen::Vector2d(1.0, -2.0), r);
  return BayesianLogisticRegression(d.inputs, d.responses, 5.0);
}

MultinomialLogistic small_softmax() {
  RngStream r = make_rng(2);
  Eigen::MatrixXd x(30, 4);
  std::vector<int> labels(30);
  for (int n = 0; n < 30; ++n) {
    x.row(n) = standard_normal_vec(r, 4).transpose();
    x(n, 3) = 1.0;
    labels[static_cast<std::size_t>(n)] = n % 3;
  }
  return MultinomialLogistic(x, labels, 3, 2.0);
}

}  // namespace

TEST_CASE("exact quadratic evaluates its definition") {
  Eigen::Vector2d g(1.0, -0.5), t0(0.2, 0.3);
  Eigen::Matrix2d h;
  h << -2.0, 0.5, 0.5, -1.0;
  const ExactQuadratic m(1.5, g, h, t0);
  const Eigen::Vector2d theta(1.0, -1.0);
  const Eigen::Vector2d u = theta - t0;
  CHECK(m.log_joint(theta) == doctest::Approx(1.5 + g.dot(u) + 0.5 * u.dot(h * u)));
  check_gradient(m, theta);
  check_hessian(m, theta);
  CHECK(m.hessian_row(theta, 1) == h.row(1).transpose());

  Eigen::Matrix2d asym = h;
  asym(0, 1) += 0.1;
  CHECK_THROWS_AS(ExactQuadratic(0.0, g, asym, t0), std::invalid_argument);
  CHECK_THROWS_AS(m.log_joint(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("Gaussian log density with normaliser") {
  Eigen::Vector2d mean(1.0, -1.0);
  Eigen::Matrix2d p;
  p << 2.0, 0.3, 0.3, 1.0;
  const ExactQuadratic m = ExactQuadratic::gaussian(mean, p);
  const Eigen::Vector2d theta(0.5, 0.0);
  const Eigen::Vector2d u = theta - mean;
  const double expected = -std::log(2 * std::numbers::pi) + 0.5 * std::log(p.determinant()) - 0.5 * u.dot(p * u);
  CHECK(m.log_joint(theta) == doctest::Approx(expected));
  CHECK_THROWS_AS(ExactQuadratic::gaussian(mean, -p), std::invalid_argument);
}

TEST_CASE("logistic regression gradient and Hessian") {
  const auto m = small_logistic();
  CHECK(m.dim() == 2);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Eigen::VectorXd theta = random_theta(2, 100 + s, 2.0);
    check_gradient(m, theta);
    check_hessian(m, theta);
  }
  // negative definite everywhere
  const auto h = m.hessian_log_joint(Eigen::Vector2d(3.0, -4.0));
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(*h).eigenvalues().maxCoeff() < 0);
}

TEST_CASE("logistic sign convention: P(y=1) = 1 / (1 + exp(x^T theta))") {
  Eigen::MatrixXd x(1, 2);
  x << 1.0, 0.5;
  const Eigen::Vector2d theta(0.4, -1.0);
  const double eta = x.row(0).dot(theta);
  const double p1 = 1.0 / (1.0 + std::exp(eta));
  const double prior = -std::log(2 * std::numbers::pi * 25.0) - theta.squaredNorm() / 50.0;
  const BayesianLogisticRegression one(x, Eigen::VectorXd::Ones(1), 5.0);
  const BayesianLogisticRegression zero(x, Eigen::VectorXd::Zero(1), 5.0);
  CHECK(one.log_joint(theta) - zero.log_joint(theta) == doctest::Approx(std::log(p1) - std::log(1 - p1)));
  CHECK(one.log_joint(theta) == doctest::Approx(std::log(p1) + prior));
}

TEST_CASE("logistic log joint is stable for large linear predictors") {
  Eigen::MatrixXd x(1, 2);
  x << 1.0, 1.0;
  const BayesianLogisticRegression m(x, Eigen::VectorXd::Ones(1), 5.0);
  CHECK(std::isfinite(m.log_joint(Eigen::Vector2d(400.0, 400.0))));
  CHECK(m.grad_log_joint(Eigen::Vector2d(400.0, 400.0)).allFinite());
}

TEST_CASE("simulated logistic data") {
  RngStream r = make_rng(3);
  const LogisticData d = simulate_logistic_data(500, Eigen::Vector2d(0.0, 3.0), r);
  CHECK(d.inputs.rows() == 500);
  CHECK(d.inputs.col(0).isOnes());
  int agree = 0;
  for (int n = 0; n < 500; ++n) {
    CHECK((d.responses[n] == 0.0 || d.responses[n] == 1.0));
    // theta_2 > 0: large x favours y = 0
    agree += (d.inputs(n, 1) > 0) == (d.responses[n] == 0.0);
  }
  CHECK(agree > 350);
}

TEST_CASE("softmax gradient, Hessian and rows") {
  const auto m = small_softmax();
  CHECK(m.dim() == 12);
  const Eigen::VectorXd theta = random_theta(12, 7);
  check_gradient(m, theta);
  check_hessian(m, theta);
  const Eigen::MatrixXd h = *m.hessian_log_joint(theta);
  for (Eigen::Index i = 0; i < 12; ++i) CHECK((m.hessian_row(theta, i) - h.row(i).transpose()).norm() < 1e-12);
  const Eigen::MatrixXd p = m.probabilities(theta);
  CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(MultinomialLogistic(Eigen::MatrixXd::Ones(2, 2), {0, 5}, 3), std::invalid_argument);
}

TEST_CASE("BNN dimensions, data and gradient") {
  RngStream r = make_rng(0);
  const RegressionData d = simulate_bnn_toy_data(40, r);
  CHECK(d.inputs.size() == 40);
  CHECK(d.inputs.minCoeff() == doctest::Approx(-1.0));
  CHECK(d.inputs.maxCoeff() == doctest::Approx(1.0));
  const BayesianNeuralNet m(d.inputs, d.responses);
  CHECK(m.dim() == 481);  // 1*20+20 + 20*20+20 + 20*1+1
  CHECK_FALSE(m.hessian_log_joint(Eigen::VectorXd::Zero(481)).has_value());
  check_gradient(m, random_theta(481, 5), 1e-5);

  const BayesianNeuralNet tiny(d.inputs.head(5), d.responses.head(5), {3}, 0.5, 2.0);
  CHECK(tiny.dim() == 3 + 3 + 3 + 1);
  const Eigen::VectorXd theta = random_theta(tiny.dim(), 9);
  check_gradient(tiny, theta);
  // at theta = 0 the prediction is the output bias
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(tiny.dim());
  zero[tiny.dim() - 1] = 0.7;
  CHECK((tiny.predict(zero).array() - 0.7).abs().maxCoeff() < 1e-15);
}

TEST_CASE("quadratic expansion of an exact quadratic recovers it") {
  Eigen::Vector3d g(1.0, 0.0, -1.0), t0(0.1, 0.2, 0.3), mu(1.0, -1.0, 0.5);
  Eigen::Matrix3d h;
  h << -3, 1, 0, 1, -2, 0.5, 0, 0.5, -1;
  const ExactQuadratic m(2.0, g, h, t0);
  const Expansion e = quadratic_expansion_at(m, mu);
  CHECK(e.C == doctest::Approx(m.log_joint(mu)));
  CHECK((e.G - m.grad_log_joint(mu)).norm() < 1e-12);
  CHECK((e.H - h).norm() < 1e-12);
  const Eigen::Vector3d theta(0.0, 0.0, 0.0);
  CHECK(e.evaluate(theta) == doctest::Approx(m.log_joint(theta)));
  CHECK((e.gradient(theta) - m.grad_log_joint(theta)).norm() < 1e-12);
}

TEST_CASE("expansion falls back to finite differences without a Hessian") {
  RngStream r = make_rng(0);
  const RegressionData d = simulate_bnn_toy_data(6, r);
  const BayesianNeuralNet m(d.inputs, d.responses, {2});
  const Eigen::VectorXd mu = random_theta(m.dim(), 3);
  const Expansion e = quadratic_expansion_at(m, mu);
  CHECK((e.H - e.H.transpose()).norm() == 0.0);
  const Eigen::MatrixXd fd2 = finite_diff_hessian([&](const Eigen::VectorXd& t) { return m.log_joint(t); }, mu);
  CHECK((e.H - fd2).lpNorm<Eigen::Infinity>() < 1e-4);
  CHECK_THROWS_AS(quadratic_expansion_at(m, mu, false), std::runtime_error);
  CHECK((m.hessian_row(mu, 1) - e.H.row(1).transpose()).norm() < 1e-6);
}

TEST_CASE("finite difference helpers on a known function") {
  const auto f = [](const Eigen::VectorXd& t) { return std::sin(t[0]) * std::exp(t[1]); };
  Eigen::Vector2d t(0.3, -0.2);
  const Eigen::VectorXd g = finite_diff_grad(f, t);
  CHECK(g[0] == doctest::Approx(std::cos(0.3) * std::exp(-0.2)).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(std::sin(0.3) * std::exp(-0.2)).epsilon(1e-8));
  const Eigen::MatrixXd h = finite_diff_hessian(f, t);
  CHECK(h(0, 1) == doctest::Approx(std::cos(0.3) * std::exp(-0.2)).epsilon(1e-5));
  CHECK(fd_step(200.0) == doctest::Approx(0.02));
  CHECK(fd_step(-0.5) == doctest::Approx(1e-4));
}

TEST_CASE("Gaussian posterior Hessian factorises as -P") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(4, 4);
  const Eigen::MatrixXd p = a * a.transpose() + 4.0 * Eigen::MatrixXd::Identity(4, 4);
  const ExactQuadratic m = ExactQuadratic::gaussian(Eigen::VectorXd::Zero(4), p);
  const Eigen::MatrixXd neg_h = -*m.hessian_log_joint(Eigen::VectorXd::Zero(4));
  Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
  CHECK(llt.info() == Eigen::Success);
  CHECK((neg_h - p).norm() < 1e-12);
}
