#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gradvar/variational.hpp"

using namespace gradvar;

namespace {
Gaussian make_q() {
  Eigen::VectorXd mu(3), sigma(3);
  mu << 0.5, -1.0, 2.0;
  sigma << 0.3, 1.0, 2.5;
  return Gaussian::from_sigma(mu, sigma);
}
}  // namespace

TEST_CASE("packing round-trips") {
  const Gaussian q = make_q();
  const Eigen::VectorXd lambda = q.packed();
  CHECK(lambda.size() == 6);
  CHECK(lambda.head(3) == q.mu);
  CHECK(lambda.tail(3) == q.phi);
  const Gaussian back = Gaussian::from_packed(lambda);
  CHECK(back.mu == q.mu);
  CHECK(back.phi == q.phi);
  CHECK_THROWS_AS(Gaussian::from_packed(Eigen::VectorXd::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(Gaussian(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("transform and inverse") {
  const Gaussian q = make_q();
  Eigen::VectorXd z(3);
  z << 1.0, -0.5, 0.25;
  const Eigen::VectorXd theta = transform(z, q);
  CHECK(theta[0] == doctest::Approx(0.5 + 0.3));
  CHECK(theta[2] == doctest::Approx(2.0 + 2.5 * 0.25));
  CHECK((inverse_transform(theta, q) - z).norm() < 1e-14);
  CHECK_THROWS_AS(transform(Eigen::VectorXd(Eigen::VectorXd::Zero(2)), q), std::invalid_argument);
}

TEST_CASE("log density of a diagonal Gaussian") {
  const Gaussian q = make_q();
  Eigen::VectorXd theta(3);
  theta << 0.1, 0.2, 0.3;
  double expected = 0;
  const Eigen::VectorXd s = q.sigma();
  for (int i = 0; i < 3; ++i) {
    const double u = (theta[i] - q.mu[i]) / s[i];
    expected += -0.5 * u * u - std::log(s[i]) - 0.5 * std::log(2 * std::numbers::pi);
  }
  CHECK(log_density(theta, q) == doctest::Approx(expected));
}

TEST_CASE("score gradient matches finite differences of log q") {
  const Gaussian q = make_q();
  Eigen::VectorXd theta(3);
  theta << 0.9, -2.0, 1.0;
  const Eigen::VectorXd g = score_grad(theta, q);
  const Eigen::VectorXd lambda = q.packed();
  const double h = 1e-6;
  for (int j = 0; j < 6; ++j) {
    Eigen::VectorXd lp = lambda, lm = lambda;
    lp[j] += h;
    lm[j] -= h;
    const double fd =
        (log_density(theta, Gaussian::from_packed(lp)) - log_density(theta, Gaussian::from_packed(lm))) / (2 * h);
    CHECK(g[j] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("entropy and its gradient") {
  const Gaussian q = make_q();
  const double expected = q.phi.sum() + 1.5 * std::log(2 * std::numbers::pi * std::numbers::e);
  CHECK(entropy(q) == doctest::Approx(expected));
  const Eigen::VectorXd g = entropy_grad(q);
  CHECK(g.head(3).isZero());
  CHECK(g.tail(3).isOnes());
}

TEST_CASE("sampling uses one substream per draw") {
  const Gaussian q = make_q();
  const RngStream rng = make_rng(4);
  const Draws d = sample(q, 50, rng);
  const Draws head = sample(q, 10, rng);
  CHECK(d.z.leftCols(10) == head.z);
  CHECK((d.theta - (q.mu.replicate(1, 50).array() + q.sigma().replicate(1, 50).array() * d.z.array()).matrix())
            .norm() < 1e-12);
  CHECK_THROWS_AS(sample(q, 0, rng), std::invalid_argument);
}

TEST_CASE("sample mean and spread") {
  const Gaussian q = make_q();
  const Draws d = sample(q, 20000, make_rng(8));
  const Eigen::VectorXd mean = d.theta.rowwise().mean();
  const Eigen::VectorXd sd =
      ((d.theta.colwise() - mean).array().square().rowwise().sum() / 19999.0).sqrt().matrix();
  const Eigen::VectorXd s = q.sigma();
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(mean[i] - q.mu[i]) < 5 * s[i] / std::sqrt(20000.0));
    CHECK(sd[i] == doctest::Approx(s[i]).epsilon(0.03));
  }
}
