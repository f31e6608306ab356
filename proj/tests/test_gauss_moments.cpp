#include <doctest.h>

#include <cmath>

#include "gradvar/gauss_moments.hpp"
#include "gradvar/rng.hpp"

using namespace gradvar;

TEST_CASE("standard normal moments") {
  CHECK(std_normal_moment(0) == 1);
  CHECK(std_normal_moment(1) == 0);
  CHECK(std_normal_moment(2) == 1);
  CHECK(std_normal_moment(4) == 3);
  CHECK(std_normal_moment(6) == 15);
  CHECK(std_normal_moment(8) == 105);
  CHECK(std_normal_moment(7) == 0);
}

TEST_CASE("expectations of monomials under scaled normals") {
  Eigen::VectorXd sigma(2);
  sigma << 2.0, 0.5;
  CHECK(expect_polynomial(Polynomial::monomial(1.0, 0, 4), sigma) == doctest::Approx(3 * 16.0));
  CHECK(expect_polynomial(Polynomial::monomial(1.0, 0, 2) * Polynomial::monomial(1.0, 1, 2), sigma) ==
        doctest::Approx(4.0 * 0.25));
  CHECK(expect_polynomial(Polynomial::monomial(1.0, 0, 3) * Polynomial::monomial(1.0, 1, 1), sigma) == 0.0);
  CHECK(expect_polynomial(Polynomial::constant(2.5), sigma) == 2.5);
}

TEST_CASE("toy example variance: (u + mu)^2 * u has variance mu^4 + 14 mu^2 + 15") {
  Eigen::VectorXd sigma = Eigen::VectorXd::Ones(1);
  for (double mu : {0.0, 1.0, 2.0}) {
    const Polynomial theta = Polynomial::monomial(1.0, 0, 1) + Polynomial::constant(mu);
    const Polynomial d = theta * theta * Polynomial::monomial(1.0, 0, 1);
    const double expected = std::pow(mu, 4) + 14 * mu * mu + 15;
    CHECK(variance_polynomial(d, sigma) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("ring laws") {
  const Polynomial a = Polynomial::monomial(2.0, 0, 1) + Polynomial::monomial(-1.0, 1, 2);
  const Polynomial b = Polynomial::monomial(3.0, 1, 1) + Polynomial::constant(1.0);
  const Polynomial c = Polynomial::monomial(0.5, 2, 1);
  CHECK(a + b == b + a);
  CHECK(a * b == b * a);
  CHECK((a * b) * c == a * (b * c));
  CHECK(a * (b + c) == a * b + a * c);
  CHECK(a - a == Polynomial{});
  Eigen::VectorXd u(3);
  u << 0.3, -1.2, 2.0;
  CHECK((a * b).evaluate(u) == doctest::Approx(a.evaluate(u) * b.evaluate(u)));
}

TEST_CASE("canonicalisation merges repeated variables and drops zeros") {
  Polynomial p;
  p.add_term({{1, 1}, {0, 2}, {1, 1}}, 2.0);
  CHECK(p == Polynomial::monomial(2.0, 0, 2) * Polynomial::monomial(1.0, 1, 2));
  p.add_term({{0, 2}, {1, 2}}, -2.0);
  CHECK(p == Polynomial{});
  CHECK(p.degree() == 0);
}

TEST_CASE("degree limit") {
  const Polynomial x4 = Polynomial::monomial(1.0, 0, 4);
  CHECK((x4 * x4).degree() == 8);
  CHECK_THROWS_AS(x4 * x4 * Polynomial::monomial(1.0, 1, 1), DegreeOverflow);
  CHECK_THROWS_AS(variance_polynomial(Polynomial::monomial(1.0, 0, 5), Eigen::VectorXd::Ones(1)), DegreeOverflow);
  CHECK_THROWS_AS(expect_polynomial(Polynomial::monomial(1.0, 3, 2), Eigen::VectorXd::Ones(2)), std::out_of_range);
}

TEST_CASE("exact moments agree with Monte Carlo on a random quartic") {
  Eigen::VectorXd sigma(3);
  sigma << 0.7, 1.3, 0.4;
  const Polynomial u0 = Polynomial::monomial(1.0, 0, 1), u1 = Polynomial::monomial(1.0, 1, 1),
                   u2 = Polynomial::monomial(1.0, 2, 1);
  const Polynomial p = u0 * u1 * u1 + 0.5 * u2 * u0 - 2.0 * u1 * u1 * u2 * u0 + Polynomial::constant(0.3);
  const double exact_mean = expect_polynomial(p, sigma);
  const double exact_var = variance_polynomial(p, sigma);

  RngStream rng = make_rng(17);
  const int n = 400000;
  double s1 = 0, s2 = 0;
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd u = standard_normal_vec(rng, 3).cwiseProduct(sigma);
    const double v = p.evaluate(u);
    s1 += v;
    s2 += v * v;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(mean - exact_mean) < 5 * std::sqrt(exact_var / n));
  CHECK(var == doctest::Approx(exact_var).epsilon(0.05));
}
