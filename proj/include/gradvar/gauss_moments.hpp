#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gradvar {

/// Highest total degree a polynomial may carry. The score variance of the
/// phi block squares a degree-4 polynomial, so 8th moments are the ceiling.
inline constexpr unsigned kMaxPolyDegree = 8;

class DegreeOverflow : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// E[z^n] for z ~ N(0, 1): (n-1)!! for even n, 0 for odd n. Supports n <= 16.
inline double std_normal_moment(unsigned n) {
  if (n > 16) throw DegreeOverflow("std_normal_moment: degree above 16 is unsupported");
  if (n % 2 == 1) return 0.0;
  double m = 1.0;
  for (unsigned j = n; j > 1; j -= 2) m *= static_cast<double>(j - 1);
  return m;
}

/// Sorted (variable index, power) pairs; powers are never zero.
using Exponents = std::vector<std::pair<std::size_t, unsigned>>;

inline unsigned total_degree(const Exponents& e) {
  unsigned d = 0;
  for (const auto& [var, pow] : e) d += pow;
  return d;
}

/// Multivariate polynomial in centered variables u_i = theta_i - mu_i.
///
/// Terms are kept in canonical form: one coefficient per exponent pattern,
/// exponent patterns sorted by variable index, zero coefficients dropped.
template <typename Scalar>
class SparsePolynomial {
 public:
  using Terms = std::map<Exponents, Scalar>;

  SparsePolynomial() = default;

  static SparsePolynomial constant(Scalar c) {
    SparsePolynomial p;
    p.add_term({}, c);
    return p;
  }

  /// coeff * u_var^power
  static SparsePolynomial monomial(Scalar coeff, std::size_t var, unsigned power = 1) {
    SparsePolynomial p;
    if (power == 0) {
      p.add_term({}, coeff);
    } else {
      p.add_term({{var, power}}, coeff);
    }
    return p;
  }

  void add_term(Exponents e, Scalar coeff) {
    std::erase_if(e, [](const auto& vp) { return vp.second == 0; });
    std::sort(e.begin(), e.end());
    // merge repeated variables so the key stays canonical
    Exponents merged;
    for (const auto& [var, pow] : e) {
      if (!merged.empty() && merged.back().first == var) {
        merged.back().second += pow;
      } else {
        merged.emplace_back(var, pow);
      }
    }
    if (total_degree(merged) > kMaxPolyDegree) {
      throw DegreeOverflow("SparsePolynomial: term degree exceeds 8");
    }
    auto it = terms_.find(merged);
    if (it == terms_.end()) {
      if (coeff != Scalar(0)) terms_.emplace(std::move(merged), coeff);
      return;
    }
    it->second += coeff;
    if (it->second == Scalar(0)) terms_.erase(it);
  }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  unsigned degree() const {
    unsigned d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
    return d;
  }

  /// Largest variable index used plus one (0 for constants).
  std::size_t num_vars() const {
    std::size_t n = 0;
    for (const auto& [e, c] : terms_) {
      for (const auto& [var, pow] : e) n = std::max(n, var + 1);
    }
    return n;
  }

  template <typename Derived>
  Scalar evaluate(const Eigen::MatrixBase<Derived>& u) const {
    Scalar total(0);
    for (const auto& [e, c] : terms_) {
      Scalar t = c;
      for (const auto& [var, pow] : e) t *= std::pow(u[static_cast<Eigen::Index>(var)], static_cast<int>(pow));
      total += t;
    }
    return total;
  }

  friend bool operator==(const SparsePolynomial& a, const SparsePolynomial& b) { return a.terms_ == b.terms_; }

 private:
  Terms terms_;
};

template <typename Scalar>
SparsePolynomial<Scalar> poly_add(const SparsePolynomial<Scalar>& p, const SparsePolynomial<Scalar>& q) {
  SparsePolynomial<Scalar> r = p;
  for (const auto& [e, c] : q.terms()) r.add_term(e, c);
  return r;
}

template <typename Scalar>
SparsePolynomial<Scalar> poly_scale(const SparsePolynomial<Scalar>& p, Scalar c) {
  SparsePolynomial<Scalar> r;
  if (c == Scalar(0)) return r;
  for (const auto& [e, coeff] : p.terms()) r.add_term(e, coeff * c);
  return r;
}

template <typename Scalar>
SparsePolynomial<Scalar> poly_mul(const SparsePolynomial<Scalar>& p, const SparsePolynomial<Scalar>& q) {
  if (!p.is_zero() && !q.is_zero() && p.degree() + q.degree() > kMaxPolyDegree) {
    throw DegreeOverflow("poly_mul: product degree exceeds 8");
  }
  SparsePolynomial<Scalar> r;
  for (const auto& [ep, cp] : p.terms()) {
    for (const auto& [eq, cq] : q.terms()) {
      Exponents e = ep;
      e.insert(e.end(), eq.begin(), eq.end());
      r.add_term(std::move(e), cp * cq);
    }
  }
  return r;
}

template <typename Scalar>
SparsePolynomial<Scalar> operator+(const SparsePolynomial<Scalar>& p, const SparsePolynomial<Scalar>& q) {
  return poly_add(p, q);
}
template <typename Scalar>
SparsePolynomial<Scalar> operator-(const SparsePolynomial<Scalar>& p, const SparsePolynomial<Scalar>& q) {
  return poly_add(p, poly_scale(q, Scalar(-1)));
}
template <typename Scalar>
SparsePolynomial<Scalar> operator*(const SparsePolynomial<Scalar>& p, const SparsePolynomial<Scalar>& q) {
  return poly_mul(p, q);
}
template <typename Scalar>
SparsePolynomial<Scalar> operator*(Scalar c, const SparsePolynomial<Scalar>& p) {
  return poly_scale(p, c);
}

/// E[p(u)] for independent u_i ~ N(0, sigma_i^2).
template <typename Scalar, typename Derived>
Scalar expect_polynomial(const SparsePolynomial<Scalar>& p, const Eigen::MatrixBase<Derived>& sigma) {
  Scalar total(0);
  for (const auto& [e, c] : p.terms()) {
    Scalar t = c;
    for (const auto& [var, pow] : e) {
      if (var >= static_cast<std::size_t>(sigma.size())) {
        throw std::out_of_range("expect_polynomial: variable index beyond sigma");
      }
      const double m = std_normal_moment(pow);
      if (m == 0.0) {
        t = Scalar(0);
        break;
      }
      t *= std::pow(sigma[static_cast<Eigen::Index>(var)], static_cast<int>(pow)) * m;
    }
    total += t;
  }
  return total;
}

/// Var[p(u)] = E[p^2] - E[p]^2, evaluated exactly through expect_polynomial.
template <typename Scalar, typename Derived>
Scalar variance_polynomial(const SparsePolynomial<Scalar>& p, const Eigen::MatrixBase<Derived>& sigma) {
  if (p.degree() > kMaxPolyDegree / 2) throw DegreeOverflow("variance_polynomial: degree above 4");
  // Centering first is algebraically E[p^2] - E[p]^2 but avoids cancellation.
  SparsePolynomial<Scalar> centered = p;
  centered.add_term({}, -expect_polynomial(p, sigma));
  return expect_polynomial(poly_mul(centered, centered), sigma);
}

using Polynomial = SparsePolynomial<double>;

}  // namespace gradvar
