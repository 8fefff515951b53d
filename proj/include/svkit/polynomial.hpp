#pragma once

#include <map>
#include <vector>

#include "svkit/linalg.hpp"

namespace svkit {

/// Sparse multivariate polynomial with real coefficients in a fixed number of variables.
class Polynomial {
 public:
  using Exponents = std::vector<int>;

  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial constant(int nvars, double c);
  static Polynomial variable(int nvars, int k);

  int nvars() const { return nvars_; }
  const std::map<Exponents, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  /// Adds coeff * x^exponents; exact zeros are dropped.
  void add_term(const Exponents& exponents, double coeff);

  double eval(const Vec& x) const;
  Polynomial derivative(int k) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;

 private:
  int nvars_ = 0;
  std::map<Exponents, double> terms_;
};

/// A vector field whose components are polynomials.
struct PolynomialField {
  std::vector<Polynomial> components;

  int dim() const { return static_cast<int>(components.size()); }
  Vec eval(const Vec& x) const;
  Mat jacobian(const Vec& x) const;
  int degree() const;
};

/// [X, Y] = DY X - DX Y, computed symbolically.
PolynomialField bracket(const PolynomialField& X, const PolynomialField& Y);

}  // namespace svkit
