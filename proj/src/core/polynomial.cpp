#include "svkit/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "svkit/error.hpp"

namespace svkit {

Polynomial Polynomial::constant(int nvars, double c) {
  Polynomial p(nvars);
  p.add_term(Exponents(nvars, 0), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int k) {
  Polynomial p(nvars);
  Exponents e(nvars, 0);
  e.at(k) = 1;
  p.add_term(e, 1.0);
  return p;
}

int Polynomial::degree() const {
  int deg = 0;
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int v : e) s += v;
    deg = std::max(deg, s);
  }
  return deg;
}

void Polynomial::add_term(const Exponents& exponents, double coeff) {
  if (static_cast<int>(exponents.size()) != nvars_)
    throw Error(ErrorCode::InvalidArgument, "monomial has " + std::to_string(exponents.size()) +
                                                " exponents, expected " + std::to_string(nvars_));
  for (int v : exponents)
    if (v < 0) throw Error(ErrorCode::InvalidArgument, "negative exponent in monomial");
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(exponents, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::eval(const Vec& x) const {
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double m = c;
    for (int k = 0; k < nvars_; ++k)
      for (int j = 0; j < e[k]; ++j) m *= x[k];
    sum += m;
  }
  return sum;
}

Polynomial Polynomial::derivative(int k) const {
  Polynomial out(nvars_);
  for (const auto& [e, c] : terms_) {
    if (e[k] == 0) continue;
    Exponents f = e;
    f[k] -= 1;
    out.add_term(f, c * e[k]);
  }
  return out;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial out = *this;
  if (out.nvars_ == 0) out.nvars_ = o.nvars_;
  for (const auto& [e, c] : o.terms_) out.add_term(e, c);
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial out(std::max(nvars_, o.nvars_));
  for (const auto& [e1, c1] : terms_)
    for (const auto& [e2, c2] : o.terms_) {
      Exponents e(e1.size());
      for (std::size_t k = 0; k < e.size(); ++k) e[k] = e1[k] + e2[k];
      out.add_term(e, c1 * c2);
    }
  return out;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial out(nvars_);
  for (const auto& [e, c] : terms_) out.add_term(e, c * s);
  return out;
}

Vec PolynomialField::eval(const Vec& x) const {
  Vec v(dim());
  for (int k = 0; k < dim(); ++k) v[k] = components[k].eval(x);
  return v;
}

Mat PolynomialField::jacobian(const Vec& x) const {
  const int d = dim();
  Mat J(d, d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) J(k, l) = components[k].derivative(l).eval(x);
  return J;
}

int PolynomialField::degree() const {
  int deg = 0;
  for (const auto& c : components) deg = std::max(deg, c.degree());
  return deg;
}

PolynomialField bracket(const PolynomialField& X, const PolynomialField& Y) {
  const int d = X.dim();
  if (Y.dim() != d) throw Error(ErrorCode::InvalidArgument, "bracket of fields with different dimensions");
  PolynomialField out;
  out.components.assign(d, Polynomial(d));
  for (int k = 0; k < d; ++k) {
    Polynomial acc(d);
    for (int l = 0; l < d; ++l) {
      acc = acc + X.components[l] * Y.components[k].derivative(l);
      acc = acc - Y.components[l] * X.components[k].derivative(l);
    }
    out.components[k] = acc;
  }
  return out;
}

}  // namespace svkit
