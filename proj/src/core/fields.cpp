#include "svkit/fields.hpp"

#include <cmath>
#include <string>

#include "svkit/error.hpp"

namespace svkit {

bool Box::contains(const Vec& x, double slack) const {
  if (x.size() != lo.size()) return false;
  for (int k = 0; k < x.size(); ++k)
    if (!(x[k] >= lo[k] - slack && x[k] <= hi[k] + slack)) return false;
  return true;
}

Box Box::cube(int d, double half_width) {
  return Box{Vec::Constant(d, -half_width), Vec::Constant(d, half_width)};
}

namespace {

void check_domain(const Box& domain, int dim) {
  if (domain.lo.size() != dim || domain.hi.size() != dim)
    throw Error(ErrorCode::InvalidArgument, "domain box dimension does not match field dimension");
  for (int k = 0; k < dim; ++k)
    if (!(domain.lo[k] < domain.hi[k]))
      throw Error(ErrorCode::InvalidArgument, "domain box must satisfy lo < hi in every coordinate");
}

}  // namespace

VectorFieldFamily VectorFieldFamily::from_polynomials(std::string name, std::vector<PolynomialField> fields,
                                                      Box domain) {
  if (fields.empty()) throw Error(ErrorCode::InvalidArgument, "family needs at least one field");
  VectorFieldFamily fam;
  fam.name_ = std::move(name);
  fam.dim_ = fields.front().dim();
  fam.count_ = static_cast<int>(fields.size());
  fam.smoothness_ = Smoothness::AnalyticPolynomial;
  for (const auto& f : fields) {
    if (f.dim() != fam.dim_) throw Error(ErrorCode::InvalidArgument, "fields have inconsistent dimensions");
    for (const auto& c : f.components)
      if (c.nvars() != fam.dim_ && !c.is_zero())
        throw Error(ErrorCode::InvalidArgument, "polynomial variable count does not match dimension");
  }
  check_domain(domain, fam.dim_);
  fam.domain_ = std::move(domain);
  fam.polys_ = std::move(fields);
  for (auto& f : fam.polys_)
    for (auto& c : f.components)
      if (c.nvars() != fam.dim_) c = Polynomial(fam.dim_);
  fam.flat_.resize(fam.count_);
  for (int i = 0; i < fam.count_; ++i)
    for (const auto& c : fam.polys_[i].components) {
      FlatComponent fc;
      for (const auto& [e, coeff] : c.terms()) {
        fc.coeffs.push_back(coeff);
        fc.exps.insert(fc.exps.end(), e.begin(), e.end());
      }
      fam.flat_[i].push_back(std::move(fc));
    }
  fam.jac_polys_.resize(fam.count_);
  for (int i = 0; i < fam.count_; ++i) {
    auto& jp = fam.jac_polys_[i];
    jp.reserve(fam.dim_ * fam.dim_);
    for (int k = 0; k < fam.dim_; ++k)
      for (int l = 0; l < fam.dim_; ++l) jp.push_back(fam.polys_[i].components[k].derivative(l));
  }
  return fam;
}

VectorFieldFamily VectorFieldFamily::from_functions(std::string name, int dim, std::vector<FieldFunction> fields,
                                                    Box domain) {
  if (fields.empty()) throw Error(ErrorCode::InvalidArgument, "family needs at least one field");
  if (dim <= 0) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  check_domain(domain, dim);
  VectorFieldFamily fam;
  fam.name_ = std::move(name);
  fam.dim_ = dim;
  fam.count_ = static_cast<int>(fields.size());
  fam.smoothness_ = Smoothness::LipschitzNumeric;
  fam.domain_ = std::move(domain);
  fam.funcs_ = std::move(fields);
  return fam;
}

VectorFieldFamily VectorFieldFamily::with_domain(Box domain) const {
  check_domain(domain, dim_);
  VectorFieldFamily out = *this;
  out.domain_ = std::move(domain);
  return out;
}

void VectorFieldFamily::check(int i, const Vec& x) const {
  if (i < 0 || i >= count_)
    throw Error(ErrorCode::IndexOutOfRange,
                "field index " + std::to_string(i) + " out of range [0, " + std::to_string(count_) + ")");
  if (x.size() != dim_)
    throw Error(ErrorCode::InvalidArgument, "point has dimension " + std::to_string(x.size()) + ", expected " +
                                                std::to_string(dim_));
  if (!domain_.contains(x)) throw Error(ErrorCode::OutOfDomain, "point lies outside the domain box");
}

Vec VectorFieldFamily::field_unchecked(int i, const Vec& x) const {
  if (smoothness_ == Smoothness::AnalyticPolynomial) return polys_[i].eval(x);
  Vec v = funcs_[i](x);
  if (v.size() != dim_) throw Error(ErrorCode::InvalidArgument, "field function returned wrong dimension");
  return v;
}

Vec VectorFieldFamily::field(int i, const Vec& x) const {
  check(i, x);
  return field_unchecked(i, x);
}

Mat VectorFieldFamily::jacobian(int i, const Vec& x) const {
  check(i, x);
  Mat J(dim_, dim_);
  if (smoothness_ == Smoothness::AnalyticPolynomial) {
    const auto& jp = jac_polys_[i];
    for (int k = 0; k < dim_; ++k)
      for (int l = 0; l < dim_; ++l) J(k, l) = jp[k * dim_ + l].eval(x);
    return J;
  }
  const double h = 1e-5 * std::max(1.0, x.norm());
  for (int l = 0; l < dim_; ++l) {
    Vec xp = x, xm = x;
    xp[l] += h;
    xm[l] -= h;
    J.col(l) = (field_unchecked(i, xp) - field_unchecked(i, xm)) / (2.0 * h);
  }
  return J;
}

Mat VectorFieldFamily::sigma(const Vec& x) const {
  Mat S(dim_, count_);
  for (int i = 0; i < count_; ++i) S.col(i) = field(i, x);
  return S;
}

void VectorFieldFamily::combination_into(const double* beta, const double* x, double* out) const {
  for (int k = 0; k < dim_; ++k) out[k] = 0.0;
  if (smoothness_ != Smoothness::AnalyticPolynomial) {
    const Vec xv = Eigen::Map<const Vec>(x, dim_);
    for (int i = 0; i < count_; ++i) {
      if (beta[i] == 0.0) continue;
      const Vec v = field_unchecked(i, xv);
      for (int k = 0; k < dim_; ++k) out[k] += beta[i] * v[k];
    }
    return;
  }
  for (int i = 0; i < count_; ++i) {
    if (beta[i] == 0.0) continue;
    for (int k = 0; k < dim_; ++k) {
      const FlatComponent& fc = flat_[i][k];
      double sum = 0.0;
      const int* e = fc.exps.data();
      for (std::size_t t = 0; t < fc.coeffs.size(); ++t, e += dim_) {
        double m = fc.coeffs[t];
        for (int l = 0; l < dim_; ++l)
          for (int j = 0; j < e[l]; ++j) m *= x[l];
        sum += m;
      }
      out[k] += beta[i] * sum;
    }
  }
}

Vec VectorFieldFamily::combination(const Vec& beta, const Vec& x) const {
  Vec v = Vec::Zero(dim_);
  for (int i = 0; i < count_; ++i)
    if (beta[i] != 0.0) v += beta[i] * field_unchecked(i, x);
  return v;
}

const PolynomialField& VectorFieldFamily::polynomial(int i) const {
  if (smoothness_ != Smoothness::AnalyticPolynomial)
    throw Error(ErrorCode::Unsupported, "family '" + name_ + "' has no polynomial representation");
  if (i < 0 || i >= count_) throw Error(ErrorCode::IndexOutOfRange, "field index out of range");
  return polys_[i];
}

Vec lie_bracket(const VectorFieldFamily& family, int i, int j, const Vec& x) {
  return family.jacobian(j, x) * family.field(i, x) - family.jacobian(i, x) * family.field(j, x);
}

std::vector<std::vector<int>> bracket_words(int count, int max_length) {
  std::vector<std::vector<int>> all;
  std::vector<std::vector<int>> prev;
  for (int i = 0; i < count; ++i) prev.push_back({i});
  all = prev;
  for (int len = 2; len <= max_length; ++len) {
    std::vector<std::vector<int>> next;
    for (int i = 0; i < count; ++i)
      for (const auto& w : prev) {
        if (w.size() == 1 && w[0] == i) continue;
        std::vector<int> word{i};
        word.insert(word.end(), w.begin(), w.end());
        next.push_back(std::move(word));
      }
    all.insert(all.end(), next.begin(), next.end());
    prev = std::move(next);
  }
  return all;
}

PolynomialField bracket_polynomial(const VectorFieldFamily& family, const std::vector<int>& word) {
  if (word.empty()) throw Error(ErrorCode::InvalidArgument, "empty bracket word");
  PolynomialField acc = family.polynomial(word.back());
  for (auto it = word.rbegin() + 1; it != word.rend(); ++it) acc = bracket(family.polynomial(*it), acc);
  return acc;
}

namespace {

int numerical_rank(const Vec& sv, double tol) {
  if (sv.size() == 0) return 0;
  const double scale = std::max(sv.maxCoeff(), 1.0);
  int r = 0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv[k] > tol * scale) ++r;
  return r;
}

Vec singular_values(const Mat& M) {
  if (M.cols() == 0) return Vec();
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues();
}

}  // namespace

RankCertificate hormander_rank(const VectorFieldFamily& family, const Vec& x, int max_depth, double tol) {
  if (max_depth < 1) throw Error(ErrorCode::InvalidArgument, "max_depth must be at least 1");
  if (max_depth >= 2 && family.smoothness() != Smoothness::AnalyticPolynomial)
    throw Error(ErrorCode::Unsupported,
                "iterated brackets require polynomial fields; family '" + family.name() + "' is numeric");
  const int d = family.dim();
  if (x.size() != d || !family.domain().contains(x))
    throw Error(ErrorCode::OutOfDomain, "rank query point lies outside the domain box");

  std::vector<BracketTerm> terms;
  std::map<std::vector<int>, PolynomialField> cache;
  for (const auto& word : bracket_words(family.count(), max_depth)) {
    BracketTerm t;
    t.word = word;
    t.depth = static_cast<int>(word.size()) - 1;
    if (word.size() == 1) {
      t.value = family.field(word[0], x);
    } else {
      // right-nested words reuse the cached inner bracket
      std::vector<int> inner(word.begin() + 1, word.end());
      const PolynomialField& in = cache.at(inner);
      PolynomialField f = bracket(family.polynomial(word[0]), in);
      t.value = f.eval(x);
      cache.emplace(word, std::move(f));
    }
    if (word.size() == 1 && max_depth >= 2) cache.emplace(word, family.polynomial(word[0]));
    if (!t.value.allFinite()) throw Error(ErrorCode::Numerical, "non-finite bracket value");
    terms.push_back(std::move(t));
  }

  Mat stacked(d, static_cast<int>(terms.size()));
  for (std::size_t k = 0; k < terms.size(); ++k) stacked.col(static_cast<int>(k)) = terms[k].value;

  RankCertificate cert;
  cert.point = x;
  cert.depth_used = max_depth;
  cert.singular_values = singular_values(stacked);
  cert.rank = numerical_rank(cert.singular_values, tol);

  Mat selected(d, 0);
  int current = 0;
  for (const auto& t : terms) {
    if (current == cert.rank) break;
    Mat trial(d, selected.cols() + 1);
    trial << selected, t.value;
    const int r = numerical_rank(singular_values(trial), tol);
    if (r > current) {
      selected = std::move(trial);
      current = r;
      cert.generators.push_back(t);
    }
  }
  return cert;
}

namespace {

Polynomial monomial(int d, std::vector<int> e, double c) {
  Polynomial p(d);
  p.add_term(e, c);
  return p;
}

}  // namespace

VectorFieldFamily catalog_family(std::string_view name) {
  const std::string n(name);
  if (n.rfind("euclidean:", 0) == 0) {
    int d = 0;
    try {
      std::size_t pos = 0;
      d = std::stoi(n.substr(10), &pos);
      if (pos != n.size() - 10) d = 0;
    } catch (const std::exception&) {
      d = 0;
    }
    if (d <= 0) throw Error(ErrorCode::InvalidArgument, "bad euclidean family name '" + n + "'");
    std::vector<PolynomialField> fields;
    for (int i = 0; i < d; ++i) {
      PolynomialField f;
      for (int k = 0; k < d; ++k) f.components.push_back(Polynomial::constant(d, k == i ? 1.0 : 0.0));
      fields.push_back(std::move(f));
    }
    return VectorFieldFamily::from_polynomials(n, std::move(fields), Box::cube(d, 10.0));
  }
  if (n == "grushin") {
    PolynomialField x1{{Polynomial::constant(2, 1.0), Polynomial(2)}};
    PolynomialField x2{{Polynomial(2), Polynomial::variable(2, 0)}};
    return VectorFieldFamily::from_polynomials(n, {x1, x2}, Box::cube(2, 10.0));
  }
  if (n == "heisenberg1") {
    PolynomialField x1{{Polynomial::constant(3, 1.0), Polynomial(3), monomial(3, {0, 1, 0}, 2.0)}};
    PolynomialField x2{{Polynomial(3), Polynomial::constant(3, 1.0), monomial(3, {1, 0, 0}, -2.0)}};
    return VectorFieldFamily::from_polynomials(n, {x1, x2}, Box::cube(3, 10.0));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown catalog family '" + n + "'");
}

std::vector<std::string> catalog_family_names() { return {"euclidean:<d>", "grushin", "heisenberg1"}; }

}  // namespace svkit
