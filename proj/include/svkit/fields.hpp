#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "svkit/linalg.hpp"
#include "svkit/polynomial.hpp"

namespace svkit {

/// Axis-aligned box [lo, hi] in R^d.
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& x, double slack = 0.0) const;
  Vec center() const { return 0.5 * (lo + hi); }
  static Box cube(int d, double half_width);
};

enum class Smoothness { AnalyticPolynomial, LipschitzNumeric };

using FieldFunction = std::function<Vec(const Vec&)>;

/// A family X_1..X_m of vector fields on a domain box, with sigma(x) = [X_1(x) ... X_m(x)].
/// Indices are zero-based throughout the C++ interface.
class VectorFieldFamily {
 public:
  static VectorFieldFamily from_polynomials(std::string name, std::vector<PolynomialField> fields, Box domain);
  static VectorFieldFamily from_functions(std::string name, int dim, std::vector<FieldFunction> fields,
                                          Box domain);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  int count() const { return count_; }
  Smoothness smoothness() const { return smoothness_; }
  const Box& domain() const { return domain_; }

  /// Copy of this family with another domain box (same fields).
  VectorFieldFamily with_domain(Box domain) const;

  /// X_i(x). Throws IndexOutOfRange / OutOfDomain.
  Vec field(int i, const Vec& x) const;
  /// DX_i(x); exact for polynomial fields, central differences with step 1e-5*max(1,|x|) otherwise.
  Mat jacobian(int i, const Vec& x) const;
  /// d x m matrix of field values.
  Mat sigma(const Vec& x) const;

  /// Unchecked evaluation used on hot paths (integrators); x need not lie in the domain.
  Vec field_unchecked(int i, const Vec& x) const;
  /// Sum_i beta_i X_i(x), unchecked.
  Vec combination(const Vec& beta, const Vec& x) const;
  /// Allocation-free variant of combination(); out must hold dim() values.
  void combination_into(const double* beta, const double* x, double* out) const;

  const PolynomialField& polynomial(int i) const;

 private:
  void check(int i, const Vec& x) const;

  std::string name_;
  int dim_ = 0;
  int count_ = 0;
  Smoothness smoothness_ = Smoothness::AnalyticPolynomial;
  Box domain_;
  std::vector<PolynomialField> polys_;
  std::vector<std::vector<Polynomial>> jac_polys_;  // [i][k*d + l]
  std::vector<FieldFunction> funcs_;

  // flattened monomials for fast evaluation: per field, per component, [coeff, e_1..e_d] blocks
  struct FlatComponent {
    std::vector<double> coeffs;
    std::vector<int> exps;
  };
  std::vector<std::vector<FlatComponent>> flat_;
};

/// [X_i, X_j](x) = DX_j(x) X_i(x) - DX_i(x) X_j(x).
Vec lie_bracket(const VectorFieldFamily& family, int i, int j, const Vec& x);

struct BracketTerm {
  std::vector<int> word;  // right-nested: [i1, i2, ..., ik] = [X_i1, [X_i2, [..., X_ik]]]
  Vec value;
  int depth = 0;          // word length - 1
};

struct RankCertificate {
  Vec point;
  int depth_used = 0;
  int rank = 0;
  std::vector<BracketTerm> generators;
  Vec singular_values;
};

/// Right-nested bracket words up to the given length, breadth-first; [i,i] words are skipped.
std::vector<std::vector<int>> bracket_words(int count, int max_length);

/// Polynomial field of an iterated bracket word (polynomial families only).
PolynomialField bracket_polynomial(const VectorFieldFamily& family, const std::vector<int>& word);

/// Rank of the span of all right-nested brackets of length <= max_depth at x.
RankCertificate hormander_rank(const VectorFieldFamily& family, const Vec& x, int max_depth, double tol = 1e-8);

/// Built-in families: "euclidean:<d>", "grushin", "heisenberg1". Default domain [-10,10]^d.
VectorFieldFamily catalog_family(std::string_view name);
std::vector<std::string> catalog_family_names();

}  // namespace svkit
