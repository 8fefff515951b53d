#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "svkit/fields.hpp"
#include "svkit/linalg.hpp"

namespace svkit {

/// Evaluation point (x, r, p, X) of an operator F(x, r, p, X). For operators over horizontal
/// jets (G-operators) the p and X slots carry q and Y of size m.
struct Jet {
  Vec x;
  double r = 0.0;
  Vec p;
  Mat X;
};

/// Declared scaling function phi in F(x, xi s, xi p, xi X) >= phi(xi) F(x, s, p, X).
struct Scaling {
  enum class Kind {
    Power,         // phi(xi) = xi^exponent
    JetDependent,  // phi(xi, jet) supplied as a function
    Implication,   // only F > 0 => F(xi .) > 0 is claimed
    Undeclared,
  };
  Kind kind = Kind::Undeclared;
  double exponent = 1.0;
  std::function<double(double, const Jet&)> phi;

  static Scaling power(double a) { return {Kind::Power, a, {}}; }
  static Scaling none() { return {}; }
  double value(double xi, const Jet& jet) const;
  std::string describe() const;
};

struct OperatorSpec {
  std::function<double(const Jet&)> evaluator;
  Scaling scaling;
  bool proper = true;
  bool singular_at_zero_gradient = false;
  std::string label;
  int dim = 0;       // size of x
  int grad_dim = 0;  // size of p (and of the square X)
  /// Optional extra query directions at x (degenerate directions of diffusion matrices).
  std::function<std::vector<Vec>(const Vec&)> probe_directions;

  double operator()(const Jet& jet) const { return evaluator(jet); }
  double eval(const Vec& x, double r, const Vec& p, const Mat& X) const { return evaluator(Jet{x, r, p, X}); }
};

enum class PucciSign { Plus, Minus };

/// Closed-form Pucci extremal operator via eigenvalues; |e| < 1e-12 max|e| is treated as zero.
double pucci_extremal(const Mat& M, double lambda, double Lambda, PucciSign sign);

/// Best of -Tr(A M) over random A with lambda I <= A <= Lambda I (sup for Plus, inf for Minus),
/// optionally including the analytic optimiser built from M's eigenbasis.
double pucci_variational_oracle(const Mat& M, double lambda, double Lambda, PucciSign sign, int n_samples,
                                std::uint64_t seed, bool include_optimum = true);

/// -|q|^(h-3) q.Yq
double infinity_laplacian(const Vec& q, const Mat& Y, double h);
/// -(|q|^(m-2) Tr Y + (m-2) |q|^(m-4) q.Yq)
double m_laplacian(const Vec& q, const Mat& Y, double m_exp);

/// A horizontal principal part E(q, Y), positively homogeneous of the given degree.
struct HorizontalPart {
  std::function<double(const Vec&, const Mat&)> fn;
  double degree = 1.0;
  bool singular_at_zero = false;
  std::string label;
};

HorizontalPart pucci_part(double lambda, double Lambda, PucciSign sign);
HorizontalPart infinity_laplacian_part(double h);
HorizontalPart m_laplacian_part(double m_exp);

struct ModelCoefficients {
  std::function<double(const Vec&)> c;  // >= 0; empty means c == 0
  std::function<double(const Vec&)> a;  // > 0
  double k = 1.0;
  HorizontalPart E;
};

/// G(x, r, q, Y) = c(x)|r|^(k-1) r + a(x) E(q, Y). Rejects c != 0 with degree(E) > k.
OperatorSpec build_model_equation(const ModelCoefficients& coeffs, const VectorFieldFamily& family);

/// Pucci operator F(x, r, p, X) = M(X) on R^d.
OperatorSpec pucci_operator(int d, double lambda, double Lambda, PucciSign sign);

/// One member L^alpha u = -Tr(A D^2u) - b.Du + c u (and source f) of a linear family.
struct LinearTerm {
  std::function<Mat(const Vec&)> A;
  std::function<Vec(const Vec&)> b;       // empty: 0
  std::function<double(const Vec&)> c;    // empty: 0
  std::function<double(const Vec&)> f;    // empty: 0
  std::function<Mat(const Vec&)> sigma;   // optional factor, A = sigma sigma^T
};

struct LinearOperatorFamily {
  int dim = 0;
  std::vector<LinearTerm> terms;

  Mat A(std::size_t alpha, const Vec& x) const;
  Vec b(std::size_t alpha, const Vec& x) const;
  double c(std::size_t alpha, const Vec& x) const;
  double f(std::size_t alpha, const Vec& x) const;
  /// -Tr(A X) - b.p + c r [- f]
  double apply(std::size_t alpha, const Jet& jet, bool homogeneous) const;
};

/// Two-parameter family L^{alpha,beta}, indexed terms[alpha][beta].
struct IsaacsFamily {
  int dim = 0;
  std::vector<std::vector<LinearTerm>> terms;
};

enum class HjbMode { Inf, Sup };
enum class IsaacsMode { InfSup, SupInf };  // InfSup: F+ = inf_a sup_b; SupInf: F- = sup_b inf_a

OperatorSpec build_hjb(const LinearOperatorFamily& family, HjbMode mode, bool homogeneous);
OperatorSpec build_isaacs(const IsaacsFamily& family, IsaacsMode mode);
/// The single linear operator -Tr(A X) - b.p + c r.
OperatorSpec linear_operator(const LinearTerm& term, int dim);

/// F^-(x, r, p, X) = -F(x, -r, -p, -X).
OperatorSpec reflect_operator(const OperatorSpec& F);

/// F(x, r, p, X) = G(x, r, sigma^T p, sigma^T X sigma + g(x, p)).
OperatorSpec euclideanize(const OperatorSpec& G, const VectorFieldFamily& family);

/// F(x, X) = -Tr X / (1 + |Tr X|) + f(x), with phi = 1 for Tr X >= 0 and xi otherwise.
OperatorSpec smooth_counterexample_operator(std::function<double(const Vec&)> f, int dim);

struct AuditSpec {
  Box x_box;
  std::vector<Vec> x_points;  // when non-empty, jets are sampled at each of these points
  int n_samples = 200;        // per point when x_points is set, in total otherwise
  double p_scale = 1.0;
  double X_scale = 1.0;
  std::vector<double> xi_grid;  // default 2^-k, k = 0..10
  std::vector<double> s_grid{-1.0, -0.5, -0.1, 0.0};
  double tol = 1e-9;
  std::uint64_t seed = 1;
};

struct AuditWitness {
  std::string check;  // "proper-X", "proper-r", "scaling"
  Jet jet;
  double xi = 1.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct AuditReport {
  bool proper_ok = true;
  bool scaling_ok = true;
  bool scaling_checked = false;
  std::vector<AuditWitness> witnesses;          // capped at max_witnesses
  std::size_t violation_count = 0;
  std::vector<Vec> scaling_failure_points;      // distinct x where scaling failed
  std::vector<Vec> sampled_points;
};

AuditReport audit_operator(const OperatorSpec& F, const AuditSpec& spec, std::size_t max_witnesses = 32);

}  // namespace svkit
