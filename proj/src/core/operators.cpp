#include "svkit/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "svkit/error.hpp"
#include "svkit/horizontal.hpp"
#include "svkit/sampling.hpp"

namespace svkit {

namespace {

constexpr double kZeroEigen = 1e-12;  // relative to the largest |eigenvalue|

Vec eigenvalues_checked(const Mat& M, const char* what) {
  require_symmetric(M, 1e-12, what);
  return sym_eigenvalues(M);
}

}  // namespace

double Scaling::value(double xi, const Jet& jet) const {
  switch (kind) {
    case Kind::Power:
      return std::pow(xi, exponent);
    case Kind::JetDependent:
      return phi(xi, jet);
    default:
      throw Error(ErrorCode::Unsupported, "scaling function is not declared as a function of xi");
  }
}

std::string Scaling::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Power:
      os << "power:" << exponent;
      break;
    case Kind::JetDependent:
      os << "jet-dependent";
      break;
    case Kind::Implication:
      os << "implication";
      break;
    case Kind::Undeclared:
      os << "undeclared";
      break;
  }
  return os.str();
}

double pucci_extremal(const Mat& M, double lambda, double Lambda, PucciSign sign) {
  if (!(lambda > 0.0) || !(Lambda >= lambda))
    throw Error(ErrorCode::InvalidArgument, "Pucci bounds must satisfy 0 < lambda <= Lambda");
  // eig(M) and -eig(-M) averaged, then summed by increasing magnitude: M+(M) = -M-(-M) holds bit for bit
  const Vec a = eigenvalues_checked(M, "pucci_extremal");
  const Vec b = sym_eigenvalues(-M);
  const long n = a.size();
  Vec ev(n);
  for (long k = 0; k < n; ++k) ev[k] = 0.5 * (a[k] - b[n - 1 - k]);
  std::sort(ev.begin(), ev.end());
  const double cut = n ? kZeroEigen * std::max(std::abs(ev[0]), std::abs(ev[n - 1])) : 0.0;
  double pos = 0.0, neg = 0.0;
  for (long k = 0; k < n; ++k)
    if (ev[k] > cut) pos += ev[k];
  for (long k = n - 1; k >= 0; --k)
    if (ev[k] < -cut) neg += ev[k];
  return sign == PucciSign::Plus ? -lambda * pos - Lambda * neg : -Lambda * pos - lambda * neg;
}

double pucci_variational_oracle(const Mat& M, double lambda, double Lambda, PucciSign sign, int n_samples,
                                std::uint64_t seed, bool include_optimum) {
  if (!(lambda > 0.0) || !(Lambda >= lambda))
    throw Error(ErrorCode::InvalidArgument, "Pucci bounds must satisfy 0 < lambda <= Lambda");
  require_symmetric(M, 1e-12, "pucci_variational_oracle");
  const int n = static_cast<int>(M.rows());
  const bool sup = sign == PucciSign::Plus;
  double best = sup ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  auto consider = [&](const Mat& A) {
    const double v = -(A * M).trace();
    best = sup ? std::max(best, v) : std::min(best, v);
  };
  Rng rng(seed);
  for (int s = 0; s < n_samples; ++s) {
    const Mat Q = rng.random_orthogonal(n);
    Vec diag(n);
    for (int k = 0; k < n; ++k) diag[k] = rng.uniform(lambda, Lambda);
    consider(Q.transpose() * diag.asDiagonal() * Q);
  }
  if (include_optimum) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(M));
    Vec a(n);
    for (int k = 0; k < n; ++k) {
      const bool positive = es.eigenvalues()[k] > 0.0;
      a[k] = (positive == sup) ? lambda : Lambda;
    }
    consider(es.eigenvectors() * a.asDiagonal() * es.eigenvectors().transpose());
  }
  return best;
}

double infinity_laplacian(const Vec& q, const Mat& Y, double h) {
  if (!(h >= 0.0)) throw Error(ErrorCode::InvalidArgument, "infinity-Laplacian exponent must be >= 0");
  const double nq = q.norm();
  const double quad = q.dot(Y * q);
  if (h == 3.0) return -quad;
  if (nq == 0.0) {
    if (h < 3.0) throw Error(ErrorCode::Singular, "infinity-Laplacian is singular at q = 0 for h < 3");
    return 0.0;
  }
  return -std::pow(nq, h - 3.0) * quad;
}

double m_laplacian(const Vec& q, const Mat& Y, double m_exp) {
  if (!(m_exp > 1.0)) throw Error(ErrorCode::InvalidArgument, "m-Laplacian exponent must be > 1");
  const double nq = q.norm();
  if (nq == 0.0) throw Error(ErrorCode::Singular, "m-Laplacian is singular at q = 0");
  return -(std::pow(nq, m_exp - 2.0) * Y.trace() + (m_exp - 2.0) * std::pow(nq, m_exp - 4.0) * q.dot(Y * q));
}

HorizontalPart pucci_part(double lambda, double Lambda, PucciSign sign) {
  if (!(lambda > 0.0) || !(Lambda >= lambda))
    throw Error(ErrorCode::InvalidArgument, "Pucci bounds must satisfy 0 < lambda <= Lambda");
  std::ostringstream os;
  os << (sign == PucciSign::Plus ? "pucci+" : "pucci-") << "(" << lambda << "," << Lambda << ")";
  return {[=](const Vec&, const Mat& Y) { return pucci_extremal(Y, lambda, Lambda, sign); }, 1.0, false,
          os.str()};
}

HorizontalPart infinity_laplacian_part(double h) {
  if (!(h >= 0.0)) throw Error(ErrorCode::InvalidArgument, "infinity-Laplacian exponent must be >= 0");
  return {[=](const Vec& q, const Mat& Y) { return infinity_laplacian(q, Y, h); }, h, h < 3.0,
          "inf-laplacian(h=" + std::to_string(h) + ")"};
}

HorizontalPart m_laplacian_part(double m_exp) {
  if (!(m_exp > 1.0)) throw Error(ErrorCode::InvalidArgument, "m-Laplacian exponent must be > 1");
  return {[=](const Vec& q, const Mat& Y) { return m_laplacian(q, Y, m_exp); }, m_exp - 1.0, true,
          "m-laplacian(m=" + std::to_string(m_exp) + ")"};
}

OperatorSpec build_model_equation(const ModelCoefficients& coeffs, const VectorFieldFamily& family) {
  if (!coeffs.E.fn) throw Error(ErrorCode::InvalidArgument, "model equation needs a principal part E");
  if (!coeffs.a) throw Error(ErrorCode::InvalidArgument, "model equation needs a coefficient a(x)");
  if (!(coeffs.k > 0.0)) throw Error(ErrorCode::InvalidArgument, "model equation needs k > 0");
  const bool has_c = static_cast<bool>(coeffs.c);
  if (has_c && coeffs.E.degree > coeffs.k)
    throw Error(ErrorCode::InvalidArgument, "coefficient constraint violated: either c = 0 or degree(E) <= k");

  OperatorSpec G;
  G.dim = family.dim();
  G.grad_dim = family.count();
  G.proper = true;
  G.singular_at_zero_gradient = coeffs.E.singular_at_zero;
  G.scaling = Scaling::power(has_c ? std::min(coeffs.k, coeffs.E.degree) : coeffs.E.degree);
  G.label = "model[" + coeffs.E.label + (has_c ? ",c" : "") + "]";
  G.evaluator = [coeffs, has_c](const Jet& j) {
    const double a = coeffs.a(j.x);
    if (!(a > 0.0)) throw Error(ErrorCode::Precondition, "model coefficient a(x) must be positive");
    double zeroth = 0.0;
    if (has_c) {
      const double c = coeffs.c(j.x);
      if (c < 0.0) throw Error(ErrorCode::Precondition, "model coefficient c(x) must be nonnegative");
      if (j.r != 0.0) zeroth = c * std::pow(std::abs(j.r), coeffs.k - 1.0) * j.r;
    }
    return zeroth + a * coeffs.E.fn(j.p, j.X);
  };
  return G;
}

OperatorSpec pucci_operator(int d, double lambda, double Lambda, PucciSign sign) {
  if (!(lambda > 0.0) || !(Lambda >= lambda))
    throw Error(ErrorCode::InvalidArgument, "Pucci bounds must satisfy 0 < lambda <= Lambda");
  OperatorSpec F;
  F.dim = d;
  F.grad_dim = d;
  F.scaling = Scaling::power(1.0);
  F.label = sign == PucciSign::Plus ? "pucci+" : "pucci-";
  F.evaluator = [=](const Jet& j) { return pucci_extremal(j.X, lambda, Lambda, sign); };
  return F;
}

Mat LinearOperatorFamily::A(std::size_t alpha, const Vec& x) const {
  const auto& t = terms.at(alpha);
  if (t.A) return t.A(x);
  if (t.sigma) {
    const Mat s = t.sigma(x);
    return s * s.transpose();
  }
  throw Error(ErrorCode::InvalidArgument, "linear term has neither A nor sigma");
}

Vec LinearOperatorFamily::b(std::size_t alpha, const Vec& x) const {
  const auto& t = terms.at(alpha);
  return t.b ? t.b(x) : Vec::Zero(dim);
}

double LinearOperatorFamily::c(std::size_t alpha, const Vec& x) const {
  const auto& t = terms.at(alpha);
  return t.c ? t.c(x) : 0.0;
}

double LinearOperatorFamily::f(std::size_t alpha, const Vec& x) const {
  const auto& t = terms.at(alpha);
  return t.f ? t.f(x) : 0.0;
}

namespace {

double apply_term(const LinearTerm& t, int dim, const Jet& j, bool homogeneous) {
  Mat A;
  if (t.A) {
    A = t.A(j.x);
  } else if (t.sigma) {
    const Mat s = t.sigma(j.x);
    A = s * s.transpose();
  } else {
    throw Error(ErrorCode::InvalidArgument, "linear term has neither A nor sigma");
  }
  if (A.rows() != dim || A.cols() != dim) throw Error(ErrorCode::InvalidArgument, "diffusion matrix has wrong size");
  if (min_eigenvalue(A) < -1e-10) throw Error(ErrorCode::Precondition, "diffusion matrix is not PSD");
  double v = -(A.cwiseProduct(j.X)).sum();
  if (t.b) v -= t.b(j.x).dot(j.p);
  if (t.c) {
    const double c = t.c(j.x);
    if (c < 0.0) throw Error(ErrorCode::Precondition, "zeroth-order coefficient must be nonnegative");
    v += c * j.r;
  }
  if (!homogeneous && t.f) v -= t.f(j.x);
  return v;
}

std::vector<Vec> eigenvectors_of(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(A));
  std::vector<Vec> out;
  for (int k = 0; k < A.rows(); ++k) out.push_back(es.eigenvectors().col(k));
  return out;
}

std::vector<Vec> term_probes(const LinearTerm& t, const Vec& x) {
  if (t.A) return eigenvectors_of(t.A(x));
  if (t.sigma) {
    const Mat s = t.sigma(x);
    return eigenvectors_of(s * s.transpose());
  }
  return {};
}

}  // namespace

double LinearOperatorFamily::apply(std::size_t alpha, const Jet& jet, bool homogeneous) const {
  return apply_term(terms.at(alpha), dim, jet, homogeneous);
}

OperatorSpec build_hjb(const LinearOperatorFamily& family, HjbMode mode, bool homogeneous) {
  if (family.terms.empty()) throw Error(ErrorCode::InvalidArgument, "HJB family has no members");
  OperatorSpec F;
  F.dim = family.dim;
  F.grad_dim = family.dim;
  F.scaling = homogeneous ? Scaling::power(1.0) : Scaling::none();
  F.label = std::string("hjb-") + (mode == HjbMode::Inf ? "inf" : "sup") + (homogeneous ? "" : "-f");
  F.evaluator = [family, mode, homogeneous](const Jet& j) {
    double best = mode == HjbMode::Inf ? std::numeric_limits<double>::infinity()
                                       : -std::numeric_limits<double>::infinity();
    for (const auto& t : family.terms) {
      const double v = apply_term(t, family.dim, j, homogeneous);
      best = mode == HjbMode::Inf ? std::min(best, v) : std::max(best, v);
    }
    return best;
  };
  F.probe_directions = [family](const Vec& x) {
    std::vector<Vec> out;
    for (const auto& t : family.terms) {
      auto v = term_probes(t, x);
      out.insert(out.end(), v.begin(), v.end());
    }
    return out;
  };
  return F;
}

OperatorSpec build_isaacs(const IsaacsFamily& family, IsaacsMode mode) {
  if (family.terms.empty() || family.terms.front().empty())
    throw Error(ErrorCode::InvalidArgument, "Isaacs family has no members");
  const std::size_t nb = family.terms.front().size();
  for (const auto& row : family.terms)
    if (row.size() != nb) throw Error(ErrorCode::InvalidArgument, "Isaacs family must be rectangular");
  OperatorSpec F;
  F.dim = family.dim;
  F.grad_dim = family.dim;
  F.scaling = Scaling::power(1.0);
  F.label = mode == IsaacsMode::InfSup ? "isaacs-infsup" : "isaacs-supinf";
  F.evaluator = [family, mode, nb](const Jet& j) {
    const std::size_t na = family.terms.size();
    std::vector<double> vals(na * nb);
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < nb; ++b) vals[a * nb + b] = apply_term(family.terms[a][b], family.dim, j, true);
    if (mode == IsaacsMode::InfSup) {
      double outer = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < na; ++a) {
        double inner = -std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < nb; ++b) inner = std::max(inner, vals[a * nb + b]);
        outer = std::min(outer, inner);
      }
      return outer;
    }
    double outer = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < nb; ++b) {
      double inner = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < na; ++a) inner = std::min(inner, vals[a * nb + b]);
      outer = std::max(outer, inner);
    }
    return outer;
  };
  F.probe_directions = [family](const Vec& x) {
    std::vector<Vec> out;
    for (const auto& row : family.terms)
      for (const auto& t : row) {
        auto v = term_probes(t, x);
        out.insert(out.end(), v.begin(), v.end());
      }
    return out;
  };
  return F;
}

OperatorSpec linear_operator(const LinearTerm& term, int dim) {
  LinearOperatorFamily fam{dim, {term}};
  OperatorSpec F = build_hjb(fam, HjbMode::Inf, true);
  F.label = "linear";
  return F;
}

OperatorSpec reflect_operator(const OperatorSpec& F) {
  OperatorSpec R = F;
  R.label = "reflect(" + F.label + ")";
  R.scaling = Scaling::none();
  R.evaluator = [inner = F.evaluator](const Jet& j) { return -inner(Jet{j.x, -j.r, -j.p, -j.X}); };
  return R;
}

OperatorSpec euclideanize(const OperatorSpec& G, const VectorFieldFamily& family) {
  if (G.grad_dim != 0 && G.grad_dim != family.count())
    throw Error(ErrorCode::InvalidArgument, "operator acts on horizontal jets of size " +
                                                std::to_string(G.grad_dim) + " but the family has " +
                                                std::to_string(family.count()) + " fields");
  OperatorSpec F = G;
  F.dim = family.dim();
  F.grad_dim = family.dim();
  F.label = "euclid(" + G.label + "," + family.name() + ")";
  F.probe_directions = nullptr;
  F.evaluator = [inner = G.evaluator, family](const Jet& j) {
    const HorizontalJet hj = horizontal_jet(family, j.x, j.p, j.X);
    return inner(Jet{j.x, j.r, hj.q, hj.H});
  };
  return F;
}

OperatorSpec smooth_counterexample_operator(std::function<double(const Vec&)> f, int dim) {
  OperatorSpec F;
  F.dim = dim;
  F.grad_dim = dim;
  F.label = "counterexample";
  F.scaling.kind = Scaling::Kind::JetDependent;
  F.scaling.phi = [](double xi, const Jet& j) { return j.X.trace() >= 0.0 ? 1.0 : xi; };
  F.evaluator = [f = std::move(f)](const Jet& j) {
    const double t = j.X.trace();
    return -t / (1.0 + std::abs(t)) + (f ? f(j.x) : 0.0);
  };
  return F;
}

namespace {

bool same_point(const Vec& a, const Vec& b) { return a.size() == b.size() && (a - b).norm() == 0.0; }

}  // namespace

AuditReport audit_operator(const OperatorSpec& F, const AuditSpec& spec, std::size_t max_witnesses) {
  AuditReport rep;
  const int n = F.grad_dim;
  if (n <= 0) throw Error(ErrorCode::InvalidArgument, "operator has no declared gradient dimension");
  std::vector<double> xi_grid = spec.xi_grid;
  if (xi_grid.empty())
    for (int k = 0; k <= 10; ++k) xi_grid.push_back(std::ldexp(1.0, -k));
  Rng rng(spec.seed);

  std::vector<Vec> xs;
  if (!spec.x_points.empty()) {
    for (const auto& x : spec.x_points)
      for (int s = 0; s < spec.n_samples; ++s) xs.push_back(x);
  } else {
    if (spec.x_box.dim() != F.dim) throw Error(ErrorCode::InvalidArgument, "audit box has wrong dimension");
    for (int s = 0; s < spec.n_samples; ++s) xs.push_back(rng.uniform_in_box(spec.x_box.lo, spec.x_box.hi));
  }

  auto record = [&](AuditWitness w) {
    ++rep.violation_count;
    if (rep.witnesses.size() < max_witnesses) rep.witnesses.push_back(std::move(w));
  };
  auto scale_of = [](double a, double b) { return std::max({1.0, std::abs(a), std::abs(b)}); };

  rep.scaling_checked = F.scaling.kind != Scaling::Kind::Undeclared;
  for (const auto& x : xs) {
    if (rep.sampled_points.empty() || !same_point(rep.sampled_points.back(), x)) rep.sampled_points.push_back(x);
    Jet jet{x, rng.uniform(-1.0, 1.0), spec.p_scale * rng.normal_vec(n), rng.random_symmetric(n, spec.X_scale)};
    const Mat P = rng.random_psd(n, n, spec.X_scale);
    const double dr = std::abs(rng.normal()) + 0.1;
    try {
      const double base = F(jet);
      Jet up = jet;
      up.X = jet.X + P;
      const double fx = F(up);
      if (fx > base + spec.tol * scale_of(fx, base)) {
        rep.proper_ok = false;
        record({"proper-X", up, 1.0, fx, base});
      }
      Jet rj = jet;
      rj.r = jet.r + dr;
      const double fr = F(rj);
      if (fr < base - spec.tol * scale_of(fr, base)) {
        rep.proper_ok = false;
        record({"proper-r", rj, 1.0, fr, base});
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Singular) throw;
    }

    if (!rep.scaling_checked) continue;
    bool failed_here = false;
    for (double s : spec.s_grid) {
      Jet sj{x, s, jet.p, jet.X};
      double base;
      try {
        base = F(sj);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Singular) throw;
        continue;
      }
      for (double xi : xi_grid) {
        const Jet scaled{x, xi * s, xi * sj.p, xi * sj.X};
        const double lhs = F(scaled);
        bool ok;
        double rhs;
        if (F.scaling.kind == Scaling::Kind::Implication) {
          rhs = 0.0;
          ok = !(base > spec.tol) || lhs > 0.0;
        } else {
          rhs = F.scaling.value(xi, sj) * base;
          ok = lhs >= rhs - spec.tol * scale_of(lhs, rhs);
        }
        if (!ok) {
          rep.scaling_ok = false;
          failed_here = true;
          record({"scaling", sj, xi, lhs, rhs});
        }
      }
    }
    if (failed_here) {
      const bool seen = std::any_of(rep.scaling_failure_points.begin(), rep.scaling_failure_points.end(),
                                    [&](const Vec& y) { return same_point(x, y); });
      if (!seen) rep.scaling_failure_points.push_back(x);
    }
  }
  return rep;
}

}  // namespace svkit
