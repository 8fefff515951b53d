#include "svkit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "parallel.hpp"
#include "svkit/error.hpp"
#include "svkit/sampling.hpp"

namespace svkit {

std::string to_string(Semicontinuity s) { return s == Semicontinuity::Continuous ? "continuous" : "usc-pointlist"; }

std::string to_string(PropagationStatus s) {
  switch (s) {
    case PropagationStatus::Pass: return "PASS";
    case PropagationStatus::Fail: return "FAIL";
    case PropagationStatus::Refused: return "refused";
  }
  return "?";
}

// ---------------------------------------------------------------- GridFunction

GridFunction GridFunction::sample(const Box& box, const std::vector<int>& shape,
                                  const std::function<double(const Vec&)>& f) {
  GridFunction g;
  const int d = box.dim();
  if (static_cast<int>(shape.size()) != d) throw Error(ErrorCode::InvalidArgument, "shape has wrong dimension");
  g.origin = box.lo;
  g.spacing.resize(d);
  for (int k = 0; k < d; ++k) {
    if (shape[k] < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 nodes per axis");
    g.spacing[k] = (box.hi[k] - box.lo[k]) / (shape[k] - 1);
  }
  g.shape = shape;
  g.values.resize(g.size());
  for (long n = 0; n < g.size(); ++n) g.values[n] = f(g.node(n));
  return g;
}

long GridFunction::size() const {
  long n = 1;
  for (int s : shape) n *= s;
  return n;
}

Box GridFunction::box() const {
  Box b{origin, origin};
  for (int k = 0; k < dim(); ++k) b.hi[k] = origin[k] + spacing[k] * (shape[k] - 1);
  return b;
}

long GridFunction::flat(const std::vector<int>& idx) const {
  long n = 0;
  for (int k = 0; k < dim(); ++k) n = n * shape[k] + idx[k];
  return n;
}

std::vector<int> GridFunction::unflatten(long node) const {
  std::vector<int> idx(dim());
  for (int k = dim() - 1; k >= 0; --k) {
    idx[k] = static_cast<int>(node % shape[k]);
    node /= shape[k];
  }
  return idx;
}

Vec GridFunction::node(long node) const {
  const auto idx = unflatten(node);
  Vec x(dim());
  for (int k = 0; k < dim(); ++k) x[k] = origin[k] + idx[k] * spacing[k];
  return x;
}

long GridFunction::nearest_node(const Vec& x) const {
  std::vector<int> idx(dim());
  for (int k = 0; k < dim(); ++k)
    idx[k] = std::clamp(static_cast<int>(std::lround((x[k] - origin[k]) / spacing[k])), 0, shape[k] - 1);
  return flat(idx);
}

void GridFunction::set_exceptional(long node, double value) {
  if (node < 0 || node >= size()) throw Error(ErrorCode::IndexOutOfRange, "exceptional node out of range");
  values[node] = value;
  for (auto& e : exceptional)
    if (e.first == node) {
      e.second = value;
      return;
    }
  exceptional.emplace_back(node, value);
}

void GridFunction::validate() const {
  const int d = dim();
  if (d < 1 || origin.size() != d || spacing.size() != d)
    throw Error(ErrorCode::InvalidArgument, "grid origin/spacing/shape sizes disagree");
  for (int k = 0; k < d; ++k) {
    if (shape[k] < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 nodes per axis");
    if (!(spacing[k] > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
  }
  if (static_cast<long>(values.size()) != size())
    throw Error(ErrorCode::InvalidArgument, "grid value count does not match the shape");
  for (double v : values)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "grid values must be finite");
  for (const auto& [n, v] : exceptional) {
    if (n < 0 || n >= size()) throw Error(ErrorCode::InvalidArgument, "exceptional point is not a grid node");
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "exceptional value must be finite");
    if (values[n] != v) throw Error(ErrorCode::InvalidArgument, "exceptional value not applied to its node");
  }
}

double GridFunction::interpolate(const Vec& x) const {
  const int d = dim();
  if (x.size() != d) throw Error(ErrorCode::InvalidArgument, "point has wrong dimension");
  std::vector<int> base(d);
  std::vector<double> frac(d);
  for (int k = 0; k < d; ++k) {
    const double s = (x[k] - origin[k]) / spacing[k];
    if (!(s >= -1e-12 && s <= shape[k] - 1 + 1e-12)) throw Error(ErrorCode::OutOfDomain, "point outside the grid");
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 0, shape[k] - 2);
    base[k] = i;
    frac[k] = std::clamp(s - i, 0.0, 1.0);
  }
  double acc = 0.0;
  std::vector<int> idx(d);
  for (long corner = 0; corner < (1L << d); ++corner) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      const int bit = (corner >> k) & 1;
      idx[k] = base[k] + bit;
      w *= bit ? frac[k] : 1.0 - frac[k];
    }
    if (w != 0.0) acc += w * values[flat(idx)];
  }
  return acc;
}

double GridFunction::lipschitz_estimate() const {
  double L = 0.0;
  long stride = 1;
  for (int k = dim() - 1; k >= 0; --k) {
    for (long n = 0; n < size(); ++n) {
      const auto idx = unflatten(n);
      if (idx[k] + 1 >= shape[k]) continue;
      L = std::max(L, std::abs(values[n + stride] - values[n]) / spacing[k]);
    }
    stride *= shape[k];
  }
  return L;
}

// ---------------------------------------------------------------- SmoothFunction

SmoothFunction SmoothFunction::quadratic(double c, const Vec& b, const Mat& Q) {
  require_symmetric(Q, 1e-12, "quadratic form");
  SmoothFunction s;
  s.f = [c, b, Q](const Vec& x) { return c + b.dot(x) + 0.5 * x.dot(Q * x); };
  s.grad = [b, Q](const Vec& x) -> Vec { return b + Q * x; };
  s.hess = [Q](const Vec&) -> Mat { return Q; };
  return s;
}

SmoothFunction SmoothFunction::operator-(const SmoothFunction& o) const {
  SmoothFunction s;
  auto a = *this;
  s.f = [a, o](const Vec& x) { return a.f(x) - o.f(x); };
  s.grad = [a, o](const Vec& x) -> Vec { return a.grad(x) - o.grad(x); };
  s.hess = [a, o](const Vec& x) -> Mat { return a.hess(x) - o.hess(x); };
  return s;
}

// ---------------------------------------------------------------- check_subsolution

namespace {

bool evaluate(const OperatorSpec& F, const Jet& jet, double& out) {
  try {
    out = F(jet);
    return true;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Singular) return false;
    throw;
  }
}

struct NodeResult {
  long jets = 0;
  long touching = 0;
  std::size_t violations = 0;
  double max_value = -std::numeric_limits<double>::infinity();
  std::vector<SubsolutionViolation> worst;
};

}  // namespace

SubsolutionReport check_subsolution(const OperatorSpec& F, const GridFunction& u, const JetParams& params) {
  u.validate();
  const int d = u.dim();
  if (F.dim != d || F.grad_dim != d)
    throw Error(ErrorCode::InvalidArgument, "operator dimension does not match the grid function");
  if (params.rho < 1) throw Error(ErrorCode::InvalidArgument, "touching radius must be at least one cell");
  const int rho = params.rho;

  // neighbourhood offsets
  std::vector<std::vector<int>> offsets;
  {
    std::vector<int> o(d, -rho);
    while (true) {
      if (std::any_of(o.begin(), o.end(), [](int v) { return v != 0; })) offsets.push_back(o);
      int k = d - 1;
      while (k >= 0 && o[k] == rho) o[k--] = -rho;
      if (k < 0) break;
      ++o[k];
    }
  }
  std::vector<Vec> H;
  std::vector<long> flat_off;
  std::vector<long> strides(d);
  {
    long s = 1;
    for (int k = d - 1; k >= 0; --k) {
      strides[k] = s;
      s *= u.shape[k];
    }
  }
  for (const auto& o : offsets) {
    Vec h(d);
    long f = 0;
    for (int k = 0; k < d; ++k) {
      h[k] = o[k] * u.spacing[k];
      f += o[k] * strides[k];
    }
    H.push_back(h);
    flat_off.push_back(f);
  }

  std::vector<Vec> p_abs;
  for (const auto& dir : quasi_uniform_directions(d, params.p_directions))
    for (double mag : params.p_magnitudes)
      if (mag >= params.p_min) p_abs.push_back(mag * dir);
  std::vector<Mat> X_abs;
  for (double c : params.curvatures) X_abs.push_back(c * Mat::Identity(d, d));
  if (p_abs.empty() && !params.anchored && !params.exact_jet)
    throw Error(ErrorCode::Precondition, "test-jet dictionary is empty after the p_min filter");

  std::vector<long> nodes;
  for (long n = 0; n < u.size(); ++n) {
    const auto idx = u.unflatten(n);
    bool interior = true;
    for (int k = 0; k < d; ++k)
      if (idx[k] < rho || idx[k] > u.shape[k] - 1 - rho) interior = false;
    if (interior) nodes.push_back(n);
  }

  std::vector<NodeResult> results(nodes.size());
  detail::parallel_for(static_cast<long>(nodes.size()), [&](long ni) {
    const long n = nodes[ni];
    NodeResult& res = results[ni];
    const Vec x = u.node(n);
    const double u0 = u.values[n];

    std::vector<Vec> ps = p_abs;
    std::vector<Mat> Xs = X_abs;
    if (params.anchored || params.exact_jet) {
      Vec p0(d);
      Mat X0(d, d);
      if (params.exact_jet) {
        auto [g, h] = params.exact_jet(x);
        p0 = g;
        X0 = symmetrize(h);
      } else {
        for (int k = 0; k < d; ++k) {
          const double up = u.values[n + strides[k]], um = u.values[n - strides[k]];
          p0[k] = (up - um) / (2.0 * u.spacing[k]);
          X0(k, k) = (up - 2.0 * u0 + um) / (u.spacing[k] * u.spacing[k]);
          for (int l = 0; l < k; ++l) {
            const double upp = u.values[n + strides[k] + strides[l]], upm = u.values[n + strides[k] - strides[l]];
            const double ump = u.values[n - strides[k] + strides[l]], umm = u.values[n - strides[k] - strides[l]];
            X0(k, l) = X0(l, k) = (upp - upm - ump + umm) / (4.0 * u.spacing[k] * u.spacing[l]);
          }
        }
      }
      ps.push_back(p0);
      for (double t : params.p_offsets)
        for (int k = 0; k < d; ++k)
          for (double sgn : {1.0, -1.0}) ps.push_back(p0 + sgn * t * Vec::Unit(d, k));
      for (double c : params.curvature_offsets) Xs.push_back(X0 + c * Mat::Identity(d, d));
    }

    // quadratic forms 1/2 h^T X h per X and offset
    std::vector<std::vector<double>> qX(Xs.size(), std::vector<double>(H.size()));
    for (std::size_t a = 0; a < Xs.size(); ++a)
      for (std::size_t j = 0; j < H.size(); ++j) qX[a][j] = 0.5 * H[j].dot(Xs[a] * H[j]);
    std::vector<double> du(H.size()), slack(H.size());
    for (std::size_t j = 0; j < H.size(); ++j) {
      const double uy = u.values[n + flat_off[j]];
      du[j] = uy - u0;
      slack[j] = params.touch_tol * std::max({1.0, std::abs(u0), std::abs(uy)});
    }

    std::vector<double> a(H.size());
    for (const Vec& p : ps) {
      if (p.norm() < params.p_min) continue;
      for (std::size_t j = 0; j < H.size(); ++j) a[j] = du[j] - p.dot(H[j]);
      for (std::size_t b = 0; b < Xs.size(); ++b) {
        ++res.jets;
        bool touches = true;
        for (std::size_t j = 0; j < H.size() && touches; ++j)
          if (a[j] > qX[b][j] + slack[j]) touches = false;
        if (!touches) continue;
        ++res.touching;
        Jet jet{x, u0, p, Xs[b]};
        double val;
        if (!evaluate(F, jet, val)) continue;
        res.max_value = std::max(res.max_value, val);
        if (val > params.tol) {
          ++res.violations;
          res.worst.push_back({n, jet, val});
          std::stable_sort(res.worst.begin(), res.worst.end(),
                           [](const auto& l, const auto& r) { return l.value > r.value; });
          if (res.worst.size() > params.max_witnesses) res.worst.pop_back();
        }
      }
    }
  });

  SubsolutionReport rep;
  rep.nodes_checked = static_cast<long>(nodes.size());
  for (auto& r : results) {
    rep.jets_tested += r.jets;
    rep.touching_jets += r.touching;
    rep.violation_count += r.violations;
    rep.max_value = std::max(rep.max_value, r.max_value);
    for (auto& w : r.worst) rep.violations.push_back(std::move(w));
  }
  if (rep.jets_tested == 0) throw Error(ErrorCode::Precondition, "test-jet dictionary is empty after the p_min filter");
  std::stable_sort(rep.violations.begin(), rep.violations.end(),
                   [](const auto& l, const auto& r) { return l.value > r.value; });
  if (rep.violations.size() > params.max_witnesses) rep.violations.resize(params.max_witnesses);
  rep.refuted = rep.violation_count > 0;
  rep.verdict = rep.refuted ? "refuted" : "consistent-with-subsolution";
  return rep;
}

// ---------------------------------------------------------------- barrier

Barrier Barrier::make(const Vec& z, const Vec& y, double gamma) { return Barrier(z, y, (z - y).norm(), gamma); }

Barrier::Barrier(Vec z_, Vec y_, double R_, double gamma_)
    : z(std::move(z_)), y(std::move(y_)), R(R_), gamma(gamma_) {
  if (z.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "barrier points differ in dimension");
  if (!(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "barrier radius must be positive");
  if (std::abs((z - y).norm() - R) > 1e-12 * std::max(1.0, R))
    throw Error(ErrorCode::InvalidArgument, "barrier needs |z - y| = R");
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "barrier gamma must be positive");
}

BarrierJet barrier_eval(const Barrier& b, const Vec& x) {
  const Vec dx = x - b.y;
  const double e = std::exp(-b.gamma * dx.squaredNorm());
  const int d = static_cast<int>(x.size());
  BarrierJet j;
  j.value = std::exp(-b.gamma * b.R * b.R) - e;
  j.gradient = 2.0 * b.gamma * e * dx;
  j.hessian = 2.0 * b.gamma * e * (Mat::Identity(d, d) - 2.0 * b.gamma * dx * dx.transpose());
  return j;
}

std::vector<Vec> ball_samples(const Vec& c, double r, int n, std::uint64_t seed) {
  std::vector<Vec> pts{c};
  Rng rng(seed);
  for (int i = 1; i < n; ++i) pts.push_back(rng.uniform_in_ball(c, r));
  return pts;
}

namespace {

double barrier_value(const OperatorSpec& F, const Barrier& b, const Vec& x, double scale = 1.0) {
  const auto j = barrier_eval(b, x);
  double v;
  try {
    if (!evaluate(F, Jet{x, scale * j.value, scale * j.gradient, scale * j.hessian}, v))
      return std::numeric_limits<double>::quiet_NaN();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::OutOfDomain)
      throw Error(ErrorCode::Precondition, "barrier sample lies outside the operator's domain");
    throw;
  }
  return v;
}

}  // namespace

StrictnessResult barrier_strictness(const OperatorSpec& F, const Vec& z, const Vec& y, double r,
                                    const std::vector<double>& gamma_grid, int n_samples,
                                    const std::vector<Vec>& candidate_Z, std::uint64_t seed,
                                    const SearchParams& search) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "sampling radius must be positive");
  if (gamma_grid.empty()) throw Error(ErrorCode::InvalidArgument, "gamma grid is empty");
  if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  StrictnessResult res;
  const double R = (z - y).norm();
  if (!(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "z and y must differ");
  const Vec nu = (z - y) / R;

  double best = 0.0;
  for (const Vec& Z : candidate_Z) {
    const double dot = std::abs(Z.dot(nu));
    if (dot <= search.tol_dot || dot <= best) continue;
    if (certify_subunit(F, z, Z, SubunitMode::Plus, search).verdict == Verdict::Certified) {
      best = dot;
      res.certified_Z = Z;
    }
  }
  res.precheck_ok = res.certified_Z.has_value();
  if (!res.precheck_ok) {
    res.message = "no certified subunit vector Z at z with Z.nu != 0";
    return res;
  }

  double rr = r;
  for (int h = 0; h <= 6; ++h, rr *= 0.5) {
    const auto pts = ball_samples(z, rr, n_samples, seed);
    for (double g : gamma_grid) {
      const Barrier b(z, y, R, g);
      double mn = std::numeric_limits<double>::infinity();
      for (const Vec& x : pts) {
        const double v = barrier_value(F, b, x);
        mn = std::isnan(v) ? -std::numeric_limits<double>::infinity() : std::min(mn, v);
        if (!(mn > 0.0)) break;
      }
      if (mn > 0.0) {
        res.found = true;
        res.gamma = g;
        res.C = mn;
        res.r_used = rr;
        res.halvings = h;
        res.samples = static_cast<int>(pts.size());
        res.message = "strict barrier found";
        return res;
      }
    }
  }
  res.message = "no gamma in the grid gives F[v] > 0 after 6 halvings of r";
  return res;
}

// ---------------------------------------------------------------- Hopf

HopfResult hopf_test(const OperatorSpec& F, const GridFunction& u, const Vec& x0, const Vec& y, double R,
                     const Vec& w, const std::vector<double>& gamma_grid, double r) {
  u.validate();
  HopfResult res;
  const long n0 = u.nearest_node(x0);
  const Vec xn = u.node(n0);
  const double Rn = (xn - y).norm();
  const double u0 = u.values[n0];
  if (!(r > 0.0) || !(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "radii must be positive");
  if (std::abs(Rn - R) > u.cell_diameter()) {
    res.message = "x0 is not a grid node on the sphere |x - y| = R";
    return res;
  }
  if (!(w.norm() > 0.0)) throw Error(ErrorCode::InvalidArgument, "direction w must be nonzero");
  const Vec wn = w / w.norm();
  if (!(wn.dot(xn - y) < -1e-12 * Rn)) {
    res.message = "w is not an inward direction: w.(x0 - y) >= 0";
    return res;
  }
  std::vector<long> inside;
  for (long n = 0; n < u.size(); ++n) {
    const Vec x = u.node(n);
    if ((x - y).norm() < Rn - 1e-12) {
      if (!(u.values[n] < u0)) {
        res.message = "interior ball condition fails: u(x0) > u(x) is violated inside B(y, R)";
        return res;
      }
      inside.push_back(n);
    }
  }
  if (inside.empty()) {
    res.message = "interior ball contains no grid nodes";
    return res;
  }
  std::vector<long> X, shell;
  for (long n : inside) {
    const double dist = (u.node(n) - xn).norm();
    if (dist < r) {
      X.push_back(n);
      if (dist >= r - u.cell_diameter()) shell.push_back(n);
    }
  }
  res.nodes_in_X = static_cast<long>(X.size());
  if (X.empty()) {
    res.message = "B(y, R) and B(x0, r) share no grid nodes";
    return res;
  }
  if (shell.empty()) shell = X;
  res.accepted = true;

  for (double g : gamma_grid) {
    const Barrier b(xn, y, Rn, g);
    bool strict = true;
    for (long n : X)
      if (!(barrier_value(F, b, u.node(n)) > 0.0)) {
        strict = false;
        break;
      }
    if (!strict) continue;
    auto fit = [&](const std::vector<long>& nodes) {
      double eps = std::numeric_limits<double>::infinity();
      for (long n : nodes) {
        const double v = barrier_eval(b, u.node(n)).value;
        if (v < 0.0) eps = std::min(eps, (u0 - u.values[n]) / -v);
      }
      return eps;
    };
    double eps = fit(shell);
    bool gap = false;
    for (long n : X)
      if (u.values[n] - u0 > eps * barrier_eval(b, u.node(n)).value + 1e-12 * std::max(1.0, std::abs(u0))) gap = true;
    if (gap) eps = fit(X);
    if (!std::isfinite(eps) || !(eps > 0.0)) continue;
    bool strict_scaled = true;
    for (long n : X)
      if (!(barrier_value(F, b, u.node(n), eps) > 0.0)) {
        strict_scaled = false;
        break;
      }
    if (!strict_scaled) continue;
    res.gamma = g;
    res.epsilon = eps;
    res.interior_gap = gap;
    res.quotient_bound = eps * barrier_eval(b, xn).gradient.dot(wn);
    const double step = u.spacing.minCoeff();
    const Box bx = u.box();
    for (int k = 1; k <= 3; ++k) {
      const double tau = k * step;
      const Vec pt = xn + tau * wn;
      if (!bx.contains(pt)) break;
      res.measured.emplace_back(tau, (u.interpolate(pt) - u0) / tau);
    }
    res.negative = res.quotient_bound < 0.0;
    res.message = gap ? "negative bound; eps refitted on all of X (boundary fit failed inside)"
                      : "negative bound; eps fitted on the boundary shell of X";
    return res;
  }
  res.message = "fitting failed: no gamma in the grid gives a strict barrier on X";
  return res;
}

// ---------------------------------------------------------------- propagation

PropagationReport propagation_test(const OperatorSpec& F, const VectorFieldFamily& family, const GridFunction& u,
                                   const PropagationParams& params) {
  u.validate();
  PropagationReport rep;
  if (family.dim() != u.dim()) throw Error(ErrorCode::InvalidArgument, "family and grid dimensions differ");
  const int d = u.dim();

  rep.precheck = check_subsolution(F, u, params.jets);
  if (rep.precheck->refuted) {
    std::ostringstream os;
    os << "refused: u is not a subsolution (witness F = " << rep.precheck->violations.front().value << ")";
    rep.message = os.str();
    return rep;
  }

  // argmax, ties broken by distance to the box centre, then index
  const Vec centre = u.box().center();
  long best = 0;
  for (long n = 1; n < u.size(); ++n) {
    if (u.values[n] > u.values[best] ||
        (u.values[n] == u.values[best] && (u.node(n) - centre).norm() < (u.node(best) - centre).norm()))
      best = n;
  }
  rep.x0 = u.node(best);
  rep.max_value = u.values[best];
  if (rep.max_value < 0.0) {
    rep.message = "refused: the maximum is negative";
    return rep;
  }

  // subunit certification of the fields at the argmax and a few seeded nodes
  {
    Rng rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Vec> pts{rep.x0};
    for (int i = 1; i < params.subunit_points; ++i) pts.push_back(u.node(rng.integer(0, static_cast<int>(u.size() - 1))));
    SearchParams sp;
    sp.n_directions = 64;
    for (const Vec& x : pts)
      for (int i = 0; i < family.count(); ++i) {
        const Vec Z = family.field_unchecked(i, x);
        if (Z.norm() < 1e-12) continue;
        if (certify_subunit(F, x, Z, SubunitMode::Plus, sp).verdict == Verdict::Refuted) {
          std::ostringstream os;
          os << "refused: field " << i << " is not subunit for F at a sampled point";
          rep.message = os.str();
          return rep;
        }
      }
  }

  rep.tol = params.tol > 0.0 ? params.tol : std::max(2.0 * u.lipschitz_estimate() * u.cell_diameter(), 1e-12);
  std::vector<int> cells(d);
  for (int k = 0; k < d; ++k) cells[k] = u.shape[k] - 1;
  const CellGrid cg(u.box(), cells);
  for (long c = 0; c < cg.size(); ++c) {
    const auto idx = cg.unflatten(c);
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<int> node(d);
    for (long corner = 0; corner < (1L << d); ++corner) {
      for (int k = 0; k < d; ++k) node[k] = idx[k] + ((corner >> k) & 1);
      mx = std::max(mx, u.values[u.flat(node)]);
    }
    if (mx >= rep.max_value - rep.tol) rep.K_cells.push_back(c);
  }

  Rng rng(params.seed);
  std::vector<ControlSignal> signals(params.n_traj);
  for (auto& s : signals)
    for (int k = 0; k < params.segments; ++k) s.append(rng.unit_vec(family.count()), params.T / params.segments);

  std::vector<double> dev(params.n_traj, 0.0);
  std::vector<char> in_k(params.n_traj, 1);
  detail::parallel_for(params.n_traj, [&](long t) {
    const auto tr = integrate_trajectory(family, rep.x0, signals[t], params.T, params.dt, u.box());
    for (const Vec& y : tr.states) dev[t] = std::max(dev[t], std::abs(u.interpolate(y) - rep.max_value));
    in_k[t] = std::binary_search(rep.K_cells.begin(), rep.K_cells.end(), cg.cell_of(tr.states.back()));
  });
  rep.trajectories_checked = params.n_traj;
  for (int t = 0; t < params.n_traj; ++t) {
    rep.max_deviation = std::max(rep.max_deviation, dev[t]);
    if (!in_k[t]) rep.endpoints_in_K = false;
  }
  rep.status = rep.max_deviation <= rep.tol ? PropagationStatus::Pass : PropagationStatus::Fail;
  rep.message = rep.status == PropagationStatus::Pass ? "u stays at its maximum along all trajectories"
                                                      : "u leaves its maximum along a trajectory";
  return rep;
}

// ---------------------------------------------------------------- strong comparison

ScpReport scp_difference_check(const LinearOperatorFamily& family, const SmoothFunction& u, const SmoothFunction& v,
                               const std::vector<Vec>& points, double tol) {
  if (family.terms.empty()) throw Error(ErrorCode::InvalidArgument, "operator family is empty");
  ScpReport rep;
  const SmoothFunction w = u - v;
  auto inf_apply = [&](const Jet& jet, bool homogeneous) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < family.terms.size(); ++a) m = std::min(m, family.apply(a, jet, homogeneous));
    return m;
  };
  for (const Vec& x : points) {
    const double Fu = inf_apply(u.jet(x), false);
    const double Fv = inf_apply(v.jet(x), false);
    if (!(Fu <= tol) || !(Fv >= -tol)) {
      std::ostringstream os;
      os << "precondition fails at a sample: F[u] = " << Fu << ", F[v] = " << Fv;
      rep.preconditions_ok = false;
      rep.failed_point = x;
      rep.message = os.str();
      return rep;
    }
    rep.margin = std::max(rep.margin, inf_apply(w.jet(x), true));
    ++rep.samples;
  }
  rep.pass = rep.margin <= tol;
  rep.message = rep.pass ? "u - v is a subsolution of the homogeneous inf-operator at all samples"
                         : "difference inequality fails";
  return rep;
}

// ---------------------------------------------------------------- strict lift

double ellipticity_modulus(const VectorFieldFamily& family, const Vec& x) {
  double s = 0.0;
  for (int i = 0; i < family.count(); ++i) s += family.field_unchecked(i, x).squaredNorm();
  return s / family.count();
}

double min_ellipticity(const VectorFieldFamily& family, const Box& K, int n_per_axis) {
  const int d = K.dim();
  if (n_per_axis < 2) n_per_axis = 2;
  const auto g = GridFunction::sample(K, std::vector<int>(d, n_per_axis),
                                      [&](const Vec& x) { return ellipticity_modulus(family, x); });
  return *std::min_element(g.values.begin(), g.values.end());
}

double lipschitz_in_p(const OperatorSpec& F, const Box& K, int n_samples, std::uint64_t seed, double p_scale,
                      double X_scale, double r_scale) {
  Rng rng(seed);
  const int n = F.grad_dim;
  double L = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const Vec x = rng.uniform_in_box(K.lo, K.hi);
    const double r = rng.uniform(-r_scale, r_scale);
    const Vec p = p_scale * rng.normal_vec(n);
    const Mat X = rng.random_symmetric(n, X_scale);
    const Vec e = rng.unit_vec(n);
    const double h = 1e-4 * std::max(1.0, p.norm());
    double a, b;
    if (!evaluate(F, Jet{x, r, p + h * e, X}, a) || !evaluate(F, Jet{x, r, p - h * e, X}, b)) continue;
    L = std::max(L, std::abs(a - b) / (2.0 * h));
  }
  return L;
}

StrictLift StrictLift::build(const Vec& center, double epsilon, double delta, double eta_bar, double L_K, double r1,
                             double lambda) {
  StrictLift s;
  s.center = center;
  s.epsilon = epsilon;
  s.delta = delta;
  s.eta_bar = eta_bar;
  s.L_K = L_K;
  s.r1 = r1;
  if (!(r1 > 0.0)) throw Error(ErrorCode::Precondition, "r1 must be positive");
  if (!(L_K >= 0.0)) throw Error(ErrorCode::Precondition, "L_K must be nonnegative");
  s.r_bar = L_K > 0.0 ? std::min((eta_bar - delta) / L_K, r1) : r1;
  s.lambda = lambda > 0.0 ? lambda : std::exp(0.5 * s.r_bar * s.r_bar);
  s.validate();
  return s;
}

void StrictLift::validate() const {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::Precondition, "lift epsilon must be positive");
  if (!(delta > 0.0 && delta < eta_bar)) throw Error(ErrorCode::Precondition, "lift needs 0 < delta < eta_bar");
  if (!(r1 > 0.0) || !(L_K >= 0.0)) throw Error(ErrorCode::Precondition, "lift needs r1 > 0 and L_K >= 0");
  const double expect = L_K > 0.0 ? std::min((eta_bar - delta) / L_K, r1) : r1;
  if (std::abs(r_bar - expect) > 1e-12 * std::max(1.0, expect))
    throw Error(ErrorCode::Precondition, "lift radius must equal min((eta_bar - delta)/L_K, r1)");
  if (lambda < std::exp(0.5 * r_bar * r_bar) * (1.0 - 1e-15))
    throw Error(ErrorCode::Precondition, "lift lambda must dominate exp(|x - c|^2/2) on the ball");
}

Jet StrictLift::lifted_jet(const SmoothFunction& u, const Vec& x) const {
  const Vec dx = x - center;
  const double e = std::exp(0.5 * dx.squaredNorm());
  const int d = static_cast<int>(x.size());
  Jet j = u.jet(x);
  j.r += epsilon * (e - lambda);
  j.p += epsilon * e * dx;
  j.X += epsilon * e * (Mat::Identity(d, d) + dx * dx.transpose());
  return j;
}

StrictLiftReport strict_lift_check(const OperatorSpec& F, const SmoothFunction& u, const StrictLift& lift,
                                   const std::vector<Vec>& points, double tol) {
  lift.validate();
  StrictLiftReport rep;
  double min_e = std::numeric_limits<double>::infinity();
  for (const Vec& x : points) {
    const Vec dx = x - lift.center;
    if (dx.norm() > lift.r_bar * (1.0 + 1e-12)) continue;
    const double e = std::exp(0.5 * dx.squaredNorm());
    double fu, fl;
    if (!evaluate(F, u.jet(x), fu) || !(fu <= tol)) {
      rep.preconditions_ok = false;
      rep.message = "precondition F[u] <= tol fails at a sample in the lift ball";
      return rep;
    }
    if (!evaluate(F, lift.lifted_jet(u, x), fl)) continue;
    rep.max_F = std::max(rep.max_F, fl);
    rep.max_margin = std::max(rep.max_margin, fl + lift.epsilon * lift.delta * e);
    min_e = std::min(min_e, e);
    ++rep.samples;
  }
  if (rep.samples == 0) {
    rep.preconditions_ok = false;
    rep.message = "no sample point lies in the lift ball";
    return rep;
  }
  rep.bound = -lift.epsilon * lift.delta * min_e;
  rep.pass = rep.max_margin <= tol;
  rep.message = rep.pass ? "F[u_eps] <= -eps delta exp(|x - c|^2/2) at all samples" : "strict bound fails";
  return rep;
}

LinearityResult strict_lift_linearity(const OperatorSpec& F, const SmoothFunction& u, StrictLift lift,
                                      const std::vector<double>& epsilons, const std::vector<Vec>& points) {
  LinearityResult res;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double eps : epsilons) {
    lift.epsilon = eps;
    const auto rep = strict_lift_check(F, u, lift, points);
    if (!rep.preconditions_ok) throw Error(ErrorCode::Precondition, rep.message);
    const double slope = rep.max_F / eps;
    res.epsilons.push_back(eps);
    res.slopes.push_back(slope);
    lo = std::min(lo, std::abs(slope));
    hi = std::max(hi, std::abs(slope));
  }
  res.spread = lo > 0.0 ? hi / lo - 1.0 : std::numeric_limits<double>::infinity();
  return res;
}

}  // namespace svkit
