#include "svkit/subunit.hpp"

#include <cmath>
#include <limits>

#include "svkit/error.hpp"
#include "svkit/sampling.hpp"

namespace svkit {

bool classical_subunit(const Mat& A, const Vec& Z, double tol) {
  require_symmetric(A, 1e-12, "classical_subunit");
  if (Z.size() != A.rows()) throw Error(ErrorCode::InvalidArgument, "Z has wrong dimension");
  return min_eigenvalue(A - Z * Z.transpose()) >= -tol;
}

ScalingRadius subunit_scaling_radius(const Mat& A, const Vec& Z, double kernel_tol) {
  require_symmetric(A, 1e-12, "subunit_scaling_radius");
  if (Z.size() != A.rows()) throw Error(ErrorCode::InvalidArgument, "Z has wrong dimension");
  const double nz = Z.norm();
  if (nz == 0.0) return {std::numeric_limits<double>::infinity(), true};
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(A));
  const Vec& lam = es.eigenvalues();
  const Vec Zt = es.eigenvectors().transpose() * Z;
  const double lmax = std::max(1.0, lam.cwiseAbs().maxCoeff());
  double sum = 0.0;
  for (int i = 0; i < lam.size(); ++i) {
    if (lam[i] > kernel_tol * lmax) {
      sum += Zt[i] * Zt[i] / lam[i];
    } else if (std::abs(Zt[i]) > kernel_tol * std::max(1.0, nz)) {
      return {0.0, false};
    }
  }
  return {1.0 / std::sqrt(sum), false};
}

std::string to_string(SubunitMode m) {
  switch (m) {
    case SubunitMode::Plus: return "plus";
    case SubunitMode::Minus: return "minus";
    case SubunitMode::Strong: return "strong";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "certified";
    case Verdict::Refuted: return "refuted";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string to_string(FamilyMode m) {
  switch (m) {
    case FamilyMode::HjbInf: return "hjb-inf";
    case FamilyMode::HjbSup: return "hjb-sup";
    case FamilyMode::IsaacsInfSup: return "isaacs-infsup";
    case FamilyMode::IsaacsSupInf: return "isaacs-supinf";
  }
  return "?";
}

const std::vector<double>& SearchParams::gammas() const {
  static const std::vector<double> kDefault = log_grid(1e-2, 1e8, 64);
  return gamma_grid.empty() ? kDefault : gamma_grid;
}

std::vector<double> subunit_profile(const OperatorSpec& F, const Vec& x, const Vec& p, SubunitMode mode,
                                    const std::vector<double>& gammas) {
  const int n = static_cast<int>(p.size());
  const Mat I = Mat::Identity(n, n);
  const Mat pp = p * p.transpose();
  std::vector<double> out;
  out.reserve(gammas.size());
  for (double g : gammas) {
    double v;
    try {
      v = mode == SubunitMode::Minus ? -F(Jet{x, 0.0, p, g * pp - I}) : F(Jet{x, 0.0, p, I - g * pp});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Singular) throw;
      v = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(v);
  }
  return out;
}

namespace {

bool non_increasing_from(const std::vector<double>& v, std::size_t start) {
  for (std::size_t k = start; k + 1 < v.size(); ++k) {
    if (std::isnan(v[k + 1]) || std::isnan(v[k])) return false;
    if (v[k + 1] > v[k] + 1e-12 * std::max(1.0, std::abs(v[k]))) return false;
  }
  return true;
}

bool non_decreasing_from(const std::vector<double>& v, std::size_t start) {
  for (std::size_t k = start; k + 1 < v.size(); ++k) {
    if (std::isnan(v[k + 1]) || std::isnan(v[k])) return false;
    if (v[k + 1] < v[k] - 1e-12 * std::max(1.0, std::abs(v[k]))) return false;
  }
  return true;
}

std::size_t first_index_at_least(const std::vector<double>& g, double threshold) {
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g[k] >= threshold * (1.0 - 1e-12)) return k;
  return g.size() - 1;
}

}  // namespace

SubunitCertificate certify_subunit(const OperatorSpec& F, const Vec& x, const Vec& Z, SubunitMode mode,
                                   const SearchParams& params) {
  const int d = static_cast<int>(Z.size());
  if (F.grad_dim != 0 && F.grad_dim != d) throw Error(ErrorCode::InvalidArgument, "Z has wrong dimension");
  const double nz = Z.norm();
  if (nz == 0.0) throw Error(ErrorCode::InvalidArgument, "Z = 0 makes the subunit condition vacuous");
  const auto& gammas = params.gammas();
  if (gammas.size() < 2) throw Error(ErrorCode::InvalidArgument, "gamma grid needs at least two points");

  std::vector<Vec> base;
  for (const auto& v : quasi_uniform_directions(d, std::max(1, params.n_directions / 2))) {
    base.push_back(v);
    base.push_back(-v);
  }
  base.push_back(Z / nz);
  base.push_back(-Z / nz);
  for (int k = 0; k < d; ++k) {
    base.push_back(Vec::Unit(d, k));
    base.push_back(-Vec::Unit(d, k));
  }
  if (F.probe_directions)
    for (const auto& v : F.probe_directions(x)) {
      const double nv = v.norm();
      if (nv == 0.0) continue;
      base.push_back(v / nv);
      base.push_back(-v / nv);
    }

  SubunitCertificate cert;
  cert.point = x;
  cert.Z = Z;
  cert.mode = mode;
  cert.params = params;

  const double gmax = gammas.back();
  const std::size_t top2 = first_index_at_least(gammas, gmax / 100.0);
  const std::size_t top1 = first_index_at_least(gammas, gmax / 10.0);

  for (const auto& u : base) {
    if (std::abs(Z.dot(u)) <= params.tol_dot) continue;
    for (double rad : params.radial) {
      const Vec p = rad * u;
      const auto prof = subunit_profile(F, x, p, mode, gammas);
      DirectionResult res;
      res.p = p;
      res.last_value = prof.back();
      if (mode == SubunitMode::Strong) {
        const bool grows = !std::isnan(prof.back()) && prof.back() >= params.strong_threshold &&
                           non_decreasing_from(prof, top1);
        res.verdict = grows ? Verdict::Certified : Verdict::Refuted;
        for (std::size_t k = 0; k < prof.size(); ++k)
          if (prof[k] > params.tol_pos) {
            res.gamma_star = gammas[k];
            break;
          }
      } else {
        for (std::size_t k = 0; k < prof.size(); ++k)
          if (prof[k] > params.tol_pos) {
            res.gamma_star = gammas[k];
            break;
          }
        if (res.gamma_star) {
          res.verdict = Verdict::Certified;
        } else if (non_increasing_from(prof, top2) && prof.back() < params.tol_pos) {
          res.verdict = Verdict::Refuted;
        } else {
          res.verdict = Verdict::Inconclusive;
          // still rising at the top of the grid: continue by decades
          if (non_decreasing_from(prof, top1)) {
            double g = gmax;
            for (int k = 0; k < params.extra_decades; ++k) {
              g *= 10.0;
              const double v = subunit_profile(F, x, p, mode, {g}).front();
              if (v > params.tol_pos) {
                res.gamma_star = g;
                res.last_value = v;
                res.verdict = Verdict::Certified;
                break;
              }
            }
          }
        }
      }
      switch (res.verdict) {
        case Verdict::Certified: ++cert.certified; break;
        case Verdict::Refuted:
          ++cert.refuted;
          if (!cert.witness_p) {
            cert.witness_p = p;
            cert.witness_profile = prof;
          }
          break;
        case Verdict::Inconclusive: ++cert.inconclusive; break;
      }
      cert.directions.push_back(std::move(res));
    }
  }
  if (cert.refuted > 0) cert.verdict = Verdict::Refuted;
  else if (cert.inconclusive > 0) cert.verdict = Verdict::Inconclusive;
  else cert.verdict = Verdict::Certified;
  return cert;
}

namespace {

Mat member_matrix(const LinearTerm& t, const Vec& x) {
  if (t.A) return t.A(x);
  if (t.sigma) {
    const Mat s = t.sigma(x);
    return s * s.transpose();
  }
  throw Error(ErrorCode::InvalidArgument, "linear term has neither A nor sigma");
}

}  // namespace

FamilySubunitVerdict family_subunit(const LinearOperatorFamily& family, const Vec& x, const Vec& Z, FamilyMode mode,
                                    double tol) {
  if (mode != FamilyMode::HjbInf && mode != FamilyMode::HjbSup)
    throw Error(ErrorCode::InvalidArgument, "HJB family needs mode hjb-inf or hjb-sup");
  if (family.terms.empty()) throw Error(ErrorCode::InvalidArgument, "empty family");
  FamilySubunitVerdict out;
  out.mode = mode;
  out.is_equivalence = mode == FamilyMode::HjbInf;
  bool all_scaled = true, any_scaled = false, all_unit = true, any_unit = false;
  for (std::size_t a = 0; a < family.terms.size(); ++a) {
    const Mat A = member_matrix(family.terms[a], x);
    const double r = subunit_scaling_radius(A, Z, tol).r_max;
    out.radii.push_back({r});
    const bool scaled = r > 0.0;
    const bool unit = classical_subunit(A, Z, tol);
    all_scaled = all_scaled && scaled;
    any_scaled = any_scaled || scaled;
    all_unit = all_unit && unit;
    any_unit = any_unit || unit;
    if (mode == FamilyMode::HjbSup && scaled && out.detail.empty()) out.detail = "alpha=" + std::to_string(a);
  }
  if (mode == FamilyMode::HjbInf) {
    out.holds = all_scaled;
    out.classical_at_unit_scale = all_unit;
    out.detail = all_scaled ? "every member admits Z" : "some member has Z outside its range";
  } else {
    out.holds = any_scaled;
    out.classical_at_unit_scale = any_unit;
    if (!any_scaled) out.detail = "no member admits Z (sufficient condition not met)";
  }
  return out;
}

FamilySubunitVerdict family_subunit(const IsaacsFamily& family, const Vec& x, const Vec& Z, FamilyMode mode,
                                    double tol) {
  if (mode != FamilyMode::IsaacsInfSup && mode != FamilyMode::IsaacsSupInf)
    throw Error(ErrorCode::InvalidArgument, "Isaacs family needs mode isaacs-infsup or isaacs-supinf");
  if (family.terms.empty() || family.terms.front().empty()) throw Error(ErrorCode::InvalidArgument, "empty family");
  const std::size_t na = family.terms.size(), nb = family.terms.front().size();
  FamilySubunitVerdict out;
  out.mode = mode;
  std::vector<std::vector<char>> scaled(na, std::vector<char>(nb)), unit(na, std::vector<char>(nb));
  out.radii.assign(na, std::vector<double>(nb));
  for (std::size_t a = 0; a < na; ++a) {
    if (family.terms[a].size() != nb) throw Error(ErrorCode::InvalidArgument, "Isaacs family must be rectangular");
    for (std::size_t b = 0; b < nb; ++b) {
      const Mat A = member_matrix(family.terms[a][b], x);
      out.radii[a][b] = subunit_scaling_radius(A, Z, tol).r_max;
      scaled[a][b] = out.radii[a][b] > 0.0;
      unit[a][b] = classical_subunit(A, Z, tol);
    }
  }
  auto pattern = [&](const std::vector<std::vector<char>>& ok) {
    if (mode == FamilyMode::IsaacsSupInf) {
      // F- = sup_b inf_a: some beta works for every alpha
      for (std::size_t b = 0; b < nb; ++b) {
        bool all = true;
        for (std::size_t a = 0; a < na; ++a) all = all && ok[a][b];
        if (all) return true;
      }
      return false;
    }
    // F+ = inf_a sup_b: every alpha has some beta(alpha)
    for (std::size_t a = 0; a < na; ++a) {
      bool any = false;
      for (std::size_t b = 0; b < nb; ++b) any = any || ok[a][b];
      if (!any) return false;
    }
    return true;
  };
  out.holds = pattern(scaled);
  out.classical_at_unit_scale = pattern(unit);
  out.detail = out.holds ? "sufficient condition met" : "sufficient condition not met";
  return out;
}

}  // namespace svkit
