#pragma once

#include <optional>
#include <string>
#include <vector>

#include "svkit/operators.hpp"

namespace svkit {

/// Fefferman-Phong test: A >= Z Z^T up to tol on the smallest eigenvalue.
bool classical_subunit(const Mat& A, const Vec& Z, double tol = 1e-10);

struct ScalingRadius {
  double r_max = 0.0;       // largest r with A >= r^2 Z Z^T; +inf when Z = 0
  bool degenerate = false;  // Z = 0
};

/// Largest r such that rZ is subunit for A, from the ellipsoid sum_{l_i > 0} Z~_i^2 / l_i <= 1/r^2.
ScalingRadius subunit_scaling_radius(const Mat& A, const Vec& Z, double kernel_tol = 1e-10);

enum class SubunitMode { Plus, Minus, Strong };
enum class Verdict { Certified, Refuted, Inconclusive };

std::string to_string(SubunitMode m);
std::string to_string(Verdict v);

struct SearchParams {
  int n_directions = 256;
  std::vector<double> gamma_grid;            // default: 64 log-spaced over [1e-2, 1e8]
  std::vector<double> radial{0.1, 1.0, 10.0};
  double tol_dot = 1e-8;
  double tol_pos = 1e-10;
  double strong_threshold = 1e3;
  int extra_decades = 8;  // further gamma decades tried for profiles still rising at the top of the grid

  const std::vector<double>& gammas() const;
};

struct DirectionResult {
  Vec p;
  Verdict verdict = Verdict::Inconclusive;
  std::optional<double> gamma_star;  // first grid gamma with a positive value
  double last_value = 0.0;           // value at the largest gamma
};

struct SubunitCertificate {
  Vec point;
  Vec Z;
  SubunitMode mode = SubunitMode::Plus;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<DirectionResult> directions;  // every tested p (after the |Z.p| filter)
  std::optional<Vec> witness_p;
  std::vector<double> witness_profile;
  SearchParams params;
  int certified = 0;
  int refuted = 0;
  int inconclusive = 0;
};

/// Generalized subunit test at x: for every sampled p with |Z.p| > tol_dot,
///   Plus:   sup_gamma F(x,0,p,I - gamma p(x)p) > 0
///   Minus:  inf_gamma F(x,0,p,gamma p(x)p - I) < 0
///   Strong: F(x,0,p,I - gamma p(x)p) grows past strong_threshold over the last decade of the grid.
SubunitCertificate certify_subunit(const OperatorSpec& F, const Vec& x, const Vec& Z, SubunitMode mode,
                                   const SearchParams& params = {});

/// The gamma-profile used by certify_subunit for one direction.
std::vector<double> subunit_profile(const OperatorSpec& F, const Vec& x, const Vec& p, SubunitMode mode,
                                    const std::vector<double>& gammas);

enum class FamilyMode { HjbInf, HjbSup, IsaacsInfSup, IsaacsSupInf };
std::string to_string(FamilyMode m);

struct FamilySubunitVerdict {
  FamilyMode mode = FamilyMode::HjbInf;
  bool holds = false;
  bool is_equivalence = false;       // true only for HjbInf; otherwise a sufficient condition
  bool classical_at_unit_scale = false;  // the same quantifier pattern with A >= Z Z^T (r = 1)
  std::vector<std::vector<double>> radii;  // [alpha][beta] scaling radii (beta = 0 for HJB)
  std::string detail;
};

/// Structural subunit test on the diffusion matrices at x. A member "admits" Z when some positive
/// multiple rZ is subunit for it (positive scaling radius).
FamilySubunitVerdict family_subunit(const LinearOperatorFamily& family, const Vec& x, const Vec& Z, FamilyMode mode,
                                    double tol = 1e-10);
FamilySubunitVerdict family_subunit(const IsaacsFamily& family, const Vec& x, const Vec& Z, FamilyMode mode,
                                    double tol = 1e-10);

}  // namespace svkit
