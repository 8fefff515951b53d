#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "svkit/operators.hpp"
#include "svkit/reach.hpp"
#include "svkit/subunit.hpp"

namespace svkit {

enum class Semicontinuity { Continuous, UscPointlist };
std::string to_string(Semicontinuity s);

/// Function sampled on the nodes of a uniform box grid, row-major (first coordinate slowest).
/// Exceptional (node, value) pairs override the regular values.
struct GridFunction {
  Vec origin;
  Vec spacing;
  std::vector<int> shape;  // nodes per axis
  std::vector<double> values;
  Semicontinuity tag = Semicontinuity::Continuous;
  std::vector<std::pair<long, double>> exceptional;

  /// Samples f on shape[k] nodes per axis spanning the box.
  static GridFunction sample(const Box& box, const std::vector<int>& shape, const std::function<double(const Vec&)>& f);

  int dim() const { return static_cast<int>(shape.size()); }
  long size() const;
  Box box() const;
  long flat(const std::vector<int>& idx) const;
  std::vector<int> unflatten(long node) const;
  Vec node(long node) const;
  double value(long node) const { return values[node]; }
  /// Nearest node to x (clamped to the grid).
  long nearest_node(const Vec& x) const;
  /// Sets an exceptional value (and records it).
  void set_exceptional(long node, double value);
  /// Throws InvalidArgument unless sizes agree, values are finite and exceptional nodes are valid.
  void validate() const;
  /// Multilinear interpolation; throws OutOfDomain outside the grid box.
  double interpolate(const Vec& x) const;
  /// Largest axis-wise difference quotient between neighbouring nodes.
  double lipschitz_estimate() const;
  /// Cell diameter |spacing|.
  double cell_diameter() const { return spacing.norm(); }
};

/// Closed-form smooth function with exact gradient and Hessian.
struct SmoothFunction {
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;

  /// c + b.x + 1/2 x^T Q x
  static SmoothFunction quadratic(double c, const Vec& b, const Mat& Q);
  Jet jet(const Vec& x) const { return Jet{x, f(x), grad(x), hess(x)}; }
  SmoothFunction operator-(const SmoothFunction& o) const;
};

struct JetParams {
  int rho = 1;                     // touching radius in cells
  double p_min = 1e-6;             // |p| floor for test gradients
  double touch_tol = 1e-10;        // relative slack in u(y) <= phi(y)
  double tol = 1e-9;               // F <= tol is accepted
  int p_directions = 16;           // absolute p grid: directions
  std::vector<double> p_magnitudes{1e-3, 1e-1, 1.0, 10.0};
  std::vector<double> p_offsets{1e-3, 1e-2, 1e-1};         // anchored p0 +- t e_k
  std::vector<double> curvatures{-10.0, -1.0, 0.0, 1.0, 10.0, 100.0};  // absolute X = c I
  std::vector<double> curvature_offsets{0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};  // anchored X0 + c I
  bool anchored = true;            // include jets anchored at the finite-difference (or exact) jet
  std::function<std::pair<Vec, Mat>(const Vec&)> exact_jet;  // optional exact (Du, D^2u)
  std::size_t max_witnesses = 16;
};

struct SubsolutionViolation {
  long node = -1;
  Jet jet;
  double value = 0.0;
};

struct SubsolutionReport {
  bool refuted = false;
  std::string verdict;  // "consistent-with-subsolution" or "refuted"
  long nodes_checked = 0;
  long jets_tested = 0;
  long touching_jets = 0;
  std::size_t violation_count = 0;
  std::vector<SubsolutionViolation> violations;  // largest F first, capped
  double max_value = -std::numeric_limits<double>::infinity();  // largest F over touching jets
};

/// Test-jet dictionary check of the viscosity subsolution inequality at interior nodes.
SubsolutionReport check_subsolution(const OperatorSpec& F, const GridFunction& u, const JetParams& params = {});

struct Barrier {
  Vec z;
  Vec y;
  double R = 0.0;
  double gamma = 1.0;

  /// Barrier with touching point z and centre y; R = |z - y|.
  static Barrier make(const Vec& z, const Vec& y, double gamma);
  /// Validates |z - y| = R to 1e-12 and gamma > 0.
  Barrier(Vec z, Vec y, double R, double gamma);
  Barrier() = default;
  Vec normal() const { return (z - y) / R; }
};

struct BarrierJet {
  double value = 0.0;
  Vec gradient;
  Mat hessian;
};

/// v(x) = exp(-gamma R^2) - exp(-gamma |x - y|^2) with its gradient and Hessian.
BarrierJet barrier_eval(const Barrier& b, const Vec& x);

struct StrictnessResult {
  bool found = false;
  bool precheck_ok = false;
  std::optional<Vec> certified_Z;  // certified Z with the largest |Z.nu|
  double gamma = 0.0;
  double C = 0.0;                  // empirical min of F[v] over the samples
  double r_used = 0.0;
  int halvings = 0;
  int samples = 0;
  std::string message;
};

/// Precheck: some candidate Z certified (mode plus) at z with |Z.nu| > tol. Then search the gamma
/// grid for min_{B(z,r)} F[v] > 0, halving r up to 6 times.
StrictnessResult barrier_strictness(const OperatorSpec& F, const Vec& z, const Vec& y, double r,
                                    const std::vector<double>& gamma_grid, int n_samples,
                                    const std::vector<Vec>& candidate_Z, std::uint64_t seed = 11,
                                    const SearchParams& search = {});

struct HopfResult {
  bool accepted = false;   // preconditions held
  bool negative = false;   // verdict: analytic quotient bound < 0
  double gamma = 0.0;
  double epsilon = 0.0;
  double quotient_bound = 0.0;               // eps Dv(x0).w
  std::vector<std::pair<double, double>> measured;  // (tau, (u(x0 + tau w) - u(x0)) / tau)
  bool interior_gap = false;  // boundary-fitted eps failed somewhere inside X and was refitted
  long nodes_in_X = 0;
  std::string message;
};

/// Hopf boundary test at the node nearest x0 with interior ball B(y, R) and inward direction w.
HopfResult hopf_test(const OperatorSpec& F, const GridFunction& u, const Vec& x0, const Vec& y, double R,
                     const Vec& w, const std::vector<double>& gamma_grid, double r);

struct PropagationParams {
  double tol = 0.0;  // <= 0: 2 * Lipschitz estimate * cell diameter
  int n_traj = 32;
  double T = 1.0;
  double dt = 0.01;
  int segments = 8;
  std::uint64_t seed = 5;
  JetParams jets;
  int subunit_points = 4;  // nodes at which the fields are certified
};

enum class PropagationStatus { Pass, Fail, Refused };
std::string to_string(PropagationStatus s);

struct PropagationReport {
  PropagationStatus status = PropagationStatus::Refused;
  Vec x0;
  double max_value = 0.0;
  double tol = 0.0;
  std::vector<long> K_cells;  // cells (CellGrid over the node box) whose corner max >= max - tol
  int trajectories_checked = 0;
  double max_deviation = 0.0;
  bool endpoints_in_K = true;
  std::optional<SubsolutionReport> precheck;
  std::string message;
};

PropagationReport propagation_test(const OperatorSpec& F, const VectorFieldFamily& family, const GridFunction& u,
                                   const PropagationParams& params = {});

struct ScpReport {
  bool preconditions_ok = true;
  bool pass = false;
  double margin = -std::numeric_limits<double>::infinity();  // max of F_i[(u - v) jet]
  std::optional<Vec> failed_point;
  std::string message;
  int samples = 0;
};

/// With F = inf_a {L^a - f^a}: requires F[u] <= tol and F[v] >= -tol at the samples, then checks
/// inf_a L^a (u - v) <= tol.
ScpReport scp_difference_check(const LinearOperatorFamily& family, const SmoothFunction& u, const SmoothFunction& v,
                               const std::vector<Vec>& points, double tol = 1e-9);

/// eta(x) = (1/m) sum |Z_i(x)|^2
double ellipticity_modulus(const VectorFieldFamily& family, const Vec& x);
/// min of eta over K from a grid of n^d nodes plus the corners.
double min_ellipticity(const VectorFieldFamily& family, const Box& K, int n_per_axis = 9);
/// Sampled Lipschitz constant of F in p over K (finite differences along random directions).
double lipschitz_in_p(const OperatorSpec& F, const Box& K, int n_samples, std::uint64_t seed, double p_scale = 1.0,
                      double X_scale = 1.0, double r_scale = 1.0);

struct StrictLift {
  Vec center;
  double epsilon = 0.0;
  double lambda = 0.0;
  double delta = 0.0;
  double r_bar = 0.0;
  double L_K = 0.0;
  double eta_bar = 0.0;
  double r1 = 0.0;

  /// r_bar = min((eta_bar - delta)/L_K, r1) and lambda = exp(r_bar^2/2) unless lambda > 0 is given.
  static StrictLift build(const Vec& center, double epsilon, double delta, double eta_bar, double L_K, double r1,
                          double lambda = 0.0);
  void validate() const;
  /// Exact jet of u_eps = u + eps (exp(|x - c|^2/2) - lambda).
  Jet lifted_jet(const SmoothFunction& u, const Vec& x) const;
};

struct StrictLiftReport {
  bool preconditions_ok = true;
  bool pass = false;
  int samples = 0;
  double max_F = -std::numeric_limits<double>::infinity();       // max F[u_eps]
  double max_margin = -std::numeric_limits<double>::infinity();  // max F[u_eps] + eps delta e^{|x-c|^2/2}
  double bound = 0.0;  // -eps delta min_ball e^{|x-c|^2/2}
  std::string message;
};

StrictLiftReport strict_lift_check(const OperatorSpec& F, const SmoothFunction& u, const StrictLift& lift,
                                   const std::vector<Vec>& points, double tol = 1e-9);

/// max_x F[u_eps]/eps for each eps; the spread max/min - 1 measures departure from linearity.
struct LinearityResult {
  std::vector<double> epsilons;
  std::vector<double> slopes;
  double spread = 0.0;
};
LinearityResult strict_lift_linearity(const OperatorSpec& F, const SmoothFunction& u, StrictLift lift,
                                      const std::vector<double>& epsilons, const std::vector<Vec>& points);

/// n deterministic points of the closed ball B(c, r), the centre first.
std::vector<Vec> ball_samples(const Vec& c, double r, int n, std::uint64_t seed);

}  // namespace svkit
