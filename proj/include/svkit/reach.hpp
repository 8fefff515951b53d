#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svkit/fields.hpp"

namespace svkit {

/// Piecewise-constant control with values in the closed unit ball of R^m.
struct ControlSignal {
  std::vector<double> breakpoints;  // t_0 = 0 < t_1 < ... < t_n
  std::vector<Vec> values;          // values[k] on [t_k, t_{k+1})

  static ControlSignal constant(const Vec& beta, double duration);
  /// Appends a segment of the given duration.
  void append(const Vec& beta, double duration);
  double duration() const { return breakpoints.empty() ? 0.0 : breakpoints.back(); }
  /// Throws InvalidArgument unless breakpoints increase strictly and |beta| <= 1 (+1e-12).
  void validate(int m) const;
  /// The same path run backwards: segments reversed and negated.
  ControlSignal reversed() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  ControlSignal signal;
  std::optional<double> exited;  // time at which the path left the box
};

/// Fixed-step RK4 for y' = sum_i beta_i(t) X_i(y) over [0, T]; steps are aligned with the
/// control breakpoints (each interval uses ceil(len/dt) equal steps). The control is zero after
/// the last breakpoint. Stops at the first state outside `box` (defaults to the family domain).
Trajectory integrate_trajectory(const VectorFieldFamily& family, const Vec& x0, const ControlSignal& signal, double T,
                                double dt, const std::optional<Box>& box = std::nullopt);

/// Uniform cell grid over a box.
class CellGrid {
 public:
  CellGrid() = default;
  CellGrid(Box box, std::vector<int> resolution);

  const Box& box() const { return box_; }
  const std::vector<int>& resolution() const { return res_; }
  int dim() const { return box_.dim(); }
  long size() const { return total_; }
  Vec widths() const { return width_; }
  double min_width() const { return width_.minCoeff(); }
  double diameter() const { return width_.norm(); }

  /// Flat index (first coordinate slowest) or -1 outside the box.
  long cell_of(const Vec& y) const;
  long cell_of(const double* y) const;
  std::vector<int> unflatten(long cell) const;
  Vec center(long cell) const;

 private:
  Box box_;
  std::vector<int> res_;
  Vec width_;
  long total_ = 0;
};

struct ReachOptions {
  std::vector<Vec> control_dirs;  // empty: +-e_i plus 2m random unit mixtures
  std::uint64_t seed = 7;
  int max_substeps = 256;         // cap on RK4 steps spent leaving one cell
  std::optional<long> stop_at_cell;
};

/// Default control directions: +-e_1..+-e_m followed by 2m seeded unit mixtures.
std::vector<Vec> default_control_dirs(int m, std::uint64_t seed);

/// Largest |X_i(y)| over cell centres and corners of the box.
double max_field_norm(const VectorFieldFamily& family, const Box& box);

/// Reachable-set approximation on a cell grid. Every occupied cell stores an actual reachable
/// state (its first-arrival point), the predecessor cell and the constant control used to get there.
struct ReachableSet {
  CellGrid grid;
  double T = 0.0;
  double dt = 0.0;
  Vec origin;
  long origin_cell = -1;
  std::vector<Vec> directions;
  std::vector<double> first_arrival;  // +inf when not reached
  std::vector<long> predecessor;      // -1 for the origin / unreached
  std::vector<int> via_direction;
  std::vector<double> via_duration;
  std::vector<Vec> representative;    // empty Vec when unreached

  bool occupied(long cell) const { return cell >= 0 && first_arrival[cell] <= T; }
  long occupied_count() const;
  double occupancy_fraction() const;
  /// Control signal from the origin to the representative of `cell`.
  ControlSignal path_to(long cell) const;
};

/// Flood fill in order of arrival time: from each settled cell's representative, integrate each
/// control direction with RK4 steps of dt until the state leaves the cell. dt <= 0 selects
/// min cell width / (4 max |X_i|). Rejects dt * max|X_i| > min cell width / 2.
ReachableSet reachable_set(const VectorFieldFamily& family, const Vec& x0, const Box& box,
                           const std::vector<int>& resolution, double T, double dt, const ReachOptions& options = {});

struct BtcResult {
  bool success = false;
  double s = 0.0;            // duration of the connecting path
  double final_error = 0.0;  // |y(s) - x1| after re-integration
  double tol = 0.0;
  ControlSignal signal;
  Trajectory trajectory;
  long occupied_cells = 0;
  double occupancy_fraction = 0.0;
  std::string message;
};

/// Connect x0 to x1 inside the box. tol <= 0 uses the cell diameter. Failure never claims
/// that the two points cannot be joined.
BtcResult btc_connect(const VectorFieldFamily& family, const Vec& x0, const Vec& x1, const Box& box,
                      const std::vector<int>& resolution, double T_max, double tol, double dt = 0.0,
                      const ReachOptions& options = {});

struct LocalControllability {
  double fraction = 0.0;
  long cells_in_ball = 0;
  long cells_reached = 0;
};

/// Fraction of the cells of [x0 - r, x0 + r]^d whose centres lie in B(x0, r) that are reached by time T.
LocalControllability local_controllability(const VectorFieldFamily& family, const Vec& x0, double r, int resolution,
                                           double T, double dt = 0.0, const ReachOptions& options = {});

}  // namespace svkit
