#include "svkit/reach.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>

#include "svkit/error.hpp"
#include "svkit/sampling.hpp"

namespace svkit {

ControlSignal ControlSignal::constant(const Vec& beta, double duration) {
  ControlSignal s;
  s.append(beta, duration);
  return s;
}

void ControlSignal::append(const Vec& beta, double duration) {
  if (!(duration > 0.0)) throw Error(ErrorCode::InvalidArgument, "control segment duration must be positive");
  if (breakpoints.empty()) breakpoints.push_back(0.0);
  breakpoints.push_back(breakpoints.back() + duration);
  values.push_back(beta);
}

void ControlSignal::validate(int m) const {
  if (values.empty() && breakpoints.empty()) return;
  if (breakpoints.size() != values.size() + 1)
    throw Error(ErrorCode::InvalidArgument, "control signal needs one more breakpoint than values");
  if (breakpoints.front() != 0.0) throw Error(ErrorCode::InvalidArgument, "control signal must start at t = 0");
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k)
    if (!(breakpoints[k + 1] > breakpoints[k]))
      throw Error(ErrorCode::InvalidArgument, "control breakpoints must increase strictly");
  for (const auto& v : values) {
    if (v.size() != m) throw Error(ErrorCode::InvalidArgument, "control value has wrong dimension");
    if (!(v.squaredNorm() <= 1.0 + 1e-12))
      throw Error(ErrorCode::InvalidArgument, "control value violates sum beta_i^2 <= 1");
  }
}

ControlSignal ControlSignal::reversed() const {
  ControlSignal r;
  for (std::size_t k = values.size(); k-- > 0;) r.append(-values[k], breakpoints[k + 1] - breakpoints[k]);
  return r;
}

namespace {

/// Allocation-free RK4 stepper for y' = sum beta_i X_i(y).
class Rk4 {
 public:
  Rk4(const VectorFieldFamily& fam) : fam_(fam), d_(fam.dim()), k1_(d_), k2_(d_), k3_(d_), k4_(d_), tmp_(d_) {}

  void step(const double* beta, double h, double* y) {
    fam_.combination_into(beta, y, k1_.data());
    for (int i = 0; i < d_; ++i) tmp_[i] = y[i] + 0.5 * h * k1_[i];
    fam_.combination_into(beta, tmp_.data(), k2_.data());
    for (int i = 0; i < d_; ++i) tmp_[i] = y[i] + 0.5 * h * k2_[i];
    fam_.combination_into(beta, tmp_.data(), k3_.data());
    for (int i = 0; i < d_; ++i) tmp_[i] = y[i] + h * k3_[i];
    fam_.combination_into(beta, tmp_.data(), k4_.data());
    for (int i = 0; i < d_; ++i) y[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

 private:
  const VectorFieldFamily& fam_;
  int d_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

int steps_for(double len, double dt) { return std::max(1, static_cast<int>(std::ceil(len / dt - 1e-9))); }

}  // namespace

Trajectory integrate_trajectory(const VectorFieldFamily& family, const Vec& x0, const ControlSignal& signal, double T,
                                double dt, const std::optional<Box>& box) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (!(T >= 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be nonnegative");
  if (x0.size() != family.dim()) throw Error(ErrorCode::InvalidArgument, "initial state has wrong dimension");
  signal.validate(family.count());
  const Box& bx = box ? *box : family.domain();
  if (!bx.contains(x0)) throw Error(ErrorCode::OutOfDomain, "initial state lies outside the box");

  Trajectory tr;
  tr.signal = signal;
  tr.times.push_back(0.0);
  tr.states.push_back(x0);

  std::vector<std::pair<double, Vec>> segments;  // (end time, beta)
  for (std::size_t k = 0; k < signal.values.size(); ++k) segments.emplace_back(signal.breakpoints[k + 1], signal.values[k]);
  if (signal.duration() < T) segments.emplace_back(T, Vec::Zero(family.count()));

  Rk4 rk(family);
  Vec y = x0;
  double t = 0.0;
  for (const auto& [end, beta] : segments) {
    const double stop = std::min(end, T);
    if (stop <= t) continue;
    const int n = steps_for(stop - t, dt);
    const double h = (stop - t) / n;
    const double t0 = t;
    for (int s = 1; s <= n; ++s) {
      rk.step(beta.data(), h, y.data());
      t = (s == n) ? stop : t0 + s * h;
      if (!y.allFinite()) {
        std::ostringstream os;
        os << "trajectory blew up (non-finite state) at t = " << t;
        throw Error(ErrorCode::Numerical, os.str());
      }
      if (!bx.contains(y)) {
        tr.exited = t;
        return tr;
      }
      tr.times.push_back(t);
      tr.states.push_back(y);
    }
    if (t >= T) break;
  }
  return tr;
}

CellGrid::CellGrid(Box box, std::vector<int> resolution) : box_(std::move(box)), res_(std::move(resolution)) {
  const int d = box_.dim();
  if (static_cast<int>(res_.size()) != d) throw Error(ErrorCode::InvalidArgument, "resolution has wrong dimension");
  width_.resize(d);
  total_ = 1;
  for (int k = 0; k < d; ++k) {
    if (res_[k] < 1) throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
    if (!(box_.hi[k] > box_.lo[k])) throw Error(ErrorCode::InvalidArgument, "box must satisfy lo < hi");
    width_[k] = (box_.hi[k] - box_.lo[k]) / res_[k];
    total_ *= res_[k];
  }
}

long CellGrid::cell_of(const double* y) const {
  long idx = 0;
  for (int k = 0; k < dim(); ++k) {
    if (!(y[k] >= box_.lo[k] && y[k] <= box_.hi[k])) return -1;
    long i = static_cast<long>(std::floor((y[k] - box_.lo[k]) / width_[k]));
    if (i >= res_[k]) i = res_[k] - 1;
    if (i < 0) i = 0;
    idx = idx * res_[k] + i;
  }
  return idx;
}

long CellGrid::cell_of(const Vec& y) const {
  if (y.size() != dim()) throw Error(ErrorCode::InvalidArgument, "point has wrong dimension");
  return cell_of(y.data());
}

std::vector<int> CellGrid::unflatten(long cell) const {
  std::vector<int> idx(dim());
  for (int k = dim() - 1; k >= 0; --k) {
    idx[k] = static_cast<int>(cell % res_[k]);
    cell /= res_[k];
  }
  return idx;
}

Vec CellGrid::center(long cell) const {
  const auto idx = unflatten(cell);
  Vec c(dim());
  for (int k = 0; k < dim(); ++k) c[k] = box_.lo[k] + (idx[k] + 0.5) * width_[k];
  return c;
}

std::vector<Vec> default_control_dirs(int m, std::uint64_t seed) {
  std::vector<Vec> dirs;
  for (int i = 0; i < m; ++i) {
    dirs.push_back(Vec::Unit(m, i));
    dirs.push_back(-Vec::Unit(m, i));
  }
  if (m > 1) {
    Rng rng(seed);
    for (int k = 0; k < 2 * m; ++k) dirs.push_back(rng.unit_vec(m));
  }
  return dirs;
}

double max_field_norm(const VectorFieldFamily& family, const Box& box) {
  const int d = family.dim();
  std::vector<int> res(d, 8);
  CellGrid g(box, res);
  double best = 0.0;
  auto visit = [&](const Vec& y) {
    for (int i = 0; i < family.count(); ++i) best = std::max(best, family.field_unchecked(i, y).norm());
  };
  for (long c = 0; c < g.size(); ++c) visit(g.center(c));
  for (long corner = 0; corner < (1L << d); ++corner) {
    Vec y(d);
    for (int k = 0; k < d; ++k) y[k] = (corner >> k) & 1 ? box.hi[k] : box.lo[k];
    visit(y);
  }
  return best;
}

long ReachableSet::occupied_count() const {
  long n = 0;
  for (long c = 0; c < grid.size(); ++c)
    if (occupied(c)) ++n;
  return n;
}

double ReachableSet::occupancy_fraction() const {
  return static_cast<double>(occupied_count()) / static_cast<double>(grid.size());
}

ControlSignal ReachableSet::path_to(long cell) const {
  if (!occupied(cell)) throw Error(ErrorCode::InvalidArgument, "cell is not reached");
  std::vector<long> chain;
  for (long c = cell; c != origin_cell; c = predecessor[c]) {
    if (c < 0) throw Error(ErrorCode::Numerical, "broken predecessor chain");
    chain.push_back(c);
  }
  ControlSignal sig;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) sig.append(directions[via_direction[*it]], via_duration[*it]);
  return sig;
}

ReachableSet reachable_set(const VectorFieldFamily& family, const Vec& x0, const Box& box,
                           const std::vector<int>& resolution, double T, double dt, const ReachOptions& options) {
  if (box.dim() != family.dim()) throw Error(ErrorCode::InvalidArgument, "box has wrong dimension");
  if (!(T >= 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be nonnegative");
  ReachableSet rs;
  rs.grid = CellGrid(box, resolution);
  rs.T = T;
  rs.origin = x0;
  rs.origin_cell = rs.grid.cell_of(x0);
  if (rs.origin_cell < 0) throw Error(ErrorCode::OutOfDomain, "origin lies outside the box");

  const double vmax = max_field_norm(family, box);
  const double wmin = rs.grid.min_width();
  if (dt <= 0.0) dt = vmax > 0.0 ? wmin / (4.0 * vmax) : wmin;
  if (dt * vmax > 0.5 * wmin) {
    std::ostringstream os;
    os << "grid too coarse for the step: dt*max|X| = " << dt * vmax << " exceeds half the smallest cell width "
       << 0.5 * wmin;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  rs.dt = dt;
  rs.directions = options.control_dirs.empty() ? default_control_dirs(family.count(), options.seed)
                                               : options.control_dirs;
  for (const auto& b : rs.directions)
    if (b.size() != family.count() || b.squaredNorm() > 1.0 + 1e-12)
      throw Error(ErrorCode::InvalidArgument, "control directions must be unit-ball vectors of size m");

  const long n = rs.grid.size();
  rs.first_arrival.assign(n, std::numeric_limits<double>::infinity());
  rs.predecessor.assign(n, -1);
  rs.via_direction.assign(n, -1);
  rs.via_duration.assign(n, 0.0);
  rs.representative.assign(n, Vec());
  std::vector<char> settled(n, 0);

  using Item = std::pair<double, long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  rs.first_arrival[rs.origin_cell] = 0.0;
  rs.representative[rs.origin_cell] = x0;
  pq.emplace(0.0, rs.origin_cell);

  Rk4 rk(family);
  const int d = family.dim();
  Vec y(d);
  while (!pq.empty()) {
    const auto [t, cell] = pq.top();
    pq.pop();
    if (settled[cell] || t > rs.first_arrival[cell]) continue;
    settled[cell] = 1;
    if (options.stop_at_cell && *options.stop_at_cell == cell) break;
    for (std::size_t k = 0; k < rs.directions.size(); ++k) {
      y = rs.representative[cell];
      long landed = cell;
      int steps = 0;
      while (landed == cell && steps < options.max_substeps) {
        rk.step(rs.directions[k].data(), dt, y.data());
        ++steps;
        if (!y.allFinite()) break;
        landed = rs.grid.cell_of(y.data());
        if (t + steps * dt > T) break;
      }
      if (landed < 0 || landed == cell || !y.allFinite()) continue;
      const double arrival = t + steps * dt;
      if (arrival > T || settled[landed] || arrival >= rs.first_arrival[landed]) continue;
      rs.first_arrival[landed] = arrival;
      rs.predecessor[landed] = cell;
      rs.via_direction[landed] = static_cast<int>(k);
      rs.via_duration[landed] = steps * dt;
      rs.representative[landed] = y;
      pq.emplace(arrival, landed);
    }
  }
  return rs;
}

BtcResult btc_connect(const VectorFieldFamily& family, const Vec& x0, const Vec& x1, const Box& box,
                      const std::vector<int>& resolution, double T_max, double tol, double dt,
                      const ReachOptions& options) {
  BtcResult res;
  const CellGrid grid(box, resolution);
  const long target = grid.cell_of(x1);
  if (target < 0) throw Error(ErrorCode::OutOfDomain, "target lies outside the box");
  if (grid.cell_of(x0) < 0) throw Error(ErrorCode::OutOfDomain, "start lies outside the box");
  res.tol = tol > 0.0 ? tol : grid.diameter();

  ReachOptions opts = options;
  opts.stop_at_cell = target;
  const ReachableSet rs = reachable_set(family, x0, box, resolution, T_max, dt, opts);
  res.occupied_cells = rs.occupied_count();
  res.occupancy_fraction = rs.occupancy_fraction();
  if (!rs.occupied(target)) {
    std::ostringstream os;
    os << "target cell not reached within T_max = " << T_max << " (" << res.occupied_cells
       << " cells reached); this does not refute bounded-time controllability";
    res.message = os.str();
    return res;
  }
  res.signal = rs.path_to(target);
  res.s = res.signal.duration();
  if (res.signal.values.empty()) {
    res.trajectory.times = {0.0};
    res.trajectory.states = {x0};
  } else {
    res.trajectory = integrate_trajectory(family, x0, res.signal, res.s, rs.dt, box);
  }
  if (res.trajectory.exited) {
    res.message = "re-integrated path left the box";
    return res;
  }
  res.final_error = (res.trajectory.states.back() - x1).norm();
  res.success = res.final_error <= res.tol;
  res.message = res.success ? "connected" : "re-integrated endpoint misses the target";
  return res;
}

LocalControllability local_controllability(const VectorFieldFamily& family, const Vec& x0, double r, int resolution,
                                           double T, double dt, const ReachOptions& options) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  const int d = family.dim();
  const Box box{x0.array() - r, x0.array() + r};
  const ReachableSet rs = reachable_set(family, x0, box, std::vector<int>(d, resolution), T, dt, options);
  LocalControllability out;
  for (long c = 0; c < rs.grid.size(); ++c) {
    if ((rs.grid.center(c) - x0).norm() > r) continue;
    ++out.cells_in_ball;
    if (rs.occupied(c)) ++out.cells_reached;
  }
  out.fraction = out.cells_in_ball ? static_cast<double>(out.cells_reached) / out.cells_in_ball : 0.0;
  return out;
}

}  // namespace svkit
