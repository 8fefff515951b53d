#include <doctest.h>

#include <cmath>

#include "svkit/error.hpp"
#include "svkit/reach.hpp"
#include "svkit/sampling.hpp"

using namespace svkit;

namespace {
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

VectorFieldFamily line_family(double half) {
  PolynomialField e1{{Polynomial::constant(2, 1.0), Polynomial(2)}};
  return VectorFieldFamily::from_polynomials("line", {e1}, Box::cube(2, half));
}
}  // namespace

TEST_CASE("control signals") {
  ControlSignal s = ControlSignal::constant(v2(1, 0), 0.5);
  s.append(v2(0, -1), 0.25);
  CHECK(s.duration() == doctest::Approx(0.75));
  CHECK_NOTHROW(s.validate(2));
  const auto r = s.reversed();
  CHECK(r.values.front() == v2(0, 1));
  CHECK(r.breakpoints.back() == doctest::Approx(0.75));
  ControlSignal bad = ControlSignal::constant(v2(1, 1), 1.0);
  CHECK_THROWS_AS(bad.validate(2), Error);
  CHECK_THROWS_AS(s.append(v2(1, 0), 0.0), Error);
}

TEST_CASE("trajectory examples") {
  const auto g = catalog_family("grushin");
  const auto tr = integrate_trajectory(g, v2(0, 0), ControlSignal::constant(v2(1, 0), 1.0), 1.0, 0.01);
  CHECK((tr.states.back() - v2(1, 0)).norm() < 1e-12);
  const auto h = catalog_family("heisenberg1");
  const auto z = integrate_trajectory(h, v3(0.1, 0.2, 0.3), ControlSignal::constant(v2(0, 0), 1.0), 2.0, 0.1);
  for (const auto& y : z.states) CHECK(y == v3(0.1, 0.2, 0.3));
  CHECK(z.times.back() == doctest::Approx(2.0));
  CHECK_THROWS_AS(integrate_trajectory(g, v2(0, 0), ControlSignal::constant(v2(1, 0), 1.0), 1.0, 0.0), Error);
}

TEST_CASE("trajectories stop at the box boundary") {
  const auto g = catalog_family("grushin").with_domain(Box::cube(2, 1.0));
  const auto tr = integrate_trajectory(g, v2(0, 0), ControlSignal::constant(v2(1, 0), 3.0), 3.0, 0.01);
  REQUIRE(tr.exited.has_value());
  CHECK(*tr.exited == doctest::Approx(1.0).epsilon(0.02));
  for (const auto& y : tr.states) CHECK(g.domain().contains(y));
}

TEST_CASE("blow-up is reported") {
  auto fam = VectorFieldFamily::from_functions(
      "blow", 1, {[](const Vec& x) { return Vec::Constant(1, x(0) * x(0) * 1e300); }}, Box::cube(1, 1e308));
  CHECK_THROWS_AS(integrate_trajectory(fam, Vec::Constant(1, 1.0), ControlSignal::constant(Vec::Constant(1, 1.0), 1.0),
                                       1.0, 0.1),
                  Error);
}

TEST_CASE("RK4 order on a rotation field") {
  auto rot = VectorFieldFamily::from_functions("rot", 2, {[](const Vec& x) { return v2(-x(1), x(0)); }},
                                               Box::cube(2, 5.0));
  const auto sig = ControlSignal::constant(Vec::Constant(1, 1.0), 1.0);
  const Vec exact = v2(std::cos(1.0), std::sin(1.0));
  const double e1 = (integrate_trajectory(rot, v2(1, 0), sig, 1.0, 0.1).states.back() - exact).norm();
  const double e2 = (integrate_trajectory(rot, v2(1, 0), sig, 1.0, 0.05).states.back() - exact).norm();
  const double ratio = e1 / e2;
  CHECK(ratio > 8.0);
  CHECK(ratio < 32.0);
}

TEST_CASE("Heisenberg square loop") {
  const auto h = catalog_family("heisenberg1");
  for (double s : {0.1, 0.05}) {
    ControlSignal sig;
    sig.append(v2(1, 0), s);
    sig.append(v2(0, 1), s);
    sig.append(v2(-1, 0), s);
    sig.append(v2(0, -1), s);
    const Vec e = integrate_trajectory(h, Vec::Zero(3), sig, 4 * s, s / 10).states.back();
    CHECK((e - v3(0, 0, -4 * s * s)).norm() <= s * s * s);
  }
}

TEST_CASE("cell grid indexing") {
  CellGrid g(Box::cube(2, 1.0), {4, 8});
  CHECK(g.size() == 32);
  CHECK(g.cell_of(v2(-1, -1)) == 0);
  CHECK(g.cell_of(v2(1, 1)) == 31);
  CHECK(g.cell_of(v2(1.1, 0)) == -1);
  for (long c = 0; c < g.size(); ++c) CHECK(g.cell_of(g.center(c)) == c);
  CHECK(g.unflatten(9) == std::vector<int>{1, 1});
}

TEST_CASE("Euclidean plane fills the box") {
  const auto e = catalog_family("euclidean:2").with_domain(Box::cube(2, 1.0));
  const auto rs = reachable_set(e, v2(0.1, -0.2), e.domain(), {16, 16}, 4.0, 0.0);
  CHECK(rs.occupancy_fraction() == 1.0);
  CHECK(rs.occupied(rs.origin_cell));
  CHECK(rs.first_arrival[rs.origin_cell] == 0.0);
}

TEST_CASE("a single field reaches only its line") {
  const auto f = line_family(1.0);
  const auto rs = reachable_set(f, v2(0.01, 0.01), f.domain(), {16, 16}, 4.0, 0.0);
  CHECK(rs.occupied_count() == 16);
  for (long c = 0; c < rs.grid.size(); ++c)
    if (rs.occupied(c)) CHECK(rs.grid.unflatten(c)[1] == 8);
  const auto lc = local_controllability(line_family(2.0), v2(0.01, 0.01), 0.5, 16, 5.0);
  CHECK(lc.fraction < 0.3);
}

TEST_CASE("Grushin starting on the degenerate line") {
  const auto g = catalog_family("grushin").with_domain(Box::cube(2, 1.0));
  const auto early = reachable_set(g, v2(0, 0), g.domain(), {16, 16}, 0.05, 0.0);
  for (long c = 0; c < early.grid.size(); ++c)
    if (early.occupied(c)) CHECK(std::abs(early.grid.center(c)(1)) < 0.2);
  const auto late = reachable_set(g, v2(0, 0), g.domain(), {16, 16}, 8.0, 0.0);
  CHECK(late.occupancy_fraction() > 0.95);
}

TEST_CASE("reach monotonicity and containment") {
  const auto h = catalog_family("heisenberg1").with_domain(Box::cube(3, 1.0));
  const auto r1 = reachable_set(h, Vec::Zero(3), h.domain(), {12, 12, 12}, 0.8, 0.0);
  const auto r2 = reachable_set(h, Vec::Zero(3), h.domain(), {12, 12, 12}, 1.6, 0.0);
  for (long c = 0; c < r1.grid.size(); ++c)
    if (r1.occupied(c)) CHECK(r2.occupied(c));
  CHECK(r2.occupied_count() >= r1.occupied_count());

  // every state of a path replayed from the fill lies in an occupied cell
  Rng rng(30);
  for (int k = 0; k < 20; ++k) {
    long cell = rng.integer(0, static_cast<int>(r2.grid.size()) - 1);
    if (!r2.occupied(cell)) continue;
    const auto sig = r2.path_to(cell);
    const auto tr = integrate_trajectory(h, Vec::Zero(3), sig, sig.duration(), r2.dt);
    for (const auto& y : tr.states) CHECK(r2.occupied(r2.grid.cell_of(y)));
    CHECK((tr.states.back() - r2.representative[cell]).norm() < 1e-9);
  }
}

TEST_CASE("too coarse grids are rejected") {
  const auto e = catalog_family("euclidean:2").with_domain(Box::cube(2, 1.0));
  CHECK_THROWS_AS(reachable_set(e, v2(0, 0), e.domain(), {16, 16}, 1.0, 0.2), Error);
}

TEST_CASE("bounded-time connections") {
  const auto e = catalog_family("euclidean:2").with_domain(Box::cube(2, 1.5));
  const auto be = btc_connect(e, v2(0, 0), v2(1, 1), e.domain(), {32, 32}, 5.0, 0.0);
  CHECK(be.success);
  CHECK(be.s <= 2.0 + be.tol + 0.2);
  CHECK(be.final_error <= be.tol);

  const auto g = catalog_family("grushin").with_domain(Box::cube(2, 2.0));
  const auto bg = btc_connect(g, v2(-1, 0), v2(1, 1), g.domain(), {32, 32}, 20.0, 0.0);
  CHECK(bg.success);
  // the reversed path returns near the start
  const auto back = integrate_trajectory(g, bg.trajectory.states.back(), bg.signal.reversed(), bg.s, bg.trajectory.times[1]);
  CHECK((back.states.back() - v2(-1, 0)).norm() < 1e-4);

  const auto line = line_family(1.0);
  const auto bl = btc_connect(line, v2(0, 0), v2(0, 0.9), line.domain(), {16, 16}, 3.0, 0.0);
  CHECK_FALSE(bl.success);
  CHECK_FALSE(bl.message.empty());
}

TEST_CASE("Heisenberg local controllability") {
  const auto lc = local_controllability(catalog_family("heisenberg1"), Vec::Zero(3), 0.2, 16, 2.0);
  CHECK(lc.cells_in_ball > 0);
  CHECK(lc.fraction >= 0.95);
  const auto full = local_controllability(catalog_family("euclidean:3"), Vec::Zero(3), 0.2, 12, 2.0);
  CHECK(full.fraction == 1.0);
}

TEST_CASE("Heisenberg fills a centred box") {
  const auto h = catalog_family("heisenberg1").with_domain(Box::cube(3, 1.0));
  const auto rs = reachable_set(h, Vec::Zero(3), h.domain(), {16, 16, 16}, 4.0, 0.0);
  long inner = 0, hit = 0;
  for (long c = 0; c < rs.grid.size(); ++c)
    if (rs.grid.center(c).cwiseAbs().maxCoeff() <= 0.5) {
      ++inner;
      hit += rs.occupied(c);
    }
  CHECK(inner == 512);
  CHECK(static_cast<double>(hit) / inner >= 0.99);
  CHECK(rs.occupancy_fraction() > 0.95);
}
