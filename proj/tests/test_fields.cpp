#include <doctest.h>

#include "svkit/error.hpp"
#include "svkit/fields.hpp"
#include "svkit/sampling.hpp"

using namespace svkit;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

// A degree-2 family on R^3 with non-trivial brackets.
VectorFieldFamily quadratic_family() {
  auto var = [](int k) { return Polynomial::variable(3, k); };
  auto one = Polynomial::constant(3, 1.0);
  Polynomial zero(3);
  PolynomialField A{{one, var(0) * var(2), var(1) * var(1)}};
  PolynomialField B{{var(1), one, var(0) * var(1) - var(2)}};
  PolynomialField C{{var(2) * var(2), var(0), one * 0.5 + var(1)}};
  return VectorFieldFamily::from_polynomials("quad", {A, B, C}, Box::cube(3, 3.0));
}

}  // namespace

TEST_CASE("catalog field values") {
  const auto g = catalog_family("grushin");
  CHECK(g.dim() == 2);
  CHECK(g.count() == 2);
  CHECK(g.field(1, v2(2, 5)).isApprox(v2(0, 2)));
  const auto h = catalog_family("heisenberg1");
  CHECK(h.field(0, v3(1, 2, 3)).isApprox(v3(1, 0, 4)));
  CHECK(h.field(1, v3(1, 2, 3)).isApprox(v3(0, 1, -2)));
  const auto e = catalog_family("euclidean:4");
  CHECK(e.sigma(Vec::Zero(4)).isApprox(Mat::Identity(4, 4)));
  CHECK_THROWS_AS(catalog_family("nope"), Error);
  CHECK_THROWS_AS(catalog_family("euclidean:0"), Error);
}

TEST_CASE("evaluation errors") {
  const auto g = catalog_family("grushin");
  CHECK_THROWS_AS(g.field(2, v2(0, 0)), Error);
  CHECK_THROWS_AS(g.field(0, v2(11, 0)), Error);
  try {
    g.field(-1, v2(0, 0));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndexOutOfRange);
  }
}

TEST_CASE("bracket closed forms") {
  const auto g = catalog_family("grushin");
  const auto h = catalog_family("heisenberg1");
  Rng rng(1);
  for (int s = 0; s < 20; ++s) {
    const Vec x2 = rng.uniform_in_box(Vec::Constant(2, -3), Vec::Constant(2, 3));
    const Vec x3 = rng.uniform_in_box(Vec::Constant(3, -3), Vec::Constant(3, 3));
    CHECK((lie_bracket(g, 0, 1, x2) - v2(0, 1)).norm() < 1e-12);
    CHECK((lie_bracket(h, 0, 1, x3) - v3(0, 0, -4)).norm() < 1e-12);
    CHECK(lie_bracket(h, 1, 1, x3).norm() == 0.0);
  }
}

TEST_CASE("antisymmetry and Jacobi identity") {
  const auto f = quadratic_family();
  Rng rng(2);
  for (int s = 0; s < 30; ++s) {
    const Vec x = rng.uniform_in_box(Vec::Constant(3, -2), Vec::Constant(3, 2));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK((lie_bracket(f, i, j, x) + lie_bracket(f, j, i, x)).norm() == 0.0);
    // [A,[B,C]] + [B,[C,A]] + [C,[A,B]]
    const Vec t1 = bracket_polynomial(f, {0, 1, 2}).eval(x);
    const Vec t2 = bracket_polynomial(f, {1, 2, 0}).eval(x);
    const Vec t3 = bracket_polynomial(f, {2, 0, 1}).eval(x);
    const double scale = std::max({1.0, t1.norm(), t2.norm(), t3.norm()});
    CHECK((t1 + t2 + t3).norm() <= 1e-9 * scale);
  }
}

TEST_CASE("polynomial jacobian matches central differences") {
  const auto f = quadratic_family();
  Rng rng(3);
  for (int s = 0; s < 10; ++s) {
    const Vec x = rng.uniform_in_box(Vec::Constant(3, -2), Vec::Constant(3, 2));
    for (int i = 0; i < 3; ++i) {
      Mat fd(3, 3);
      for (int l = 0; l < 3; ++l) {
        const double h = 1e-6;
        Vec xp = x, xm = x;
        xp(l) += h;
        xm(l) -= h;
        fd.col(l) = (f.field(i, xp) - f.field(i, xm)) / (2 * h);
      }
      CHECK((fd - f.jacobian(i, x)).norm() < 1e-6);
    }
  }
}

TEST_CASE("function fields use numeric jacobians and refuse deep brackets") {
  auto fam = VectorFieldFamily::from_functions(
      "rot", 2, {[](const Vec& x) { return v2(-x(1), x(0)); }, [](const Vec& x) { return v2(std::sin(x(0)), 1.0); }},
      Box::cube(2, 2.0));
  CHECK(fam.smoothness() == Smoothness::LipschitzNumeric);
  Mat J = fam.jacobian(0, v2(0.3, 0.4));
  CHECK((J - (Mat(2, 2) << 0, -1, 1, 0).finished()).norm() < 1e-8);
  CHECK(hormander_rank(fam, v2(0.5, 0.5), 1).rank == 2);
  CHECK_THROWS_AS(hormander_rank(fam, v2(0.5, 0.5), 2), Error);
}

TEST_CASE("rank certificates") {
  const auto g = catalog_family("grushin");
  const auto r1 = hormander_rank(g, v2(0, 0), 1);
  CHECK(r1.rank == 1);
  const auto r2 = hormander_rank(g, v2(0, 0), 2);
  CHECK(r2.rank == 2);
  bool has_word = false;
  for (const auto& t : r2.generators) has_word |= (t.word == std::vector<int>{0, 1});
  CHECK(has_word);
  CHECK(hormander_rank(catalog_family("heisenberg1"), Vec::Zero(3), 2).rank == 3);
  CHECK_THROWS_AS(hormander_rank(g, v2(0, 0), 0), Error);
}

TEST_CASE("rank is monotone in depth and bounded by the dimension") {
  const auto f = quadratic_family();
  Rng rng(4);
  for (int s = 0; s < 20; ++s) {
    const Vec x = rng.uniform_in_box(Vec::Constant(3, -2), Vec::Constant(3, 2));
    int prev = 0;
    for (int k = 1; k <= 3; ++k) {
      const int r = hormander_rank(f, x, k).rank;
      CHECK(r >= prev);
      CHECK(r <= 3);
      prev = r;
    }
  }
}

TEST_CASE("bracket words are breadth-first and skip repeated pairs") {
  const auto w = bracket_words(2, 3);
  REQUIRE(w.size() >= 4);
  CHECK(w[0] == std::vector<int>{0});
  CHECK(w[1] == std::vector<int>{1});
  CHECK(w[2] == std::vector<int>{0, 1});
  for (const auto& word : w) {
    if (word.size() >= 2) CHECK(word[word.size() - 1] != word[word.size() - 2]);
  }
  for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i].size() >= w[i - 1].size());
}
