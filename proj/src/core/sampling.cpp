#include "svkit/sampling.hpp"

#include <cmath>
#include <numbers>

#include "svkit/error.hpp"

namespace svkit {

Vec Rng::normal_vec(int n) {
  Vec v(n);
  for (int k = 0; k < n; ++k) v[k] = normal();
  return v;
}

Vec Rng::unit_vec(int n) {
  for (;;) {
    Vec v = normal_vec(n);
    const double nv = v.norm();
    if (nv > 1e-12) return v / nv;
  }
}

Vec Rng::uniform_in_box(const Vec& lo, const Vec& hi) {
  Vec v(lo.size());
  for (int k = 0; k < lo.size(); ++k) v[k] = uniform(lo[k], hi[k]);
  return v;
}

Vec Rng::uniform_in_ball(const Vec& center, double radius) {
  const int n = static_cast<int>(center.size());
  const Vec dir = unit_vec(n);
  const double rad = radius * std::pow(uniform(), 1.0 / n);
  return center + rad * dir;
}

Mat Rng::random_orthogonal(int n) {
  Mat G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = normal();
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ();
  const Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < n; ++k)
    if (R(k, k) < 0) Q.col(k) *= -1.0;
  return Q;
}

Mat Rng::random_symmetric(int n, double scale) {
  Mat G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = normal();
  return scale * symmetrize(G);
}

Mat Rng::random_psd(int n, int rank, double scale) {
  Mat B(n, rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) B(i, j) = normal();
  return scale * B * B.transpose();
}

namespace {

double radical_inverse(int base, long index) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

std::vector<Vec> quasi_uniform_directions(int d, int count) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "direction dimension must be positive");
  std::vector<Vec> out;
  out.reserve(count);
  if (d == 1) {
    for (int k = 0; k < count; ++k) out.push_back(Vec::Constant(1, k % 2 == 0 ? 1.0 : -1.0));
    return out;
  }
  if (d == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5) / count;
      Vec v(2);
      v << std::cos(th), std::sin(th);
      out.push_back(v);
    }
    return out;
  }
  const int pairs = (d + 1) / 2;
  if (2 * pairs > static_cast<int>(std::size(kPrimes)))
    throw Error(ErrorCode::Unsupported, "quasi-uniform directions supported up to dimension 16");
  for (long idx = 1; static_cast<int>(out.size()) < count; ++idx) {
    Vec g(2 * pairs);
    for (int k = 0; k < pairs; ++k) {
      const double u1 = std::max(radical_inverse(kPrimes[2 * k], idx), 1e-12);
      const double u2 = radical_inverse(kPrimes[2 * k + 1], idx);
      const double rad = std::sqrt(-2.0 * std::log(u1));
      g[2 * k] = rad * std::cos(2.0 * std::numbers::pi * u2);
      g[2 * k + 1] = rad * std::sin(2.0 * std::numbers::pi * u2);
    }
    Vec v = g.head(d);
    const double nv = v.norm();
    if (nv > 1e-9) out.push_back(v / nv);
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 2 || !(lo > 0) || !(hi > lo)) throw Error(ErrorCode::InvalidArgument, "bad log grid");
  std::vector<double> g(n);
  const double a = std::log10(lo), b = std::log10(hi);
  for (int k = 0; k < n; ++k) g[k] = std::pow(10.0, a + (b - a) * k / (n - 1));
  return g;
}

}  // namespace svkit
