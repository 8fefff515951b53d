#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "svkit/linalg.hpp"

namespace svkit {

/// Seeded generator for reproducible sampling (mt19937_64).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double normal() { return normal_(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

  Vec normal_vec(int n);
  Vec unit_vec(int n);
  Vec uniform_in_box(const Vec& lo, const Vec& hi);
  Vec uniform_in_ball(const Vec& center, double radius);
  Mat random_orthogonal(int n);
  Mat random_symmetric(int n, double scale = 1.0);
  /// B B^T with B an n x rank Gaussian matrix.
  Mat random_psd(int n, int rank, double scale = 1.0);

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Deterministic quasi-uniform unit vectors in R^d (Halton points pushed through Box-Muller).
std::vector<Vec> quasi_uniform_directions(int d, int count);

/// n log-spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace svkit
