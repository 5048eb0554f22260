#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "model.hpp"

namespace divexp::testing {

// Portable stream: 53 high bits of mt19937_64.
struct rng {
  std::mt19937_64 gen;
  explicit rng(unsigned long long seed) : gen(seed) {}
  double uniform() { return double(gen() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int below(int n) { return int(uniform() * n); }
  cplx complex_unit() { return {uniform(-1.0, 1.0), uniform(-1.0, 1.0)}; }
};

inline cmat random_complex(rng& r, int rows, int cols) {
  cmat a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = r.complex_unit();
  return a;
}

// Hermitian with zero or random diagonal, scaled to the given Frobenius norm.
inline cmat random_hermitian(rng& r, int d, double fro, bool diagonal = true) {
  cmat a = random_complex(r, d, d);
  cmat h = 0.5 * (a + a.adjoint());
  if (!diagonal) h.diagonal().setZero();
  if (h.norm() > 0.0) h *= fro / h.norm();
  return h;
}

// Levels with pairwise gaps >= min_gap (plus up to `spread` extra), in shuffled order.
inline std::vector<double> random_levels(rng& r, int d, double min_gap, double spread) {
  std::vector<double> e(static_cast<std::size_t>(d));
  double x = r.uniform(-1.0, 0.0);
  for (int k = 0; k < d; ++k) {
    e[std::size_t(k)] = x;
    x += min_gap + spread * r.uniform();
  }
  for (int k = d - 1; k > 0; --k) std::swap(e[std::size_t(k)], e[std::size_t(r.below(k + 1))]);
  return e;
}

inline SplitHamiltonian random_split(rng& r, int d, double min_gap, double spread, double h1_fro,
                                     bool h1_diagonal = true) {
  return make_split(random_levels(r, d, min_gap, spread), random_hermitian(r, d, h1_fro, h1_diagonal));
}

inline RedividedHamiltonian random_redivided(rng& r, int d, double min_gap, double spread, double g_fro) {
  return redivide(random_split(r, d, min_gap, spread, g_fro, false));
}

inline double rel_diff(const cmat& a, const cmat& b) {
  const double n = std::max(a.norm(), b.norm());
  return n > 0.0 ? (a - b).norm() / n : 0.0;
}

}  // namespace divexp::testing
