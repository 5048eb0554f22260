#include "coeff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "error.hpp"

namespace divexp {

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();

template <class T>
struct neumaier {
  T sum = 0, comp = 0;
  void add(T x) {
    const T s = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - s) + x;
    else
      comp += (x - s) + sum;
    sum = s;
  }
  T value() const { return sum + comp; }
};

void require_distinct(const NodeList& nl) {
  for (std::size_t i = 0; i < nl.size(); ++i)
    for (std::size_t j = i + 1; j < nl.size(); ++j)
      if (nl[i] == nl[j]) throw error(errc::singular, "coincident nodes");
}

}  // namespace

std::vector<double> denominators(const NodeList& nl) {
  if (nl.empty()) throw error(errc::argument, "empty node list");
  require_distinct(nl);
  const std::size_t m = nl.size();
  std::vector<double> d(m, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    double p = 1.0;
    for (std::size_t j = 0; j < i; ++j) p *= nl[j] - nl[i];
    for (std::size_t k = i + 1; k < m; ++k) p *= nl[i] - nl[k];
    d[i] = p;
  }
  return d;
}

double c_closed(const NodeList& nl, int n) {
  if (n < 0) throw error(errc::argument, "power must be nonnegative");
  if (nl.empty()) throw error(errc::argument, "empty node list");
  require_distinct(nl);
  // (-1)^(i-1)/d_i equals 1/prod_{j != i}(E_i - E_j); the products are kept in long double.
  neumaier<long double> acc;
  for (std::size_t i = 0; i < nl.size(); ++i) {
    long double den = 1.0L;
    for (std::size_t j = 0; j < nl.size(); ++j)
      if (j != i) den *= (long double)nl[i] - (long double)nl[j];
    long double p = 1.0L;
    for (int k = 0; k < n; ++k) p *= nl[i];
    acc.add(p / den);
  }
  return double(acc.value());
}

double c_recurrence(const NodeList& nl, int n) {
  if (n < 0) throw error(errc::argument, "power must be nonnegative");
  if (nl.empty()) throw error(errc::argument, "empty node list");
  const int l = int(nl.size()) - 1;
  if (n < l) return 0.0;
  // row[m] holds C_j^m over the first j+1 nodes; C_0^m = E_1^m.
  std::vector<double> row(std::size_t(n) + 1), next(std::size_t(n) + 1);
  row[0] = 1.0;
  for (int m = 1; m <= n; ++m) row[std::size_t(m)] = row[std::size_t(m) - 1] * nl[0];
  for (int j = 1; j <= l; ++j) {
    const double x = nl[std::size_t(j)];
    std::fill(next.begin(), next.end(), 0.0);
    for (int m = j; m <= n; ++m) {
      neumaier<double> acc;
      double xp = 1.0;
      for (int k = 0; k <= m - j; ++k) {
        acc.add(row[std::size_t(m - k - 1)] * xp);
        xp *= x;
      }
      next[std::size_t(m)] = acc.value();
    }
    std::swap(row, next);
  }
  return row[std::size_t(n)];
}

bool has_cluster(const NodeList& nl) {
  double scale = 0.0;
  for (double x : nl) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) scale = 1.0;
  for (std::size_t i = 0; i < nl.size(); ++i)
    for (std::size_t j = i + 1; j < nl.size(); ++j)
      if (std::abs(nl[i] - nl[j]) <= cluster_rel_gap * scale) return true;
  return false;
}

DividedDifferenceResult dd_exp(const NodeList& nl, double t) {
  if (nl.empty()) throw error(errc::argument, "empty node list");
  DividedDifferenceResult res;
  res.confluent_flag = has_cluster(nl);
  const std::size_t n = nl.size();
  if (n == 1) {
    res.value = std::exp(-I * nl[0] * t);
    res.est_error = eps;
    return res;
  }
  // Top-right entry of exp(-it J), J upper bidiagonal with the nodes on the diagonal and
  // ones above it. The diagonal is centred to keep the scaled matrix small.
  const auto [lo, hi] = std::minmax_element(nl.begin(), nl.end());
  const double c = 0.5 * (*lo + *hi);
  std::vector<cplx> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = -I * t * (nl[i] - c);
  const cplx sup = -I * t;
  double norm1 = 0.0;
  for (std::size_t j = 0; j < n; ++j) norm1 = std::max(norm1, std::abs(w[j]) + (j ? std::abs(sup) : 0.0));
  int s = 0;
  if (norm1 > 0.5) s = int(std::ceil(std::log2(norm1 / 0.5)));
  const double scale = std::ldexp(1.0, -s);
  for (auto& x : w) x *= scale;
  const cplx sups = sup * scale;

  auto at = [n](std::vector<cplx>& m, std::size_t i, std::size_t j) -> cplx& { return m[i * n + j]; };
  std::vector<cplx> e(n * n, 0.0), term(n * n, 0.0), tmp(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) at(e, i, i) = at(term, i, i) = 1.0;
  int kmax = 0;
  double tail = 0.0;
  for (int k = 1; k <= 60; ++k) {
    // term <- term * N / k with N bidiagonal; term stays upper triangular.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = n; j-- > i;) {
        cplx v = at(term, i, j) * w[j];
        if (j > i) v += at(term, i, j - 1) * sups;
        at(term, i, j) = v / double(k);
      }
    double tmax = 0.0, emax = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        at(e, i, j) += at(term, i, j);
        tmax = std::max(tmax, std::abs(at(term, i, j)));
        emax = std::max(emax, std::abs(at(e, i, j)));
      }
    kmax = k;
    tail = tmax;
    if (k >= 3 && tmax <= 1e-18 * emax) break;
  }
  for (int q = 0; q < s; ++q) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        cplx v = 0.0;
        for (std::size_t k = i; k <= j; ++k) v += at(e, i, k) * at(e, k, j);
        at(tmp, i, j) = v;
      }
    std::swap(e, tmp);
  }
  double row = 0.0;
  for (std::size_t j = 0; j < n; ++j) row = std::max(row, std::abs(at(e, 0, j)));
  res.value = at(e, 0, n - 1) * std::exp(-I * t * c);
  res.est_error = std::max(eps * double(2 * n + 4 * s + kmax) * std::max(row, std::abs(res.value)),
                           tail * std::ldexp(1.0, s));
  return res;
}

cmat binomial_expansion_tail(const cmat& a, const cmat& b, int n) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw error(errc::argument, "A and B must be square of equal size");
  if (n < 0) throw error(errc::argument, "power must be nonnegative");
  if (n > 10 || a.rows() > 8) throw error(errc::budget, "binomial expansion is capped at n <= 10, 8x8");
  const Eigen::Index d = a.rows();
  std::vector<cmat> apow(std::size_t(n) + 1);
  apow[0] = cmat::Identity(d, d);
  for (int k = 1; k <= n; ++k) apow[std::size_t(k)] = apow[std::size_t(k) - 1] * a;
  cmat f = cmat::Zero(d, d);
  // prefix = prod A^{k_i} B so far; rem = n - l - sum k_i.
  auto rec = [&](auto&& self, const cmat& prefix, int rem) -> void {
    f += prefix * apow[std::size_t(rem)];
    for (int k = 0; k < rem; ++k) self(self, prefix * apow[std::size_t(k)] * b, rem - k - 1);
  };
  for (int k = 0; k < n; ++k) rec(rec, apow[std::size_t(k)] * b, n - k - 1);
  return f;
}

std::vector<std::vector<double>> confluent_partial_fractions(const std::vector<double>& z,
                                                             const std::vector<int>& mult) {
  const std::size_t nb = z.size();
  if (mult.size() != nb) throw error(errc::argument, "multiplicity list length mismatch");
  for (std::size_t a = 0; a < nb; ++a)
    for (std::size_t b = a + 1; b < nb; ++b)
      if (z[a] == z[b]) throw error(errc::singular, "partial fractions need distinct points");
  std::vector<std::vector<double>> out(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const int r = mult[b] - 1;
    if (r < 0) throw error(errc::argument, "multiplicities must be positive");
    // lderiv[j] = L^{(j)}(z_b) for L = log h_b, j >= 1.
    std::vector<double> lderiv(std::size_t(r) + 1, 0.0);
    for (int j = 1; j <= r; ++j) {
      double fact = 1.0;
      for (int q = 2; q < j; ++q) fact *= q;
      double sum = 0.0;
      for (std::size_t c = 0; c < nb; ++c) {
        if (c == b) continue;
        sum += -double(mult[c]) * ((j - 1) % 2 ? -1.0 : 1.0) * fact / std::pow(z[b] - z[c], j);
      }
      lderiv[std::size_t(j)] = sum;
    }
    std::vector<double> h(std::size_t(r) + 1, 0.0);
    h[0] = 1.0;
    for (std::size_t c = 0; c < nb; ++c)
      if (c != b) h[0] /= std::pow(z[b] - z[c], mult[c]);
    for (int q = 0; q < r; ++q) {
      double v = 0.0, binom = 1.0;
      for (int j = 0; j <= q; ++j) {
        v += binom * h[std::size_t(q - j)] * lderiv[std::size_t(j + 1)];
        binom = binom * (q - j) / (j + 1);
      }
      h[std::size_t(q + 1)] = v;
    }
    std::vector<double> coef(std::size_t(r) + 1);
    for (int k = 0; k <= r; ++k) {
      double fk = 1.0, frk = 1.0;
      for (int q = 2; q <= k; ++q) fk *= q;
      for (int q = 2; q <= r - k; ++q) frk *= q;
      coef[std::size_t(k)] = h[std::size_t(r - k)] / (fk * frk);
    }
    out[b] = std::move(coef);
  }
  return out;
}

IdentityReport identity_suite(int l_max, int trials, unsigned long long seed, double min_gap) {
  if (l_max < 1 || trials < 1) throw error(errc::argument, "identity suite needs l_max >= 1 and trials >= 1");
  if (!(min_gap >= 0.0) || min_gap * double(l_max) >= 2.0) throw error(errc::argument, "min gap is not attainable");
  std::mt19937_64 gen(seed);
  auto uniform = [&] { return double(gen() >> 11) * 0x1.0p-53; };
  IdentityReport rep;
  rep.trials = trials;
  rep.l_max = l_max;
  NodeList nl;
  for (int trial = 0; trial < trials; ++trial) {
    const int l = 1 + trial % l_max;
    for (;;) {
      nl.resize(std::size_t(l) + 1);
      for (auto& x : nl) x = 2.0 * uniform() - 1.0;
      auto sorted = nl;
      std::sort(sorted.begin(), sorted.end());
      bool ok = true;
      for (std::size_t k = 1; k < sorted.size(); ++k) ok = ok && sorted[k] - sorted[k - 1] >= min_gap;
      if (ok) break;
    }
    for (int k = 0; k < l; ++k) rep.max_below = std::max(rep.max_below, std::abs(c_closed(nl, k)));
    const double top = c_closed(nl, l);
    rep.max_top = std::max(rep.max_top, std::abs(top - 1.0));
    rep.max_recurrence_diff = std::max(rep.max_recurrence_diff, std::abs(top - c_recurrence(nl, l)));
  }
  return rep;
}

}  // namespace divexp
