#include "propagator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "error.hpp"

namespace divexp {

namespace {

void check_order(int l) {
  if (l < 1) throw error(errc::argument, "series order must be >= 1");
}

}  // namespace

multiset_codec::multiset_codec(int dim, int l) : dim_(dim) {
  bits_ = 1;
  while ((1 << bits_) < l + 2) ++bits_;
  if (dim * bits_ > 64) throw error(errc::budget, "too many levels for the tuple path; use the block method");
}

std::uint64_t multiset_codec::unit(int level) const { return std::uint64_t(1) << (bits_ * level); }

NodeList multiset_codec::nodes(std::uint64_t key, const std::vector<double>& e) const {
  NodeList out;
  const std::uint64_t mask = (std::uint64_t(1) << bits_) - 1;
  for (int k = 0; k < dim_; ++k) {
    const auto c = (key >> (bits_ * k)) & mask;
    for (std::uint64_t q = 0; q < c; ++q) out.push_back(e[std::size_t(k)]);
  }
  return out;
}

double tuple_work(int dim, int l) {
  // dim^2 * (number of multisets of size l+1 over dim levels)
  double ms = 1.0;
  for (int k = 1; k <= l + 1; ++k) ms = ms * double(dim + k - 1) / double(k);
  return double(dim) * double(dim) * ms;
}

std::vector<std::pair<std::uint64_t, cvec>> multiset_weights(const RedividedHamiltonian& m, int l, std::size_t row,
                                                              const multiset_codec& codec) {
  const int d = m.dim();
  const cmat& g = m.offdiagonal;
  std::unordered_map<std::uint64_t, cvec> layer, next;
  cvec start = cvec::Zero(d);
  start(Eigen::Index(row)) = 1.0;
  layer.emplace(codec.unit(int(row)), start);
  for (int pos = 1; pos <= l; ++pos) {
    next.clear();
    for (const auto& [key, w] : layer)
      for (int c = 0; c < d; ++c) {
        if (w(c) == 0.0) continue;
        for (int k = 0; k < d; ++k) {
          const cplx gk = g(c, k);
          if (gk == 0.0) continue;
          auto [it, fresh] = next.try_emplace(key + codec.unit(k));
          if (fresh) it->second = cvec::Zero(d);
          it->second(k) += w(c) * gk;
        }
      }
    std::swap(layer, next);
  }
  std::vector<std::pair<std::uint64_t, cvec>> out(layer.begin(), layer.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

void for_each_tuple(const RedividedHamiltonian& m, int l, std::size_t row,
                    const std::function<void(const std::vector<int>&, cplx)>& visit) {
  const int d = m.dim();
  const cmat& g = m.offdiagonal;
  std::vector<int> tup(std::size_t(l) + 1);
  tup[0] = int(row);
  auto rec = [&](auto&& self, int pos, cplx prod) -> void {
    if (pos > l) {
      visit(tup, prod);
      return;
    }
    const int prev = tup[std::size_t(pos) - 1];
    for (int k = 0; k < d; ++k) {
      const cplx gk = g(prev, k);
      if (gk == 0.0) continue;
      tup[std::size_t(pos)] = k;
      self(self, pos + 1, prod * gk);
    }
  };
  rec(rec, 1, cplx(1.0));
}

method choose_method(int dim, int l, method requested, double budget) {
  if (requested != method::automatic) return requested;
  const double work = tuple_work(dim, l);
  if (work > budget) return method::block;
  const double block_cost = 30.0 * std::pow(double((l + 1) * dim), 3.0);
  return work * 20.0 < block_cost ? method::tuples : method::block;
}

SeriesTerm series_term(const RedividedHamiltonian& m, int l, double t, method how, double budget) {
  check_order(l);
  const int d = m.dim();
  const method use = choose_method(d, l, how, budget);
  SeriesTerm out{l, cmat::Zero(d, d), t};
  if (use == method::block) {
    out.matrix = oracle_block_order(m, l, t);
    return out;
  }
  if (tuple_work(d, l) > budget)
    throw error(errc::budget, "tuple enumeration exceeds budget; use the block method");
  const multiset_codec codec(d, l);
  std::vector<std::vector<std::pair<std::uint64_t, cvec>>> rows(static_cast<std::size_t>(d));
  parallel_for(std::size_t(d), [&](std::size_t row) { rows[row] = multiset_weights(m, l, row, codec); });
  std::vector<std::uint64_t> keys;
  for (const auto& r : rows)
    for (const auto& kv : r) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<cplx> dd(keys.size());
  parallel_for(keys.size(), [&](std::size_t k) {
    dd[k] = dd_exp(codec.nodes(keys[k], m.shifted_energies), t).value;
  });
  for (int row = 0; row < d; ++row)
    for (const auto& [key, w] : rows[std::size_t(row)]) {
      const cplx v = dd[std::size_t(std::lower_bound(keys.begin(), keys.end(), key) - keys.begin())];
      out.matrix.row(row) += v * w.transpose();
    }
  return out;
}

double tail_bound(double g_norm, int L, double t) {
  const double x = g_norm * std::abs(t);
  double term = 1.0;
  for (int k = 1; k <= L + 1; ++k) term *= x / k;
  return term * std::exp(x);
}

int default_order(const RedividedHamiltonian& m, double t, double tol) {
  if (!(tol > 0.0)) throw error(errc::argument, "tolerance must be positive");
  const double gn = spectral_norm(m.offdiagonal);
  for (int L = 0; L < max_default_order; ++L)
    if (tail_bound(gn, L, t) < tol) return L;
  return max_default_order;
}

TruncatedPropagator truncated_propagator(const RedividedHamiltonian& m, int L, double t, method how) {
  if (L < 0) throw error(errc::argument, "order cap must be >= 0");
  const int d = m.dim();
  TruncatedPropagator p{t, L, cmat::Zero(d, d), 0.0};
  for (int k = 0; k < d; ++k) p.matrix(k, k) = std::exp(-I * m.shifted_energies[std::size_t(k)] * t);
  p.tail_bound = tail_bound(spectral_norm(m.offdiagonal), L, t);
  if (L == 0) return p;
  // A single block exponential yields every order 0..L along its first block row.
  bool all_block = true;
  for (int l = 1; l <= L; ++l) all_block = all_block && choose_method(d, l, how) == method::block;
  if (all_block) {
    const int n = (L + 1) * d;
    cmat big = cmat::Zero(n, n);
    for (int b = 0; b <= L; ++b) {
      for (int k = 0; k < d; ++k) big(b * d + k, b * d + k) = -I * t * m.shifted_energies[std::size_t(k)];
      if (b < L) big.block(b * d, (b + 1) * d, d, d) = -I * t * m.offdiagonal;
    }
    const cmat ex = expm(big);
    for (int l = 1; l <= L; ++l) p.matrix += ex.block(0, l * d, d, d);
    return p;
  }
  for (int l = 1; l <= L; ++l) p.matrix += series_term(m, l, t, how).matrix;
  return p;
}

EvolutionResult evolve(const RedividedHamiltonian& m, const StateVector& psi0, const std::vector<double>& times,
                       int L, double tol, method how) {
  if (psi0.amplitudes.size() != m.dim()) throw error(errc::argument, "state dimension mismatch");
  EvolutionResult r;
  r.times = times;
  double tmax = 0.0;
  for (double t : times) {
    if (!std::isfinite(t)) throw error(errc::argument, "non-finite time");
    tmax = std::max(tmax, std::abs(t));
  }
  r.order_cap = L >= 0 ? L : default_order(m, tmax, tol);
  r.amplitudes.resize(times.size());
  r.tail_bounds.resize(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto p = truncated_propagator(m, r.order_cap, times[k], how);
    r.amplitudes[k] = times[k] == 0.0 ? psi0.amplitudes : cvec(p.matrix * psi0.amplitudes);
    r.tail_bounds[k] = p.tail_bound;
    r.norm_drift = std::max(r.norm_drift, std::abs(r.amplitudes[k].norm() - 1.0));
  }
  return r;
}

cmat oracle_eigensolve(const SplitHamiltonian& m, double t) { return hermitian_propagator(m.total(), t); }

cmat oracle_block_order(const RedividedHamiltonian& m, int l, double t) {
  check_order(l);
  const int d = m.dim();
  if ((l + 1) * d > 4096) throw error(errc::budget, "block matrix too large");
  const int n = (l + 1) * d;
  cmat big = cmat::Zero(n, n);
  for (int b = 0; b <= l; ++b) {
    for (int k = 0; k < d; ++k) big(b * d + k, b * d + k) = -I * t * m.shifted_energies[std::size_t(k)];
    if (b < l) big.block(b * d, (b + 1) * d, d, d) = -I * t * m.offdiagonal;
  }
  return expm(big).block(0, l * d, d, d);
}

namespace {

struct gauss_rule {
  std::vector<double> x, w;
};

gauss_rule legendre(int n) {
  gauss_rule r{std::vector<double>(std::size_t(n)), std::vector<double>(std::size_t(n))};
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        r.w[std::size_t(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
        break;
      }
      r.w[std::size_t(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    r.x[std::size_t(i)] = x;
  }
  std::vector<std::size_t> ord(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = i;
  std::sort(ord.begin(), ord.end(), [&](auto a, auto b) { return r.x[a] < r.x[b]; });
  gauss_rule s{{}, {}};
  for (auto i : ord) {
    s.x.push_back(r.x[i]);
    s.w.push_back(r.w[i]);
  }
  return s;
}

// S(j, i) = integral from -1 to x_j of the i-th Lagrange basis polynomial on the nodes x.
Eigen::MatrixXd integration_matrix(const std::vector<double>& x) {
  const int n = int(x.size());
  const gauss_rule q = legendre(n + 2);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  auto lagrange = [&](int i, double u) {
    double v = 1.0;
    for (int k = 0; k < n; ++k)
      if (k != i) v *= (u - x[std::size_t(k)]) / (x[std::size_t(i)] - x[std::size_t(k)]);
    return v;
  };
  for (int j = 0; j < n; ++j) {
    const double half = 0.5 * (x[std::size_t(j)] + 1.0);
    for (int i = 0; i < n; ++i) {
      double v = 0.0;
      for (std::size_t p = 0; p < q.x.size(); ++p) v += q.w[p] * lagrange(i, -1.0 + half * (q.x[p] + 1.0));
      s(j, i) = half * v;
    }
  }
  return s;
}

// b^(l)(t) on P equal panels of [0, t] with n Gauss nodes each; returns c^(l)(t).
cmat dyson_on_panels(const RedividedHamiltonian& m, int l, double t, int panels, const gauss_rule& g,
                     const Eigen::MatrixXd& smat) {
  const int d = m.dim();
  const int n = int(g.x.size());
  const double h = t / panels;
  const auto& e = m.shifted_energies;
  const int npts = panels * n;
  std::vector<double> s(static_cast<std::size_t>(npts));
  for (int p = 0; p < panels; ++p)
    for (int j = 0; j < n; ++j) s[std::size_t(p * n + j)] = h * (p + 0.5 * (g.x[std::size_t(j)] + 1.0));
  auto vint = [&](double u) {
    cmat v(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) v(a, b) = std::exp(I * (e[std::size_t(a)] - e[std::size_t(b)]) * u) * m.offdiagonal(a, b);
    return v;
  };
  std::vector<cmat> vs(static_cast<std::size_t>(npts));
  for (int k = 0; k < npts; ++k) vs[std::size_t(k)] = vint(s[std::size_t(k)]);
  std::vector<cmat> b(std::size_t(npts), cmat::Identity(d, d));
  cmat end = cmat::Identity(d, d);
  for (int level = 1; level <= l; ++level) {
    std::vector<cmat> f(static_cast<std::size_t>(npts));
    for (int k = 0; k < npts; ++k) f[std::size_t(k)] = -I * vs[std::size_t(k)] * b[std::size_t(k)];
    std::vector<cmat> nb(static_cast<std::size_t>(npts));
    cmat base = cmat::Zero(d, d);
    for (int p = 0; p < panels; ++p) {
      for (int j = 0; j < n; ++j) {
        cmat acc = base;
        for (int i = 0; i < n; ++i) acc += (0.5 * h * smat(j, i)) * f[std::size_t(p * n + i)];
        nb[std::size_t(p * n + j)] = acc;
      }
      for (int i = 0; i < n; ++i) base += (0.5 * h * g.w[std::size_t(i)]) * f[std::size_t(p * n + i)];
    }
    b = std::move(nb);
    end = base;
  }
  cmat c(d, d);
  for (int a = 0; a < d; ++a) c.row(a) = std::exp(-I * e[std::size_t(a)] * t) * end.row(a);
  return c;
}

}  // namespace

cmat oracle_dyson_order(const RedividedHamiltonian& m, int l, double t, double quad_tol) {
  check_order(l);
  if (l > 4) throw error(errc::argument, "Dyson quadrature oracle supports l <= 4");
  if (!(quad_tol > 0.0)) throw error(errc::argument, "quad_tol must be positive");
  const int d = m.dim();
  if (t == 0.0 || m.offdiagonal.isZero(0.0)) return cmat::Zero(d, d);
  const gauss_rule g = legendre(16);
  const Eigen::MatrixXd smat = integration_matrix(g.x);
  cmat prev = dyson_on_panels(m, l, t, 1, g, smat);
  for (int panels = 2; panels <= 4096; panels *= 2) {
    cmat cur = dyson_on_panels(m, l, t, panels, g, smat);
    const double diff = max_abs(cur - prev);
    if (diff <= quad_tol * std::max(1.0, max_abs(cur))) return cur;
    prev = std::move(cur);
  }
  throw error(errc::convergence, "Dyson quadrature did not converge");
}

cmat derivative_coefficients(const RedividedHamiltonian& m, int l, int K, double budget) {
  check_order(l);
  if (K < 0) throw error(errc::argument, "K must be >= 0");
  const int d = m.dim();
  cmat out = cmat::Zero(d, d);
  if (l > K) return out;
  if (tuple_work(d, l) > budget) throw error(errc::budget, "tuple enumeration exceeds budget");
  const multiset_codec codec(d, l);
  for (int row = 0; row < d; ++row)
    for (const auto& [key, w] : multiset_weights(m, l, std::size_t(row), codec))
      out.row(row) += c_recurrence(codec.nodes(key, m.shifted_energies), K) * w.transpose();
  return out;
}

}  // namespace divexp
