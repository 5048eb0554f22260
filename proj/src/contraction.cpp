#include "contraction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/QR>

#include "error.hpp"
#include "improved.hpp"

namespace divexp {

namespace {

constexpr double pattern_tuple_budget = 2e7;

// Stage strings for a partition given as a restricted growth string. A comparison is 'k' when
// the union of earlier equalities and the known inequalities (neighbours, earlier 'n's) fixes it.
std::vector<std::string> stages_of(const std::vector<int>& blocks) {
  const int n = int(blocks.size());
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[std::size_t(a)] != a) a = parent[std::size_t(a)];
    return a;
  };
  std::vector<std::pair<int, int>> unequal;
  for (int k = 0; k + 1 < n; ++k) unequal.emplace_back(k, k + 1);
  auto known_unequal = [&](int a, int b) {
    const int ra = find(a), rb = find(b);
    for (const auto& [x, y] : unequal) {
      const int rx = find(x), ry = find(y);
      if ((rx == ra && ry == rb) || (rx == rb && ry == ra)) return true;
    }
    return false;
  };
  std::vector<std::string> out;
  for (int dist = 2; dist < n; ++dist) {
    std::string s;
    for (int a = 0; a + dist < n; ++a) {
      const int b = a + dist;
      if (find(a) == find(b) || known_unequal(a, b)) {
        s += 'k';
      } else if (blocks[std::size_t(a)] == blocks[std::size_t(b)]) {
        s += 'c';
        parent[std::size_t(find(b))] = find(a);
      } else {
        s += 'n';
        unequal.emplace_back(a, b);
      }
    }
    out.push_back(s);
  }
  return out;
}

void rgs_rec(std::vector<int>& cur, int n, int maxv, std::vector<std::vector<int>>& out) {
  if (int(cur.size()) == n) {
    out.push_back(cur);
    return;
  }
  for (int v = 0; v <= maxv + 1; ++v) {
    if (!cur.empty() && cur.back() == v) continue;
    cur.push_back(v);
    rgs_rec(cur, n, std::max(maxv, v), out);
    cur.pop_back();
  }
}

std::vector<int> canonical(const std::vector<int>& tup) {
  std::vector<int> out(tup.size());
  std::vector<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < tup.size(); ++k) {
    int id = -1;
    for (const auto& [lv, v] : seen)
      if (lv == tup[k]) id = v;
    if (id < 0) {
      id = int(seen.size());
      seen.emplace_back(tup[k], id);
    }
    out[k] = id;
  }
  return out;
}

void check_pattern_order(int l) {
  if (l < 2 || l > 6) throw error(errc::range, "contraction patterns are supported for orders 2..6");
}

void check_pattern_budget(int d, int l) {
  if (std::pow(double(d), double(l + 1)) > pattern_tuple_budget)
    throw error(errc::budget, "pattern decomposition exceeds the tuple budget");
}

// Distinct levels of a tuple with multiplicities, in order of first appearance.
void levels_of(const std::vector<int>& tup, std::vector<int>& lv, std::vector<int>& mult) {
  lv.clear();
  mult.clear();
  for (int x : tup) {
    auto it = std::find(lv.begin(), lv.end(), x);
    if (it == lv.end()) {
      lv.push_back(x);
      mult.push_back(1);
    } else {
      ++mult[std::size_t(it - lv.begin())];
    }
  }
}

cplx minus_it_pow(double t, int k) {
  cplx r = 1.0;
  for (int q = 0; q < k; ++q) r *= -I * t;
  return r;
}

double factorial(int k) {
  double f = 1.0;
  for (int q = 2; q <= k; ++q) f *= q;
  return f;
}

}  // namespace

const char* to_string(time_class c) {
  switch (c) {
    case time_class::e: return "e";
    case time_class::te: return "te";
    case time_class::t2e: return "t2e";
    case time_class::t3e: return "t3e";
  }
  return "?";
}

const char* to_string(diag_class c) { return c == diag_class::D ? "D" : "N"; }

std::string ContractionPattern::name() const {
  std::string s;
  for (const auto& g : groups) {
    if (g.find_first_not_of('k') == std::string::npos) continue;
    if (!s.empty()) s += ',';
    s += g;
  }
  return s;
}

std::vector<ContractionPattern> enumerate_patterns(int l) {
  check_pattern_order(l);
  std::vector<std::vector<int>> rgs;
  std::vector<int> cur;
  rgs_rec(cur, l + 1, -1, rgs);
  std::vector<ContractionPattern> out;
  out.reserve(rgs.size());
  for (auto& b : rgs) out.push_back(ContractionPattern{l, stages_of(b), b});
  return out;
}

std::vector<TermPiece> pattern_pieces(const RedividedHamiltonian& m, int l, double t) {
  check_pattern_order(l);
  const int d = m.dim();
  check_pattern_budget(d, l);
  const auto pats = enumerate_patterns(l);
  std::map<std::vector<int>, std::size_t> index;
  for (std::size_t k = 0; k < pats.size(); ++k) index.emplace(pats[k].blocks, k);
  std::vector<TermPiece> out;
  for (const auto& p : pats)
    out.push_back(TermPiece{p, cmat::Zero(d, d), std::nullopt, p.diagonal() ? diag_class::D : diag_class::N});
  parallel_for(std::size_t(d), [&](std::size_t row) {
    NodeList nodes(std::size_t(l) + 1);
    for_each_tuple(m, l, row, [&](const std::vector<int>& tup, cplx prod) {
      for (std::size_t k = 0; k < tup.size(); ++k) nodes[k] = m.shifted_energies[std::size_t(tup[k])];
      auto& piece = out[index.at(canonical(tup))];
      piece.matrix(Eigen::Index(row), tup.back()) += dd_exp(nodes, t).value * prod;
    });
  });
  return out;
}

std::vector<TermPiece> pattern_time_pieces(const RedividedHamiltonian& m, int l, double t) {
  check_pattern_order(l);
  require_nondegenerate(m);
  const int d = m.dim();
  check_pattern_budget(d, l);
  const auto pats = enumerate_patterns(l);
  const int kmax = secular_degree(l);
  std::map<std::vector<int>, std::size_t> index;
  for (std::size_t k = 0; k < pats.size(); ++k) index.emplace(pats[k].blocks, k);
  // acc[pattern][k]
  std::vector<std::vector<cmat>> acc(pats.size(), std::vector<cmat>(std::size_t(kmax) + 1, cmat::Zero(d, d)));
  parallel_for(std::size_t(d), [&](std::size_t row) {
    std::vector<int> lv, mult;
    std::vector<double> z;
    for_each_tuple(m, l, row, [&](const std::vector<int>& tup, cplx prod) {
      levels_of(tup, lv, mult);
      z.resize(lv.size());
      for (std::size_t b = 0; b < lv.size(); ++b) z[b] = m.shifted_energies[std::size_t(lv[b])];
      const auto coef = confluent_partial_fractions(z, mult);
      auto& a = acc[index.at(canonical(tup))];
      for (std::size_t b = 0; b < lv.size(); ++b) {
        const cplx ph = std::exp(-I * z[b] * t);
        for (std::size_t k = 0; k < coef[b].size(); ++k)
          a[k](Eigen::Index(row), tup.back()) += coef[b][k] * minus_it_pow(t, int(k)) * ph * prod;
      }
    });
  });
  std::vector<TermPiece> out;
  for (std::size_t p = 0; p < pats.size(); ++p) {
    int maxblock = 0;
    for (int b : pats[p].blocks)
      maxblock = std::max(maxblock, int(std::count(pats[p].blocks.begin(), pats[p].blocks.end(), b)));
    for (int k = 0; k < maxblock; ++k)
      out.push_back(TermPiece{pats[p], acc[p][std::size_t(k)], time_class(k),
                              pats[p].diagonal() ? diag_class::D : diag_class::N});
  }
  return out;
}

std::vector<TermPiece> second_order_pieces(const RedividedHamiltonian& m, double t) {
  return pattern_pieces(m, 2, t);
}

std::vector<TermPiece> third_order_pieces(const RedividedHamiltonian& m, double t) {
  return pattern_pieces(m, 3, t);
}

std::vector<MixedPiece> mixed_second_order_pieces(const SplitHamiltonian& m, double t) {
  const int d = m.dim;
  const cmat& h = m.perturbation;
  std::vector<MixedPiece> out{{"hh", cmat::Zero(d, d)}, {"hg", cmat::Zero(d, d)},
                              {"gh", cmat::Zero(d, d)}, {"gg", cmat::Zero(d, d)}};
  for (int a = 0; a < d; ++a)
    for (int c = 0; c < d; ++c)
      for (int b = 0; b < d; ++b) {
        const cplx prod = h(a, c) * h(c, b);
        if (prod == 0.0) continue;
        const NodeList nodes{m.energies[std::size_t(a)], m.energies[std::size_t(c)], m.energies[std::size_t(b)]};
        const int kind = (a == c ? 0 : 2) + (c == b ? 0 : 1);
        out[std::size_t(kind)].matrix(a, b) += dd_exp(nodes, t).value * prod;
      }
  return out;
}

cvec redivided_closed_form_order2(const SplitHamiltonian& m, double t, const StateVector& psi0) {
  const auto r = redivide(m);
  const int d = r.dim();
  if (psi0.amplitudes.size() != d) throw error(errc::argument, "state dimension mismatch");
  const auto& e = r.shifted_energies;
  const cmat& g = r.offdiagonal;
  cmat u = cmat::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    u(a, a) = std::exp(-I * e[std::size_t(a)] * t);
    for (int b = 0; b < d; ++b) {
      if (g(a, b) != 0.0) u(a, b) += dd_exp({e[std::size_t(a)], e[std::size_t(b)]}, t).value * g(a, b);
      for (int c = 0; c < d; ++c) {
        const cplx prod = g(a, c) * g(c, b);
        if (prod == 0.0) continue;
        u(a, b) += dd_exp({e[std::size_t(a)], e[std::size_t(c)], e[std::size_t(b)]}, t).value * prod;
      }
    }
  }
  return u * psi0.amplitudes;
}

cmat SecularCoefficients::evaluate(double t, int k) const {
  const int d = int(exponents.size());
  cmat out = cmat::Zero(d, d);
  if (k > kmax) return out;
  const cplx p = minus_it_pow(t, k);
  for (int b = 0; b < d; ++b)
    if (available[std::size_t(b)][std::size_t(k)])
      out += x[std::size_t(b)][std::size_t(k)] * (p * std::exp(-I * exponents[std::size_t(b)] * t));
  return out;
}

cmat SecularCoefficients::evaluate(double t) const {
  cmat out = evaluate(t, 0);
  for (int k = 1; k <= kmax; ++k) out += evaluate(t, k);
  return out;
}

namespace {

SecularCoefficients empty_coefficients(const RedividedHamiltonian& m, int l) {
  const int d = m.dim();
  SecularCoefficients s;
  s.order = l;
  s.kmax = secular_degree(l);
  s.exponents = m.shifted_energies;
  s.x.assign(std::size_t(d), std::vector<cmat>(std::size_t(s.kmax) + 1, cmat::Zero(d, d)));
  s.available.assign(std::size_t(d), std::vector<bool>(std::size_t(s.kmax) + 1, true));
  return s;
}

}  // namespace

SecularCoefficients secular_partial_fractions(const RedividedHamiltonian& m, int l) {
  if (l < 0) throw error(errc::argument, "series order must be >= 0");
  require_nondegenerate(m);
  const int d = m.dim();
  auto s = empty_coefficients(m, l);
  if (l == 0) {
    for (int b = 0; b < d; ++b) s.x[std::size_t(b)][0](b, b) = 1.0;
    return s;
  }
  if (std::pow(double(d), double(l + 1)) > pattern_tuple_budget)
    throw error(errc::budget, "partial-fraction expansion exceeds the tuple budget");
  parallel_for(std::size_t(d), [&](std::size_t row) {
    std::vector<int> lv, mult;
    std::vector<double> z;
    for_each_tuple(m, l, row, [&](const std::vector<int>& tup, cplx prod) {
      levels_of(tup, lv, mult);
      z.resize(lv.size());
      for (std::size_t b = 0; b < lv.size(); ++b) z[b] = m.shifted_energies[std::size_t(lv[b])];
      const auto coef = confluent_partial_fractions(z, mult);
      for (std::size_t b = 0; b < lv.size(); ++b)
        for (std::size_t k = 0; k < coef[b].size(); ++k)
          s.x[std::size_t(lv[b])][k](Eigen::Index(row), tup.back()) += coef[b][k] * prod;
    });
  });
  return s;
}

SecularCoefficients secular_fit(const RedividedHamiltonian& m, int l, const FitOptions& opt) {
  if (l < 1) throw error(errc::argument, "series order must be >= 1");
  require_nondegenerate(m);
  const int d = m.dim();
  auto s = empty_coefficients(m, l);
  const auto& e = m.shifted_energies;
  double gap = INFINITY;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) gap = std::min(gap, std::abs(e[std::size_t(a)] - e[std::size_t(b)]));
  if (!std::isfinite(gap)) gap = 1.0;
  const double T = opt.window > 0.0 ? opt.window : 4.0 * M_PI / gap;
  const int unknowns = d * (s.kmax + 1);
  const int n = std::max(opt.samples_per_unknown, 2) * unknowns;

  // Rescaled copy so every sampled order stays O(1) over the window.
  const double gn = spectral_norm(m.offdiagonal);
  const double scale = gn > 0.0 ? 1.0 / (gn * T) : 1.0;
  RedividedHamiltonian ms = m;
  ms.offdiagonal *= scale;
  const double unscale = std::pow(scale, -double(l));

  cmat design(n, unknowns);
  cmat rhs(n, d * d);
  std::vector<double> times(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) times[std::size_t(j)] = T * double(j) / double(n - 1);
  std::vector<cmat> samples(static_cast<std::size_t>(n));
  parallel_for(std::size_t(n), [&](std::size_t j) {
    samples[j] = series_term(ms, l, times[j], opt.how).matrix * unscale;
  });
  for (int j = 0; j < n; ++j) {
    const double t = times[std::size_t(j)];
    for (int b = 0; b < d; ++b) {
      const cplx ph = std::exp(-I * e[std::size_t(b)] * t);
      for (int k = 0; k <= s.kmax; ++k) design(j, b * (s.kmax + 1) + k) = std::pow(t / T, k) * ph;
    }
    for (int q = 0; q < d * d; ++q) rhs(j, q) = samples[std::size_t(j)](q % d, q / d);
  }
  const cmat sol = design.colPivHouseholderQr().solve(rhs);
  for (int b = 0; b < d; ++b)
    for (int k = 0; k <= s.kmax; ++k) {
      const cplx unit = minus_it_pow(T, k);
      for (int q = 0; q < d * d; ++q) s.x[std::size_t(b)][std::size_t(k)](q % d, q / d) = sol(b * (s.kmax + 1) + k, q) / unit;
    }
  return s;
}

SecularCoefficients secular_from_revision(const RedividedHamiltonian& m, int l) {
  if (l < 1) throw error(errc::argument, "series order must be >= 1");
  require_nondegenerate(m);
  const int d = m.dim();
  auto s = empty_coefficients(m, l);
  const auto rev = revision_energies(m, 5);
  std::vector<SecularCoefficients> lower;
  for (int q = 0; q + 2 <= l; ++q) lower.push_back(secular_partial_fractions(m, q));
  for (int b = 0; b < d; ++b) s.available[std::size_t(b)][0] = false;
  for (int k = 1; k <= s.kmax; ++k) {
    // Ordered compositions a_1..a_k, each >= 2, with sum <= l.
    std::vector<int> a(std::size_t(k), 2);
    bool missing = false;
    const double inv_fact = 1.0 / factorial(k);
    auto rec = [&](auto&& self, int pos, int sum) -> void {
      if (pos == k) {
        for (int x : a)
          if (x > 5) {
            missing = true;
            return;
          }
        const auto& p = lower[std::size_t(l - sum)];
        for (int b = 0; b < d; ++b) {
          double w = inv_fact;
          for (int x : a) w *= rev.order(x)[std::size_t(b)];
          s.x[std::size_t(b)][std::size_t(k)] += w * p.x[std::size_t(b)][0];
        }
        return;
      }
      for (int x = 2; sum + x + 2 * (k - pos - 1) <= l; ++x) {
        a[std::size_t(pos)] = x;
        self(self, pos + 1, sum + x);
      }
    };
    rec(rec, 0, 0);
    if (missing)
      for (int b = 0; b < d; ++b) {
        s.available[std::size_t(b)][std::size_t(k)] = false;
        s.x[std::size_t(b)][std::size_t(k)].setZero();
      }
  }
  return s;
}

std::vector<TermPiece> appendixB_aggregates(const RedividedHamiltonian& m, double t, int l) {
  if (l < 4 || l > 6) throw error(errc::range, "aggregates are defined for orders 4..6");
  require_nondegenerate(m);
  const auto s = secular_from_revision(m, l);
  std::vector<TermPiece> out;
  for (int k = 1; k <= s.kmax; ++k) {
    if (!s.available[0][std::size_t(k)]) continue;
    const cmat full = s.evaluate(t, k);
    cmat diag = cmat::Zero(full.rows(), full.cols());
    diag.diagonal() = full.diagonal();
    ContractionPattern agg{l, {}, {}};
    out.push_back(TermPiece{agg, diag, time_class(k), diag_class::D});
    out.push_back(TermPiece{agg, full - diag, time_class(k), diag_class::N});
  }
  return out;
}

}  // namespace divexp
