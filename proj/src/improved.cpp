#include "improved.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include "contraction.hpp"
#include "error.hpp"

namespace divexp {

namespace {

void check_index(const RedividedHamiltonian& m, int k, const char* what) {
  if (k < 0 || k >= m.dim()) throw error(errc::range, std::string(what) + " index out of range");
}

double min_gap(const std::vector<double>& e) {
  double g = INFINITY;
  for (std::size_t a = 0; a < e.size(); ++a)
    for (std::size_t b = a + 1; b < e.size(); ++b) g = std::min(g, std::abs(e[a] - e[b]));
  return g;
}

}  // namespace

const std::vector<double>& RevisionEnergies::order(int a) const {
  switch (a) {
    case 2: return g2;
    case 3: return g3;
    case 4: return g4;
    case 5: return g5;
  }
  throw error(errc::range, "revision energies exist for orders 2..5");
}

std::vector<double> RevisionEnergies::shifted_through(const std::vector<double>& base, int depth) const {
  if (depth > max_order) throw error(errc::range, "revision depth exceeds the computed order");
  std::vector<double> out = base;
  for (int a = 2; a <= depth; ++a)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += order(a)[k];
  return out;
}

RevisionEnergies revision_energies(const RedividedHamiltonian& m, int max_order) {
  if (max_order < 2 || max_order > 5) throw error(errc::range, "max_order must be in 2..5");
  require_nondegenerate(m);
  const int d = m.dim();
  const auto& e = m.shifted_energies;
  const cmat& g = m.offdiagonal;
  RevisionEnergies r;
  r.max_order = max_order;
  r.g2.assign(std::size_t(d), 0.0);
  r.g3 = r.g4 = r.g5 = r.g2;

  // Size reference for the imaginary residue: |g|^a / gap^(a-1).
  const double gn = g.norm(), gap = d > 1 ? min_gap(e) : 1.0;
  auto ref = [&](int a) { return std::pow(gn, a) / std::pow(gap, a - 1); };
  std::vector<double> worst(std::size_t(d), 0.0);
  auto real_part = [&](cplx z, int a, std::size_t k) {
    const double res = std::abs(z.imag()) / std::max(std::abs(z.real()), ref(a));
    worst[k] = std::max(worst[k], res);
    return z.real();
  };

  parallel_for(std::size_t(d), [&](std::size_t k) {
    const int c = int(k);
    // Reduced resolvent 1/(E_c - E_j), zero on c itself.
    cvec rdiag(d);
    for (int j = 0; j < d; ++j) rdiag(j) = j == c ? 0.0 : 1.0 / (e[k] - e[std::size_t(j)]);
    const cvec v = g.col(c);
    const Eigen::RowVectorXcd left = g.row(c);
    cvec w1 = rdiag.cwiseProduct(v);
    cvec w2 = rdiag.cwiseProduct(g * w1);
    cvec w3 = rdiag.cwiseProduct(g * w2);
    cvec w4 = rdiag.cwiseProduct(g * w3);
    const cplx e2 = left * w1;
    const cplx e3 = left * w2;
    const cplx s11 = left * rdiag.cwiseProduct(w1);  // <V R^2 V>
    const cplx e4 = cplx(left * w3) - e2 * s11;
    const cplx s21 = left * rdiag.cwiseProduct(w2);                          // <V R^2 V R V>
    const cplx s12 = left * rdiag.cwiseProduct(g * rdiag.cwiseProduct(w1));  // <V R V R^2 V>
    const cplx e5 = cplx(left * w4) - e2 * (s21 + s12) - e3 * s11;
    r.g2[k] = real_part(e2, 2, k);
    if (max_order >= 3) r.g3[k] = real_part(e3, 3, k);
    if (max_order >= 4) r.g4[k] = real_part(e4, 4, k);
    if (max_order >= 5) r.g5[k] = real_part(e5, 5, k);
  });
  r.max_imag_residue = *std::max_element(worst.begin(), worst.end());
  if (r.max_imag_residue > imag_residue_tol)
    throw error(errc::validation, "revision energies have an imaginary residue above tolerance");
  r.shifted = r.shifted_through(e, max_order);
  return r;
}

cmat improved_term(const RedividedHamiltonian& m, const RevisionEnergies& rev, int k, double t) {
  if (k < 0 || k > 3) throw error(errc::range, "improved order must be in 0..3");
  const auto p = secular_partial_fractions(m, k);
  const auto et = rev.shifted_through(m.shifted_energies, improved_shift_depth(k));
  const int d = m.dim();
  cmat out = cmat::Zero(d, d);
  for (int b = 0; b < d; ++b) out += p.x[std::size_t(b)][0] * std::exp(-I * et[std::size_t(b)] * t);
  return out;
}

ImprovedSolution improved_solution(const RedividedHamiltonian& m, const StateVector& psi0,
                                   const std::vector<double>& times, int order) {
  if (order < 0 || order > 3) throw error(errc::range, "improved order must be in 0..3");
  if (psi0.amplitudes.size() != m.dim()) throw error(errc::argument, "state dimension mismatch");
  ImprovedSolution s;
  s.order = order;
  s.times = times;
  s.uses = revision_energies(m, 5);
  const int d = m.dim();
  std::vector<SecularCoefficients> p;
  std::vector<std::vector<double>> et;
  for (int k = 0; k <= order; ++k) {
    p.push_back(secular_partial_fractions(m, k));
    et.push_back(s.uses.shifted_through(m.shifted_energies, improved_shift_depth(k)));
  }
  s.amplitudes.resize(times.size());
  parallel_for(times.size(), [&](std::size_t j) {
    const double t = times[j];
    if (t == 0.0) {
      // Every order k >= 1 vanishes at t = 0, as in the plain series.
      s.amplitudes[j] = psi0.amplitudes;
      return;
    }
    cmat u = cmat::Zero(d, d);
    for (int k = 0; k <= order; ++k)
      for (int b = 0; b < d; ++b)
        u += p[std::size_t(k)].x[std::size_t(b)][0] * std::exp(-I * et[std::size_t(k)][std::size_t(b)] * t);
    s.amplitudes[j] = u * psi0.amplitudes;
  });
  return s;
}

TransitionReport improved_transition(const RedividedHamiltonian& m, int from, int to,
                                     const std::vector<double>& times) {
  check_index(m, from, "from");
  check_index(m, to, "to");
  if (from == to) throw error(errc::argument, "transition needs distinct levels");
  const auto rev = revision_energies(m, 4);
  const auto& e = m.shifted_energies;
  const double g2 = std::norm(m.offdiagonal(to, from));
  const double w = e[std::size_t(to)] - e[std::size_t(from)];
  const double wt = rev.shifted[std::size_t(to)] - rev.shifted[std::size_t(from)];
  TransitionReport r;
  r.times = times;
  for (double t : times) {
    const double su = std::sin(w * t / 2.0), si = std::sin(wt * t / 2.0);
    const double den = (w / 2.0) * (w / 2.0);
    r.p_usual.push_back(g2 * su * su / den);
    r.p_improved.push_back(g2 * si * si / den);
    r.delta.push_back(2.0 * g2 * (std::cos(w * t) - std::cos(wt * t)) / (w * w));
  }
  return r;
}

density_interpolant::density_interpolant(const DensityTable& rho) {
  const auto n = rho.energy.size();
  if (n < 4 || rho.rho.size() != n) throw error(errc::argument, "density table needs at least 4 matching samples");
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(rho.energy[k]) || !std::isfinite(rho.rho[k]) || rho.rho[k] < 0.0)
      throw error(errc::argument, "density table entries must be finite and rho >= 0");
    if (k > 0 && !(rho.energy[k] > rho.energy[k - 1]))
      throw error(errc::argument, "density table energies must increase strictly");
  }
  lo_ = rho.energy.front();
  hi_ = rho.energy.back();
  auto x = rho.energy;
  auto y = rho.rho;
  boost::math::interpolators::pchip<std::vector<double>> p(std::move(x), std::move(y));
  f_ = [p](double e) { return std::max(0.0, p(e)); };
}

double density_interpolant::operator()(double e) const {
  if (e < lo_ || e > hi_) return 0.0;
  return f_(e);
}

double golden_rule_shifted_frequency(const RedividedHamiltonian& m, int from, int to, double w) {
  const auto& e = m.shifted_energies;
  const cmat& g = m.offdiagonal;
  double wt = w;
  for (int c = 0; c < m.dim(); ++c) {
    if (c != to) wt += std::norm(g(to, c)) / (w - (e[std::size_t(c)] - e[std::size_t(from)]));
    if (c == from) continue;
    // The template level sits at E'_from + w.
    const double w_from_c = c == to ? -w : e[std::size_t(from)] - e[std::size_t(c)];
    wt -= std::norm(g(from, c)) / w_from_c;
  }
  return wt;
}

double golden_rule_integrand(const RedividedHamiltonian& m, int from, int to, const density_interpolant& rho,
                             double T, double e, const GoldenRuleOptions& opt) {
  if (opt.zero_revisions) return 0.0;
  const double r = rho(e);
  if (r == 0.0) return 0.0;
  const double w = e - m.shifted_energies[std::size_t(from)];
  const double wt = golden_rule_shifted_frequency(m, from, to, w);
  const double g2 = std::norm(m.offdiagonal(to, from));
  const double diff = opt.sin_approx ? T * (wt - w) * std::sin((wt - w) * T) : std::cos(w * T) - std::cos(wt * T);
  return 2.0 * r * g2 * diff / (T * w * w);
}

TransitionReport revised_golden_rule(const RedividedHamiltonian& m, int from, int to, const DensityTable& rho,
                                     double T, const GoldenRuleOptions& opt) {
  check_index(m, from, "from");
  check_index(m, to, "to");
  if (from == to) throw error(errc::argument, "transition needs distinct levels");
  if (!(T > 0.0) || !std::isfinite(T)) throw error(errc::argument, "T must be positive");
  const density_interpolant dens(rho);
  const double eb = m.shifted_energies[std::size_t(from)];
  if (eb < dens.lo() || eb > dens.hi()) throw error(errc::range, "density window does not contain the initial level");
  TransitionReport r;
  r.rate_usual = 2.0 * M_PI * dens(eb) * std::norm(m.offdiagonal(to, from));
  auto f = [&](double e) { return golden_rule_integrand(m, from, to, dens, T, e, opt); };

  // Romberg over the knot-aligned composite trapezoid.
  const auto& knots = rho.energy;
  const std::size_t nk = knots.size() - 1;
  std::vector<double> row_prev, row;
  double trap = 0.0, trap_abs = 0.0;
  for (std::size_t k = 0; k < nk; ++k) {
    const double h = knots[k + 1] - knots[k];
    const double a = f(knots[k]), b = f(knots[k + 1]);
    trap += 0.5 * h * (a + b);
    trap_abs += 0.5 * h * (std::abs(a) + std::abs(b));
  }
  row_prev.push_back(trap);
  double widest = 0.0;
  for (std::size_t k = 0; k < nk; ++k) widest = std::max(widest, knots[k + 1] - knots[k]);
  const double resolve = 2.0 * M_PI / (8.0 * T);
  for (int level = 1; level <= opt.max_levels; ++level) {
    const double sub = std::ldexp(1.0, level);
    double mid = 0.0, mid_abs = 0.0;
    for (std::size_t k = 0; k < nk; ++k) {
      const double h = (knots[k + 1] - knots[k]) / sub;
      for (long q = 1; q < long(sub); q += 2) {
        const double v = f(knots[k] + double(q) * h);
        mid += h * v;
        mid_abs += h * std::abs(v);
      }
    }
    trap = 0.5 * trap + mid;
    trap_abs = 0.5 * trap_abs + mid_abs;
    row.assign(1, trap);
    double p4 = 1.0;
    for (std::size_t j = 1; j <= row_prev.size(); ++j) {
      p4 *= 4.0;
      row.push_back(row[j - 1] + (row[j - 1] - row_prev[j - 1]) / (p4 - 1.0));
    }
    const double best = row.back(), prev = row_prev.back();
    row_prev.swap(row);
    if (level < 3 || widest / sub > resolve) continue;
    if (std::abs(best - prev) <= opt.rel_tol * std::abs(best) + 1e-14 * trap_abs) {
      r.rate_delta = best;
      r.intervals = int(double(nk) * sub);
      return r;
    }
  }
  throw error(errc::convergence, "golden-rule refinement did not converge");
}

double improved_energy(const SplitHamiltonian& m, int level, int max_order) {
  const auto r = redivide(m);
  check_index(r, level, "level");
  const auto rev = revision_energies(r, max_order);
  return rev.shifted[std::size_t(level)];
}

cvec improved_state_coefficients(const RedividedHamiltonian& m, int level, int order) {
  check_index(m, level, "level");
  if (order != 1 && order != 2) throw error(errc::range, "state order must be 1 or 2");
  require_nondegenerate(m);
  const int d = m.dim();
  const auto& e = m.shifted_energies;
  const cmat& g = m.offdiagonal;
  const std::size_t b = std::size_t(level);
  cvec a = cvec::Zero(d);
  a(level) = 1.0;
  for (int c = 0; c < d; ++c) {
    if (c == level) continue;
    const double dc = e[std::size_t(c)] - e[b];
    a(c) -= g(c, level) / dc;
    if (order < 2) continue;
    for (int j = 0; j < d; ++j) {
      if (j == level) continue;
      a(c) += g(c, j) * g(j, level) / (dc * (e[std::size_t(j)] - e[b]));
    }
  }
  return a;
}

}  // namespace divexp
