#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "contraction.hpp"
#include "error.hpp"
#include "improved.hpp"
#include "propagator.hpp"
#include "reference.hpp"
#include "support.hpp"

using namespace divexp;

namespace {

RedividedHamiltonian two_state(double e1, double e2, cplx v) {
  return redivide(two_state_model(make_two_state(e1, e2, v)));
}

// Rayleigh-Schroedinger recursion with intermediate normalization, orders 1..5.
std::vector<std::vector<cplx>> rs_recursion(const RedividedHamiltonian& m) {
  const int d = m.dim();
  const auto& E = m.shifted_energies;
  const cmat& V = m.offdiagonal;
  std::vector<std::vector<cplx>> out(std::size_t(d), std::vector<cplx>(6, 0.0));
  for (int n = 0; n < d; ++n) {
    std::vector<cvec> psi{cvec::Unit(d, n)};
    std::vector<cplx> en(6, 0.0);
    for (int k = 1; k <= 5; ++k) {
      en[std::size_t(k)] = (V.row(n) * psi[std::size_t(k - 1)])(0);
      cvec rhs = V * psi[std::size_t(k - 1)];
      for (int j = 1; j <= k; ++j) rhs -= en[std::size_t(j)] * psi[std::size_t(k - j)];
      cvec next = cvec::Zero(d);
      for (int q = 0; q < d; ++q)
        if (q != n) next(q) = rhs(q) / (E[std::size_t(n)] - E[std::size_t(q)]);
      psi.push_back(next);
    }
    out[std::size_t(n)] = en;
  }
  return out;
}

std::vector<double> sorted_eigenvalues(const SplitHamiltonian& s) {
  Eigen::SelfAdjointEigenSolver<cmat> es(s.total());
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return v;
}

// Levels in ascending order so eigenvalues pair up by index.
SplitHamiltonian sorted_split(testing::rng& r, int d, double fro) {
  std::vector<double> e;
  double x = -0.5;
  for (int k = 0; k < d; ++k) {
    e.push_back(x);
    x += 0.15 + 0.3 * r.uniform();
  }
  return make_split(e, testing::random_hermitian(r, d, fro, false));
}

}  // namespace

TEST_CASE("two-state revision energies") {
  const double v = 0.1, w = 1.0;
  const auto m = two_state(0.0, w, v);
  const auto rev = revision_energies(m, 5);
  CHECK(rev.g2[0] == doctest::Approx(-v * v / w).epsilon(1e-14));
  CHECK(rev.g2[1] == doctest::Approx(v * v / w).epsilon(1e-14));
  CHECK(std::abs(rev.g3[0]) < 1e-18);
  CHECK(rev.g4[0] == doctest::Approx(std::pow(v, 4) / std::pow(w, 3)).epsilon(1e-13));
  CHECK(rev.g4[1] == doctest::Approx(-std::pow(v, 4) / std::pow(w, 3)).epsilon(1e-13));
  CHECK(std::abs(rev.g5[0]) < 1e-18);
  CHECK(rev.shifted[0] == doctest::Approx(-0.0099).epsilon(1e-13));
}

TEST_CASE("revision energies match the Rayleigh-Schroedinger recursion") {
  testing::rng r(81);
  for (int trial = 0; trial < 8; ++trial) {
    const auto m = testing::random_redivided(r, 3 + trial % 4, 0.1, 0.4, 0.2);
    const auto rev = revision_energies(m, 5);
    const auto rs = rs_recursion(m);
    CHECK(rev.max_imag_residue < 1e-12);
    for (int k = 0; k < m.dim(); ++k) {
      CHECK(std::abs(rs[std::size_t(k)][1]) < 1e-15);
      for (int a = 2; a <= 5; ++a) {
        const cplx want = rs[std::size_t(k)][std::size_t(a)];
        CHECK(std::abs(want.imag()) < 1e-12 * std::max(1e-3, std::abs(want)));
        CHECK(std::abs(rev.order(a)[std::size_t(k)] - want.real()) < 1e-12 * std::max(1e-6, std::abs(want)));
      }
    }
  }
}

TEST_CASE("revision energies scale as lambda^a") {
  testing::rng r(82);
  auto m = testing::random_redivided(r, 5, 0.1, 0.4, 0.3);
  const auto base = revision_energies(m, 5);
  const double lam = 0.37;
  m.offdiagonal *= lam;
  const auto scaled = revision_energies(m, 5);
  for (int a = 2; a <= 5; ++a)
    for (int k = 0; k < 5; ++k) {
      const double want = std::pow(lam, a) * base.order(a)[std::size_t(k)];
      CHECK(std::abs(scaled.order(a)[std::size_t(k)] - want) <= 1e-12 * std::abs(base.order(a)[std::size_t(k)]) + 1e-300);
    }
}

TEST_CASE("revision energy arguments") {
  testing::rng r(83);
  const auto m = testing::random_redivided(r, 3, 0.1, 0.4, 0.2);
  CHECK_THROWS_AS(revision_energies(m, 1), error);
  CHECK_THROWS_AS(revision_energies(m, 6), error);
  const auto rev = revision_energies(m, 3);
  CHECK(rev.g4 == std::vector<double>(3, 0.0));
  CHECK_THROWS_AS(rev.order(6), error);
  CHECK_THROWS_AS(rev.shifted_through(m.shifted_energies, 4), error);
  auto deg = m;
  deg.shifted_energies[1] = deg.shifted_energies[0];
  try {
    revision_energies(deg, 2);
    FAIL("expected a degeneracy error");
  } catch (const error& e) {
    CHECK(e.code() == errc::degenerate);
  }
}

TEST_CASE("improved energies converge on the exact eigenvalues") {
  testing::rng r(84);
  for (int trial = 0; trial < 4; ++trial) {
    const auto base = sorted_split(r, 4, 1.0);
    std::vector<double> err2, err4;
    for (double s : {1e-2, 1e-3}) {
      const auto split = make_split(base.energies, base.perturbation * s);
      const auto ev = sorted_eigenvalues(split);
      double e2 = 0.0, e4 = 0.0;
      for (int k = 0; k < 4; ++k) {
        e2 = std::max(e2, std::abs(improved_energy(split, k, 2) - ev[std::size_t(k)]));
        e4 = std::max(e4, std::abs(improved_energy(split, k, 4) - ev[std::size_t(k)]));
      }
      err2.push_back(e2);
      err4.push_back(e4);
    }
    CHECK(err2[0] / err2[1] > 500.0);
    CHECK(err4[0] < 1e-8);
    CHECK(err4[1] < 1e-12);
  }
}

TEST_CASE("improved energy of the two-state model") {
  const auto split = two_state_model(make_two_state(0.0, 1.0, 0.1));
  CHECK(improved_energy(split, 0, 2) == doctest::Approx(-0.01).epsilon(1e-14));
  CHECK(improved_energy(split, 0, 4) == doctest::Approx(-0.0099).epsilon(1e-13));
  CHECK(improved_energy(split, 1, 4) == doctest::Approx(1.0099).epsilon(1e-13));
  cmat h = cmat::Zero(3, 3);
  h.diagonal() << 0.1, 0.0, -0.3;
  const auto diag = make_split({0.0, 1.0, 2.0}, h);
  CHECK(improved_energy(diag, 2, 5) == 1.7);
  CHECK(improved_energy(make_split({0.0, 1.0}, cmat::Zero(2, 2)), 1, 3) == 1.0);
  CHECK_THROWS_AS(improved_energy(split, 2, 2), error);
}

TEST_CASE("improved terms") {
  testing::rng r(85);
  const auto m = testing::random_redivided(r, 4, 0.1, 0.4, 0.2);
  const auto rev = revision_energies(m, 5);
  const auto& E = m.shifted_energies;
  const double t = 2.3;
  const cmat u0 = improved_term(m, rev, 0, t);
  const auto e5 = rev.shifted_through(E, 5);
  const auto e4 = rev.shifted_through(E, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (a == b) {
        CHECK(std::abs(u0(a, a) - std::exp(-I * e5[a] * t)) < 1e-15);
      } else {
        CHECK(u0(a, b) == 0.0);
      }
    }
  const cmat u1 = improved_term(m, rev, 1, t);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const cplx want = a == b ? cplx(0.0)
                               : m.offdiagonal(a, b) * (std::exp(-I * e4[a] * t) - std::exp(-I * e4[b] * t)) /
                                     (E[a] - E[b]);
      CHECK(std::abs(u1(a, b) - want) < 1e-14);
    }
  // with every revision switched off the improved terms are the e-class of the plain series
  RevisionEnergies none = rev;
  for (auto* v : {&none.g2, &none.g3, &none.g4, &none.g5}) std::fill(v->begin(), v->end(), 0.0);
  CHECK(max_abs(improved_term(m, none, 1, t) - series_term(m, 1, t).matrix) < 1e-14);
  CHECK(max_abs(improved_term(m, none, 2, t) - secular_partial_fractions(m, 2).evaluate(t, 0)) < 1e-14);
  CHECK_THROWS_AS(improved_term(m, rev, 4, t), error);
}

TEST_CASE("improved solution of the two-state model") {
  const auto ts = make_two_state(0.0, 1.0, 0.1);
  const auto m = redivide(two_state_model(ts));
  const auto psi = basis_state(2, 0);
  const std::vector<double> times{0.0, 5.0, 20.0, 60.0};
  const auto sol = improved_solution(m, psi, times, 2);
  CHECK(sol.amplitudes[0] == psi.amplitudes);
  for (std::size_t j = 1; j < times.size(); ++j) {
    const cvec exact = oracle_eigensolve(two_state_model(ts), times[j]) * psi.amplitudes;
    CHECK((sol.amplitudes[j] - exact).norm() < 5e-3);
    // the plain series of the same order drifts at long times
    if (times[j] >= 60.0) CHECK((evolve(m, psi, {times[j]}, 2).amplitudes[0] - exact).norm() > 0.1);
  }
  // order 1 keeps the first-order transition amplitude with shifted exponents
  const auto s1 = improved_solution(m, psi, {7.0}, 1);
  const auto rev = revision_energies(m, 5);
  const auto e4 = rev.shifted_through(m.shifted_energies, 4);
  const cplx c2 = std::conj(ts.v) * (std::exp(-I * e4[1] * 7.0) - std::exp(-I * e4[0] * 7.0)) / (1.0 - 0.0);
  CHECK(std::abs(s1.amplitudes[0](1) - c2) < 1e-15);
  CHECK_THROWS_AS(improved_solution(m, psi, times, 4), error);
  CHECK_THROWS_AS(improved_solution(m, basis_state(3, 0), times, 1), error);
}

TEST_CASE("improved transition identities") {
  const auto m = two_state(0.0, 1.0, 0.1);
  const std::vector<double> times{0.0, 1.0, 10.0, 100.0, 1000.0};
  const auto rep = improved_transition(m, 0, 1, times);
  CHECK(rep.p_usual[0] == 0.0);
  CHECK(rep.p_improved[0] == 0.0);
  CHECK(rep.delta[0] == 0.0);
  for (std::size_t j = 0; j < times.size(); ++j) {
    CHECK(std::abs(rep.delta[j] - (rep.p_improved[j] - rep.p_usual[j])) < 1e-12);
    const double want = 4.0 * 0.01 * std::pow(std::sin(times[j] / 2.0), 2);
    CHECK(std::abs(rep.p_usual[j] - want) < 1e-14);
  }
  const auto rev = revision_energies(m, 4);
  CHECK(rev.shifted[1] - rev.shifted[0] == doctest::Approx(1.0198).epsilon(1e-13));
  CHECK_THROWS_AS(improved_transition(m, 0, 0, times), error);
  CHECK_THROWS_AS(improved_transition(m, 0, 2, times), error);
}

TEST_CASE("density interpolant") {
  DensityTable tab{{-1.0, -0.5, 0.0, 0.5, 1.0}, {0.0, 1.0, 0.2, 0.0, 0.3}};
  const density_interpolant f(tab);
  for (std::size_t k = 0; k < 5; ++k) CHECK(f(tab.energy[k]) == doctest::Approx(tab.rho[k]).epsilon(1e-14));
  CHECK(f(-1.01) == 0.0);
  CHECK(f(1.01) == 0.0);
  for (double e = -1.0; e <= 1.0; e += 0.01) CHECK(f(e) >= 0.0);
  // monotone data stays within the bracketing knots
  CHECK(f(-0.25) <= 1.0);
  CHECK(f(-0.25) >= 0.2);
  CHECK_THROWS_AS(density_interpolant(DensityTable{{0.0, 1.0, 2.0}, {1.0, 1.0, 1.0}}), error);
  CHECK_THROWS_AS(density_interpolant(DensityTable{{0.0, 1.0, 1.0, 2.0}, {1.0, 1.0, 1.0, 1.0}}), error);
  CHECK_THROWS_AS(density_interpolant(DensityTable{{0.0, 1.0, 2.0, 3.0}, {1.0, -1.0, 1.0, 1.0}}), error);
}

namespace {

RedividedHamiltonian toy(double v) {
  cmat h = cmat::Zero(3, 3);
  h(0, 1) = v;
  h(0, 2) = 0.5 * v;
  h(1, 2) = 0.3 * v;
  h = h + h.adjoint().eval();
  return redivide(make_split({0.0, 0.5, 5.0}, h));
}

// Vanishes around the initial level at 0, where the shifted frequency has a pole.
DensityTable ramp_table() {
  DensityTable tab;
  for (int k = 0; k <= 20; ++k) {
    const double e = -1.0 + 0.1 * k;
    tab.energy.push_back(e);
    tab.rho.push_back(std::max(0.0, e - 0.2));
  }
  return tab;
}

}  // namespace

TEST_CASE("revised golden rule against a direct quadrature") {
  const auto m = toy(0.05);
  const double T = 20.0;
  const auto& E = m.shifted_energies;
  const cmat& g = m.offdiagonal;
  auto wt = [&](double w) {
    double s = w;
    s += std::norm(g(1, 0)) / w + std::norm(g(1, 2)) / (w - (E[2] - E[0]));
    s -= std::norm(g(0, 1)) / (-w) + std::norm(g(0, 2)) / (E[0] - E[2]);
    return s;
  };
  const density_interpolant rho(ramp_table());
  auto f = [&](double e) {
    const double w = e - E[0];
    if (rho(e) == 0.0) return 0.0;
    return 2.0 * rho(e) * std::norm(g(1, 0)) * (std::cos(w * T) - std::cos(wt(w) * T)) / (T * w * w);
  };
  // composite Simpson over the support of rho
  const int n = 200000;
  const double lo = 0.2, hi = 1.0, h = (hi - lo) / n;
  double want = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double e = lo + k * h;
    want += (k == 0 || k == n ? 1.0 : (k % 2 ? 4.0 : 2.0)) * f(e);
  }
  want *= h / 3.0;
  const auto rep = revised_golden_rule(m, 0, 1, ramp_table(), T);
  CHECK(rep.rate_usual == 0.0);
  CHECK(want != 0.0);
  CHECK(std::abs(rep.rate_delta - want) <= 1e-4 * std::abs(want) + 1e-12);
  CHECK(rep.intervals >= 20 * 8);
}

TEST_CASE("revised golden rule limits and errors") {
  const double T = 20.0;
  const auto small = revised_golden_rule(toy(0.0005), 0, 1, ramp_table(), T);
  const auto big = revised_golden_rule(toy(0.005), 0, 1, ramp_table(), T);
  // |g_fi|^2 times a frequency shift of order |g|^2
  CHECK(big.rate_delta / small.rate_delta == doctest::Approx(1e4).epsilon(0.15));

  GoldenRuleOptions zero;
  zero.zero_revisions = true;
  DensityTable flat{{-1.0, -0.5, 0.0, 0.5, 1.0}, {0.3, 0.3, 0.3, 0.3, 0.3}};
  const auto z = revised_golden_rule(toy(0.05), 0, 1, flat, T, zero);
  CHECK(z.rate_delta == 0.0);
  CHECK(z.rate_usual == doctest::Approx(2.0 * M_PI * 0.3 * 0.0025).epsilon(1e-12));

  GoldenRuleOptions sa;
  sa.sin_approx = true;
  const auto s = revised_golden_rule(toy(0.05), 0, 1, ramp_table(), T, sa);
  CHECK(std::isfinite(s.rate_delta));

  CHECK_THROWS_AS(revised_golden_rule(toy(0.05), 0, 1, DensityTable{{0.5, 1.0, 1.5, 2.0}, {1, 1, 1, 1}}, T), error);
  CHECK_THROWS_AS(revised_golden_rule(toy(0.05), 0, 1, ramp_table(), 0.0), error);
  CHECK_THROWS_AS(revised_golden_rule(toy(0.05), 0, 0, ramp_table(), T), error);
  GoldenRuleOptions tight;
  tight.max_levels = 3;
  tight.rel_tol = 1e-15;
  try {
    revised_golden_rule(toy(0.05), 0, 1, ramp_table(), 200.0, tight);
    FAIL("expected a convergence error");
  } catch (const error& e) {
    CHECK(e.code() == errc::convergence);
  }
}

TEST_CASE("state coefficients approach the eigenvector") {
  testing::rng r(86);
  const auto base = sorted_split(r, 4, 1.0);
  for (int level = 0; level < 4; ++level) {
    std::vector<double> e1, e2;
    for (double s : {1e-2, 1e-3}) {
      const auto split = make_split(base.energies, base.perturbation * s);
      Eigen::SelfAdjointEigenSolver<cmat> es(split.total());
      cvec v = es.eigenvectors().col(level);
      v /= v(level);
      const auto m = redivide(split);
      const cvec a1 = improved_state_coefficients(m, level, 1);
      const cvec a2 = improved_state_coefficients(m, level, 2);
      CHECK(a1(level) == 1.0);
      e1.push_back((a1 - v).norm());
      e2.push_back((a2 - v).norm());
    }
    CHECK(e1[0] / e1[1] > 50.0);
    CHECK(e2[0] / e2[1] > 500.0);
  }
  const auto m = redivide(base);
  CHECK_THROWS_AS(improved_state_coefficients(m, 0, 3), error);
  CHECK_THROWS_AS(improved_state_coefficients(m, 4, 1), error);
}

TEST_CASE("two-state shifted frequency and state coefficients") {
  for (double v : {0.02, 0.05, 0.1, 0.15, 0.2}) {
    const auto ts = make_two_state(0.0, 1.0, v);
    const auto m = redivide(two_state_model(ts));
    const auto rev = revision_energies(m, 4);
    const double wt = rev.shifted[1] - rev.shifted[0];
    CHECK(wt == doctest::Approx(1.0 + 2.0 * (v * v - std::pow(v, 4))).epsilon(1e-13));
    CHECK(std::abs(wt - ts.omegaT) <= 5.0 * std::pow(v, 6));
    CHECK(std::abs(rev.shifted[0] - ts.eigvals[0]) < 2.0 * std::pow(v, 6));
    const cvec a = improved_state_coefficients(m, 0, 1);
    CHECK(a(1) == -std::conj(ts.v) / 1.0);
    CHECK(improved_state_coefficients(m, 0, 2)(1) == a(1));
  }
  const auto free = redivide(make_split({0.0, 0.4, 1.0}, cmat::Zero(3, 3)));
  CHECK(improved_state_coefficients(free, 1, 2) == cvec::Unit(3, 1));
}
