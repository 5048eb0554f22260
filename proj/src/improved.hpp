#pragma once

#include <functional>
#include <vector>

#include "model.hpp"

namespace divexp {

// Revision energies G^(2..5) on the redivided levels; entries above max_order are zero.
struct RevisionEnergies {
  int max_order = 0;
  std::vector<double> g2, g3, g4, g5;
  std::vector<double> shifted;  // E' + g2 + ... + g_max_order
  double max_imag_residue = 0.0;

  const std::vector<double>& order(int a) const;
  // E' plus the revisions of order 2..depth (depth 1 gives E').
  std::vector<double> shifted_through(const std::vector<double>& base, int depth) const;
};

inline constexpr double imag_residue_tol = 1e-10;

RevisionEnergies revision_energies(const RedividedHamiltonian& m, int max_order);

struct ImprovedSolution {
  int order = 0;
  std::vector<double> times;
  std::vector<cvec> amplitudes;
  RevisionEnergies uses;
};

// Shift depth of the exponent substitution in the order-k improved term.
inline int improved_shift_depth(int k) { return 5 - k; }

// The order-k improved term (not cumulative) as a matrix at time t.
cmat improved_term(const RedividedHamiltonian& m, const RevisionEnergies& rev, int k, double t);

// Cumulative improved solution: sum of the improved terms of order 0..order applied to psi0.
ImprovedSolution improved_solution(const RedividedHamiltonian& m, const StateVector& psi0,
                                   const std::vector<double>& times, int order);

struct TransitionReport {
  std::vector<double> times;
  std::vector<double> p_usual;
  std::vector<double> p_improved;
  std::vector<double> delta;
  double rate_usual = 0.0;
  double rate_delta = 0.0;
  int intervals = 0;  // trapezoid intervals of the accepted golden-rule estimate
};

TransitionReport improved_transition(const RedividedHamiltonian& m, int from, int to,
                                     const std::vector<double>& times);

struct DensityTable {
  std::vector<double> energy;
  std::vector<double> rho;
};

struct GoldenRuleOptions {
  bool zero_revisions = false;
  bool sin_approx = false;
  double rel_tol = 1e-4;
  int max_levels = 18;
};

// Monotone cubic (pchip) interpolant of a density table; zero outside the table.
class density_interpolant {
 public:
  explicit density_interpolant(const DensityTable& rho);
  double operator()(double e) const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  std::function<double(double)> f_;
  double lo_ = 0.0, hi_ = 0.0;
};

// Revised transition frequency for final energy E'_from + w, the template level 'to' following w.
double golden_rule_shifted_frequency(const RedividedHamiltonian& m, int from, int to, double w);

// The delta-w integrand at final energy e; 0 wherever rho vanishes.
double golden_rule_integrand(const RedividedHamiltonian& m, int from, int to, const density_interpolant& rho,
                             double T, double e, const GoldenRuleOptions& opt);

TransitionReport revised_golden_rule(const RedividedHamiltonian& m, int from, int to, const DensityTable& rho,
                                     double T, const GoldenRuleOptions& opt = {});

double improved_energy(const SplitHamiltonian& m, int level, int max_order);

cvec improved_state_coefficients(const RedividedHamiltonian& m, int level, int order);

}  // namespace divexp
