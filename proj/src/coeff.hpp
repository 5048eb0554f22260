#pragma once

#include <cstdint>
#include <vector>

#include "linalg.hpp"

namespace divexp {

using NodeList = std::vector<double>;

struct DividedDifferenceResult {
  cplx value;
  bool confluent_flag = false;
  double est_error = 0.0;
};

inline constexpr double cluster_rel_gap = 1e-6;

std::vector<double> denominators(const NodeList& nl);

double c_closed(const NodeList& nl, int n);
double c_recurrence(const NodeList& nl, int n);

// Divided difference of exp(-ixt) over the nodes; repeated nodes allowed.
DividedDifferenceResult dd_exp(const NodeList& nl, double t);

bool has_cluster(const NodeList& nl);

// f^n(A,B) of (A+B)^n = A^n + f^n(A,B) by the explicit multi-index sum.
cmat binomial_expansion_tail(const cmat& a, const cmat& b, int n);

// dd_exp over distinct points z_b with multiplicities m_b, written as
// sum_b sum_k coef[b][k] (-it)^k exp(-i z_b t), k < m_b.
std::vector<std::vector<double>> confluent_partial_fractions(const std::vector<double>& z,
                                                             const std::vector<int>& mult);

struct IdentityReport {
  int trials = 0;
  int l_max = 0;
  double max_below = 0.0;  // max |C_l^K|, K < l
  double max_top = 0.0;    // max |C_l^l - 1|
  double max_recurrence_diff = 0.0;  // max |c_closed - c_recurrence| at K = l
};

// Draws `trials` node sets (l = 1 + trial mod l_max, nodes uniform in [-1, 1], pairwise gap >= min_gap)
// from std::mt19937_64(seed), taking u = (draw >> 11) * 2^-53 so the stream is portable.
IdentityReport identity_suite(int l_max, int trials, unsigned long long seed, double min_gap = 1e-3);

}  // namespace divexp
