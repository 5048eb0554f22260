#pragma once

#include <cstdint>
#include <vector>

#include "coeff.hpp"
#include "model.hpp"

namespace divexp {

enum class method { tuples, block, automatic };

struct SeriesTerm {
  int order = 0;
  cmat matrix;
  double t = 0.0;
};

struct TruncatedPropagator {
  double t = 0.0;
  int order_cap = 0;
  cmat matrix;
  double tail_bound = 0.0;
};

struct EvolutionResult {
  std::vector<double> times;
  std::vector<cvec> amplitudes;
  int order_cap = 0;
  std::vector<double> tail_bounds;
  double norm_drift = 0.0;
};

// Work units of the tuple path (see tuple_work) are limited to this budget.
inline constexpr double default_tuple_budget = 2e8;
inline constexpr int max_default_order = 16;

method choose_method(int dim, int l, method requested, double budget = default_tuple_budget);

SeriesTerm series_term(const RedividedHamiltonian& m, int l, double t, method how = method::automatic,
                       double budget = default_tuple_budget);

double tail_bound(double g_norm, int L, double t);
int default_order(const RedividedHamiltonian& m, double t, double tol);

TruncatedPropagator truncated_propagator(const RedividedHamiltonian& m, int L, double t,
                                         method how = method::automatic);

// L < 0 selects default_order(max |t| in times, tol) per call.
EvolutionResult evolve(const RedividedHamiltonian& m, const StateVector& psi0, const std::vector<double>& times,
                       int L, double tol = 1e-10, method how = method::automatic);

cmat oracle_eigensolve(const SplitHamiltonian& m, double t);
cmat oracle_dyson_order(const RedividedHamiltonian& m, int l, double t, double quad_tol = 1e-10);
cmat oracle_block_order(const RedividedHamiltonian& m, int l, double t);

cmat derivative_coefficients(const RedividedHamiltonian& m, int l, int K, double budget = default_tuple_budget);

// Packs a multiset of level indices (counts <= l+1) into 64 bits.
class multiset_codec {
 public:
  multiset_codec(int dim, int l);
  std::uint64_t unit(int level) const;
  NodeList nodes(std::uint64_t key, const std::vector<double>& e) const;

 private:
  int dim_;
  int bits_;
};

double tuple_work(int dim, int l);

// Sums the g-products of all index tuples starting at row, grouped by the multiset of their
// levels; each entry maps a multiset key to the per-final-index weight vector.
std::vector<std::pair<std::uint64_t, cvec>> multiset_weights(const RedividedHamiltonian& m, int l, std::size_t row,
                                                              const multiset_codec& codec);

// Visits every index tuple (g_1 = row, ..., g_{l+1}) with nonzero g-product; the callback
// receives the tuple and the product of g1 elements along it.
void for_each_tuple(const RedividedHamiltonian& m, int l, std::size_t row,
                    const std::function<void(const std::vector<int>&, cplx)>& visit);

}  // namespace divexp
