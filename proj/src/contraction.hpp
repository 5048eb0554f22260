#pragma once

#include <optional>
#include <string>
#include <vector>

#include "model.hpp"
#include "propagator.hpp"

namespace divexp {

// One set partition of the tuple positions 1..l+1 (adjacent positions never share a block),
// written as decomposition stages: stage j compares positions (k, k+1+j), k = 1..l-j, with
// 'c' (delta), 'n' (eta) or 'k' (already fixed by earlier stages).
struct ContractionPattern {
  int order = 0;
  std::vector<std::string> groups;  // all l-1 stages; empty for an aggregate over all patterns
  std::vector<int> blocks;          // restricted growth string over positions

  // Display name: stages made only of 'k' are dropped, e.g. "ncn,c".
  std::string name() const;
  bool diagonal() const { return !blocks.empty() && blocks.front() == blocks.back(); }
};

enum class time_class { e, te, t2e, t3e };
enum class diag_class { D, N };

const char* to_string(time_class c);
const char* to_string(diag_class c);

struct TermPiece {
  ContractionPattern pattern;
  cmat matrix;
  std::optional<time_class> tclass;  // nullopt: the whole pattern, all time classes together
  diag_class dclass = diag_class::N;
};

std::vector<ContractionPattern> enumerate_patterns(int l);

// Every pattern piece of order l, each the masked tuple sum of dd_exp times the g-product.
std::vector<TermPiece> pattern_pieces(const RedividedHamiltonian& m, int l, double t);

// Pattern pieces split into time classes by partial fractions (nondegenerate E' required).
std::vector<TermPiece> pattern_time_pieces(const RedividedHamiltonian& m, int l, double t);

std::vector<TermPiece> second_order_pieces(const RedividedHamiltonian& m, double t);
std::vector<TermPiece> third_order_pieces(const RedividedHamiltonian& m, double t);

struct MixedPiece {
  std::string kind;  // hh, hg, gh, gg
  cmat matrix;
};

// Order-2 term of the un-redivided split, by which factors of H1 are diagonal.
std::vector<MixedPiece> mixed_second_order_pieces(const SplitHamiltonian& m, double t);

// Order-2 amplitudes with every energy replaced by E + h1.
cvec redivided_closed_form_order2(const SplitHamiltonian& m, double t, const StateVector& psi0);

// Coefficients of a series term written as sum_b sum_k X[b][k] (-it)^k exp(-i E'_b t).
struct SecularCoefficients {
  int order = 0;
  int kmax = 0;
  std::vector<double> exponents;
  std::vector<std::vector<cmat>> x;           // x[b][k]
  std::vector<std::vector<bool>> available;  // false where a route cannot supply the class

  cmat evaluate(double t, int k) const;
  cmat evaluate(double t) const;
};

inline int secular_degree(int l) { return l / 2; }

SecularCoefficients secular_partial_fractions(const RedividedHamiltonian& m, int l);

struct FitOptions {
  int samples_per_unknown = 4;
  double window = 0.0;  // 0: chosen from the minimum level gap
  method how = method::block;
};

// Least-squares fit of series_term(l) samples on the basis (t/T)^k exp(-i E'_b t).
SecularCoefficients secular_fit(const RedividedHamiltonian& m, int l, const FitOptions& opt = {});

// Secular classes k >= 1 rebuilt from revision energies and lower-order e-class coefficients:
// X[b][k] = (1/k!) sum over a_1..a_k >= 2 of G_b^(a_1)...G_b^(a_k) P_b^(l - sum a).
SecularCoefficients secular_from_revision(const RedividedHamiltonian& m, int l);

std::vector<TermPiece> appendixB_aggregates(const RedividedHamiltonian& m, double t, int l);

}  // namespace divexp
