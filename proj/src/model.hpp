#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace divexp {

// H = diag(energies) + perturbation, in the H0 eigenbasis (file order).
struct SplitHamiltonian {
  int dim = 0;
  std::vector<double> energies;
  cmat perturbation;
  std::vector<std::string> labels;

  cmat total() const;
};

struct RedividedHamiltonian {
  SplitHamiltonian base;
  std::vector<double> shifted_energies;  // E' = E + Re h1_gg
  cmat offdiagonal;                      // g1, exact zero diagonal

  int dim() const { return base.dim; }
};

struct StateVector {
  cvec amplitudes;
};

inline constexpr double hermiticity_tol = 1e-12;

// Validates, checks Hermiticity against hermiticity_tol * max|entry|, stores (H + H^H)/2.
SplitHamiltonian make_split(std::vector<double> energies, const cmat& perturbation,
                            std::vector<std::string> labels = {});

SplitHamiltonian load_model(std::istream& in);
SplitHamiltonian load_model_text(const std::string& text);
std::string dump_model(const SplitHamiltonian& m);

RedividedHamiltonian redivide(const SplitHamiltonian& m);
// The split taken as is: E' = E and the full H1 (diagonal included) as perturbation.
RedividedHamiltonian unredivided_view(const SplitHamiltonian& m);

// The (E', g1) pair viewed as a split Hamiltonian of its own.
SplitHamiltonian as_split(const RedividedHamiltonian& r);

double energy_scale(const RedividedHamiltonian& r);
double default_gap_tol(const RedividedHamiltonian& r);

// Throws errc::degenerate listing every pair with |E'_a - E'_b| <= gap_tol.
void require_nondegenerate(const RedividedHamiltonian& r, double gap_tol);
void require_nondegenerate(const RedividedHamiltonian& r);

// Rejects norms off by more than 1e-10 unless normalize is set.
StateVector make_state(const cvec& amplitudes, bool normalize = false);
StateVector basis_state(int dim, int index);

}  // namespace divexp
