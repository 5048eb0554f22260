#pragma once

#include <array>
#include <functional>

#include "model.hpp"

namespace divexp {

// Two levels E1 < E2 coupled by V = V12 (V21 = conj V).
struct TwoStateExact {
  double e1 = 0.0, e2 = 0.0;
  cplx v;
  double omega = 0.0;
  double omegaT = 0.0;
  std::array<double, 2> eigvals{};
  std::array<std::array<cplx, 2>, 2> eigvecs{};  // eigvecs[k] belongs to eigvals[k]
};

TwoStateExact make_two_state(double e1, double e2, cplx v);

// H0 = diag(e1, e2), H1 off-diagonal V.
SplitHamiltonian two_state_model(const TwoStateExact& ts);

double exact_transition(const TwoStateExact& ts, double t);

struct UsualPT {
  double e1p = 0.0, e2p = 0.0;
  std::function<double(double)> p;
};

UsualPT usual_pt_quantities(const TwoStateExact& ts);

}  // namespace divexp
