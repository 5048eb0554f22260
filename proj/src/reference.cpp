#include "reference.hpp"

#include <cmath>

#include "error.hpp"

namespace divexp {

TwoStateExact make_two_state(double e1, double e2, cplx v) {
  if (!std::isfinite(e1) || !std::isfinite(e2) || !std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw error(errc::validation, "two-state parameters must be finite");
  if (!(e2 > e1)) throw error(errc::validation, "two-state model requires E2 > E1");
  TwoStateExact ts;
  ts.e1 = e1;
  ts.e2 = e2;
  ts.v = v;
  ts.omega = e2 - e1;
  const double v2 = std::norm(v);
  ts.omegaT = std::sqrt(4.0 * v2 + ts.omega * ts.omega);
  const double mean = 0.5 * (e1 + e2);
  ts.eigvals = {mean - 0.5 * ts.omegaT, mean + 0.5 * ts.omegaT};
  // (H - E^T) x = 0 with H = [[e1, v], [conj v, e2]]: components (omega +- omegaT, -2 conj v).
  const cplx v21 = std::conj(v);
  const std::array<double, 2> sgn{1.0, -1.0};
  for (int k = 0; k < 2; ++k) {
    std::array<cplx, 2> x{cplx(ts.omega + sgn[std::size_t(k)] * ts.omegaT), -2.0 * v21};
    if (v2 == 0.0) x = k == 0 ? std::array<cplx, 2>{1.0, 0.0} : std::array<cplx, 2>{0.0, 1.0};
    const double n = std::sqrt(std::norm(x[0]) + std::norm(x[1]));
    ts.eigvecs[std::size_t(k)] = {x[0] / n, x[1] / n};
  }
  return ts;
}

SplitHamiltonian two_state_model(const TwoStateExact& ts) {
  cmat h = cmat::Zero(2, 2);
  h(0, 1) = ts.v;
  h(1, 0) = std::conj(ts.v);
  return make_split({ts.e1, ts.e2}, h, {"1", "2"});
}

double exact_transition(const TwoStateExact& ts, double t) {
  const double s = std::sin(ts.omegaT * t / 2.0);
  return std::norm(ts.v) * s * s / ((ts.omegaT / 2.0) * (ts.omegaT / 2.0));
}

UsualPT usual_pt_quantities(const TwoStateExact& ts) {
  const double v2 = std::norm(ts.v), w = ts.omega;
  UsualPT u;
  u.e1p = ts.e1 - v2 / w;
  u.e2p = ts.e2 + v2 / w;
  u.p = [v2, w](double t) {
    const double s = std::sin(w * t / 2.0);
    return v2 * s * s / ((w / 2.0) * (w / 2.0));
  };
  return u;
}

}  // namespace divexp
