#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace divexp {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;

inline constexpr cplx I{0.0, 1.0};

// Dense matrix exponential (Eigen's Pade scaling-and-squaring).
cmat expm(const cmat& a);

// exp(-iHt) for Hermitian H by eigendecomposition.
cmat hermitian_propagator(const cmat& h, double t);

// Largest singular value by power iteration on A^H A.
double spectral_norm(const cmat& a, double rel_tol = 1e-6, int max_iter = 2000);

double max_abs(const cmat& a);

// Worker count: DIVEXP_THREADS when set and > 0, otherwise hardware concurrency.
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index is touched by exactly one worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace divexp
