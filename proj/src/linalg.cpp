#include "linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "error.hpp"

namespace divexp {

cmat expm(const cmat& a) { return a.exp(); }

cmat hermitian_propagator(const cmat& h, double t) {
  Eigen::SelfAdjointEigenSolver<cmat> es(h);
  if (es.info() != Eigen::Success) throw error(errc::convergence, "eigensolver failed");
  const cmat& v = es.eigenvectors();
  cvec ph(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) ph(k) = std::exp(-I * es.eigenvalues()(k) * t);
  return v * ph.asDiagonal() * v.adjoint();
}

double spectral_norm(const cmat& a, double rel_tol, int max_iter) {
  if (a.size() == 0) return 0.0;
  const double fro = a.norm();
  if (fro == 0.0) return 0.0;
  cvec x(a.cols());
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = cplx(1.0 + 0.1 * double(k), 0.05 * double(k % 3));
  x.normalize();
  double prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    cvec y = a.adjoint() * (a * x);
    const double lam = y.norm();
    if (lam == 0.0) return 0.0;
    x = y / lam;
    if (it > 0 && std::abs(lam - prev) <= rel_tol * lam) {
      prev = lam;
      break;
    }
    prev = lam;
  }
  return std::min(std::sqrt(prev), fro);
}

double max_abs(const cmat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

unsigned thread_count() {
  if (const char* env = std::getenv("DIVEXP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return unsigned(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        if (failed) return;
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace divexp
