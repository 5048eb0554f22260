#include <doctest.h>

#include "error.hpp"
#include "model.hpp"
#include "support.hpp"

using namespace divexp;

namespace {

errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return errc::argument;
}

}  // namespace

TEST_CASE("load_model reads the two-state file") {
  const auto m = load_model_text(R"({"energies":[0,1],"h1":[[[0,0],[0.1,0]],[[0.1,0],[0,0]]],"labels":["a","b"]})");
  CHECK(m.dim == 2);
  CHECK(m.energies == std::vector<double>{0.0, 1.0});
  CHECK(m.perturbation(0, 1) == cplx(0.1, 0.0));
  CHECK(m.labels[1] == "b");
}

TEST_CASE("zero perturbation is a valid model") {
  const auto m = load_model_text(R"({"energies":[0,2,3],"h1":[[[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0]]]})");
  CHECK(m.perturbation.isZero(0.0));
}

TEST_CASE("load_model rejects bad input") {
  CHECK(code_of([] { load_model_text(R"({"energies":[0,1],"h1":[[[0,0],[0.1,0]],[[0.2,0],[0,0]]]})"); }) ==
        errc::validation);
  CHECK(code_of([] { load_model_text("{not json"); }) == errc::parse);
  CHECK(code_of([] { load_model_text(R"({"energies":[0,1]})"); }) == errc::parse);
  CHECK(code_of([] { load_model_text(R"({"energies":[0,1],"h1":[[[0,0]]]})"); }) == errc::validation);
  CHECK(code_of([] { load_model_text(R"({"energies":[0],"h1":[[[0]]]})"); }) == errc::parse);
  CHECK(code_of([] { make_split({0.0, NAN}, cmat::Zero(2, 2)); }) == errc::validation);
  CHECK(code_of([] { make_split({}, cmat::Zero(0, 0)); }) == errc::validation);
}

TEST_CASE("Hermiticity defect inside tolerance is symmetrized") {
  cmat h = cmat::Zero(2, 2);
  h(0, 1) = 0.1;
  h(1, 0) = 0.1 + 1e-14;
  const auto m = make_split({0.0, 1.0}, h);
  CHECK(m.perturbation(0, 1) == std::conj(m.perturbation(1, 0)));
}

TEST_CASE("dump and load round-trip exactly") {
  testing::rng r(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = testing::random_split(r, 1 + trial % 6, 0.1, 1.0, 2.0);
    const auto back = load_model_text(dump_model(m));
    CHECK(back.energies == m.energies);
    CHECK(back.perturbation == m.perturbation);
  }
}

TEST_CASE("redivide worked example") {
  cmat h(2, 2);
  h << 0.3, 0.1, 0.1, -0.3;
  const auto r = redivide(make_split({0.0, 1.0}, h));
  CHECK(r.shifted_energies[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(r.shifted_energies[1] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(r.offdiagonal(0, 0) == 0.0);
  CHECK(r.offdiagonal(1, 1) == 0.0);
  CHECK(r.offdiagonal(0, 1) == cplx(0.1));
}

TEST_CASE("redivide fixed points") {
  testing::rng r(22);
  const auto off = testing::random_split(r, 4, 0.1, 1.0, 1.0, false);
  const auto a = redivide(off);
  CHECK(a.shifted_energies == off.energies);
  CHECK(a.offdiagonal == off.perturbation);

  cmat diag = cmat::Zero(3, 3);
  diag.diagonal() << 0.5, -0.25, 1.0;
  const auto b = redivide(make_split({0.0, 1.0, 2.0}, diag));
  CHECK(b.offdiagonal.isZero(0.0));
  CHECK(b.shifted_energies == std::vector<double>{0.5, 0.75, 3.0});
}

TEST_CASE("property: redivision reconstructs H and is idempotent") {
  testing::rng r(23);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 7;
    const auto m = testing::random_split(r, d, 0.0, 2.0, r.uniform(0.1, 5.0));
    const auto red = redivide(m);
    cmat rebuilt = red.offdiagonal;
    for (int k = 0; k < d; ++k) rebuilt(k, k) += red.shifted_energies[std::size_t(k)];
    // Diagonal sums E + h round identically on both sides; off-diagonals are copies.
    cmat total = m.total();
    for (int k = 0; k < d; ++k) total(k, k) = m.energies[std::size_t(k)] + m.perturbation(k, k).real();
    CHECK(rebuilt == total);
    const auto again = redivide(as_split(red));
    CHECK(again.shifted_energies == red.shifted_energies);
    CHECK(again.offdiagonal == red.offdiagonal);
  }
}

TEST_CASE("require_nondegenerate") {
  auto with = [](std::vector<double> e) { return redivide(make_split(std::move(e), cmat::Zero(2, 2))); };
  CHECK_NOTHROW(require_nondegenerate(with({0.0, 1.0}), 1e-6));
  try {
    require_nondegenerate(with({0.5, 0.5}));
    FAIL("expected degeneracy");
  } catch (const error& e) {
    CHECK(e.code() == errc::degenerate);
    CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
  }
  CHECK(code_of([&] { require_nondegenerate(with({0.0, 1e-9}), 1e-6); }) == errc::degenerate);
  CHECK(code_of([&] { require_nondegenerate(with({0.0, 1.0}), 0.0); }) == errc::argument);
}

TEST_CASE("state vectors") {
  cvec v(2);
  v << 3.0, 4.0;
  CHECK(code_of([&] { make_state(v); }) == errc::validation);
  CHECK(make_state(v, true).amplitudes.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(basis_state(3, 2).amplitudes(2) == cplx(1.0));
  CHECK(code_of([] { basis_state(3, 3); }) == errc::range);
}
