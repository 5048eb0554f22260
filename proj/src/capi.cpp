#include "divexp/divexp.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "coeff.hpp"
#include "contraction.hpp"
#include "error.hpp"
#include "improved.hpp"
#include "model.hpp"
#include "propagator.hpp"
#include "reference.hpp"

struct dx_model {
  divexp::SplitHamiltonian split;
  divexp::RedividedHamiltonian red;
};

namespace {

using namespace divexp;

thread_local std::string last_error;

int fail(int code, const char* msg) {
  last_error = msg;
  return code;
}

template <class F>
int guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return DX_OK;
  } catch (const divexp::error& e) {
    return fail(int(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(DX_E_BUDGET, "out of memory");
  } catch (const std::exception& e) {
    return fail(DX_E_INTERNAL, e.what());
  }
}

void need(const void* p, const char* what) {
  if (!p) throw error(errc::argument, std::string(what) + " is null");
}

method to_method(int m) {
  switch (m) {
    case DX_METHOD_AUTO: return method::automatic;
    case DX_METHOD_TUPLES: return method::tuples;
    case DX_METHOD_BLOCK: return method::block;
  }
  throw error(errc::argument, "unknown method");
}

cvec read_vec(const double* p, int n) {
  cvec v(n);
  for (int k = 0; k < n; ++k) v(k) = cplx(p[2 * k], p[2 * k + 1]);
  return v;
}

void write_vec(const cvec& v, double* p) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    p[2 * k] = v(k).real();
    p[2 * k + 1] = v(k).imag();
  }
}

void write_mat(const cmat& a, double* p) {
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      p[2 * (r * a.cols() + c)] = a(r, c).real();
      p[2 * (r * a.cols() + c) + 1] = a(r, c).imag();
    }
}

std::vector<double> read_times(const double* times, int n) {
  if (n < 1) throw error(errc::argument, "need at least one time");
  need(times, "times");
  return std::vector<double>(times, times + n);
}

char* dup(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

dx_model* wrap(SplitHamiltonian s) {
  auto* m = new dx_model;
  m->red = redivide(s);
  m->split = std::move(s);
  return m;
}

nlohmann::json mat_json(const cmat& a) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back({a(r, c).real(), a(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

extern "C" {

const char* dx_last_error(void) { return last_error.c_str(); }

const char* dx_status_name(int status) {
  switch (status) {
    case DX_OK: return "ok";
    case DX_E_PARSE: return "parse";
    case DX_E_VALIDATION: return "validation";
    case DX_E_DEGENERATE: return "degenerate";
    case DX_E_SINGULAR: return "singular";
    case DX_E_BUDGET: return "budget";
    case DX_E_CONVERGENCE: return "convergence";
    case DX_E_RANGE: return "range";
    case DX_E_ARGUMENT: return "argument";
  }
  return "internal";
}

void dx_string_free(char* s) { delete[] s; }

int dx_model_from_json(const char* text, dx_model** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = wrap(load_model_text(text));
  });
}

int dx_model_load(const char* path, dx_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path);
    if (!in) throw error(errc::parse, std::string("cannot open model file ") + path);
    *out = wrap(load_model(in));
  });
}

int dx_model_new(int dim, const double* energies, const double* h1, dx_model** out) {
  return guarded([&] {
    need(energies, "energies");
    need(h1, "h1");
    need(out, "out");
    if (dim < 1) throw error(errc::validation, "dimension must be >= 1");
    cmat h(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) h(r, c) = cplx(h1[2 * (r * dim + c)], h1[2 * (r * dim + c) + 1]);
    *out = wrap(make_split(std::vector<double>(energies, energies + dim), h));
  });
}

void dx_model_free(dx_model* m) { delete m; }

int dx_model_dim(const dx_model* m) { return m ? m->split.dim : 0; }

int dx_model_to_json(const dx_model* m, char** out) {
  return guarded([&] {
    need(m, "model");
    need(out, "out");
    *out = dup(dump_model(m->split));
  });
}

int dx_model_shifted_energies(const dx_model* m, double* out) {
  return guarded([&] {
    need(m, "model");
    need(out, "out");
    std::copy(m->red.shifted_energies.begin(), m->red.shifted_energies.end(), out);
  });
}

int dx_propagate(const dx_model* m, const double* psi0, const double* times, int n_times, int order, double tol,
                 int meth, double* amps, double* tails, int* order_used) {
  return guarded([&] {
    need(m, "model");
    need(psi0, "psi0");
    need(amps, "amps");
    const int d = m->split.dim;
    const auto ts = read_times(times, n_times);
    const auto r = evolve(m->red, make_state(read_vec(psi0, d)), ts, order, tol, to_method(meth));
    for (int k = 0; k < n_times; ++k) {
      write_vec(r.amplitudes[std::size_t(k)], amps + 2 * d * k);
      if (tails) tails[k] = r.tail_bounds[std::size_t(k)];
    }
    if (order_used) *order_used = r.order_cap;
  });
}

int dx_series_term(const dx_model* m, int l, double t, int meth, double* out) {
  return guarded([&] {
    need(m, "model");
    need(out, "out");
    write_mat(series_term(m->red, l, t, to_method(meth)).matrix, out);
  });
}

int dx_tail_bound(const dx_model* m, int order, double t, double* out) {
  return guarded([&] {
    need(m, "model");
    need(out, "out");
    *out = tail_bound(spectral_norm(m->red.offdiagonal), order, t);
  });
}

int dx_oracle_eigensolve(const dx_model* m, double t, double* out) {
  return guarded([&] {
    need(m, "model");
    need(out, "out");
    write_mat(oracle_eigensolve(m->split, t), out);
  });
}

int dx_oracle_block_order(const dx_model* m, int l, double t, double* out) {
  return guarded([&] {
    need(m, "model");
    need(out, "out");
    write_mat(oracle_block_order(m->red, l, t), out);
  });
}

int dx_oracle_dyson_order(const dx_model* m, int l, double t, double quad_tol, double* out) {
  return guarded([&] {
    need(m, "model");
    need(out, "out");
    write_mat(oracle_dyson_order(m->red, l, t, quad_tol), out);
  });
}

int dx_revision_energies(const dx_model* m, int max_order, double* g2, double* g3, double* g4, double* g5,
                         double* shifted) {
  return guarded([&] {
    need(m, "model");
    const auto r = revision_energies(m->red, max_order);
    auto put = [](const std::vector<double>& v, double* p) {
      if (p) std::copy(v.begin(), v.end(), p);
    };
    put(r.g2, g2);
    put(r.g3, g3);
    put(r.g4, g4);
    put(r.g5, g5);
    put(r.shifted, shifted);
  });
}

int dx_improved_energy(const dx_model* m, int level, int max_order, double* out) {
  return guarded([&] {
    need(m, "model");
    need(out, "out");
    *out = improved_energy(m->split, level, max_order);
  });
}

int dx_improved_solution(const dx_model* m, const double* psi0, const double* times, int n_times, int order,
                         double* amps) {
  return guarded([&] {
    need(m, "model");
    need(psi0, "psi0");
    need(amps, "amps");
    const int d = m->split.dim;
    const auto s = improved_solution(m->red, make_state(read_vec(psi0, d)), read_times(times, n_times), order);
    for (int k = 0; k < n_times; ++k) write_vec(s.amplitudes[std::size_t(k)], amps + 2 * d * k);
  });
}

int dx_improved_transition(const dx_model* m, int from, int to, const double* times, int n_times, double* p_usual,
                           double* p_improved, double* delta) {
  return guarded([&] {
    need(m, "model");
    const auto r = improved_transition(m->red, from, to, read_times(times, n_times));
    if (p_usual) std::copy(r.p_usual.begin(), r.p_usual.end(), p_usual);
    if (p_improved) std::copy(r.p_improved.begin(), r.p_improved.end(), p_improved);
    if (delta) std::copy(r.delta.begin(), r.delta.end(), delta);
  });
}

int dx_golden_rule(const dx_model* m, int from, int to, const double* energy, const double* rho, int n, double T,
                   int flags, double rel_tol, double* rate_usual, double* rate_delta) {
  return guarded([&] {
    need(m, "model");
    need(energy, "energy");
    need(rho, "rho");
    if (n < 1) throw error(errc::argument, "empty density table");
    DensityTable tab{std::vector<double>(energy, energy + n), std::vector<double>(rho, rho + n)};
    GoldenRuleOptions opt;
    opt.zero_revisions = flags & DX_GOLDEN_ZERO_REVISIONS;
    opt.sin_approx = flags & DX_GOLDEN_SIN_APPROX;
    if (rel_tol > 0.0) opt.rel_tol = rel_tol;
    const auto r = revised_golden_rule(m->red, from, to, tab, T, opt);
    if (rate_usual) *rate_usual = r.rate_usual;
    if (rate_delta) *rate_delta = r.rate_delta;
  });
}

int dx_decompose_json(const dx_model* m, int l, double t, char** out) {
  return guarded([&] {
    need(m, "model");
    need(out, "out");
    const auto pieces = pattern_pieces(m->red, l, t);
    const cmat st = series_term(m->red, l, t).matrix;
    cmat sum = cmat::Zero(st.rows(), st.cols());
    nlohmann::json j;
    j["order"] = l;
    j["t"] = t;
    j["pattern_count"] = pieces.size();
    auto arr = nlohmann::json::array();
    for (const auto& p : pieces) {
      sum += p.matrix;
      arr.push_back({{"pattern", p.pattern.name()},
                     {"blocks", p.pattern.blocks},
                     {"diag_class", to_string(p.dclass)},
                     {"matrix", mat_json(p.matrix)}});
    }
    j["pieces"] = arr;
    j["series_term"] = mat_json(st);
    j["residual"] = (sum - st).norm();
    *out = dup(j.dump(1));
  });
}

int dx_verify_identity(int l_max, int trials, unsigned long long seed, double min_gap, dx_identity_report* out) {
  return guarded([&] {
    need(out, "out");
    const auto r = identity_suite(l_max, trials, seed, min_gap);
    *out = dx_identity_report{r.trials, r.l_max, r.max_below, r.max_top, r.max_recurrence_diff};
  });
}

int dx_two_state(double e1, double e2, double v_re, double v_im, dx_two_state_report* out) {
  return guarded([&] {
    need(out, "out");
    const auto ts = make_two_state(e1, e2, cplx(v_re, v_im));
    const auto u = usual_pt_quantities(ts);
    const auto model = two_state_model(ts);
    out->omega = ts.omega;
    out->omega_t = ts.omegaT;
    out->e1_exact = ts.eigvals[0];
    out->e2_exact = ts.eigvals[1];
    out->e1_usual = u.e1p;
    out->e2_usual = u.e2p;
    out->e1_improved = improved_energy(model, 0, 4);
    out->e2_improved = improved_energy(model, 1, 4);
    out->omega_improved = out->e2_improved - out->e1_improved;
  });
}

int dx_two_state_transition(double e1, double e2, double v_re, double v_im, const double* times, int n_times,
                            double* p_exact, double* p_usual, double* p_improved) {
  return guarded([&] {
    const auto ts = make_two_state(e1, e2, cplx(v_re, v_im));
    const auto tv = read_times(times, n_times);
    const auto u = usual_pt_quantities(ts);
    const auto imp = improved_transition(redivide(two_state_model(ts)), 0, 1, tv);
    for (int k = 0; k < n_times; ++k) {
      if (p_exact) p_exact[k] = exact_transition(ts, tv[std::size_t(k)]);
      if (p_usual) p_usual[k] = u.p(tv[std::size_t(k)]);
      if (p_improved) p_improved[k] = imp.p_improved[std::size_t(k)];
    }
  });
}

}  // extern "C"
