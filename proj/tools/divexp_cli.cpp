// divexp command-line front end; talks to the library only through divexp.h.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "divexp/divexp.h"

namespace {

struct RunConfig {
  std::string subcommand;
  std::string model_path;
  double t_start = 0.0, t_stop = 1.0;
  int t_count = 11;
  int order = -1;
  double tol = 1e-10;
  std::string out;
  std::string format = "csv";
  unsigned long long seed = 7;
  std::string method = "auto";

  // subcommand specifics
  int from = 0, to = 1;
  std::string rho_path;
  double T = 0.0;
  bool zero_revisions = false, sin_approx = false;
  int level = -1;
  double t = 1.0;
  int l_max = 8, trials = 1000;
  double min_gap = 1e-3;
  std::string demo_name;
  double v = 0.1, e1 = 0.0, e2 = 1.0;
  std::vector<int> dims{4, 8, 16}, orders{2, 4, 8};
  int state = 0;
};

struct cli_failure {
  int code;
  std::string message;
};

void check(int status) {
  if (status != DX_OK) throw cli_failure{status, dx_last_error()};
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> time_grid(const RunConfig& c) {
  if (c.t_count < 1) throw cli_failure{DX_E_ARGUMENT, "--t-count must be >= 1"};
  std::vector<double> ts(std::size_t(c.t_count));
  for (int k = 0; k < c.t_count; ++k)
    ts[std::size_t(k)] = c.t_count == 1 ? c.t_start : c.t_start + (c.t_stop - c.t_start) * k / (c.t_count - 1);
  return ts;
}

int method_code(const std::string& m) {
  if (m == "auto") return DX_METHOD_AUTO;
  if (m == "tuples") return DX_METHOD_TUPLES;
  if (m == "block") return DX_METHOD_BLOCK;
  throw cli_failure{DX_E_ARGUMENT, "unknown method " + m};
}

struct model_handle {
  dx_model* m = nullptr;
  ~model_handle() { dx_model_free(m); }
};

void load(const RunConfig& c, model_handle& h) {
  if (c.model_path.empty()) throw cli_failure{DX_E_ARGUMENT, "--model is required"};
  check(dx_model_load(c.model_path.c_str(), &h.m));
}

// A table of named columns written as CSV or as a JSON object of arrays.
struct table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  std::string render(const std::string& format) const {
    if (format == "csv") {
      std::string s;
      for (std::size_t k = 0; k < header.size(); ++k) s += (k ? "," : "") + header[k];
      s += '\n';
      for (const auto& r : rows) {
        for (std::size_t k = 0; k < r.size(); ++k) s += (k ? "," : "") + r[k];
        s += '\n';
      }
      return s;
    }
    if (format == "json") {
      nlohmann::ordered_json j = extra;
      auto arr = nlohmann::ordered_json::array();
      for (const auto& r : rows) {
        nlohmann::ordered_json o;
        for (std::size_t k = 0; k < r.size(); ++k) {
          char* end = nullptr;
          const double x = std::strtod(r[k].c_str(), &end);
          if (!r[k].empty() && end && *end == '\0')
            o[header[k]] = x;
          else
            o[header[k]] = r[k];
        }
        arr.push_back(o);
      }
      j["rows"] = arr;
      return j.dump(1) + "\n";
    }
    throw cli_failure{DX_E_ARGUMENT, "unknown format " + format};
  }
};

void emit(const RunConfig& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw cli_failure{DX_E_ARGUMENT, "cannot write " + c.out};
  f << text;
}

int run_propagate(const RunConfig& c) {
  model_handle h;
  load(c, h);
  const int d = dx_model_dim(h.m);
  if (c.state < 0 || c.state >= d) throw cli_failure{DX_E_RANGE, "--state out of range"};
  std::vector<double> psi(std::size_t(2 * d), 0.0);
  psi[std::size_t(2 * c.state)] = 1.0;
  const auto ts = time_grid(c);
  std::vector<double> amps(ts.size() * std::size_t(2 * d)), tails(ts.size());
  int used = 0;
  check(dx_propagate(h.m, psi.data(), ts.data(), int(ts.size()), c.order, c.tol, method_code(c.method), amps.data(),
                     tails.data(), &used));
  table tb;
  tb.header = {"t", "level", "re", "im", "abs2", "tail_bound"};
  tb.extra["order"] = used;
  for (std::size_t k = 0; k < ts.size(); ++k)
    for (int g = 0; g < d; ++g) {
      const double re = amps[k * std::size_t(2 * d) + std::size_t(2 * g)];
      const double im = amps[k * std::size_t(2 * d) + std::size_t(2 * g) + 1];
      tb.rows.push_back({num(ts[k]), std::to_string(g), num(re), num(im), num(re * re + im * im), num(tails[k])});
    }
  emit(c, tb.render(c.format));
  return 0;
}

std::pair<std::vector<double>, std::vector<double>> read_density(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw cli_failure{DX_E_PARSE, "cannot open density table " + path};
  std::vector<double> e, r;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream in(line);
    double a, b;
    if (!(in >> a >> b)) {
      if (e.empty()) continue;  // header row
      throw cli_failure{DX_E_PARSE, "bad density table row: " + line};
    }
    e.push_back(a);
    r.push_back(b);
  }
  return {e, r};
}

int run_transition(const RunConfig& c) {
  model_handle h;
  load(c, h);
  if (!c.rho_path.empty()) {
    const auto [e, r] = read_density(c.rho_path);
    const int flags = (c.zero_revisions ? DX_GOLDEN_ZERO_REVISIONS : 0) | (c.sin_approx ? DX_GOLDEN_SIN_APPROX : 0);
    double ru = 0.0, rd = 0.0;
    check(dx_golden_rule(h.m, c.from, c.to, e.data(), r.data(), int(e.size()), c.T, flags, 0.0, &ru, &rd));
    table tb;
    tb.header = {"from", "to", "T", "rate_usual", "rate_delta"};
    tb.rows.push_back({std::to_string(c.from), std::to_string(c.to), num(c.T), num(ru), num(rd)});
    emit(c, tb.render(c.format));
    return 0;
  }
  const auto ts = time_grid(c);
  std::vector<double> pu(ts.size()), pi(ts.size()), dl(ts.size());
  check(dx_improved_transition(h.m, c.from, c.to, ts.data(), int(ts.size()), pu.data(), pi.data(), dl.data()));
  table tb;
  tb.header = {"t", "p_usual", "p_improved", "delta"};
  for (std::size_t k = 0; k < ts.size(); ++k) tb.rows.push_back({num(ts[k]), num(pu[k]), num(pi[k]), num(dl[k])});
  emit(c, tb.render(c.format));
  return 0;
}

int run_energy(const RunConfig& c) {
  model_handle h;
  load(c, h);
  const int d = dx_model_dim(h.m);
  const int max_order = c.order < 0 ? 4 : c.order;
  const auto du = static_cast<std::size_t>(d);
  std::vector<double> ep(du), g2(du), g3(du), g4(du), g5(du), sh(du);
  check(dx_model_shifted_energies(h.m, ep.data()));
  check(dx_revision_energies(h.m, max_order, g2.data(), g3.data(), g4.data(), g5.data(), sh.data()));
  table tb;
  tb.header = {"level", "e_redivided", "g2", "g3", "g4", "g5", "e_improved"};
  tb.extra["max_order"] = max_order;
  for (int k = 0; k < d; ++k) {
    if (c.level >= 0 && k != c.level) continue;
    const auto u = std::size_t(k);
    tb.rows.push_back({std::to_string(k), num(ep[u]), num(g2[u]), num(g3[u]), num(g4[u]), num(g5[u]), num(sh[u])});
  }
  if (c.level >= d) throw cli_failure{DX_E_RANGE, "--level out of range"};
  emit(c, tb.render(c.format));
  return 0;
}

int run_decompose(const RunConfig& c) {
  model_handle h;
  load(c, h);
  char* s = nullptr;
  check(dx_decompose_json(h.m, c.order < 0 ? 2 : c.order, c.t, &s));
  std::string text = std::string(s) + "\n";
  dx_string_free(s);
  emit(c, text);
  return 0;
}

int run_verify(const RunConfig& c) {
  dx_identity_report r{};
  check(dx_verify_identity(c.l_max, c.trials, c.seed, c.min_gap, &r));
  const double tol = c.tol > 0.0 ? c.tol : 1e-9;
  const bool ok = r.max_below < tol && r.max_top < tol;
  table tb;
  tb.header = {"trials", "l_max", "seed", "max_abs_below", "max_abs_top_minus_1", "max_recurrence_diff", "pass"};
  tb.rows.push_back({std::to_string(r.trials), std::to_string(r.l_max), std::to_string(c.seed), num(r.max_below),
                     num(r.max_top), num(r.max_recurrence_diff), ok ? "true" : "false"});
  emit(c, tb.render(c.format));
  return ok ? 0 : 1;
}

int run_demo(const RunConfig& c) {
  if (c.demo_name != "two-state") throw cli_failure{DX_E_ARGUMENT, "unknown demo " + c.demo_name};
  dx_two_state_report r{};
  check(dx_two_state(c.e1, c.e2, c.v, 0.0, &r));
  table tb;
  tb.header = {"quantity", "exact", "usual", "improved"};
  tb.rows.push_back({"E1", num(r.e1_exact), num(r.e1_usual), num(r.e1_improved)});
  tb.rows.push_back({"E2", num(r.e2_exact), num(r.e2_usual), num(r.e2_improved)});
  tb.rows.push_back({"omega21", num(r.omega_t), num(r.omega), num(r.omega_improved)});
  // Peak transition probability and the worst deviation over t in [0, 100/omega].
  const int n = 2001;
  std::vector<double> ts(n), pe(n), pu(n), pi(n);
  for (int k = 0; k < n; ++k) ts[std::size_t(k)] = 100.0 / r.omega * k / (n - 1);
  check(dx_two_state_transition(c.e1, c.e2, c.v, 0.0, ts.data(), n, pe.data(), pu.data(), pi.data()));
  double du = 0.0, di = 0.0;
  for (int k = 0; k < n; ++k) {
    du = std::max(du, std::abs(pu[std::size_t(k)] - pe[std::size_t(k)]));
    di = std::max(di, std::abs(pi[std::size_t(k)] - pe[std::size_t(k)]));
  }
  tb.rows.push_back({"max_abs_dP", "0", num(du), num(di)});
  emit(c, tb.render(c.format));
  return 0;
}

// Portable uniform in [0, 1) from the 53 high bits.
double uniform(std::mt19937_64& g) { return double(g() >> 11) * 0x1.0p-53; }

std::vector<double> random_model(int d, std::mt19937_64& gen, std::vector<double>& energies) {
  energies.resize(std::size_t(d));
  for (int k = 0; k < d; ++k) energies[std::size_t(k)] = double(k) + 0.5 * uniform(gen);
  std::vector<double> h(std::size_t(2 * d * d), 0.0);
  for (int r = 0; r < d; ++r)
    for (int c = r + 1; c < d; ++c) {
      const double re = 2.0 * uniform(gen) - 1.0, im = 2.0 * uniform(gen) - 1.0;
      h[std::size_t(2 * (r * d + c))] = re;
      h[std::size_t(2 * (r * d + c) + 1)] = im;
      h[std::size_t(2 * (c * d + r))] = re;
      h[std::size_t(2 * (c * d + r) + 1)] = -im;
    }
  return h;
}

int run_bench(const RunConfig& c) {
  std::mt19937_64 gen(c.seed);
  table tb;
  tb.header = {"D", "L", "method", "wall_time_s", "error_vs_oracle", "status"};
  for (int d : c.dims) {
    std::vector<double> e;
    auto h = random_model(d, gen, e);
    // Scale H1 so that |g1| t = 1/2 at the bench time.
    double fro = 0.0;
    for (double x : h) fro += x * x;
    const double s = 0.5 / (std::sqrt(fro) * c.t);
    for (auto& x : h) x *= s;
    model_handle mh;
    check(dx_model_new(d, e.data(), h.data(), &mh.m));
    std::vector<double> exact(std::size_t(2 * d * d));
    check(dx_oracle_eigensolve(mh.m, c.t, exact.data()));
    for (int L : c.orders)
      for (const char* meth : {"tuples", "block"}) {
        std::vector<double> u(std::size_t(2 * d * d), 0.0), term(u.size());
        std::string status = "ok";
        const auto t0 = std::chrono::steady_clock::now();
        // Order 0 from the redivided levels.
        std::vector<double> ep(static_cast<std::size_t>(d));
        check(dx_model_shifted_energies(mh.m, ep.data()));
        for (int k = 0; k < d; ++k) {
          u[std::size_t(2 * (k * d + k))] = std::cos(ep[std::size_t(k)] * c.t);
          u[std::size_t(2 * (k * d + k) + 1)] = -std::sin(ep[std::size_t(k)] * c.t);
        }
        // Highest order first so an over-budget tuple run stops before any work is spent.
        for (int l = L; l >= 1; --l) {
          const int st = dx_series_term(mh.m, l, c.t, method_code(meth), term.data());
          if (st == DX_E_BUDGET) {
            status = "budget_exceeded";
            break;
          }
          check(st);
          for (std::size_t q = 0; q < u.size(); ++q) u[q] += term[q];
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string err;
        if (status == "ok") {
          double sq = 0.0;
          for (std::size_t q = 0; q < u.size(); ++q) sq += (u[q] - exact[q]) * (u[q] - exact[q]);
          err = num(std::sqrt(sq));
        }
        tb.rows.push_back({std::to_string(d), std::to_string(L), meth, num(wall), err, status});
      }
  }
  emit(c, tb.render(c.format));
  return 0;
}

void error_record(int code, const std::string& msg) {
  nlohmann::ordered_json j;
  j["error"] = dx_status_name(code);
  j["code"] = code;
  j["message"] = msg;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"divexp: divided-difference expansion of quantum time evolution"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* s, bool times) {
    s->add_option("--model", cfg.model_path, "model JSON file");
    s->add_option("--out", cfg.out, "output path (default stdout)");
    s->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    if (times) {
      s->add_option("--t-start", cfg.t_start);
      s->add_option("--t-stop", cfg.t_stop);
      s->add_option("--t-count", cfg.t_count)->check(CLI::PositiveNumber);
    }
  };

  auto* prop = app.add_subcommand("propagate", "truncated series evolution of a basis state");
  add_common(prop, true);
  prop->add_option("--order", cfg.order, "order cap L (negative: chosen from --tol)");
  prop->add_option("--tol", cfg.tol)->check(CLI::PositiveNumber);
  prop->add_option("--method", cfg.method)->check(CLI::IsMember({"auto", "tuples", "block"}));
  prop->add_option("--state", cfg.state, "initial basis state");

  auto* tr = app.add_subcommand("transition", "usual and improved transition probabilities or golden-rule rates");
  add_common(tr, true);
  tr->add_option("--from", cfg.from);
  tr->add_option("--to", cfg.to);
  tr->add_option("--rho", cfg.rho_path, "density table (energy,rho) for the golden-rule mode");
  tr->add_option("--T", cfg.T, "golden-rule time");
  tr->add_flag("--zero-revisions", cfg.zero_revisions);
  tr->add_flag("--sin-approx", cfg.sin_approx);

  auto* en = app.add_subcommand("energy", "improved perturbed energies");
  add_common(en, false);
  en->add_option("--order", cfg.order, "highest revision order (2..5, default 4)");
  en->add_option("--level", cfg.level);

  auto* dc = app.add_subcommand("decompose", "contraction pattern pieces of one series order");
  add_common(dc, false);
  dc->add_option("--order", cfg.order, "series order l (2..6)");
  dc->add_option("--t", cfg.t);

  auto* vi = app.add_subcommand("verify-identity", "randomized C_l^K identity suite");
  add_common(vi, false);
  vi->add_option("--l-max", cfg.l_max);
  vi->add_option("--trials", cfg.trials);
  vi->add_option("--seed", cfg.seed);
  vi->add_option("--min-gap", cfg.min_gap);
  cfg.tol = 1e-9;
  vi->add_option("--tol", cfg.tol, "pass threshold");

  auto* demo = app.add_subcommand("demo", "built-in reference systems");
  add_common(demo, false);
  demo->add_option("name", cfg.demo_name)->required();
  demo->add_option("--v", cfg.v, "coupling V12");
  demo->add_option("--e1", cfg.e1);
  demo->add_option("--e2", cfg.e2);

  auto* bench = app.add_subcommand("bench", "timing of both series paths against the eigensolve oracle");
  add_common(bench, false);
  bench->add_option("--dims", cfg.dims)->delimiter(',');
  bench->add_option("--orders", cfg.orders)->delimiter(',');
  bench->add_option("--seed", cfg.seed);
  bench->add_option("--t", cfg.t);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const bool explicit_tol = prop->count("--tol") > 0;
  if (*prop && !explicit_tol) cfg.tol = 1e-10;

  try {
    if (*prop) return run_propagate(cfg);
    if (*tr) return run_transition(cfg);
    if (*en) return run_energy(cfg);
    if (*dc) return run_decompose(cfg);
    if (*vi) return run_verify(cfg);
    if (*demo) return run_demo(cfg);
    if (*bench) return run_bench(cfg);
  } catch (const cli_failure& f) {
    error_record(f.code, f.message);
    return 2;
  }
  return 0;
}
