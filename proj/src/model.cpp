#include "model.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

#include "error.hpp"

namespace divexp {

using nlohmann::json;

cmat SplitHamiltonian::total() const {
  cmat h = perturbation;
  for (int k = 0; k < dim; ++k) h(k, k) += energies[std::size_t(k)];
  return h;
}

SplitHamiltonian make_split(std::vector<double> energies, const cmat& perturbation,
                            std::vector<std::string> labels) {
  const int d = int(energies.size());
  if (d < 1) throw error(errc::validation, "model needs at least one level");
  if (perturbation.rows() != d || perturbation.cols() != d)
    throw error(errc::validation, "h1 must be " + std::to_string(d) + "x" + std::to_string(d));
  if (!labels.empty() && int(labels.size()) != d)
    throw error(errc::validation, "labels length does not match energies");
  for (double e : energies)
    if (!std::isfinite(e)) throw error(errc::validation, "non-finite energy");
  for (Eigen::Index i = 0; i < perturbation.size(); ++i) {
    const cplx z = perturbation.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw error(errc::validation, "non-finite h1 entry");
  }
  const double scale = max_abs(perturbation);
  const double defect = max_abs(perturbation - perturbation.adjoint());
  if (defect > hermiticity_tol * scale) {
    std::ostringstream os;
    os << "h1 is not Hermitian (max |H - H^H| = " << defect << ")";
    throw error(errc::validation, os.str());
  }
  SplitHamiltonian m;
  m.dim = d;
  m.energies = std::move(energies);
  m.perturbation = (perturbation + perturbation.adjoint()) * 0.5;
  m.labels = std::move(labels);
  return m;
}

namespace {

double as_number(const json& v, const char* what) {
  if (!v.is_number()) throw error(errc::parse, std::string(what) + " must be a number");
  return v.get<double>();
}

}  // namespace

SplitHamiltonian load_model(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw error(errc::parse, std::string("model file: ") + e.what());
  }
  if (!doc.is_object()) throw error(errc::parse, "model file must be a JSON object");
  if (!doc.contains("energies") || !doc["energies"].is_array())
    throw error(errc::parse, "missing \"energies\" array");
  if (!doc.contains("h1") || !doc["h1"].is_array()) throw error(errc::parse, "missing \"h1\" array");

  std::vector<double> e;
  for (const auto& v : doc["energies"]) e.push_back(as_number(v, "energy"));
  const auto& rows = doc["h1"];
  const int d = int(e.size());
  if (int(rows.size()) != d) throw error(errc::validation, "h1 row count does not match energies");
  cmat h1(d, d);
  for (int i = 0; i < d; ++i) {
    if (!rows[i].is_array() || int(rows[i].size()) != d)
      throw error(errc::validation, "h1 row " + std::to_string(i) + " has wrong length");
    for (int j = 0; j < d; ++j) {
      const auto& z = rows[i][j];
      if (!z.is_array() || z.size() != 2) throw error(errc::parse, "complex entries are [re, im] pairs");
      h1(i, j) = cplx(as_number(z[0], "h1 entry"), as_number(z[1], "h1 entry"));
    }
  }
  std::vector<std::string> labels;
  if (doc.contains("labels")) {
    if (!doc["labels"].is_array()) throw error(errc::parse, "\"labels\" must be an array");
    for (const auto& s : doc["labels"]) {
      if (!s.is_string()) throw error(errc::parse, "labels must be strings");
      labels.push_back(s.get<std::string>());
    }
  }
  return make_split(std::move(e), h1, std::move(labels));
}

SplitHamiltonian load_model_text(const std::string& text) {
  std::istringstream in(text);
  return load_model(in);
}

std::string dump_model(const SplitHamiltonian& m) {
  nlohmann::ordered_json doc;
  doc["energies"] = m.energies;
  auto rows = nlohmann::ordered_json::array();
  for (int i = 0; i < m.dim; ++i) {
    auto row = nlohmann::ordered_json::array();
    for (int j = 0; j < m.dim; ++j) row.push_back({m.perturbation(i, j).real(), m.perturbation(i, j).imag()});
    rows.push_back(row);
  }
  doc["h1"] = rows;
  if (!m.labels.empty()) doc["labels"] = m.labels;
  return doc.dump();
}

RedividedHamiltonian redivide(const SplitHamiltonian& m) {
  RedividedHamiltonian r;
  r.base = m;
  r.shifted_energies.resize(std::size_t(m.dim));
  r.offdiagonal = m.perturbation;
  for (int k = 0; k < m.dim; ++k) {
    r.shifted_energies[std::size_t(k)] = m.energies[std::size_t(k)] + m.perturbation(k, k).real();
    r.offdiagonal(k, k) = 0.0;
  }
  return r;
}

RedividedHamiltonian unredivided_view(const SplitHamiltonian& m) {
  RedividedHamiltonian r;
  r.base = m;
  r.shifted_energies = m.energies;
  r.offdiagonal = m.perturbation;
  return r;
}

SplitHamiltonian as_split(const RedividedHamiltonian& r) {
  SplitHamiltonian m;
  m.dim = r.dim();
  m.energies = r.shifted_energies;
  m.perturbation = r.offdiagonal;
  m.labels = r.base.labels;
  return m;
}

double energy_scale(const RedividedHamiltonian& r) {
  double s = 0.0;
  for (double e : r.shifted_energies) s = std::max(s, std::abs(e));
  return s > 0.0 ? s : 1.0;
}

double default_gap_tol(const RedividedHamiltonian& r) { return 1e-8 * energy_scale(r); }

void require_nondegenerate(const RedividedHamiltonian& r, double gap_tol) {
  if (!(gap_tol > 0.0)) throw error(errc::argument, "gap_tol must be positive");
  std::ostringstream bad;
  int count = 0;
  const auto& e = r.shifted_energies;
  for (std::size_t a = 0; a < e.size(); ++a)
    for (std::size_t b = a + 1; b < e.size(); ++b)
      if (std::abs(e[a] - e[b]) <= gap_tol) {
        bad << (count++ ? ", " : "") << "(" << a << "," << b << ")";
      }
  if (count > 0) throw error(errc::degenerate, "degenerate level pairs: " + bad.str());
}

void require_nondegenerate(const RedividedHamiltonian& r) { require_nondegenerate(r, default_gap_tol(r)); }

StateVector make_state(const cvec& amplitudes, bool normalize) {
  if (amplitudes.size() == 0) throw error(errc::validation, "empty state");
  const double n = amplitudes.norm();
  if (!std::isfinite(n) || n == 0.0) throw error(errc::validation, "state has zero or non-finite norm");
  if (normalize) return StateVector{amplitudes / n};
  if (std::abs(n - 1.0) > 1e-10) throw error(errc::validation, "state is not normalized");
  return StateVector{amplitudes};
}

StateVector basis_state(int dim, int index) {
  if (index < 0 || index >= dim) throw error(errc::range, "basis index out of range");
  cvec v = cvec::Zero(dim);
  v(index) = 1.0;
  return StateVector{v};
}

}  // namespace divexp
