#pragma once

// JSON documents for algebras, estimates, diagonals and stabilization
// reports, plus the CSV companion for iterates.

#include <complex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "amnm/algebra.hpp"
#include "amnm/diagonal.hpp"
#include "amnm/multilinear.hpp"
#include "amnm/stabilizer.hpp"

namespace amnm {

using json = nlohmann::ordered_json;

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

/// Row-major nested array of [re, im] pairs.
inline json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError("expected a number or a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Vec vec_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("expected an array of scalars");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

inline Mat mat_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConfigError("expected a nested matrix array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) throw ConfigError("ragged matrix array");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

/// {dim, labels, structure, unit, norm_mode, realization?}; structure is
/// nested as structure[i][j][k] = c(i, j, k).
inline json to_json(const Algebra& a) {
  const int n = a.dim();
  json structure = json::array();
  for (int i = 0; i < n; ++i) {
    json si = json::array();
    for (int j = 0; j < n; ++j) {
      json sij = json::array();
      for (int k = 0; k < n; ++k) sij.push_back(to_json(a.c(i, j, k)));
      si.push_back(std::move(sij));
    }
    structure.push_back(std::move(si));
  }
  json out = {{"dim", n},
              {"labels", a.labels()},
              {"structure", std::move(structure)},
              {"unit", to_json(a.unit())},
              {"norm_mode", to_string(a.mode())}};
  if (a.has_realization()) {
    json r = json::array();
    for (int i = 0; i < n; ++i) r.push_back(to_json(a.realize(a.basis(i))));
    out["realization"] = std::move(r);
  }
  if (a.mode() == NormMode::unitization) out["inner"] = to_json(*a.inner());
  return out;
}

inline AlgebraPtr algebra_from_json(const json& j) {
  try {
    const int n = j.at("dim").get<int>();
    if (n < 1) throw ConfigError("algebra dim must be positive");
    AlgebraSpec s;
    if (j.contains("labels")) s.labels = j.at("labels").get<std::vector<std::string>>();
    const json& st = j.at("structure");
    if (!st.is_array() || static_cast<int>(st.size()) != n) throw ConfigError("structure must be dim x dim x dim");
    s.structure.assign(static_cast<std::size_t>(n) * n * n, cplx(0));
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(st[i].size()) != n) throw ConfigError("structure must be dim x dim x dim");
      for (int jj = 0; jj < n; ++jj) {
        if (static_cast<int>(st[i][jj].size()) != n) throw ConfigError("structure must be dim x dim x dim");
        for (int k = 0; k < n; ++k) s.structure[(i * n + jj) * n + k] = complex_from_json(st[i][jj][k]);
      }
    }
    s.unit = vec_from_json(j.at("unit"));
    if (s.unit.size() != n) throw ConfigError("unit has the wrong length");
    s.mode = norm_mode_from_string(j.value("norm_mode", j.contains("realization") ? "spectral" : "frobenius"));
    if (j.contains("realization"))
      for (const auto& m : j.at("realization")) s.realization.push_back(mat_from_json(m));
    if (s.mode == NormMode::unitization) {
      if (!j.contains("inner")) throw ConfigError("unitization norm needs an inner algebra");
      s.inner = algebra_from_json(j.at("inner"));
    }
    return Algebra::create(std::move(s));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("algebra document: ") + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("algebra document: ") + e.what());
  }
}

inline json to_json(const DefectEstimate& e) {
  json w = json::array();
  for (const auto& x : e.witness) w.push_back(to_json(x));
  return {{"lower", e.lower},
          {"upper", e.upper},
          {"witness", std::move(w)},
          {"restarts_used", e.restarts_used},
          {"seed", e.seed}};
}

inline json to_json(const TensorRep& w) {
  json pairs = json::array();
  for (const auto& [c, d] : w.pairs) pairs.push_back(json::array({to_json(c), to_json(d)}));
  return {{"pairs", std::move(pairs)}, {"proj_bound", w.proj_bound()}};
}

inline json to_json(const Interval& i) { return {{"lo", i.lo}, {"hi", i.hi}}; }

inline json to_json(const StabilizeConfig& c) {
  return {{"tol", c.tol},
          {"max_iter", c.max_iter},
          {"L", c.L},
          {"seed", c.seed},
          {"check_paper_bounds", c.check_paper_bounds},
          {"restarts", c.restarts},
          {"sweeps", c.sweeps}};
}

inline json to_json(const IterateRecord& r) {
  return {{"iter", r.iter},
          {"step_norm", to_json(r.step_norm)},
          {"def_da", to_json(r.def_da)},
          {"def_dd", to_json(r.def_dd)},
          {"norm_phi", to_json(r.norm_phi)},
          {"claim_step", r.claim_step},
          {"claim_defect", r.claim_defect},
          {"norm_bound", r.norm_bound},
          {"step_ok", r.step_ok},
          {"defect_ok", r.defect_ok},
          {"norm_ok", r.norm_ok}};
}

inline json to_json(const StabilizeReport& r) {
  json its = json::array();
  for (const auto& it : r.iterates) its.push_back(to_json(it));
  return {{"schema", 1},
          {"config", to_json(r.config)},
          {"K", r.K},
          {"K_note",
           "K is the projective bound of the library diagonal, an upper bound for the amenability constant; "
           "theorem_bound = 12 K^2 L^3 delta0 is therefore an upper envelope"},
          {"delta0", r.delta0},
          {"precondition_value", r.precondition_value},
          {"norm_input", to_json(r.norm_input)},
          {"def_da_input", to_json(r.def_da_input)},
          {"def_ad_input", to_json(r.def_ad_input)},
          {"iterates", std::move(its)},
          {"final_distance", {{"lower", r.total_distance.lo}, {"upper", r.total_distance.hi}}},
          {"theorem_bound", r.theorem_bound},
          {"converged", r.converged},
          {"switch_applied", r.switch_applied},
          {"claims_ok", r.claims_ok},
          {"distance_ok", r.distance_ok},
          {"left_residual", r.left_residual},
          {"right_residual", r.right_residual},
          {"unit_residual", r.unit_residual},
          {"passed", r.passed()},
          {"note", r.note}};
}

/// Shortest round-trip decimal form, matching the JSON output.
inline std::string format_double(double v) { return json(v).dump(); }

inline std::string iterates_csv(const StabilizeReport& r) {
  std::ostringstream os;
  os << "iter,step_norm_lo,step_norm_hi,def_da_lo,def_da_hi,claim_step,claim_defect\n";
  for (const auto& it : r.iterates)
    os << it.iter << ',' << format_double(it.step_norm.lo) << ',' << format_double(it.step_norm.hi) << ','
       << format_double(it.def_da.lo) << ',' << format_double(it.def_da.hi) << ','
       << format_double(it.claim_step) << ',' << format_double(it.claim_defect) << '\n';
  return os.str();
}

}  // namespace amnm
