#pragma once

// The improving operator F(phi) = phi + Sigma^1_phi(phi^v), its iteration to
// a one-sided modular map, the opposite-algebra switch that removes the
// other one-sided defect, the unitization route for maps that do not
// preserve the unit, and decomposition over an ideal.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "amnm/algebra.hpp"
#include "amnm/diagonal.hpp"
#include "amnm/multilinear.hpp"

namespace amnm {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

inline Interval to_interval(const DefectEstimate& e) { return {e.lower, e.upper}; }

inline double coefficient_scale(const Mat& m) {
  return std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
}

/// ||phi(1_D) - 1_B||_B.
inline double unit_residual(const LinearMap& phi, const Subalgebra& d) {
  return phi.target->norm(phi.matrix * d.unit_in_ambient() - phi.target->unit());
}

/// max over basis x in D, a in A of ||phi(x a) - phi(x) phi(a)|| (left) or
/// ||phi(a x) - phi(a) phi(x)|| (right), relative to the coefficient scale.
inline double modular_residual(const LinearMap& phi, const Subalgebra& d, bool right) {
  const Algebra& a = *phi.source;
  const Algebra& b = *phi.target;
  double worst = 0.0;
  for (int i = 0; i < d.algebra->dim(); ++i) {
    const Vec x = d.embedding.col(i);
    const Vec px = phi.matrix * x;
    for (int j = 0; j < a.dim(); ++j) {
      const Vec y = a.basis(j);
      const Vec prod = right ? a.multiply(y, x) : a.multiply(x, y);
      const Vec py = phi.matrix.col(j);
      const Vec r = phi.matrix * prod - (right ? b.multiply(py, px) : b.multiply(px, py));
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
  }
  const double s = coefficient_scale(phi.matrix);
  return worst / (s * s);
}

inline double left_modular_residual(const LinearMap& phi, const Subalgebra& d) {
  return modular_residual(phi, d, false);
}
inline double right_modular_residual(const LinearMap& phi, const Subalgebra& d) {
  return modular_residual(phi, d, true);
}

inline void require_unit_preserving(const LinearMap& phi, const Subalgebra& d) {
  const double r = unit_residual(phi, d);
  if (r > 1e-9 * std::max(1.0, phi.target->norm(phi.target->unit())))
    throw PreconditionError("improve: phi(1_D) differs from 1_B by " + std::to_string(r));
}

/// Sigma^1_phi(phi^v) as a linear map A -> B.
inline LinearMap improvement_step(const LinearMap& phi, const Subalgebra& d, const DiagonalCert& cert) {
  return as_linear_map(split(1, phi, d, cert, check_map(phi)));
}

/// F(phi) = phi + Sigma^1_phi(phi^v).
inline LinearMap improve(const LinearMap& phi, const Subalgebra& d, const DiagonalCert& cert) {
  require_unit_preserving(phi, d);
  return phi + improvement_step(phi, d, cert);
}

struct ImproveReport {
  LinearMap next;
  double unit_residual = 0.0;
  double K = 0.0;
  Interval norm_phi{}, step_norm{}, def_da{}, def_dd{}, def_da_next{};
  double step_bound = 0.0;    // K ||phi|| def_DA(phi)
  double defect_bound = 0.0;  // 3 K^2 ||phi||^2 def_DD(phi) def_DA(phi)
  bool unital_ok = false, step_ok = false, defect_ok = false;
  bool right_modular_in = false, right_modular_out = false;
  double right_residual_out = 0.0;
};

/// Applies F once and checks the four improving properties.
inline ImproveReport improve_report(const LinearMap& phi, const Subalgebra& d, const DiagonalCert& cert,
                                    const NormBudget& budget = {}) {
  ImproveReport r{improve(phi, d, cert)};
  r.K = cert.K;
  r.unit_residual = unit_residual(r.next, d);
  r.unital_ok = r.unit_residual <= 1e-9 * std::max(1.0, phi.target->norm(phi.target->unit()));
  r.norm_phi = to_interval(linear_map_norm(phi, budget));
  r.step_norm = to_interval(linear_map_norm(r.next - phi, budget));
  r.def_da = to_interval(defect(phi, &d, nullptr, budget));
  r.def_dd = to_interval(defect(phi, &d, &d, budget));
  r.def_da_next = to_interval(defect(r.next, &d, nullptr, budget));
  r.step_bound = r.K * r.norm_phi.hi * r.def_da.hi;
  r.defect_bound = 3.0 * r.K * r.K * r.norm_phi.hi * r.norm_phi.hi * r.def_dd.hi * r.def_da.hi;
  r.step_ok = r.step_norm.lo <= r.step_bound;
  r.defect_ok = r.def_da_next.lo <= r.defect_bound;
  r.right_modular_in = right_modular_residual(phi, d) <= 1e-10;
  r.right_residual_out = right_modular_residual(r.next, d);
  r.right_modular_out = r.right_residual_out <= 1e-10;
  return r;
}

// ---------------------------------------------------------------------------
// Switches and unitization

/// The same matrix regarded as a map A^op -> B^op.  Applying it twice
/// returns the original algebras.
inline LinearMap opposite_switch(const LinearMap& phi) {
  return {opposite(phi.source), opposite(phi.target), phi.matrix};
}

/// psi#(lambda, a) = lambda 1_B + psi(a) on the forced unitization of A.
inline LinearMap unitize_map(const LinearMap& psi, AlgebraPtr source_unitized = nullptr) {
  if (!source_unitized) source_unitized = unitize(psi.source);
  if (source_unitized->dim() != psi.source->dim() + 1)
    throw std::domain_error("unitize_map: source is not the unitization of psi's source");
  Mat m(psi.target->dim(), psi.source->dim() + 1);
  m.col(0) = psi.target->unit();
  m.rightCols(psi.source->dim()) = psi.matrix;
  return {std::move(source_unitized), psi.target, std::move(m)};
}

// ---------------------------------------------------------------------------
// Stabilization

struct StabilizeConfig {
  double tol = 1e-10;
  int max_iter = 50;
  double L = 1.0;
  std::uint64_t seed = 0;
  bool check_paper_bounds = true;
  int restarts = 32;
  int sweeps = 200;

  NormBudget budget() const { return {restarts, sweeps, seed}; }
};

struct IterateRecord {
  int iter = 0;
  Interval step_norm, def_da, def_dd, norm_phi;
  double claim_step = 0.0;    // K L delta 2^{-(n-1)}
  double claim_defect = 0.0;  // 3 delta 2^{-2n-1}
  double norm_bound = 0.0;    // 5L/4
  bool step_ok = true, defect_ok = true, norm_ok = true;
};

struct StabilizeReport {
  StabilizeConfig config;
  double K = 0.0;
  Interval norm_input, def_da_input, def_ad_input;
  double delta0 = 0.0;
  double precondition_value = 0.0;  // K^2 L^2 delta0
  std::vector<IterateRecord> iterates;
  std::optional<LinearMap> final_map;
  Interval total_distance;
  double theorem_bound = 0.0;  // 12 K^2 L^3 delta0
  bool converged = false;
  bool switch_applied = false;
  bool claims_ok = true;
  bool distance_ok = true;
  double left_residual = 0.0;
  double right_residual = 0.0;
  double unit_residual = 0.0;
  bool modular_ok = false;
  std::string note;

  bool passed() const {
    return converged && switch_applied && modular_ok &&
           (!config.check_paper_bounds || (claims_ok && distance_ok));
  }
};

/// Iterates F until def_{DxA} (lower estimate) <= tol, then switches to the
/// opposite algebras, applies F' once and switches back.
inline StabilizeReport stabilize(const LinearMap& phi, const Subalgebra& d, const DiagonalCert& cert,
                                 const StabilizeConfig& config) {
  if (!(config.tol > 0.0) || config.max_iter < 1 || config.L < 1.0)
    throw ConfigError("stabilize: need tol > 0, max_iter >= 1 and L >= 1");
  if (!cert.valid) throw PreconditionError("stabilize: diagonal certificate is not valid");
  require_unit_preserving(phi, d);

  const NormBudget budget = config.budget();
  StabilizeReport rep;
  rep.config = config;
  rep.K = cert.K;
  rep.norm_input = to_interval(linear_map_norm(phi, budget));
  rep.def_da_input = to_interval(defect(phi, &d, nullptr, budget));
  rep.def_ad_input = to_interval(defect(phi, nullptr, &d, budget));
  rep.delta0 = std::max(rep.def_da_input.hi, rep.def_ad_input.hi);
  const double K = rep.K, L = config.L, delta = rep.delta0;
  rep.precondition_value = K * K * L * L * delta;
  rep.theorem_bound = 12.0 * K * K * L * L * L * delta;
  if (config.check_paper_bounds) {
    if (rep.precondition_value > 0.125) {
      std::ostringstream os;
      os << "precondition K^2 L^2 delta0 <= 1/8 violated: " << rep.precondition_value;
      throw PreconditionError(os.str());
    }
    if (rep.norm_input.lo > L) {
      std::ostringstream os;
      os << "precondition ||phi|| <= L violated: " << rep.norm_input.lo << " > " << L;
      throw PreconditionError(os.str());
    }
  }

  LinearMap cur = phi;
  Interval def_da = rep.def_da_input;
  rep.converged = def_da.lo <= config.tol;
  for (int n = 1; n <= config.max_iter && !rep.converged; ++n) {
    LinearMap next = improve(cur, d, cert);
    IterateRecord it;
    it.iter = n;
    it.step_norm = to_interval(linear_map_norm(next - cur, budget));
    it.def_da = to_interval(defect(next, &d, nullptr, budget));
    it.def_dd = to_interval(defect(next, &d, &d, budget));
    it.norm_phi = to_interval(linear_map_norm(next, budget));
    it.claim_step = K * L * delta * std::ldexp(1.0, -(n - 1));
    it.claim_defect = 3.0 * delta * std::ldexp(1.0, -2 * n - 1);
    it.norm_bound = 1.25 * L;
    it.step_ok = it.step_norm.lo <= it.claim_step;
    it.defect_ok = it.def_da.lo <= it.claim_defect;
    it.norm_ok = it.norm_phi.lo <= it.norm_bound;
    rep.claims_ok = rep.claims_ok && it.step_ok && it.defect_ok && it.norm_ok;
    rep.iterates.push_back(it);
    cur = std::move(next);
    rep.converged = it.def_da.lo <= config.tol;
  }
  if (!rep.converged) {
    rep.note = "max_iter reached before def_DA <= tol";
    rep.final_map = cur;
    return rep;
  }

  // Left-right switch: on the opposite algebras the flipped diagonal is a
  // diagonal for D^op, and one application of F' removes the remaining defect.
  const LinearMap phi_op = opposite_switch(cur);
  const Subalgebra d_op = opposite_subalgebra(d, phi_op.source);
  const DiagonalCert cert_op = verify_diagonal(d_op.algebra, flip(cert.rep, d_op.algebra));
  if (!cert_op.valid) throw std::logic_error("flipped diagonal failed verification");
  const LinearMap psi = opposite_switch(improve(phi_op, d_op, cert_op));
  rep.switch_applied = true;

  rep.final_map = psi;
  rep.total_distance = to_interval(linear_map_norm(psi - phi, budget));
  rep.left_residual = left_modular_residual(psi, d);
  rep.right_residual = right_modular_residual(psi, d);
  rep.unit_residual = unit_residual(psi, d);
  rep.modular_ok = rep.left_residual <= 1e-8 && rep.right_residual <= 1e-8 &&
                   rep.unit_residual <= 1e-8 * std::max(1.0, phi.target->norm(phi.target->unit()));
  rep.distance_ok = rep.total_distance.lo <= rep.theorem_bound;
  return rep;
}

struct UnitizedStabilizeResult {
  Subalgebra d;  // unitization of D0 inside A#
  DiagonalCert cert;
  StabilizeReport report;
  std::optional<LinearMap> theta;  // restriction of the final map to A
};

/// Route for maps that need not preserve any unit: pass to psi# on A# with
/// D = D0#, stabilize there, and restrict the result back to A.
inline UnitizedStabilizeResult stabilize_unitized(const LinearMap& psi, const Subalgebra& d0,
                                                  const StabilizeConfig& config) {
  if (!same_algebra(*d0.ambient, *psi.source))
    throw std::domain_error("stabilize_unitized: D0 does not live in psi's source");
  const AlgebraPtr a_sharp = unitize(psi.source);
  const LinearMap psi_sharp = unitize_map(psi, a_sharp);
  Subalgebra d = unitize_subalgebra(d0, a_sharp);
  DiagonalCert cert = library_diagonal(d.algebra);
  UnitizedStabilizeResult out{d, cert, stabilize(psi_sharp, d, cert, config), std::nullopt};
  if (out.report.final_map) {
    const Mat& m = out.report.final_map->matrix;
    out.theta = LinearMap(psi.source, psi.target, m.rightCols(psi.source->dim()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decomposition over an ideal

/// A two-sided ideal J of A (spanned by the columns of `span`, in A
/// coordinates) with a two-sided identity e for J.  An empty span is the
/// zero ideal.
struct IdealData {
  AlgebraPtr ambient;
  Mat span;
  Vec e;

  double bound() const { return ambient->norm(e); }
};

inline void validate_ideal(const IdealData& j) {
  const Algebra& a = *j.ambient;
  if (j.span.rows() != a.dim() || j.e.size() != a.dim())
    throw std::domain_error("ideal data has wrong shape");
  const double tol = 1e-9 * coefficient_scale(j.span) * std::max(1.0, coefficient_scale(j.e));
  if (j.span.cols() == 0) {
    if (j.e.cwiseAbs().maxCoeff() > tol) throw PreconditionError("ideal: zero ideal needs e = 0");
    return;
  }
  const auto qr = j.span.colPivHouseholderQr();
  auto in_span = [&](const Vec& v) {
    const Vec c = qr.solve(v);
    return (j.span * c - v).cwiseAbs().maxCoeff() <= tol;
  };
  if (!in_span(j.e)) throw PreconditionError("ideal: e is not in J");
  for (int i = 0; i < a.dim(); ++i)
    for (Eigen::Index k = 0; k < j.span.cols(); ++k) {
      const Vec x = j.span.col(k);
      if (!in_span(a.multiply(a.basis(i), x)) || !in_span(a.multiply(x, a.basis(i))))
        throw PreconditionError("ideal: J is not a two-sided ideal");
    }
  for (Eigen::Index k = 0; k < j.span.cols(); ++k) {
    const Vec x = j.span.col(k);
    if ((a.multiply(j.e, x) - x).cwiseAbs().maxCoeff() > tol ||
        (a.multiply(x, j.e) - x).cwiseAbs().maxCoeff() > tol)
      throw PreconditionError("ideal: e is not an identity for J");
  }
}

struct Decomposition {
  LinearMap phi;
  LinearMap theta_s;
  Vec p;
  double multiplicative_residual = 0.0;  // max |phi^v| on basis pairs
  double vanishing_residual = 0.0;       // max |theta_s| on J
  double defect_difference = 0.0;        // max |theta_s^v - theta^v|
  bool certified = false;
};

/// theta = phi + theta_s with phi = p theta a homomorphism, p = theta(e),
/// theta_s = 0 on J and theta_s^v = theta^v.
inline Decomposition decompose_over_ideal(const LinearMap& theta, const IdealData& ideal) {
  validate_ideal(ideal);
  const Algebra& a = *theta.source;
  const Algebra& b = *theta.target;
  const double s = coefficient_scale(theta.matrix);
  const double tol = 1e-9 * s * s * std::max(1.0, coefficient_scale(ideal.span));
  for (Eigen::Index k = 0; k < ideal.span.cols(); ++k) {
    const Vec x = ideal.span.col(k);
    const Vec tx = theta.matrix * x;
    for (int i = 0; i < a.dim(); ++i) {
      const Vec ta = theta.matrix.col(i);
      const double r1 = (theta.matrix * a.multiply(a.basis(i), x) - b.multiply(ta, tx)).cwiseAbs().maxCoeff();
      const double r2 = (theta.matrix * a.multiply(x, a.basis(i)) - b.multiply(tx, ta)).cwiseAbs().maxCoeff();
      if (r1 > tol || r2 > tol) {
        std::ostringstream os;
        os << "decompose: theta is not J-self-modular at (" << a.labels()[i] << ", J basis " << k
           << "), residual " << std::max(r1, r2);
        throw PreconditionError(os.str());
      }
    }
  }
  const Vec p = theta.matrix * ideal.e;
  LinearMap phi(theta.source, theta.target, b.left_matrix(p) * theta.matrix);
  LinearMap theta_s = theta - phi;
  Decomposition out{phi, theta_s, p};
  const double scale = std::max(1.0, s * s);
  out.multiplicative_residual = check_map(phi).max_abs() / scale;
  out.vanishing_residual =
      ideal.span.cols() ? (theta_s.matrix * ideal.span).cwiseAbs().maxCoeff() / s : 0.0;
  out.defect_difference = relative_difference(check_map(theta_s), check_map(theta));
  out.certified = out.multiplicative_residual <= 1e-9 && out.vanishing_residual <= 1e-9 &&
                  out.defect_difference <= 1e-9;
  return out;
}

}  // namespace amnm
