#pragma once

// Checkers for the elementary quantitative lemmas on approximately
// multiplicative maps.  Every checker refuses (PreconditionError) when its
// hypotheses fail and otherwise returns the compared quantities: the left
// side as a certified interval, the right side as computed from upper
// estimates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "amnm/algebra.hpp"
#include "amnm/multilinear.hpp"
#include "amnm/stabilizer.hpp"

namespace amnm {

struct Certificate {
  Interval lhs;
  Interval rhs;
  bool passed = false;
  std::string detail;
};

/// No-falsification comparison with a relative rounding allowance of 1e-12.
inline bool not_falsified(const Interval& lhs, const Interval& rhs) {
  return lhs.lo <= rhs.hi + 1e-12 * std::max(1.0, std::abs(rhs.hi));
}

inline Interval point(double v) { return {v, v}; }

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Defect upper estimate must not exceed eta (absolute slack 1e-12).
inline void require_eta(const LinearMap& psi, double eta) {
  require(eta >= 0.0, "eta must be nonnegative");
  const double hi = defect_upper(psi);
  require(hi <= eta + 1e-12, "defect upper estimate " + fmt(hi) + " exceeds eta = " + fmt(eta));
}

inline bool is_idempotent(const Algebra& a, const Vec& p) {
  return (a.multiply(p, p) - p).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, p.cwiseAbs().maxCoeff());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dichotomy

struct KicsiNagy {
  double u1 = 0.0;
  double u2 = 1.0;
  double bound = 0.0;  // 3c/2
};

/// The two roots of u = u^2 + c and the bound min(x, 1-x) <= 3c/2 <= 1/3.
inline KicsiNagy kicsi_nagy(double c) {
  if (!(c >= 0.0 && c <= 2.0 / 9.0)) throw std::domain_error("kicsi_nagy: c must lie in [0, 2/9]");
  KicsiNagy r;
  const double s = std::sqrt(1.0 - 4.0 * c);
  r.u1 = 2.0 * c / (1.0 + s);
  r.u2 = 1.0 - r.u1;
  r.bound = 1.5 * c;
  if (r.u1 > r.bound + 1e-12 || r.bound > 1.0 / 3.0 + 1e-12)
    throw std::logic_error("kicsi_nagy: root exceeds 3c/2");
  return r;
}

enum class Branch { small, large, neither };

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::small: return "small";
    case Branch::large: return "large";
    case Branch::neither: return "neither";
  }
  return "neither";
}

struct DichotomyVerdict {
  double value = 0.0;
  Branch branch = Branch::neither;
  double low_threshold = 0.0;   // (3/2) ||p||^2 delta
  double high_threshold = 1.0;  // 1 - (3/2) ||p||^2 delta
  bool passed() const { return branch != Branch::neither; }
};

/// Thresholds only; no map involved.
inline DichotomyVerdict dichotomy_thresholds(double p_norm, double delta) {
  DichotomyVerdict v;
  const double t = delta * p_norm * p_norm;
  v.low_threshold = 1.5 * t;
  v.high_threshold = 1.0 - 1.5 * t;
  return v;
}

/// ||psi(p)|| lies in [0, (3/2)||p||^2 delta] or in [1 - (3/2)||p||^2 delta, oo).
inline DichotomyVerdict norm_dichotomy_check(const LinearMap& psi, const Vec& p, double delta,
                                             const NormBudget& /*budget*/ = {}) {
  const Algebra& a = *psi.source;
  detail::require(detail::is_idempotent(a, p), "dichotomy: p is not idempotent");
  const double pn = a.norm(p);
  detail::require(delta * pn * pn <= 2.0 / 9.0,
                  "dichotomy: delta ||p||^2 = " + detail::fmt(delta * pn * pn) + " exceeds 2/9");
  detail::require_eta(psi, delta);
  DichotomyVerdict v = dichotomy_thresholds(pn, delta);
  v.value = psi.target->norm(psi.matrix * p);
  const double slack = 1e-12;
  if (v.value <= v.low_threshold + slack)
    v.branch = Branch::small;
  else if (v.value >= v.high_threshold - slack)
    v.branch = Branch::large;
  return v;
}

// ---------------------------------------------------------------------------
// Absorption, equivalent projections, small on identity

enum class Side { left, right };

/// Left: ab = b and ||psi(a)|| <= 1/3.  Right: ba = b and ||psi(a)|| <= 1/3
/// (a plays the role of c).  Asserts ||psi(b)|| <= (3/2) eta ||a|| ||b||.
inline Certificate absorption_check(const LinearMap& psi, const Vec& a, const Vec& b, Side side, double eta,
                                    const NormBudget& /*budget*/ = {}) {
  const Algebra& alg = *psi.source;
  const Vec prod = side == Side::left ? alg.multiply(a, b) : alg.multiply(b, a);
  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  detail::require((prod - b).cwiseAbs().maxCoeff() <= 1e-9 * scale * scale,
                  side == Side::left ? "absorption: ab != b" : "absorption: bc != b");
  const double pa = psi.target->norm(psi.matrix * a);
  detail::require(pa <= 1.0 / 3.0, "absorption: ||psi(a)|| = " + detail::fmt(pa) + " exceeds 1/3");
  detail::require_eta(psi, eta);
  Certificate c;
  c.lhs = point(psi.target->norm(psi.matrix * b));
  c.rhs = point(1.5 * eta * alg.norm(a) * alg.norm(b));
  c.passed = not_falsified(c.lhs, c.rhs);
  return c;
}

/// uv, vu idempotent, eta ||u||^3 ||v||^3 <= 2/9, ||psi(uv)|| <= 1/3
/// imply ||psi(vu)|| <= 1/3.
inline Certificate equivalent_projection_check(const LinearMap& psi, const Vec& u, const Vec& v, double eta,
                                               const NormBudget& /*budget*/ = {}) {
  const Algebra& a = *psi.source;
  const Vec uv = a.multiply(u, v), vu = a.multiply(v, u);
  detail::require(detail::is_idempotent(a, uv), "equivalent projections: uv is not idempotent");
  detail::require(detail::is_idempotent(a, vu), "equivalent projections: vu is not idempotent");
  const double nu = a.norm(u), nv = a.norm(v);
  const double t = eta * std::pow(nu, 3) * std::pow(nv, 3);
  detail::require(eta >= 0.0 && t <= 2.0 / 9.0,
                  "equivalent projections: eta ||u||^3 ||v||^3 = " + detail::fmt(t) + " exceeds 2/9");
  const double puv = psi.target->norm(psi.matrix * uv);
  detail::require(puv <= 1.0 / 3.0, "equivalent projections: ||psi(uv)|| = " + detail::fmt(puv) + " exceeds 1/3");
  detail::require_eta(psi, eta);
  Certificate c;
  c.lhs = point(psi.target->norm(psi.matrix * vu));
  c.rhs = point(1.0 / 3.0);
  c.passed = not_falsified(c.lhs, c.rhs);
  return c;
}

/// ||psi(1)|| <= 1/3 and def(psi) <= eta imply ||psi|| <= 3 eta / 2.
inline Certificate small_on_identity(const LinearMap& psi, double eta, const NormBudget& budget = {}) {
  const double p1 = psi.target->norm(psi.matrix * psi.source->unit());
  detail::require(p1 <= 1.0 / 3.0, "small on identity: ||psi(1)|| = " + detail::fmt(p1) + " exceeds 1/3");
  detail::require_eta(psi, eta);
  Certificate c;
  c.lhs = to_interval(linear_map_norm(psi, budget));
  c.rhs = point(1.5 * eta);
  c.passed = not_falsified(c.lhs, c.rhs);
  return c;
}

// ---------------------------------------------------------------------------
// Separation lemma at finite scale

struct FamilyScan {
  std::vector<int> survivors;  // ||psi(p)|| <= 2 eta L^2
  std::vector<int> large;      // ||psi(p)|| > c
  double c = 0.0;
  double separation = 0.0;       // (c - 2 eta L^2) / (||psi||_upper L)
  double min_distance = 0.0;     // min over pairs in the large set
  double min_ratio = 0.0;        // min ||y_p - y_r|| ||psi(p)|| / (c - 2 eta L^2)
  double packing_bound = 0.0;    // (1 + 2R/s)^{2m}
  bool distances_ok = true;
  bool packing_ok = true;
  bool passed() const { return distances_ok && packing_ok; }
};

/// The target must carry a matrix realization on X = C^m.  For every idempotent
/// with ||psi(p)|| > c the vector y_p = psi(p) x_p (x_p a top singular vector)
/// is built; pairwise distances are checked against the proof's bound and
/// their number against the packing bound of the ball of radius R in C^m.
inline FamilyScan orthogonal_family_scan(const LinearMap& psi, const std::vector<Vec>& family, double L,
                                         double eta, double c, const NormBudget& /*budget*/ = {}) {
  const Algebra& q = *psi.source;
  const Algebra& b = *psi.target;
  detail::require(b.has_realization(), "scan: target needs a matrix realization");
  detail::require(L >= 1.0, "scan: L must be at least 1");
  for (std::size_t i = 0; i < family.size(); ++i) {
    detail::require(detail::is_idempotent(q, family[i]), "scan: family member is not idempotent");
    detail::require(q.norm(family[i]) <= L * (1.0 + 1e-12), "scan: family member has norm above L");
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      const double r = std::max(q.multiply(family[i], family[j]).cwiseAbs().maxCoeff(),
                                q.multiply(family[j], family[i]).cwiseAbs().maxCoeff());
      detail::require(r <= 1e-9, "scan: family is not pairwise orthogonal");
    }
  }
  detail::require_eta(psi, eta);
  const double floor = 2.0 * eta * L * L;
  detail::require(c > floor, "scan: c must exceed 2 eta L^2");

  FamilyScan s;
  s.c = c;
  const double psi_hi = linear_map_upper(psi);
  const auto m = b.realization()[0].rows();
  std::vector<Eigen::VectorXcd> y;
  std::vector<double> norms;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const Mat img = b.realize(psi.matrix * family[i]);
    Eigen::JacobiSVD<Mat> svd(img, Eigen::ComputeFullV);
    const double n = svd.singularValues()(0);
    if (n <= floor) s.survivors.push_back(static_cast<int>(i));
    if (n > c) {
      s.large.push_back(static_cast<int>(i));
      y.push_back(img * svd.matrixV().col(0));
      norms.push_back(n);
    }
  }
  s.separation = psi_hi > 0 ? (c - floor) / (psi_hi * L) : 0.0;
  s.min_distance = std::numeric_limits<double>::infinity();
  s.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (i == j) continue;
      const double d = (y[i] - y[j]).norm();
      s.min_distance = std::min(s.min_distance, d);
      const double ratio = d * norms[i] / (c - floor);
      s.min_ratio = std::min(s.min_ratio, ratio);
      if (ratio < 1.0 - 1e-9 || d < s.separation * (1.0 - 1e-9)) s.distances_ok = false;
    }
  double radius = 0.0;
  for (double n : norms) radius = std::max(radius, n);
  if (!y.empty()) {
    s.packing_bound = std::pow(1.0 + 2.0 * radius / s.separation, 2.0 * static_cast<double>(m));
    s.packing_ok = static_cast<double>(y.size()) <= s.packing_bound;
  }
  return s;
}

/// c_E = 1 / (6 C^3).
inline double clone_constant(double C) {
  if (!(C >= 1.0)) throw std::domain_error("clone_constant: C must be at least 1");
  return 1.0 / (6.0 * C * C * C);
}

// ---------------------------------------------------------------------------
// Murray-von Neumann chain on a finite quotient model

/// A = M_k (+) C^r with the quotient q: A -> M_k that drops the C^r summand.
struct QuotientModel {
  AlgebraPtr a;
  AlgebraPtr q;
  Mat quotient;  // dim(q) x dim(a)
  Mat lift;      // dim(a) x dim(q), the block embedding x -> (x, 0)
};

inline QuotientModel quotient_model(int k, int r) {
  QuotientModel m;
  m.q = full_matrix_algebra(k);
  AlgebraPtr rest = commutative_algebra(r);
  m.a = direct_sum(m.q, rest);
  m.quotient = Mat::Zero(k * k, k * k + r);
  m.quotient.leftCols(k * k) = Mat::Identity(k * k, k * k);
  m.lift = m.quotient.transpose();
  return m;
}

struct MvnReport {
  double eta = 0.0;
  double c_e = 0.0;
  int chosen = -1;
  FamilyScan scan;
  std::vector<Certificate> transfers;     // psi q(e_jj) <= 1/3 from psi q(e_ii)
  std::vector<DichotomyVerdict> corners;  // small branch for every e_jj
  DichotomyVerdict identity;              // small branch for q^{-1}(1)
  Certificate conclusion;                 // ||psi|| <= 3 eta / 2
  bool passed() const { return conclusion.passed; }
};

/// Chain: separation scan over the corner idempotents e_ii of M_k, the
/// equivalent-projection transfer e_ii -> e_jj through the matrix units
/// u = e_ij, v = e_ji (so C = ||u|| ||v|| = 1), the dichotomy on each e_jj and
/// on the lifted identity, and finally small_on_identity on M_k.
inline MvnReport mvn_pipeline(const LinearMap& psi, const QuotientModel& model, const NormBudget& budget = {}) {
  detail::require(same_algebra(*psi.source, *model.q), "mvn: psi must be defined on the quotient");
  const int k = model.q->order();
  MvnReport rep;
  rep.c_e = clone_constant(1.0);
  const LinearMap psi_q(model.a, psi.target, psi.matrix * model.quotient);
  // def(psi q) = def(psi); both estimates are upper bounds for the same number.
  rep.eta = std::max(defect_upper(psi), defect_upper(psi_q));
  detail::require(rep.eta <= rep.c_e, "mvn: def(psi) upper " + detail::fmt(rep.eta) + " exceeds c_E = 1/6");
  const double eta = rep.eta + 1e-12;

  std::vector<Vec> family;
  for (int i = 0; i < k; ++i) family.push_back(model.q->basis(i * k + i));
  rep.scan = orthogonal_family_scan(psi, family, 1.0, eta, std::max(0.5, 4.0 * eta), budget);
  detail::require(!rep.scan.survivors.empty(), "mvn: no corner idempotent is mapped small");
  const int i = rep.scan.survivors.front();
  rep.chosen = i;

  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    const Vec ejj = model.lift * model.q->basis(j * k + j);
    if (j != i) {
      const Vec u = model.lift * model.q->basis(i * k + j);
      const Vec v = model.lift * model.q->basis(j * k + i);
      rep.transfers.push_back(equivalent_projection_check(psi_q, u, v, eta, budget));
    }
    rep.corners.push_back(norm_dichotomy_check(psi_q, ejj, eta, budget));
    detail::require(rep.corners.back().branch == Branch::small, "mvn: corner not in the small branch");
    total += rep.corners.back().value;
  }
  const Vec one = model.lift * model.q->unit();
  rep.identity = norm_dichotomy_check(psi_q, one, eta, budget);
  // ||psi(1)|| <= sum_j ||psi(e_jj)|| rules out the large branch.
  detail::require(total < rep.identity.high_threshold, "mvn: corner sum does not rule out the large branch");
  rep.conclusion = small_on_identity(psi, eta, budget);
  return rep;
}

// ---------------------------------------------------------------------------
// Perturbation bounds

/// def(theta) <= def(psi) + 2 ||theta - psi|| (1 + ||psi||) when ||theta - psi|| <= 1.
inline Certificate defect_of_perturbed(const LinearMap& psi, const LinearMap& theta, const NormBudget& budget = {}) {
  const Interval diff = to_interval(linear_map_norm(theta - psi, budget));
  detail::require(diff.hi <= 1.0, "perturbed defect: ||theta - psi|| may exceed 1");
  const Interval npsi = to_interval(linear_map_norm(psi, budget));
  Certificate c;
  c.lhs = to_interval(defect(theta, nullptr, nullptr, budget));
  const Interval dpsi = to_interval(defect(psi, nullptr, nullptr, budget));
  c.rhs = {dpsi.lo + 2.0 * diff.lo * (1.0 + npsi.lo), dpsi.hi + 2.0 * diff.hi * (1.0 + npsi.hi)};
  c.passed = not_falsified(c.lhs, c.rhs);
  return c;
}

/// def_{DxA}(phi + gamma) (or def_{AxD}) <= def(phi) + (2||phi|| + 1)||gamma|| + ||gamma||^2.
inline Certificate relative_defect_of_perturbed(const LinearMap& phi, const LinearMap& gamma, const Subalgebra& d,
                                                bool left, const NormBudget& budget = {}) {
  const Subalgebra* l = left ? &d : nullptr;
  const Subalgebra* r = left ? nullptr : &d;
  const Interval g = to_interval(linear_map_norm(gamma, budget));
  const Interval n = to_interval(linear_map_norm(phi, budget));
  const Interval d0 = to_interval(defect(phi, l, r, budget));
  Certificate c;
  c.lhs = to_interval(defect(phi + gamma, l, r, budget));
  c.rhs = {d0.lo + (2.0 * n.lo + 1.0) * g.lo + g.lo * g.lo, d0.hi + (2.0 * n.hi + 1.0) * g.hi + g.hi * g.hi};
  c.passed = not_falsified(c.lhs, c.rhs);
  return c;
}

}  // namespace amnm
