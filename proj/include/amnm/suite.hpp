#pragma once

// Seeded suite of identity, no-falsification, convergence, checker and
// appendix families.  Rows are keyed by (family, index) and emitted in that
// order, so reports do not depend on the thread schedule.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "amnm/algebra.hpp"
#include "amnm/diagonal.hpp"
#include "amnm/instances.hpp"
#include "amnm/io.hpp"
#include "amnm/multilinear.hpp"
#include "amnm/perturbation.hpp"
#include "amnm/random.hpp"
#include "amnm/stabilizer.hpp"
#include "amnm/tsirelson.hpp"

namespace amnm {

struct SuiteRow {
  std::string lemma;
  std::uint64_t instance_seed = 0;
  bool passed = false;
  Interval lhs, rhs;
  std::string anchor;
  std::string detail;
};

struct ConvergenceSettings {
  double gamma_norm = 4e-4;
  double L = 2.0;
  double tol = 1e-8;
  int max_iter = 30;
  double min_pass_fraction = 0.95;
};

struct SuiteConfig {
  std::uint64_t seed = 7;
  int instances = 100;
  int refusals = 100;
  NormBudget budget{};
  unsigned threads = 1;
  std::vector<std::string> families;  // empty = all
  ConvergenceSettings convergence{};
};

struct FamilySummary {
  std::string name;
  int criterion = 0;
  int rows = 0;
  int passed = 0;
  double min_pass_fraction = 1.0;
  double seconds = 0.0;  // wall time, not part of the report
  bool ok() const {
    return rows > 0 && static_cast<double>(passed) >= min_pass_fraction * static_cast<double>(rows) - 1e-9;
  }
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  std::vector<FamilySummary> families;
  bool passed() const {
    return std::all_of(families.begin(), families.end(), [](const FamilySummary& f) { return f.ok(); });
  }
};

namespace suite_detail {

inline std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Task {
  std::uint64_t seed;
  int index;
  NormBudget budget;
  const SuiteConfig* config;
};

using TaskFn = std::function<std::vector<SuiteRow>(const Task&)>;

struct Family {
  std::string name;
  int criterion;
  int count;
  double min_pass_fraction;
  TaskFn run;
};

inline SuiteRow row(const std::string& lemma, const Task& t, const Interval& lhs, const Interval& rhs,
                    bool passed, const std::string& anchor, std::string detail = {}) {
  return {lemma, t.seed, passed, lhs, rhs, anchor, std::move(detail)};
}

/// Residual row for an exact identity: lhs = relative residual, rhs = tol.
inline SuiteRow identity_row(const std::string& lemma, const Task& t, double residual, const std::string& anchor,
                             double tol = 1e-10) {
  return row(lemma, t, point(residual), point(tol), residual <= tol, anchor);
}

inline SuiteRow certificate_row(const std::string& lemma, const Task& t, const Certificate& c,
                                const std::string& anchor) {
  return row(lemma, t, c.lhs, c.rhs, c.passed, anchor, c.detail);
}

/// Library algebras of dimension at most 6.
inline AlgebraPtr pool_algebra(CounterRng& rng) {
  switch (rng.next_u64() % 8) {
    case 0: return full_matrix_algebra(2);
    case 1: return matrix_algebra(2, NormMode::frobenius);
    case 2: return commutative_algebra(1 + static_cast<int>(rng.next_u64() % 6));
    case 3: return direct_sum(full_matrix_algebra(2), commutative_algebra(1));
    case 4: return unitize(commutative_algebra(1 + static_cast<int>(rng.next_u64() % 5)));
    case 5: return opposite(full_matrix_algebra(2));
    case 6: return direct_sum(commutative_algebra(2), commutative_algebra(3));
    default: return unitize(full_matrix_algebra(2));
  }
}

inline LinearMap gaussian_map(const AlgebraPtr& a, const AlgebraPtr& b, CounterRng& rng, double scale = 1.0) {
  return {a, b, rng.complex_matrix(b->dim(), a->dim()) * (scale / std::sqrt(static_cast<double>(a->dim())))};
}

inline Cochain gaussian_cochain(const AlgebraPtr& target, std::vector<AlgebraPtr> slots, CounterRng& rng,
                                double scale = 1.0) {
  Cochain c = Cochain::zero(target, std::move(slots));
  c.data = rng.complex_vector(c.data.size()) * scale;
  return c;
}

/// Random element of D (x) D with a few elementary tensors.
inline TensorRep random_tensor(const AlgebraPtr& d, CounterRng& rng, int terms = 3) {
  TensorRep w{d, {}};
  for (int k = 0; k < terms; ++k) w.pairs.emplace_back(rng.complex_vector(d->dim()), rng.complex_vector(d->dim()));
  return w;
}

inline Instance small_instance(const Task& t, CounterRng& rng, double lo, double hi, int order = 2) {
  InstanceConfig c;
  c.order = order;
  c.seed = t.seed;
  c.index = 0;
  c.gamma_norm = rng.uniform(lo, hi);
  c.budget = t.budget;
  return generate_instance(c);
}

/// Cochain slot 0 (of a (n)-cochain) set to the slices produced by `slice(i)`.
template <class F>
Cochain assemble_first_slot(const AlgebraPtr& target, const AlgebraPtr& first, const std::vector<AlgebraPtr>& rest,
                            F&& slice) {
  std::vector<AlgebraPtr> slots{first};
  slots.insert(slots.end(), rest.begin(), rest.end());
  Cochain out = Cochain::zero(target, slots);
  const Eigen::Index dout = target->dim(), d1 = first->dim();
  for (int i = 0; i < first->dim(); ++i) {
    const Cochain s = slice(i);
    const Eigen::Index rest_size = s.data.size() / dout;
    for (Eigen::Index r = 0; r < rest_size; ++r)
      out.data.segment(dout * (i + d1 * r), dout) = s.data.segment(dout * r, dout);
  }
  return out;
}

inline Interval estimate_any(const Cochain& c, const NormBudget& budget) {
  detail::Form f{c.target.get(), {}, c.data};
  for (const auto& s : c.slots) f.slots.push_back(s.get());
  return to_interval(detail::estimate(f, budget, budget.seed));
}

// ---------------------------------------------------------------------------
// Exact identities

inline std::vector<SuiteRow> two_cocycle(const Task& t) {
  CounterRng rng(t.seed, 1);
  const AlgebraPtr a = pool_algebra(rng), b = pool_algebra(rng);
  const LinearMap phi = gaussian_map(a, b, rng);
  const Cochain chk = check_map(phi);
  const Cochain d2 = coboundary(2, phi, chk);
  const double scale = std::max(1.0, chk.max_abs()) * coefficient_scale(phi.matrix);
  return {identity_row("two_cocycle", t, d2.max_abs() / scale, "2-cocycle lemma: d^2_phi(phi-check) = 0")};
}

inline std::vector<SuiteRow> linearization(const Task& t) {
  CounterRng rng(t.seed, 1);
  const AlgebraPtr a = pool_algebra(rng), b = pool_algebra(rng);
  const LinearMap phi = gaussian_map(a, b, rng), gamma = gaussian_map(a, b, rng, rng.uniform(0.01, 1.0));
  const Cochain lhs = check_map(phi + gamma);
  const Cochain rhs = check_map(phi) - coboundary(1, phi, as_cochain(gamma)) - product_cochain(gamma, gamma);
  return {identity_row("linearization", t, relative_difference(lhs, rhs),
                       "linearization of the defect: (phi+gamma)-check = phi-check - d^1_phi gamma - gamma.gamma")};
}

inline std::vector<SuiteRow> unitize_defect(const Task& t) {
  CounterRng rng(t.seed, 1);
  const AlgebraPtr a = pool_algebra(rng), b = pool_algebra(rng);
  const LinearMap psi = gaussian_map(a, b, rng);
  const LinearMap sharp = unitize_map(psi);
  const Cochain got = check_map(sharp);
  const Cochain base = check_map(psi);
  Cochain want = Cochain::zero(b, {sharp.source, sharp.source});
  for (int j = 0; j < a->dim(); ++j)
    for (int i = 0; i < a->dim(); ++i)
      want.data.segment(want.offset({i + 1, j + 1}), b->dim()) = base.at({i, j});
  return {identity_row("unitize_defect", t, relative_difference(got, want),
                       "forced unitization: psi#-check vanishes on the adjoined unit and equals psi-check on A")};
}

/// theta(x, lambda) = S diag(x, lambda beta) S^{-1} from M_2 (+) C to M_3.
inline std::vector<SuiteRow> decompose(const Task& t) {
  CounterRng rng(t.seed, 1);
  const AlgebraPtr m2 = full_matrix_algebra(2);
  const AlgebraPtr a = direct_sum(m2, commutative_algebra(1));
  const AlgebraPtr b = full_matrix_algebra(3);
  const Mat s = Mat::Identity(3, 3) + 0.3 * rng.complex_matrix(3, 3);
  const Mat si = s.inverse();
  const cplx beta = rng.complex_normal();
  Mat m(9, 5);
  auto put = [&](int col, const Mat& x) {
    const Mat y = s * x * si;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r * 3 + c, col) = y(r, c);
  };
  for (int j = 0; j < 4; ++j) {
    Mat x = Mat::Zero(3, 3);
    x(j / 2, j % 2) = 1.0;
    put(j, x);
  }
  Mat x = Mat::Zero(3, 3);
  x(2, 2) = beta;
  put(4, x);
  const LinearMap theta(a, b, m);
  IdealData ideal{a, Mat::Zero(5, 4), Vec::Zero(5)};
  ideal.span.topRows(4) = Mat::Identity(4, 4);
  ideal.e(0) = ideal.e(3) = 1.0;
  const Decomposition dec = decompose_over_ideal(theta, ideal);
  const double res = std::max({dec.multiplicative_residual, dec.vanishing_residual, dec.defect_difference});
  return {identity_row("decompose", t, res,
                       "decomposition over an ideal: theta = p.theta + theta_s with theta_s-check = theta-check")};
}

inline std::vector<SuiteRow> preserved_unit(const Task& t) {
  CounterRng rng(t.seed, 1);
  const Instance in = small_instance(t, rng, 0.05, 0.3);
  const LinearMap phi = gaussian_map(in.a, in.a, rng);
  const TensorRep w = random_tensor(in.d.algebra, rng);
  const Cochain chk = check_map(in.phi);
  const LinearMap v = as_linear_map(average(1, phi, in.d, w, chk));
  const double scale = std::max(1.0, chk.max_abs()) * coefficient_scale(phi.matrix) * std::max(1.0, w.proj_bound());
  const double res = (v.matrix * in.d.unit_in_ambient()).cwiseAbs().maxCoeff() / scale;
  return {identity_row("preserved_unit", t, res,
                       "improvement preserves units: <w>^1_phi(psi-check)(1_D) = 0 when psi(1_D) = 1_B")};
}

inline std::vector<SuiteRow> preserved_right(const Task& t) {
  CounterRng rng(t.seed, 1);
  const Instance in = small_instance(t, rng, 0.0, 0.0);
  const LinearMap psi = right_modular_map(in.base, in.d, rng, rng.uniform(0.01, 0.3), t.budget);
  const LinearMap phi = gaussian_map(in.a, in.a, rng);
  const TensorRep w = random_tensor(in.d.algebra, rng);
  const Cochain chk = check_map(psi);
  const LinearMap v = as_linear_map(average(1, phi, in.d, w, chk));
  const Algebra& a = *in.a;
  double res = 0.0;
  for (int i = 0; i < in.d.algebra->dim(); ++i) {
    const Vec x = in.d.embedding.col(i);
    res = std::max(res, (v.matrix * x).cwiseAbs().maxCoeff());
    for (int j = 0; j < a.dim(); ++j) {
      const Vec lhs = v.matrix * a.multiply(a.basis(j), x);
      const Vec rhs = a.multiply(v.matrix.col(j), psi.matrix * x);
      res = std::max(res, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  const double scale = std::max(1.0, chk.max_abs()) * coefficient_scale(phi.matrix) *
                       coefficient_scale(psi.matrix) * std::max(1.0, w.proj_bound());
  return {identity_row("preserved_right_module", t, res / scale,
                       "improvement preserves right modularity: <w>^1_phi(psi-check) vanishes on D and is a right D-module map")};
}

/// Both sides of the first approximate-splitting identity as tensors.
inline std::pair<Cochain, Cochain> splitting_sides(int n, const LinearMap& phi, const std::vector<std::pair<Vec, Vec>>& pairs,
                                                   const Cochain& psi) {
  const Algebra& a = *phi.source;
  const Algebra& b = *phi.target;
  const Cochain avg = average_pairs(phi, pairs, psi);  // arity n-1
  const Cochain left = coboundary(n - 1, phi, avg) + average_pairs(phi, pairs, coboundary(n, phi, psi));
  Vec pi = Vec::Zero(b.dim());
  for (const auto& [c, d] : pairs) pi += b.multiply(phi.matrix * c, phi.matrix * d);
  const Cochain r1 = map_output(b.left_matrix(pi), psi);
  const std::vector<AlgebraPtr> rest(psi.slots.begin() + 1, psi.slots.end());
  const Cochain r2 = assemble_first_slot(phi.target, phi.source, rest, [&](int i) {
    return map_output(b.left_matrix(phi.matrix.col(i)), avg);
  });
  const Cochain r3 = assemble_first_slot(phi.target, phi.source, rest, [&](int i) {
    std::vector<std::pair<Vec, Vec>> shifted;
    for (const auto& [c, d] : pairs) shifted.emplace_back(c, a.multiply(d, a.basis(i)));
    return average_pairs(phi, shifted, psi);
  });
  return {left, r1 + r2 - r3};
}

inline TaskFn splitting_v1(int n) {
  return [n](const Task& t) {
    CounterRng rng(t.seed, 1);
    const Instance in = small_instance(t, rng, 0.0, 0.0);
    const AlgebraPtr b = pool_algebra(rng);
    const LinearMap phi = gaussian_map(in.a, b, rng);
    const TensorRep w = random_tensor(in.d.algebra, rng);
    std::vector<std::pair<Vec, Vec>> pairs;
    for (const auto& [c, d] : w.pairs) pairs.emplace_back(in.d.embed(c), in.d.embed(d));
    const Cochain psi = gaussian_cochain(b, std::vector<AlgebraPtr>(n, in.a), rng);
    const auto [lhs, rhs] = splitting_sides(n, phi, pairs, psi);
    return std::vector<SuiteRow>{identity_row("splitting_v1_n" + std::to_string(n), t, relative_difference(lhs, rhs),
                                              "first approximate splitting identity for averaging operators")};
  };
}

inline std::vector<SuiteRow> library_diagonal_family(const Task& t) {
  CounterRng rng(t.seed, 1);
  AlgebraPtr d = pool_algebra(rng);
  const bool flip_it = rng.next_u64() % 2 == 0;
  DiagonalCert cert = library_diagonal(d);
  if (flip_it) {
    const AlgebraPtr op = opposite(d);
    cert = verify_diagonal(op, flip(cert.rep, op));
    d = op;
  }
  double scale = std::max(1.0, cert.K);
  for (int i = 0; i < d->dim(); ++i) scale = std::max(scale, d->norm(d->basis(i)));
  const double res = std::max(cert.commutation_residual, cert.product_residual) / scale;
  return {identity_row("library_diagonal", t, res,
                       flip_it ? "flipped library diagonal is a diagonal for the opposite algebra"
                               : "library diagonal: a.w = w.a and a pi(w) = a")};
}

// ---------------------------------------------------------------------------
// No-falsification

inline std::vector<SuiteRow> defect_of_perturbed_family(const Task& t) {
  CounterRng rng(t.seed, 1);
  const Instance in = small_instance(t, rng, 0.01, 0.3, t.index % 4 == 3 ? 3 : 2);
  const LinearMap delta = random_map(in.a, in.a, rng, rng.uniform(0.01, 0.5), nullptr, t.budget);
  const Certificate c = defect_of_perturbed(in.phi, in.phi + delta, t.budget);
  return {certificate_row("defect_of_perturbed", t, c,
                          "defect of a perturbation: def(theta) <= def(psi) + 2||theta-psi||(1+||psi||)")};
}

inline std::vector<SuiteRow> relative_defect_family(const Task& t) {
  CounterRng rng(t.seed, 1);
  const Instance in = small_instance(t, rng, 0.01, 0.3);
  const LinearMap g = random_map(in.a, in.a, rng, rng.uniform(0.01, 0.3), nullptr, t.budget);
  const std::string anchor = "relative defect of a perturbation: def(phi+gamma) <= def(phi) + (2||phi||+1)||gamma|| + ||gamma||^2";
  return {certificate_row("relative_defect_da", t, relative_defect_of_perturbed(in.phi, g, in.d, true, t.budget),
                          anchor + " on D x A"),
          certificate_row("relative_defect_ad", t, relative_defect_of_perturbed(in.phi, g, in.d, false, t.budget),
                          anchor + " on A x D")};
}

inline std::vector<SuiteRow> coboundary_square(const Task& t) {
  CounterRng rng(t.seed, 1);
  const Instance in = small_instance(t, rng, 0.01, 0.2);
  const LinearMap g = random_map(in.a, in.a, rng, 1.0, nullptr, t.budget);
  const Cochain dd = coboundary(2, in.phi, coboundary(1, in.phi, as_cochain(g)));
  const Interval lhs = estimate_any(dd, t.budget);
  const Interval def = to_interval(defect(in.phi, nullptr, nullptr, t.budget));
  const Interval gn = to_interval(linear_map_norm(g, t.budget));
  const Interval rhs{4.0 * def.lo * gn.lo, 4.0 * def.hi * gn.hi};
  return {row("coboundary_square", t, lhs, rhs, not_falsified(lhs, rhs),
              "approximate complex: ||d^2_phi d^1_phi gamma|| <= 4 def(phi) ||gamma||")};
}

inline std::vector<SuiteRow> averaging_bound(const Task& t) {
  CounterRng rng(t.seed, 1);
  const Instance in = small_instance(t, rng, 0.01, 0.3);
  const TensorRep w = t.index % 2 ? random_tensor(in.d.algebra, rng) : in.cert.rep;
  const Cochain psi = gaussian_cochain(in.a, {in.a, in.a}, rng, 0.5);
  const Interval lhs = to_interval(multilinear_norm(average(1, in.phi, in.d, w, psi), t.budget));
  const Interval n = to_interval(linear_map_norm(in.phi, t.budget));
  const Interval r = to_interval(multilinear_norm(restrict_first(in.d, psi), t.budget));
  const double pb = w.proj_bound();
  const Interval rhs{pb * n.lo * r.lo, pb * n.hi * r.hi};
  return {row("averaging_bound", t, lhs, rhs, not_falsified(lhs, rhs),
              "bound of the averaging operator: ||<w>^n_phi psi|| <= ||w|| ||phi|| ||Res_D psi||")};
}

inline std::vector<SuiteRow> left_modular(const Task& t) {
  CounterRng rng(t.seed, 1);
  const Instance in = small_instance(t, rng, 0.01, 0.3);
  const TensorRep w = t.index % 2 ? random_tensor(in.d.algebra, rng) : in.cert.rep;
  const Cochain psi = gaussian_cochain(in.a, {in.a, in.a}, rng, 0.5);
  const Cochain avg = average(1, in.phi, in.d, w, psi);
  const Algebra& a = *in.a;
  const Cochain t_cochain = assemble_first_slot(in.a, in.d.algebra, {in.a}, [&](int i) {
    const Vec x = in.d.embedding.col(i);
    std::vector<std::pair<Vec, Vec>> shifted;
    for (const auto& [c, d] : w.pairs) shifted.emplace_back(a.multiply(x, in.d.embed(c)), in.d.embed(d));
    return map_output(a.left_matrix(in.phi.matrix * x), avg) - average_pairs(in.phi, shifted, psi);
  });
  const Interval lhs = to_interval(multilinear_norm(t_cochain, t.budget));
  const Interval dd = to_interval(defect(in.phi, &in.d, &in.d, t.budget));
  const Interval r = to_interval(multilinear_norm(restrict_first(in.d, psi), t.budget));
  const double pb = w.proj_bound();
  const Interval rhs{dd.lo * pb * r.lo, dd.hi * pb * r.hi};
  return {row("left_modular", t, lhs, rhs, not_falsified(lhs, rhs),
              "approximate left modularity of averaging: bounded by def_DxD(phi) ||w|| ||Res_D psi||")};
}

inline std::vector<SuiteRow> splitting_v2(const Task& t) {
  CounterRng rng(t.seed, 1);
  const Instance in = small_instance(t, rng, 0.01, 0.3);
  const Cochain psi = gaussian_cochain(in.a, {in.a, in.a}, rng, 0.5);
  const Cochain s1 = split(1, in.phi, in.d, in.cert, psi);
  const Cochain s2 = split(2, in.phi, in.d, in.cert, coboundary(2, in.phi, psi));
  const Cochain h = coboundary(1, in.phi, s1) + s2 - psi;
  const Interval lhs = to_interval(multilinear_norm(restrict_first(in.d, h), t.budget));
  const Interval dd = to_interval(defect(in.phi, &in.d, &in.d, t.budget));
  const Interval r = to_interval(multilinear_norm(restrict_first(in.d, psi), t.budget));
  const double k = in.cert.K;
  const Interval rhs{2.0 * k * dd.lo * r.lo, 2.0 * k * dd.hi * r.hi};
  return {row("splitting_v2", t, lhs, rhs, not_falsified(lhs, rhs),
              "second approximate splitting: ||Res_D(d Sigma psi + Sigma d psi - psi)|| <= 2K def_DxD(phi) ||Res_D psi||")};
}

inline std::vector<SuiteRow> improving(const Task& t) {
  CounterRng rng(t.seed, 1);
  const Instance in = small_instance(t, rng, 1e-3, 3e-2);
  const ImproveReport r = improve_report(in.phi, in.d, in.cert, t.budget);
  const double tol = 1e-9;
  return {
      row("improving_unital", t, point(r.unit_residual), point(tol), r.unital_ok,
          "improving operator keeps F(phi)(1_D) = 1_B"),
      row("improving_step", t, r.step_norm,
          {r.K * r.norm_phi.lo * r.def_da.lo, r.step_bound}, not_falsified(r.step_norm, {0.0, r.step_bound}),
          "improving operator step: ||F(phi) - phi|| <= K ||phi|| def_DxA(phi)"),
      row("improving_defect", t, r.def_da_next,
          {3.0 * r.K * r.K * r.norm_phi.lo * r.norm_phi.lo * r.def_dd.lo * r.def_da.lo, r.defect_bound},
          not_falsified(r.def_da_next, {0.0, r.defect_bound}),
          "improving operator defect: def_DxA(F(phi)) <= 3K^2 ||phi||^2 def_DxD(phi) def_DxA(phi)")};
}

inline std::vector<SuiteRow> improving_right(const Task& t) {
  CounterRng rng(t.seed, 1);
  const Instance in = small_instance(t, rng, 0.0, 0.0);
  const LinearMap psi = right_modular_map(in.base, in.d, rng, rng.uniform(1e-3, 3e-2), t.budget);
  const LinearMap next = improve(psi, in.d, in.cert);
  const double res = right_modular_residual(next, in.d);
  return {identity_row("improving_right_modular", t, res,
                       "improving operator preserves def_AxD = 0")};
}

inline std::vector<SuiteRow> convergence(const Task& t) {
  const ConvergenceSettings& cs = t.config->convergence;
  InstanceConfig ic;
  ic.seed = t.seed;
  ic.gamma_norm = cs.gamma_norm;
  ic.budget = t.budget;
  const Instance in = generate_instance(ic);
  StabilizeConfig sc;
  sc.tol = cs.tol;
  sc.max_iter = cs.max_iter;
  sc.L = cs.L;
  sc.seed = t.budget.seed;
  sc.restarts = t.budget.restarts;
  sc.sweeps = t.budget.sweeps;
  std::vector<SuiteRow> rows;
  try {
    const StabilizeReport r = stabilize(in.phi, in.d, in.cert, sc);
    const double final_def = r.iterates.empty() ? r.def_da_input.lo : r.iterates.back().def_da.lo;
    std::ostringstream os;
    os << "iterations " << r.iterates.size() << ", delta0 " << format_double(r.delta0);
    rows.push_back(row("stabilize_convergence", t, point(final_def), point(cs.tol), r.passed(),
                       "one-sided stabilization: F^n(phi) converges, then the opposite switch gives a D-modular map",
                       os.str()));
    rows.push_back(row("stabilize_distance", t, r.total_distance, point(r.theorem_bound),
                       r.converged ? r.distance_ok : false,
                       "distance to the D-modular map: ||phi - psi|| <= 12 K^2 L^3 delta"));
    double worst = 0.0;
    bool claims = true;
    for (const auto& it : r.iterates) {
      worst = std::max(worst, it.norm_phi.lo);
      claims = claims && it.step_ok && it.defect_ok;
    }
    rows.push_back(row("stabilize_claims", t, point(static_cast<double>(r.iterates.size())),
                       point(static_cast<double>(cs.max_iter)), claims,
                       "inductive claim: ||F^n - F^(n-1)|| <= K L delta 2^-(n-1) and def_DxA(F^n) <= 3 delta 2^-(2n+1)"));
    rows.push_back(row("est0", t, {worst, worst}, point(1.25 * cs.L), worst <= 1.25 * cs.L,
                       "iterate norm bound: ||F^n(phi)|| <= 5L/4"));
  } catch (const PreconditionError& e) {
    for (const char* name : {"stabilize_convergence", "stabilize_distance", "stabilize_claims", "est0"})
      rows.push_back(row(name, t, {}, {}, false, "stabilization precondition", e.what()));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Dichotomy numerics

inline std::vector<SuiteRow> kicsi_nagy_family(const Task& t) {
  const double c = t.index / 1000.0;
  const KicsiNagy k = kicsi_nagy(c);
  const double worst = std::max(std::min(k.u1, 1.0 - k.u1), std::min(k.u2, 1.0 - k.u2));
  return {row("kicsi_nagy", t, point(worst), point(k.bound), worst <= k.bound + 1e-12,
              "roots of u = u^2 + c: min(u, 1-u) <= 3c/2")};
}

inline std::vector<SuiteRow> kicsi_nagy_boundary(const Task& t) {
  const KicsiNagy k = kicsi_nagy(2.0 / 9.0);
  const double gap = std::max(std::abs(k.u1 - 1.0 / 3.0), std::abs(k.bound - 1.0 / 3.0));
  return {row("kicsi_nagy_boundary", t, point(k.u1), point(k.bound), gap <= 1e-12,
              "boundary case c = 2/9: u = 1/3 = 3c/2")};
}

inline std::vector<SuiteRow> dichotomy_threshold_family(const Task& t) {
  const DichotomyVerdict v = dichotomy_thresholds(1.0, 2.0 / 9.0);
  const double eps = std::numeric_limits<double>::epsilon();
  const bool ok = std::abs(v.low_threshold - 1.0 / 3.0) <= eps && std::abs(v.high_threshold - 2.0 / 3.0) <= eps;
  return {row("dichotomy_thresholds", t, {v.low_threshold, v.high_threshold}, {1.0 / 3.0, 2.0 / 3.0}, ok,
              "norm dichotomy thresholds 1/3 and 2/3 at delta ||p||^2 = 2/9")};
}

// ---------------------------------------------------------------------------
// Elementary-lemma checkers

/// chi(x, lambda) = lambda 1 on M_2 (+) C, plus Gaussian noise.
inline LinearMap character_plus_noise(const AlgebraPtr& a, CounterRng& rng, double eps) {
  const AlgebraPtr b = full_matrix_algebra(2);
  Mat m = Mat::Zero(4, a->dim());
  m.col(4) = b->unit();
  m += eps * rng.complex_matrix(4, a->dim()) / std::sqrt(static_cast<double>(a->dim()));
  return {a, b, m};
}

inline AlgebraPtr m2_plus_c() { return direct_sum(full_matrix_algebra(2), commutative_algebra(1)); }

inline Vec lifted(const Mat& x) {
  Vec v = Vec::Zero(5);
  v << x(0, 0), x(0, 1), x(1, 0), x(1, 1), 0.0;
  return v;
}

inline double def_hi(const LinearMap& psi, const NormBudget&) { return defect_upper(psi); }

template <class F>
SuiteRow refusal_row(const std::string& lemma, const Task& t, const std::string& anchor, F&& call) {
  try {
    call();
  } catch (const PreconditionError& e) {
    return row(lemma, t, {}, {}, true, anchor, std::string("refused: ") + e.what());
  }
  return row(lemma, t, {}, {}, false, anchor, "precondition violation was not refused");
}

inline std::vector<SuiteRow> absorption_valid(const Task& t) {
  CounterRng rng(t.seed, 1);
  const AlgebraPtr a = m2_plus_c();
  const LinearMap psi = character_plus_noise(a, rng, rng.uniform(1e-4, 1e-2));
  const Side side = t.index % 2 ? Side::right : Side::left;
  const Mat y = rng.complex_matrix(2, 2);
  Mat e11 = Mat::Zero(2, 2);
  e11(0, 0) = 1.0;
  const Vec av = lifted(e11);
  const Vec bv = lifted(side == Side::left ? Mat(e11 * y) : Mat(y * e11));
  const Certificate c = absorption_check(psi, av, bv, side, def_hi(psi, t.budget), t.budget);
  return {certificate_row("absorption_valid", t, c, "absorption: ab = b and ||psi(a)|| <= 1/3 give ||psi(b)|| <= 3/2 eta ||a|| ||b||")};
}

inline std::vector<SuiteRow> absorption_refused(const Task& t) {
  CounterRng rng(t.seed, 1);
  const AlgebraPtr a = m2_plus_c();
  const LinearMap psi = character_plus_noise(a, rng, rng.uniform(1e-4, 1e-2));
  const double eta = def_hi(psi, t.budget);
  Mat e11 = Mat::Zero(2, 2);
  e11(0, 0) = 1.0;
  Vec av = lifted(e11), bv = lifted(e11 * rng.complex_matrix(2, 2));
  double use_eta = eta;
  switch (t.index % 3) {
    case 0: bv = lifted(rng.complex_matrix(2, 2)); break;  // ab != b
    case 1:                                                 // ||psi(a)|| ~ 1
      av = Vec::Zero(5);
      av(4) = 1.0;
      bv = av * rng.uniform(0.5, 2.0);
      break;
    default: use_eta = 0.5 * defect(psi, nullptr, nullptr, t.budget).lower; break;
  }
  return {refusal_row("absorption_refused", t, "absorption preconditions", [&] {
    absorption_check(psi, av, bv, Side::left, use_eta, t.budget);
  })};
}

inline std::vector<SuiteRow> equivalent_valid(const Task& t) {
  CounterRng rng(t.seed, 1);
  const AlgebraPtr a = m2_plus_c();
  const LinearMap psi = character_plus_noise(a, rng, rng.uniform(1e-4, 1e-2));
  const double s = rng.uniform(0.7, 1.4);
  Mat u = Mat::Zero(2, 2), v = Mat::Zero(2, 2);
  u(0, 1) = s;
  v(1, 0) = 1.0 / s;
  const Certificate c = equivalent_projection_check(psi, lifted(u), lifted(v), def_hi(psi, t.budget), t.budget);
  return {certificate_row("equivalent_projection_valid", t, c,
                          "equivalent idempotents: ||psi(uv)|| <= 1/3 gives ||psi(vu)|| <= 1/3")};
}

inline std::vector<SuiteRow> equivalent_refused(const Task& t) {
  CounterRng rng(t.seed, 1);
  const AlgebraPtr a = m2_plus_c();
  const LinearMap psi = character_plus_noise(a, rng, rng.uniform(1e-4, 1e-2));
  double eta = def_hi(psi, t.budget);
  Mat u = Mat::Zero(2, 2), v = Mat::Zero(2, 2);
  u(0, 1) = 1.0;
  v(1, 0) = 1.0;
  Vec uv = lifted(u), vv = lifted(v);
  switch (t.index % 4) {
    case 0: vv = 2.0 * vv; break;  // uv not idempotent
    case 1:                        // psi(uv) ~ 1
      uv = vv = Vec::Zero(5);
      uv(4) = vv(4) = 1.0;
      break;
    case 2: eta = 0.3; break;  // eta ||u||^3 ||v||^3 > 2/9
    default: eta = 0.5 * defect(psi, nullptr, nullptr, t.budget).lower; break;
  }
  return {refusal_row("equivalent_projection_refused", t, "equivalent idempotent preconditions", [&] {
    equivalent_projection_check(psi, uv, vv, eta, t.budget);
  })};
}

inline std::vector<SuiteRow> small_identity_valid(const Task& t) {
  CounterRng rng(t.seed, 1);
  const AlgebraPtr a = t.index % 2 ? full_matrix_algebra(2) : commutative_algebra(3);
  const LinearMap psi = gaussian_map(a, full_matrix_algebra(2), rng, rng.uniform(1e-3, 0.1));
  const Certificate c = small_on_identity(psi, def_hi(psi, t.budget), t.budget);
  return {certificate_row("small_on_identity_valid", t, c, "small on the identity: ||psi(1)|| <= 1/3 gives ||psi|| <= 3/2 eta")};
}

inline std::vector<SuiteRow> small_identity_refused(const Task& t) {
  CounterRng rng(t.seed, 1);
  const AlgebraPtr m2 = full_matrix_algebra(2);
  LinearMap psi = gaussian_map(m2, m2, rng, rng.uniform(1e-3, 0.1));
  double eta = def_hi(psi, t.budget);
  if (t.index % 2 == 0) {
    psi = conjugation_map(m2, rng.unitary(2)) + psi;  // psi(1) ~ 1
    eta = def_hi(psi, t.budget);
  } else {
    eta = 0.5 * defect(psi, nullptr, nullptr, t.budget).lower;
  }
  return {refusal_row("small_on_identity_refused", t, "small on the identity preconditions",
                      [&] { small_on_identity(psi, eta, t.budget); })};
}

/// Oblique idempotent S e_11 S^{-1} in M_2.
inline Vec oblique_idempotent(CounterRng& rng, double spread) {
  const Mat s = Mat::Identity(2, 2) + spread * rng.complex_matrix(2, 2);
  Mat e = Mat::Zero(2, 2);
  e(0, 0) = 1.0;
  const Mat p = s * e * s.inverse();
  Vec v(4);
  v << p(0, 0), p(0, 1), p(1, 0), p(1, 1);
  return v;
}

inline std::vector<SuiteRow> dichotomy_valid(const Task& t) {
  CounterRng rng(t.seed, 1);
  const AlgebraPtr m2 = full_matrix_algebra(2);
  const LinearMap psi = conjugation_map(m2, rng.unitary(2)) + gaussian_map(m2, m2, rng, rng.uniform(1e-4, 1e-2));
  const Vec p = t.index % 3 == 0 ? m2->unit() : oblique_idempotent(rng, 0.3);
  const DichotomyVerdict v = norm_dichotomy_check(psi, p, def_hi(psi, t.budget), t.budget);
  return {row("norm_dichotomy_valid", t, point(v.value), {v.low_threshold, v.high_threshold}, v.passed(),
              "norm dichotomy: ||psi(p)|| <= 3/2 delta ||p||^2 or >= 1 - 3/2 delta ||p||^2", to_string(v.branch))};
}

inline std::vector<SuiteRow> dichotomy_refused(const Task& t) {
  CounterRng rng(t.seed, 1);
  const AlgebraPtr m2 = full_matrix_algebra(2);
  const LinearMap psi = conjugation_map(m2, rng.unitary(2)) + gaussian_map(m2, m2, rng, rng.uniform(1e-4, 1e-2));
  double delta = def_hi(psi, t.budget);
  Vec p = oblique_idempotent(rng, 0.3);
  switch (t.index % 3) {
    case 0: p = rng.complex_vector(4); break;  // not idempotent
    case 1:                                    // delta ||p||^2 > 2/9
      p << 1.0, 20.0, 0.0, 0.0;
      delta = std::max(delta, 0.01);
      break;
    default: delta = 0.5 * defect(psi, nullptr, nullptr, t.budget).lower; break;
  }
  return {refusal_row("norm_dichotomy_refused", t, "norm dichotomy preconditions",
                      [&] { norm_dichotomy_check(psi, p, delta, t.budget); })};
}

/// Homomorphism C^5 -> M_3 onto a few diagonal projections, conjugated and
/// perturbed.
inline LinearMap scan_map(CounterRng& rng, double eps) {
  const AlgebraPtr q = commutative_algebra(5);
  const AlgebraPtr b = full_matrix_algebra(3);
  const Mat u = rng.unitary(3);
  Mat m = Mat::Zero(9, 5);
  for (int pos = 0; pos < 3; ++pos) {
    const int target = static_cast<int>(rng.next_u64() % 6);  // 5 = unassigned
    if (target == 5) continue;
    const Mat e = u.col(pos) * u.col(pos).adjoint();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r * 3 + c, target) += e(r, c);
  }
  m += eps * rng.complex_matrix(9, 5) / std::sqrt(5.0);
  return {q, b, m};
}

inline std::vector<SuiteRow> scan_valid(const Task& t) {
  CounterRng rng(t.seed, 1);
  const LinearMap psi = scan_map(rng, rng.uniform(1e-4, 1e-2));
  std::vector<Vec> family;
  for (int i = 0; i < 5; ++i) family.push_back(psi.source->basis(i));
  const FamilyScan s = orthogonal_family_scan(psi, family, 1.0, def_hi(psi, t.budget), 0.5, t.budget);
  std::ostringstream os;
  os << "large " << s.large.size() << ", survivors " << s.survivors.size();
  return {row("orthogonal_family_scan_valid", t, point(s.min_ratio), point(1.0), s.passed(),
              "separation lemma at finite scale: ||y_p - y_r|| >= (c - 2 eta L^2)/||psi(p)|| and packing bound",
              os.str())};
}

inline std::vector<SuiteRow> scan_refused(const Task& t) {
  CounterRng rng(t.seed, 1);
  const LinearMap psi = scan_map(rng, rng.uniform(1e-4, 1e-2));
  double eta = def_hi(psi, t.budget);
  double c = 0.5;
  std::vector<Vec> family;
  for (int i = 0; i < 5; ++i) family.push_back(psi.source->basis(i));
  switch (t.index % 4) {
    case 0: family.push_back(family[0] + family[1]); break;  // not orthogonal
    case 1: c = eta; break;                                  // c <= 2 eta L^2
    case 2: eta = 0.5 * defect(psi, nullptr, nullptr, t.budget).lower; break;
    default: family.push_back(2.0 * family[2]); break;  // not idempotent
  }
  return {refusal_row("orthogonal_family_scan_refused", t, "separation lemma preconditions",
                      [&] { orthogonal_family_scan(psi, family, 1.0, eta, c, t.budget); })};
}

inline std::vector<SuiteRow> mvn_chain(const Task& t) {
  CounterRng rng(t.seed, 1);
  const QuotientModel model = quotient_model(2, 2);
  const LinearMap psi = gaussian_map(model.q, full_matrix_algebra(2), rng, rng.uniform(1e-3, 0.02));
  const MvnReport r = mvn_pipeline(psi, model, t.budget);
  return {row("mvn_chain", t, r.conclusion.lhs, r.conclusion.rhs, r.passed(),
              "Murray-von Neumann chain on a finite quotient: corners, transfer, dichotomy, small on identity")};
}

// ---------------------------------------------------------------------------
// Appendix

inline std::vector<SuiteRow> tsirelson_unit(const Task& t) {
  const double v = tsirelson_norm(unit_vector(t.index + 1));
  return {row("tsirelson_unit", t, point(v), point(1.0), v == 1.0, "unit vector basis is normalised: ||t_n|| = 1")};
}

inline std::vector<SuiteRow> schreier_flags(const Task& t) {
  const std::vector<int> j = t.index == 0 ? std::vector<int>{2, 3} : std::vector<int>{1, 2};
  const SchreierCert c = schreier_check(j);
  const bool want = t.index == 0;
  return {row("schreier_flag", t, point(static_cast<double>(j.size())), point(static_cast<double>(j.front())),
              c.schreier == want, "Schreier sets: |J| <= min J")};
}

inline std::vector<SuiteRow> schreier_inequality_family(const Task& t) {
  CounterRng rng(t.seed, 1);
  const int support = 1 + static_cast<int>(rng.next_u64() % 12);
  const TsirelsonVector x = random_tsirelson_vector(rng, 20, support);
  std::vector<int> j;
  if (t.index % 5 == 0) {
    j = {3, 4, 5};
  } else {
    const int m = 1 + static_cast<int>(rng.next_u64() % 10);
    const int size = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(m));
    std::set<int> s{m};
    while (static_cast<int>(s.size()) < size) s.insert(m + static_cast<int>(rng.next_u64() % 12));
    j.assign(s.begin(), s.end());
  }
  const SchreierInequality s = schreier_inequality(x, j);
  return {row("schreier_inequality", t, point(s.half_sum), point(s.norm), s.schreier && s.holds,
              "Schreier inequality: ||x|| >= 1/2 sum_{j in J} |x_j| for Schreier J")};
}

inline Word seeded_word(CounterRng& rng, int length) {
  Word w(length);
  for (auto& b : w) b = static_cast<int>(rng.next_u64() & 1U);
  return w;
}

inline Word clone_word(std::uint64_t seed, int i) {
  CounterRng rng(seed, 0xc10e + static_cast<std::uint64_t>(i));
  return seeded_word(rng, 10);
}

inline std::vector<SuiteRow> clone_family_check(const Task& t) {
  const Word f = clone_word(t.config->seed, t.index);
  const int n = static_cast<int>(f.size()) + 1;
  const CloneFamily c = clone_family(f, n);
  bool closed = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (int j = 1; j <= n; ++j) closed = closed && c.terms[j - 1] == clone_term_closed_form(f, j);
  for (int j = 0; j + 1 < n; ++j) worst = std::max(worst, static_cast<double>(c.terms[j + 1] - 2 * c.terms[j]));
  const bool ok = closed && growth_condition(c) && interval_schreier(c);
  return {row("clone_family", t, point(worst), point(2.0), ok,
              "branching families: m_(n+1) = 2 m_n + f(n), m_(j+1) <= 2 m_j + 2, gaps are Schreier sets")};
}

inline std::vector<SuiteRow> clone_intersection(const Task& t) {
  CounterRng rng(t.seed, 1);
  const int horizon = 20;
  const Word f = seeded_word(rng, horizon - 1);
  const int k = 1 + static_cast<int>(rng.next_u64() % 8);
  Word g = seeded_word(rng, horizon - 1);
  std::copy(f.begin(), f.begin() + (k - 1), g.begin());
  g[k - 1] = 1 - f[k - 1];
  const Intersection r = intersection_size(f, g, horizon);
  return {row("clone_intersection", t, point(r.count), point(k), r.matches && r.first_disagreement == k,
              "almost disjoint families: |M(f) cap M(g)| = k at the first disagreement k")};
}

constexpr int kCloneWords = 64;
constexpr int kCloneN = 20;

inline std::vector<SuiteRow> clone_projection(const Task& t) {
  const Word f = clone_word(t.config->seed, t.index);
  const CloneFamily c = clone_family(f, static_cast<int>(f.size()) + 1);
  const CloneSystemReport r = clone_system_verify({c}, kCloneN, t.seed);
  return {row("clone_projection_norm", t, point(r.contractive ? 1.0 : 0.0), point(1.0),
              r.idempotent && r.contractive && r.attains_one,
              "norm one basis projection onto the span of (t_m) for m in M")};
}

inline std::vector<SuiteRow> clone_ranks(const Task& t) {
  // Task index enumerates pairs i < j of the seeded words.
  int i = 0, rem = t.index;
  while (rem >= kCloneWords - 1 - i) {
    rem -= kCloneWords - 1 - i;
    ++i;
  }
  const int j = i + 1 + rem;
  const CloneFamily a = clone_family(clone_word(t.config->seed, i), 11);
  const CloneFamily b = clone_family(clone_word(t.config->seed, j), 11);
  const Mat prod = basis_projection(a.terms, kCloneN) * basis_projection(b.terms, kCloneN);
  const auto rank = Eigen::FullPivLU<Mat>(prod).rank();
  std::set<std::int64_t> sa, common;
  for (auto m : a.terms)
    if (m <= kCloneN) sa.insert(m);
  for (auto m : b.terms)
    if (m <= kCloneN && sa.count(m)) common.insert(m);
  return {row("clone_projection_rank", t, point(static_cast<double>(rank)), point(static_cast<double>(common.size())),
              rank == static_cast<Eigen::Index>(common.size()),
              "clone system: P_M P_M' has rank |M cap M' cap [1,N]|")};
}

inline std::vector<Family> all_families(const SuiteConfig& c) {
  const int n = c.instances, r = c.refusals;
  return {
      {"two_cocycle", 1, n, 1.0, two_cocycle},
      {"linearization", 1, n, 1.0, linearization},
      {"unitize_defect", 1, n, 1.0, unitize_defect},
      {"decompose", 1, n, 1.0, decompose},
      {"preserved_unit", 1, n, 1.0, preserved_unit},
      {"preserved_right_module", 1, n, 1.0, preserved_right},
      {"splitting_v1_n2", 1, n, 1.0, splitting_v1(2)},
      {"splitting_v1_n3", 1, n, 1.0, splitting_v1(3)},
      {"library_diagonal", 1, n, 1.0, library_diagonal_family},
      {"defect_of_perturbed", 2, n, 1.0, defect_of_perturbed_family},
      {"relative_defect", 2, n, 1.0, relative_defect_family},
      {"coboundary_square", 2, n, 1.0, coboundary_square},
      {"averaging_bound", 2, n, 1.0, averaging_bound},
      {"left_modular", 2, n, 1.0, left_modular},
      {"splitting_v2", 2, n, 1.0, splitting_v2},
      {"improving", 2, n, 1.0, improving},
      {"improving_right_modular", 2, n, 1.0, improving_right},
      {"stabilize", 3, n, 1.0, convergence},
      {"kicsi_nagy", 4, 223, 1.0, kicsi_nagy_family},
      {"kicsi_nagy_boundary", 4, 1, 1.0, kicsi_nagy_boundary},
      {"dichotomy_thresholds", 4, 1, 1.0, dichotomy_threshold_family},
      {"absorption_valid", 5, n, 1.0, absorption_valid},
      {"absorption_refused", 5, r, 1.0, absorption_refused},
      {"equivalent_projection_valid", 5, n, 1.0, equivalent_valid},
      {"equivalent_projection_refused", 5, r, 1.0, equivalent_refused},
      {"small_on_identity_valid", 5, n, 1.0, small_identity_valid},
      {"small_on_identity_refused", 5, r, 1.0, small_identity_refused},
      {"norm_dichotomy_valid", 5, n, 1.0, dichotomy_valid},
      {"norm_dichotomy_refused", 5, r, 1.0, dichotomy_refused},
      {"orthogonal_family_scan_valid", 5, n, 1.0, scan_valid},
      {"orthogonal_family_scan_refused", 5, r, 1.0, scan_refused},
      {"mvn_chain", 5, n, 1.0, mvn_chain},
      {"tsirelson_unit", 6, 50, 1.0, tsirelson_unit},
      {"schreier_flag", 6, 2, 1.0, schreier_flags},
      {"schreier_inequality", 6, 500, 1.0, schreier_inequality_family},
      {"clone_family", 6, kCloneWords, 1.0, clone_family_check},
      {"clone_intersection", 6, 50, 1.0, clone_intersection},
      {"clone_projection_norm", 6, kCloneWords, 1.0, clone_projection},
      {"clone_projection_rank", 6, kCloneWords * (kCloneWords - 1) / 2, 1.0, clone_ranks},
  };
}

}  // namespace suite_detail

inline std::vector<std::string> suite_family_names() {
  std::vector<std::string> out;
  for (const auto& f : suite_detail::all_families(SuiteConfig{})) out.push_back(f.name);
  return out;
}

inline int suite_family_criterion(const std::string& name) {
  for (const auto& f : suite_detail::all_families(SuiteConfig{}))
    if (f.name == name) return f.criterion;
  return 0;
}

/// Runs the selected families with up to `threads` workers.  Every task
/// derives its randomness from (seed, family, index) only.
inline SuiteResult run_suite(const SuiteConfig& config) {
  using namespace suite_detail;
  if (config.instances < 1 || config.refusals < 1) throw ConfigError("suite: instance counts must be positive");
  std::vector<Family> fams;
  for (auto& f : all_families(config)) {
    if (!config.families.empty() &&
        std::find(config.families.begin(), config.families.end(), f.name) == config.families.end())
      continue;
    if (f.name == "stabilize") f.min_pass_fraction = config.convergence.min_pass_fraction;
    fams.push_back(std::move(f));
  }
  for (const auto& name : config.families)
    if (std::none_of(fams.begin(), fams.end(), [&](const Family& f) { return f.name == name; }))
      throw ConfigError("suite: unknown family '" + name + "'");

  struct Slot {
    std::size_t family;
    Task task;
    std::vector<SuiteRow> rows;
    double seconds = 0.0;
  };
  std::vector<Slot> slots;
  for (std::size_t fi = 0; fi < fams.size(); ++fi) {
    const std::uint64_t fseed = derive_seed(config.seed, name_hash(fams[fi].name));
    for (int i = 0; i < fams[fi].count; ++i) {
      const std::uint64_t s = derive_seed(fseed, static_cast<std::uint64_t>(i));
      NormBudget b = config.budget;
      b.seed = derive_seed(s, 0xb0d9e7);
      slots.push_back({fi, {s, i, b, &config}, {}});
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= slots.size()) return;
      Slot& slot = slots[k];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        slot.rows = fams[slot.family].run(slot.task);
      } catch (const std::exception& e) {
        slot.rows = {row(fams[slot.family].name, slot.task, {}, {}, false, "unexpected failure", e.what())};
      }
      slot.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const unsigned threads = std::max(1U, config.threads);
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  SuiteResult out;
  for (const auto& f : fams) out.families.push_back({f.name, f.criterion, 0, 0, f.min_pass_fraction, 0.0});
  for (auto& slot : slots) {
    FamilySummary& fs = out.families[slot.family];
    fs.seconds += slot.seconds;
    for (auto& r : slot.rows) {
      ++fs.rows;
      if (r.passed) ++fs.passed;
      out.rows.push_back(std::move(r));
    }
  }
  return out;
}

inline json to_json(const SuiteRow& r) {
  json j = {{"lemma", r.lemma},
            {"instance_seed", r.instance_seed},
            {"passed", r.passed},
            {"lhs", to_json(r.lhs)},
            {"rhs", to_json(r.rhs)},
            {"anchor", r.anchor}};
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

inline std::string suite_jsonl(const SuiteResult& res) {
  std::string s;
  for (const auto& r : res.rows) {
    s += to_json(r).dump();
    s += '\n';
  }
  return s;
}

inline json suite_summary(const SuiteConfig& c, const SuiteResult& res) {
  json fams = json::array();
  for (const auto& f : res.families)
    fams.push_back({{"family", f.name},
                    {"criterion", f.criterion},
                    {"rows", f.rows},
                    {"passed", f.passed},
                    {"required_fraction", f.min_pass_fraction},
                    {"ok", f.ok()}});
  return {{"schema", 1},
          {"seed", c.seed},
          {"instances", c.instances},
          {"refusals", c.refusals},
          {"restarts", c.budget.restarts},
          {"sweeps", c.budget.sweeps},
          {"families", std::move(fams)},
          {"passed", res.passed()}};
}

}  // namespace amnm
