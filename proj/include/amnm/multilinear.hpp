#pragma once

// Cochain calculus over finite-dimensional algebras and certified estimates
// of multilinear operator norms.
//
// A cochain of arity n is stored as a dense coefficient tensor with the output
// index fastest: entry (o, i_1, ..., i_n) lives at
//   o + d_out * (i_1 + d_1 * (i_2 + d_2 * (...))).
// Each input slot carries its own algebra so that restrictions to a
// subalgebra (the first slot over D, say) are ordinary cochains.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "amnm/algebra.hpp"
#include "amnm/random.hpp"

namespace amnm {

struct LinearMap {
  AlgebraPtr source;
  AlgebraPtr target;
  Mat matrix;  // dim(target) x dim(source)

  LinearMap(AlgebraPtr s, AlgebraPtr t, Mat m)
      : source(std::move(s)), target(std::move(t)), matrix(std::move(m)) {
    if (matrix.rows() != target->dim() || matrix.cols() != source->dim())
      throw std::domain_error("linear map shape does not match its algebras");
  }

  Vec operator()(const Vec& a) const { return matrix * a; }

  static LinearMap zero(const AlgebraPtr& s, const AlgebraPtr& t) {
    return {s, t, Mat::Zero(t->dim(), s->dim())};
  }
};

inline LinearMap operator+(const LinearMap& a, const LinearMap& b) {
  return {a.source, a.target, a.matrix + b.matrix};
}
inline LinearMap operator-(const LinearMap& a, const LinearMap& b) {
  return {a.source, a.target, a.matrix - b.matrix};
}

struct Cochain {
  AlgebraPtr target;
  std::vector<AlgebraPtr> slots;
  Vec data;

  Cochain(AlgebraPtr t, std::vector<AlgebraPtr> s, Vec d)
      : target(std::move(t)), slots(std::move(s)), data(std::move(d)) {
    if (data.size() != expected_size()) throw std::domain_error("cochain tensor has wrong size");
  }

  static Cochain zero(const AlgebraPtr& t, std::vector<AlgebraPtr> s) {
    Eigen::Index n = t->dim();
    for (const auto& a : s) n *= a->dim();
    return {t, std::move(s), Vec::Zero(n)};
  }

  int arity() const { return static_cast<int>(slots.size()); }
  int out_dim() const { return target->dim(); }
  int slot_dim(int s) const { return slots[s]->dim(); }

  Eigen::Index expected_size() const {
    Eigen::Index n = target->dim();
    for (const auto& a : slots) n *= a->dim();
    return n;
  }

  /// Flat offset of the output column for a basis tuple.
  Eigen::Index offset(const std::vector<int>& idx) const {
    Eigen::Index off = 0, stride = out_dim();
    for (int s = 0; s < arity(); ++s) {
      off += idx[s] * stride;
      stride *= slot_dim(s);
    }
    return off;
  }

  Vec at(const std::vector<int>& idx) const { return data.segment(offset(idx), out_dim()); }

  double max_abs() const { return data.size() ? data.cwiseAbs().maxCoeff() : 0.0; }
};

inline Cochain operator+(const Cochain& a, const Cochain& b) {
  return {a.target, a.slots, a.data + b.data};
}
inline Cochain operator-(const Cochain& a, const Cochain& b) {
  return {a.target, a.slots, a.data - b.data};
}
inline Cochain operator*(cplx s, const Cochain& a) { return {a.target, a.slots, s * a.data}; }

/// max |a - b| / max(1, max|a|, max|b|).
inline double relative_difference(const Cochain& a, const Cochain& b) {
  if (a.data.size() != b.data.size()) throw std::domain_error("cochain shapes differ");
  const double scale = std::max({1.0, a.max_abs(), b.max_abs()});
  return a.data.size() ? (a.data - b.data).cwiseAbs().maxCoeff() / scale : 0.0;
}

inline Cochain as_cochain(const LinearMap& f) {
  return {f.target, {f.source}, Eigen::Map<const Vec>(f.matrix.data(), f.matrix.size())};
}

inline LinearMap as_linear_map(const Cochain& c) {
  if (c.arity() != 1) throw std::domain_error("as_linear_map: arity must be 1");
  return {c.slots[0], c.target, Eigen::Map<const Mat>(c.data.data(), c.out_dim(), c.slot_dim(0))};
}

// ---------------------------------------------------------------------------
// Tensor helpers

namespace detail {

/// Visits every multi-index of `dims` (first index fastest) with its flat offset.
template <class F>
void for_each_index(const std::vector<int>& dims, F&& f) {
  std::vector<int> idx(dims.size(), 0);
  Eigen::Index total = 1;
  for (int d : dims) total *= d;
  for (Eigen::Index flat = 0; flat < total; ++flat) {
    f(idx, flat);
    for (std::size_t m = 0; m < dims.size(); ++m) {
      if (++idx[m] < dims[m]) break;
      idx[m] = 0;
    }
  }
}

inline std::vector<int> all_dims(int out, const std::vector<int>& slot_dims) {
  std::vector<int> d{out};
  d.insert(d.end(), slot_dims.begin(), slot_dims.end());
  return d;
}

/// Replace mode m (0 = output) by M * (that mode): new extent M.rows().
inline Vec mode_product(const Vec& data, const std::vector<int>& dims, std::size_t m, const Mat& mat,
                        std::vector<int>* new_dims = nullptr) {
  std::vector<int> nd = dims;
  nd[m] = static_cast<int>(mat.rows());
  Eigen::Index total = 1;
  for (int d : nd) total *= d;
  Vec out = Vec::Zero(total);
  std::vector<Eigen::Index> stride(dims.size()), nstride(dims.size());
  Eigen::Index s = 1, ns = 1;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    stride[i] = s;
    nstride[i] = ns;
    s *= dims[i];
    ns *= nd[i];
  }
  for_each_index(dims, [&](const std::vector<int>& idx, Eigen::Index flat) {
    const cplx v = data(flat);
    if (v == cplx(0)) return;
    Eigen::Index base = 0;
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (i != m) base += idx[i] * nstride[i];
    for (Eigen::Index r = 0; r < mat.rows(); ++r) out(base + r * nstride[m]) += mat(r, idx[m]) * v;
  });
  if (new_dims) *new_dims = nd;
  return out;
}

/// Mode-m unfolding: rows indexed by mode m.
inline Mat unfold(const Vec& data, const std::vector<int>& dims, std::size_t m) {
  Eigen::Index total = data.size();
  Mat u = Mat::Zero(dims[m], total / dims[m]);
  for_each_index(dims, [&](const std::vector<int>& idx, Eigen::Index flat) {
    Eigen::Index col = 0, stride = 1;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (i == m) continue;
      col += idx[i] * stride;
      stride *= dims[i];
    }
    u(idx[m], col) = data(flat);
  });
  return u;
}

/// Evaluate at slot vectors (output vector).
inline Vec evaluate(const Vec& data, int out, const std::vector<int>& slot_dims,
                    const std::vector<Vec>& xs) {
  Vec cur = data;
  Eigen::Index rows = data.size();
  for (int s = static_cast<int>(slot_dims.size()) - 1; s >= 0; --s) {
    rows /= slot_dims[s];
    Eigen::Map<const Mat> m(cur.data(), rows, slot_dims[s]);
    Vec next = m * xs[s];
    cur = std::move(next);
  }
  (void)out;
  return cur;
}

/// Contract every slot except `skip`: returns the d_out x d_skip matrix.
inline Mat contract_all_but(const Vec& data, int out, const std::vector<int>& slot_dims,
                            const std::vector<Vec>& xs, int skip) {
  // Trailing slots first, then each remaining column over the leading slots.
  Vec cur = data;
  Eigen::Index rows = data.size();
  for (int s = static_cast<int>(slot_dims.size()) - 1; s > skip; --s) {
    rows /= slot_dims[s];
    Eigen::Map<const Mat> m(cur.data(), rows, slot_dims[s]);
    Vec next = m * xs[s];
    cur = std::move(next);
  }
  const int ds = slot_dims[skip];
  Eigen::Map<const Mat> cols(cur.data(), rows / ds, ds);
  if (skip == 0) return cols;
  const std::vector<int> lead(slot_dims.begin(), slot_dims.begin() + skip);
  const std::vector<Vec> lx(xs.begin(), xs.begin() + skip);
  Mat m(out, ds);
  for (int j = 0; j < ds; ++j) m.col(j) = evaluate(Vec(cols.col(j)), out, lead, lx);
  return m;
}

}  // namespace detail

inline std::vector<int> slot_dims(const Cochain& c) {
  std::vector<int> d;
  for (const auto& a : c.slots) d.push_back(a->dim());
  return d;
}

/// psi(x_1, ..., x_n).
inline Vec evaluate(const Cochain& c, const std::vector<Vec>& xs) {
  if (static_cast<int>(xs.size()) != c.arity()) throw std::domain_error("evaluate: wrong arity");
  return detail::evaluate(c.data, c.out_dim(), slot_dims(c), xs);
}

/// Fix slot s to the vector x (arity drops by one).
inline Cochain contract_slot(const Cochain& c, int s, const Vec& x) {
  std::vector<int> dims = detail::all_dims(c.out_dim(), slot_dims(c));
  std::vector<int> nd;
  Vec data = detail::mode_product(c.data, dims, static_cast<std::size_t>(s) + 1, x.transpose(), &nd);
  std::vector<AlgebraPtr> slots = c.slots;
  slots.erase(slots.begin() + s);
  return {c.target, std::move(slots), std::move(data)};
}

/// Apply a matrix to the output index (e.g. left multiplication in B).
inline Cochain map_output(const Mat& m, const Cochain& c) {
  Vec d = c.data;
  Eigen::Map<Mat> cols(d.data(), c.out_dim(), c.data.size() / c.out_dim());
  cols = (m * cols).eval();
  return {c.target, c.slots, std::move(d)};
}

// ---------------------------------------------------------------------------
// Defect map, coboundary, restriction

/// phi^v(a, b) = phi(ab) - phi(a) phi(b).
inline Cochain check_map(const LinearMap& phi) {
  const Algebra& a = *phi.source;
  const Algebra& b = *phi.target;
  const int da = a.dim(), db = b.dim();
  Cochain out = Cochain::zero(phi.target, {phi.source, phi.source});
  for (int j = 0; j < da; ++j)
    for (int i = 0; i < da; ++i) {
      const Vec prod = a.left_basis(i).col(j);  // e_i e_j
      const Vec v = phi.matrix * prod - b.multiply(phi.matrix.col(i), phi.matrix.col(j));
      out.data.segment((i + static_cast<Eigen::Index>(da) * j) * db, db) = v;
    }
  return out;
}

/// (a_1, a_2) -> g(a_1) h(a_2), the bilinear product term.
inline Cochain product_cochain(const LinearMap& g, const LinearMap& h) {
  const int da = g.source->dim(), db = g.target->dim();
  Cochain out = Cochain::zero(g.target, {g.source, h.source});
  for (int j = 0; j < h.source->dim(); ++j)
    for (int i = 0; i < da; ++i)
      out.data.segment((i + static_cast<Eigen::Index>(da) * j) * db, db) =
          g.target->multiply(g.matrix.col(i), h.matrix.col(j));
  return out;
}

/// The approximate Hochschild coboundary d^n_phi: arity n -> arity n+1,
///   phi(a_1) psi(a_2..a_{n+1}) + sum_j (-1)^j psi(.., a_j a_{j+1}, ..)
///   + (-1)^{n+1} psi(a_1..a_n) phi(a_{n+1}).
inline Cochain coboundary(int n, const LinearMap& phi, const Cochain& psi) {
  if (n < 1) throw std::domain_error("coboundary: arity must be at least 1");
  if (psi.arity() != n) throw std::domain_error("coboundary: cochain arity differs from n");
  const Algebra& a = *phi.source;
  const Algebra& b = *phi.target;
  for (const auto& s : psi.slots)
    if (!same_algebra(*s, a)) throw std::domain_error("coboundary: cochain slots are not phi's source");
  if (!same_algebra(*psi.target, b)) throw std::domain_error("coboundary: targets differ");

  std::vector<AlgebraPtr> slots(n + 1, phi.source);
  Cochain out = Cochain::zero(phi.target, slots);
  const int da = a.dim(), db = b.dim();
  std::vector<int> dims(n + 1, da);
  std::vector<Mat> left_phi(da), right_phi(da);
  for (int i = 0; i < da; ++i) {
    left_phi[i] = b.left_matrix(phi.matrix.col(i));
    right_phi[i] = b.right_matrix(phi.matrix.col(i));
  }
  std::vector<int> sub(n);
  detail::for_each_index(dims, [&](const std::vector<int>& idx, Eigen::Index flat) {
    Vec v = Vec::Zero(db);
    // phi(a_1) psi(a_2, ..., a_{n+1})
    std::copy(idx.begin() + 1, idx.end(), sub.begin());
    v += left_phi[idx[0]] * psi.at(sub);
    // inner terms
    for (int j = 1; j <= n; ++j) {
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      const Vec prod = a.left_basis(idx[j - 1]).col(idx[j]);
      int p = 0;
      for (int t = 0; t <= n; ++t) {
        if (t == j) continue;
        sub[p++] = idx[t];
      }
      // slot j-1 of psi receives a_j a_{j+1}
      for (int k = 0; k < da; ++k) {
        if (prod(k) == cplx(0)) continue;
        sub[j - 1] = k;
        v += sign * prod(k) * psi.at(sub);
      }
    }
    // (-1)^{n+1} psi(a_1..a_n) phi(a_{n+1})
    std::copy(idx.begin(), idx.end() - 1, sub.begin());
    const double last = ((n + 1) % 2 == 0) ? 1.0 : -1.0;
    v += last * (right_phi[idx[n]] * psi.at(sub));
    out.data.segment(flat * db, db) = v;
  });
  return out;
}

/// Re-express slot s in the coordinates of an embedded subalgebra.
inline Cochain restrict_slot(const Cochain& psi, int s, const Subalgebra& d) {
  if (s < 0 || s >= psi.arity()) throw std::domain_error("restrict_slot: no such slot");
  if (d.embedding.rows() != psi.slot_dim(s) || !same_algebra(*psi.slots[s], *d.ambient))
    throw std::domain_error("restrict_slot: embedding does not land in the slot's algebra");
  std::vector<int> dims = detail::all_dims(psi.out_dim(), slot_dims(psi));
  Vec data = detail::mode_product(psi.data, dims, static_cast<std::size_t>(s) + 1,
                                  d.embedding.transpose());
  std::vector<AlgebraPtr> slots = psi.slots;
  slots[s] = d.algebra;
  return {psi.target, std::move(slots), std::move(data)};
}

/// Res_D: restriction of the first variable to D.
inline Cochain restrict_first(const Subalgebra& d, const Cochain& psi) {
  return restrict_slot(psi, 0, d);
}

// ---------------------------------------------------------------------------
// Norm estimation

struct NormBudget {
  int restarts = 32;
  int sweeps = 200;
  std::uint64_t seed = 0;
};

/// Certified interval for a multilinear norm.  `lower` is the value attained
/// at `witness` (unit-ball arguments); `upper` is a rigorous bound up to
/// floating-point rounding.
struct DefectEstimate {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<Vec> witness;
  int restarts_used = 0;
  std::uint64_t seed = 0;
};

namespace detail {

struct Form {
  const Algebra* out;
  std::vector<const Algebra*> slots;
  Vec data;

  std::vector<int> dims() const {
    std::vector<int> d;
    for (const auto* a : slots) d.push_back(a->dim());
    return d;
  }
};

inline double sigma_max(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

/// Euclidean-envelope upper bound: min over unfoldings of the transformed tensor.
inline double upper_bound(const Form& f) {
  std::vector<int> dims = all_dims(f.out->dim(), f.dims());
  Vec t = mode_product(f.data, dims, 0, f.out->envelope(), &dims);
  double factor = f.out->envelope_upper();
  for (std::size_t s = 0; s < f.slots.size(); ++s) {
    t = mode_product(t, dims, s + 1, f.slots[s]->envelope_pinv().transpose(), &dims);
    factor /= f.slots[s]->envelope_lower();
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < dims.size(); ++m) best = std::min(best, sigma_max(unfold(t, dims, m)));
  return factor * best;
}

inline DefectEstimate estimate_plain(const Form& f, const NormBudget& budget, std::uint64_t seed) {
  DefectEstimate est;
  est.seed = seed;
  const int n = static_cast<int>(f.slots.size());
  const std::vector<int> sd = f.dims();
  const int dout = f.out->dim();
  if (f.data.size() == 0 || f.data.cwiseAbs().maxCoeff() == 0.0) {
    for (const auto* s : f.slots) est.witness.push_back(Vec::Zero(s->dim()));
    return est;
  }
  if (n == 0) {
    est.lower = est.upper = f.out->norm(f.data);
    return est;
  }
  est.upper = upper_bound(f);

  auto value_at = [&](const std::vector<Vec>& xs) {
    return f.out->norm(evaluate(f.data, dout, sd, xs));
  };
  auto normalize = [](const Algebra& a, Vec x) {
    const double nx = a.norm(x);
    if (nx > 1.0 || (nx > 0 && nx < 1.0)) x /= nx;
    return x;
  };

  // Spectral initial guess from the transformed tensor's unfoldings.
  std::vector<Vec> svd_init;
  {
    std::vector<int> dims = all_dims(dout, sd);
    Vec t = mode_product(f.data, dims, 0, f.out->envelope(), &dims);
    for (int s = 0; s < n; ++s)
      t = mode_product(t, dims, s + 1, f.slots[s]->envelope_pinv().transpose(), &dims);
    for (int s = 0; s < n; ++s) {
      Eigen::JacobiSVD<Mat> svd(unfold(t, dims, s + 1), Eigen::ComputeThinU);
      const Vec u = svd.matrixU().col(0).conjugate();
      svd_init.push_back(normalize(*f.slots[s], f.slots[s]->envelope_pinv() * u));
    }
  }

  double best = -1.0;
  const int restarts = std::max(1, budget.restarts);
  for (int r = 0; r < restarts; ++r) {
    std::vector<Vec> xs;
    if (r == 0) {
      xs = svd_init;
    } else {
      CounterRng rng(seed, static_cast<std::uint64_t>(r));
      for (int s = 0; s < n; ++s) xs.push_back(normalize(*f.slots[s], rng.complex_vector(sd[s])));
    }
    double value = value_at(xs);
    auto consider = [&](const std::vector<Vec>& cand, double v) {
      if (v > best + 1e-12 * std::max(1.0, best)) {
        best = v;
        est.witness = cand;
      }
    };
    consider(xs, value);
    for (int sweep = 0; sweep < budget.sweeps; ++sweep) {
      for (int s = 0; s < n; ++s) {
        const Vec z = evaluate(f.data, dout, sd, xs);
        const Vec xi = f.out->norming_functional(z);
        const Mat m = contract_all_but(f.data, dout, sd, xs, s);
        const Vec g = m.transpose() * xi;
        if (g.cwiseAbs().maxCoeff() == 0.0) continue;
        xs[s] = f.slots[s]->maximize_functional(g);
      }
      const double next = value_at(xs);
      consider(xs, next);
      const bool stalled = next - value < 1e-12 * std::max(1.0, value);
      value = std::max(value, next);
      if (stalled) break;
    }
    ++est.restarts_used;
  }
  est.lower = std::max(0.0, best);
  if (est.lower > est.upper * (1.0 + 1e-9) + 1e-14)
    throw std::logic_error("norm estimate: witness value exceeds the certified upper bound");
  est.upper = std::max(est.upper, est.lower);
  return est;
}

/// Slots in unitization mode are split over the extreme points of the
/// l1-sum ball: the adjoined unit direction, or the inner algebra's ball.
inline DefectEstimate estimate(const Form& f, const NormBudget& budget, std::uint64_t seed) {
  int s = -1;
  for (std::size_t i = 0; i < f.slots.size(); ++i)
    if (f.slots[i]->mode() == NormMode::unitization) {
      s = static_cast<int>(i);
      break;
    }
  if (s < 0) return estimate_plain(f, budget, seed);

  std::vector<int> dims = all_dims(f.out->dim(), f.dims());
  const int d = f.slots[s]->dim();

  Form inner = f;
  inner.slots[s] = f.slots[s]->inner().get();
  Mat select = Mat::Zero(d - 1, d);
  select.rightCols(d - 1) = Mat::Identity(d - 1, d - 1);
  inner.data = mode_product(f.data, dims, s + 1, select);
  DefectEstimate in = estimate(inner, budget, seed);
  for (auto& w : in.witness) (void)w;
  if (!in.witness.empty()) {
    Vec full = Vec::Zero(d);
    full.tail(d - 1) = in.witness[s];
    in.witness[s] = full;
  }

  Form unit = f;
  unit.slots.erase(unit.slots.begin() + s);
  Mat e0 = Mat::Zero(1, d);
  e0(0, 0) = 1.0;
  std::vector<int> nd;
  unit.data = mode_product(f.data, dims, s + 1, e0, &nd);  // extent 1 in slot s
  DefectEstimate un = estimate(unit, budget, derive_seed(seed, static_cast<std::uint64_t>(s) + 1));
  Vec e0v = Vec::Zero(d);
  e0v(0) = 1.0;
  if (!un.witness.empty() || unit.slots.empty()) un.witness.insert(un.witness.begin() + s, e0v);

  DefectEstimate out = in.lower >= un.lower ? in : un;
  out.lower = std::max(in.lower, un.lower);
  out.upper = std::max(in.upper, un.upper);
  out.restarts_used = in.restarts_used + un.restarts_used;
  out.seed = seed;
  return out;
}

/// Certified upper bound only, with the same slot splitting as estimate().
inline double estimate_upper(const Form& f) {
  if (f.data.size() == 0 || f.data.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  if (f.slots.empty()) return f.out->norm(f.data);
  int s = -1;
  for (std::size_t i = 0; i < f.slots.size(); ++i)
    if (f.slots[i]->mode() == NormMode::unitization) {
      s = static_cast<int>(i);
      break;
    }
  if (s < 0) return upper_bound(f);
  std::vector<int> dims = all_dims(f.out->dim(), f.dims());
  const int d = f.slots[s]->dim();
  Form inner = f;
  inner.slots[s] = f.slots[s]->inner().get();
  Mat select = Mat::Zero(d - 1, d);
  select.rightCols(d - 1) = Mat::Identity(d - 1, d - 1);
  inner.data = mode_product(f.data, dims, s + 1, select);
  Form unit = f;
  unit.slots.erase(unit.slots.begin() + s);
  Mat e0 = Mat::Zero(1, d);
  e0(0, 0) = 1.0;
  std::vector<int> nd;
  unit.data = mode_product(f.data, dims, s + 1, e0, &nd);
  return std::max(estimate_upper(inner), estimate_upper(unit));
}

}  // namespace detail

/// Certified interval for the norm of a cochain of arity 1 or 2.
inline DefectEstimate multilinear_norm(const Cochain& psi, const NormBudget& budget = {}) {
  if (psi.arity() < 1 || psi.arity() > 2)
    throw std::domain_error("multilinear_norm: only arities 1 and 2 are supported");
  detail::Form f{psi.target.get(), {}, psi.data};
  for (const auto& s : psi.slots) f.slots.push_back(s.get());
  return detail::estimate(f, budget, budget.seed);
}

/// Lower estimate only (any arity): best value found by alternating ascent.
inline double multilinear_lower(const Cochain& psi, const NormBudget& budget = {}) {
  detail::Form f{psi.target.get(), {}, psi.data};
  for (const auto& s : psi.slots) f.slots.push_back(s.get());
  return detail::estimate(f, budget, budget.seed).lower;
}

inline DefectEstimate linear_map_norm(const LinearMap& phi, const NormBudget& budget = {}) {
  return multilinear_norm(as_cochain(phi), budget);
}

/// def, def_{DxA}, def_{AxD} or def_{DxD} depending on which slots are restricted.
inline DefectEstimate defect(const LinearMap& phi, const Subalgebra* left = nullptr,
                             const Subalgebra* right = nullptr, const NormBudget& budget = {}) {
  Cochain c = check_map(phi);
  if (left) c = restrict_slot(c, 0, *left);
  if (right) c = restrict_slot(c, 1, *right);
  return multilinear_norm(c, budget);
}

/// Certified upper bound for ||phi|| without the ascent.
inline double linear_map_upper(const LinearMap& phi) {
  const Cochain c = as_cochain(phi);
  detail::Form f{c.target.get(), {}, c.data};
  for (const auto& s : c.slots) f.slots.push_back(s.get());
  return detail::estimate_upper(f);
}

/// Certified upper bound for def(phi) without the ascent.
inline double defect_upper(const LinearMap& phi) {
  const Cochain c = check_map(phi);
  detail::Form f{c.target.get(), {}, c.data};
  for (const auto& s : c.slots) f.slots.push_back(s.get());
  return detail::estimate_upper(f);
}

/// Sup-norm of a linear map's restriction to a subalgebra, i.e. ||phi|_D||.
inline DefectEstimate restricted_map_norm(const LinearMap& phi, const Subalgebra& d,
                                          const NormBudget& budget = {}) {
  return multilinear_norm(restrict_slot(as_cochain(phi), 0, d), budget);
}

}  // namespace amnm
