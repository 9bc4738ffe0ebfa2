#pragma once

// Exact diagonals for the library of amenable algebras, and the averaging
// and splitting operators they induce on cochains.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "amnm/algebra.hpp"
#include "amnm/multilinear.hpp"

namespace amnm {

/// An element sum_k c_k (x) d_k of D (x) D.
struct TensorRep {
  AlgebraPtr parent;
  std::vector<std::pair<Vec, Vec>> pairs;

  /// sum_k ||c_k|| ||d_k||, an upper bound for the projective norm.
  double proj_bound() const {
    double s = 0.0;
    for (const auto& [c, d] : pairs) s += parent->norm(c) * parent->norm(d);
    return s;
  }

  /// Coefficient matrix W = sum_k c_k d_k^T (representation independent).
  Mat coefficients() const {
    Mat w = Mat::Zero(parent->dim(), parent->dim());
    for (const auto& [c, d] : pairs) w += c * d.transpose();
    return w;
  }

  /// pi_D(w) = sum_k c_k d_k.
  Vec product() const {
    Vec p = Vec::Zero(parent->dim());
    for (const auto& [c, d] : pairs) p += parent->multiply(c, d);
    return p;
  }
};

/// a . w = sum (a c_k) (x) d_k.
inline TensorRep left_act(const Vec& a, const TensorRep& w) {
  TensorRep r{w.parent, {}};
  for (const auto& [c, d] : w.pairs) r.pairs.emplace_back(w.parent->multiply(a, c), d);
  return r;
}

/// w . a = sum c_k (x) (d_k a).
inline TensorRep right_act(const TensorRep& w, const Vec& a) {
  TensorRep r{w.parent, {}};
  for (const auto& [c, d] : w.pairs) r.pairs.emplace_back(c, w.parent->multiply(d, a));
  return r;
}

/// sigma(c (x) d) = d (x) c, re-parented to `target` (normally the opposite algebra).
inline TensorRep flip(const TensorRep& w, const AlgebraPtr& target) {
  TensorRep r{target, {}};
  for (const auto& [c, d] : w.pairs) r.pairs.emplace_back(d, c);
  return r;
}

struct DiagonalCert {
  TensorRep rep;
  double K = 0.0;
  double commutation_residual = 0.0;
  double product_residual = 0.0;
  bool valid = false;
};

/// Residuals over the basis of D: max_a ||a.w - w.a|| (coefficient Euclidean
/// norm of the tensor) and max_a ||a pi(w) - a||.
inline DiagonalCert verify_diagonal(const AlgebraPtr& d, const TensorRep& w) {
  if (!same_algebra(*w.parent, *d)) throw std::domain_error("verify_diagonal: tensor is not over D");
  DiagonalCert cert;
  cert.rep = w;
  cert.K = w.proj_bound();
  const Mat coeff = w.coefficients();
  const Vec p = w.product();
  double scale = std::max(1.0, cert.K);
  for (int i = 0; i < d->dim(); ++i) {
    const Vec a = d->basis(i);
    scale = std::max(scale, d->norm(a));
    const Mat left = d->left_basis(i) * coeff;
    const Mat right = coeff * d->right_matrix(a).transpose();
    cert.commutation_residual = std::max(cert.commutation_residual, (left - right).norm());
    cert.product_residual = std::max(cert.product_residual, d->norm(d->multiply(a, p) - a));
  }
  const double tol = 1e-10 * scale;
  cert.valid = cert.commutation_residual <= tol && cert.product_residual <= tol;
  return cert;
}

namespace detail {

inline TensorRep library_rep(const AlgebraPtr& d) {
  const int n = d->dim();
  switch (d->kind()) {
    case AlgebraKind::full_matrix: {
      const int k = d->order();
      TensorRep w{d, {}};
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          w.pairs.emplace_back(d->basis(i * k + j) / static_cast<double>(k), d->basis(j * k + i));
      return w;
    }
    case AlgebraKind::commutative: {
      if (n == 1) {
        // Scalar algebra with an arbitrary normalised unit.
        const Vec u = d->unit();
        return {d, {{u, u}}};
      }
      TensorRep w{d, {}};
      for (int i = 0; i < n; ++i) w.pairs.emplace_back(d->basis(i), d->basis(i));
      return w;
    }
    case AlgebraKind::direct_sum: {
      const auto& a1 = d->children()[0];
      const auto& a2 = d->children()[1];
      TensorRep w{d, {}};
      const TensorRep w1 = library_rep(a1), w2 = library_rep(a2);
      for (const auto& [c, e] : w1.pairs) {
        Vec cc = Vec::Zero(n), ee = Vec::Zero(n);
        cc.head(a1->dim()) = c;
        ee.head(a1->dim()) = e;
        w.pairs.emplace_back(cc, ee);
      }
      for (const auto& [c, e] : w2.pairs) {
        Vec cc = Vec::Zero(n), ee = Vec::Zero(n);
        cc.tail(a2->dim()) = c;
        ee.tail(a2->dim()) = e;
        w.pairs.emplace_back(cc, ee);
      }
      return w;
    }
    case AlgebraKind::unitization: {
      // D0# = C q (+) D0 with q = 1# - 1_{D0} a central idempotent.
      const auto& d0 = d->children()[0];
      const TensorRep w0 = library_rep(d0);
      TensorRep w{d, {}};
      for (const auto& [c, e] : w0.pairs) {
        Vec cc = Vec::Zero(n), ee = Vec::Zero(n);
        cc.tail(n - 1) = c;
        ee.tail(n - 1) = e;
        w.pairs.emplace_back(cc, ee);
      }
      Vec q = Vec::Zero(n);
      q(0) = 1.0;
      q.tail(n - 1) = -d0->unit();
      w.pairs.emplace_back(q, q);
      return w;
    }
    case AlgebraKind::opposite:
      return flip(library_rep(d->children()[0]), d);
    case AlgebraKind::generic:
      break;
  }
  throw std::domain_error("no library diagonal for this algebra");
}

}  // namespace detail

/// Exact diagonal for M_k, C^k, direct sums and unitizations of these, and
/// their opposites.
inline DiagonalCert library_diagonal(const AlgebraPtr& d) {
  if (d->kind() == AlgebraKind::unitization && d->children().empty())
    throw std::domain_error("no library diagonal for this algebra");
  DiagonalCert cert = verify_diagonal(d, detail::library_rep(d));
  if (!cert.valid) throw std::logic_error("library diagonal failed verification");
  return cert;
}

/// <w>^n_phi(psi)(a_1..a_n) = sum_k phi(c_k) psi(d_k, a_1..a_n), with the
/// pairs already expressed in coordinates of phi's source.
inline Cochain average_pairs(const LinearMap& phi, const std::vector<std::pair<Vec, Vec>>& pairs,
                             const Cochain& psi) {
  if (psi.arity() < 2) throw std::domain_error("average: cochain arity must be at least 2");
  if (psi.slot_dim(0) != phi.source->dim())
    throw std::domain_error("average: first slot is not phi's source");
  if (!same_algebra(*psi.target, *phi.target)) throw std::domain_error("average: targets differ");
  std::vector<AlgebraPtr> slots(psi.slots.begin() + 1, psi.slots.end());
  Cochain out = Cochain::zero(psi.target, slots);
  for (const auto& [c, d] : pairs) {
    const Cochain inner = contract_slot(psi, 0, d);
    out.data += map_output(phi.target->left_matrix(phi.matrix * c), inner).data;
  }
  return out;
}

/// The averaging operator for w in D (x) D.  If psi's first slot is already
/// restricted to D the pairs are used as they are.
inline Cochain average(int n, const LinearMap& phi, const Subalgebra& d, const TensorRep& w,
                       const Cochain& psi) {
  if (psi.arity() != n + 1) throw std::domain_error("average: cochain arity must be n+1");
  if (!same_algebra(*w.parent, *d.algebra)) throw std::domain_error("average: tensor is not over D");
  std::vector<std::pair<Vec, Vec>> pairs;
  const bool restricted = psi.slot_dim(0) == d.algebra->dim() && same_algebra(*psi.slots[0], *d.algebra);
  if (!restricted && psi.slot_dim(0) != d.ambient->dim())
    throw std::domain_error("average: first slot is neither D nor A");
  for (const auto& [c, e] : w.pairs) pairs.emplace_back(d.embed(c), restricted ? e : d.embed(e));
  if (!restricted) return average_pairs(phi, pairs, psi);

  // phi(c) is evaluated in A; the d-slot is contracted in D coordinates.
  std::vector<AlgebraPtr> slots(psi.slots.begin() + 1, psi.slots.end());
  Cochain out = Cochain::zero(psi.target, slots);
  for (const auto& [c, e] : pairs) {
    const Cochain inner = contract_slot(psi, 0, e);
    out.data += map_output(phi.target->left_matrix(phi.matrix * c), inner).data;
  }
  return out;
}

/// Sigma^n_phi: with an exact diagonal the net limit is a single evaluation.
inline Cochain split(int n, const LinearMap& phi, const Subalgebra& d, const DiagonalCert& cert,
                     const Cochain& psi) {
  if (!cert.valid) throw PreconditionError("split: diagonal certificate is not valid");
  return average(n, phi, d, cert.rep, psi);
}

}  // namespace amnm
