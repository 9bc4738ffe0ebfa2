#pragma once

// Seeded scenarios: library algebras, a diagonal subalgebra with its exact
// diagonal, a base homomorphism and a perturbation of prescribed size.

#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "amnm/algebra.hpp"
#include "amnm/diagonal.hpp"
#include "amnm/multilinear.hpp"
#include "amnm/random.hpp"

namespace amnm {

struct InstanceConfig {
  int order = 2;  // A = B = M_order, D = diagonal C^order
  NormMode mode = NormMode::spectral;
  double gamma_norm = 4e-4;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  NormBudget budget{};
};

struct Instance {
  AlgebraPtr a;
  Subalgebra d;
  DiagonalCert cert;
  Mat u;            // phi_0(a) = u a u*
  LinearMap base;   // phi_0
  LinearMap gamma;  // gamma(1_D) = 0, ||gamma|| = gamma_norm (lower estimate)
  LinearMap phi;    // phi_0 + gamma
};

/// M_k in the chosen norm mode.  Frobenius mode is the Euclidean norm on
/// matrix entries, which is submultiplicative.
inline AlgebraPtr matrix_algebra(int k, NormMode mode) {
  AlgebraPtr m = full_matrix_algebra(k);
  if (mode == NormMode::spectral) return m;
  if (mode != NormMode::frobenius) throw ConfigError("matrix algebras support spectral or frobenius norms");
  AlgebraSpec s = m->spec();
  s.mode = NormMode::frobenius;
  return Algebra::create(std::move(s));
}

/// The diagonal copy of C^k inside M_k.
inline Subalgebra diagonal_subalgebra(const AlgebraPtr& mk) {
  const int k = mk->order();
  AlgebraPtr ck = commutative_algebra(k, mk->mode());
  Mat emb = Mat::Zero(k * k, k);
  for (int i = 0; i < k; ++i) emb(i * k + i, i) = 1.0;
  return embed_subalgebra(ck, mk, emb);
}

/// x -> u x u* written in coordinates of M_k.
inline LinearMap conjugation_map(const AlgebraPtr& mk, const Mat& u) {
  const int k = mk->order();
  Mat m(k * k, k * k);
  for (int j = 0; j < k * k; ++j) {
    const Mat x = mk->realize(mk->basis(j));
    const Mat y = u * x * u.adjoint();
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) m(r * k + c, j) = y(r, c);
  }
  return {mk, mk, m};
}

/// Gaussian linear map scaled so that its norm lower estimate is `size`.
/// Vanishes on `kernel` when given.
inline LinearMap random_map(const AlgebraPtr& a, const AlgebraPtr& b, CounterRng& rng, double size,
                            const Vec* kernel = nullptr, const NormBudget& budget = {}) {
  Mat g = rng.complex_matrix(b->dim(), a->dim());
  if (kernel) {
    const Vec v = *kernel / kernel->norm();
    g = g * (Mat::Identity(a->dim(), a->dim()) - v * v.adjoint());
  }
  LinearMap out{a, b, g};
  if (size == 0.0) {
    out.matrix.setZero();
    return out;
  }
  const double lo = linear_map_norm(out, budget).lower;
  if (!(lo > 0.0)) throw std::domain_error("random_map: no nonzero map vanishes on the kernel");
  out.matrix *= size / lo;
  return out;
}

inline Instance generate_instance(const InstanceConfig& cfg) {
  if (cfg.order < 1 || cfg.order > 4) throw ConfigError("instance order must be between 1 and 4");
  if (!(cfg.gamma_norm >= 0.0) || cfg.gamma_norm > 1.0) throw ConfigError("gamma_norm must lie in [0, 1]");
  if (cfg.order == 1 && cfg.gamma_norm > 0.0)
    throw ConfigError("order 1 admits no perturbation vanishing on 1_D; gamma_norm must be 0");
  const AlgebraPtr a = matrix_algebra(cfg.order, cfg.mode);
  Subalgebra d = diagonal_subalgebra(a);
  DiagonalCert cert = library_diagonal(d.algebra);
  CounterRng rng(cfg.seed, cfg.index);
  const Mat u = rng.unitary(cfg.order);
  LinearMap base = conjugation_map(a, u);
  const Vec one = d.unit_in_ambient();
  LinearMap gamma = random_map(a, a, rng, cfg.gamma_norm, &one, cfg.budget);
  LinearMap phi = base + gamma;
  return {a, std::move(d), std::move(cert), u, std::move(base), std::move(gamma), std::move(phi)};
}

/// psi(a) = rho(a) + sum_j eps(a p_j) rho(p_j) over the minimal idempotents
/// p_j of D, with eps vanishing on D.  Then psi(a x) = psi(a) psi(x) for x in D
/// and psi(1_D) = 1_B, while def_{DxA}(psi) is generically nonzero.
inline LinearMap right_modular_map(const LinearMap& rho, const Subalgebra& d, CounterRng& rng, double size,
                                   const NormBudget& budget = {}) {
  const Algebra& a = *rho.source;
  const Algebra& b = *rho.target;
  const Eigen::HouseholderQR<Mat> qr(d.embedding);
  const Mat q = qr.householderQ() * Mat::Identity(a.dim(), d.algebra->dim());
  const Mat off_d = Mat::Identity(a.dim(), a.dim()) - q * q.adjoint();
  LinearMap eps{rho.source, rho.target, rng.complex_matrix(b.dim(), a.dim()) * off_d};
  if (size == 0.0) return rho;
  eps.matrix *= size / linear_map_norm(eps, budget).lower;
  Mat m = rho.matrix;
  for (int j = 0; j < d.algebra->dim(); ++j) {
    const Vec p = d.embedding.col(j);
    m += b.right_matrix(rho.matrix * p) * eps.matrix * a.right_matrix(p);
  }
  return {rho.source, rho.target, m};
}

}  // namespace amnm
