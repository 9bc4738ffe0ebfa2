#pragma once

// Finite-dimensional unital normed algebras given by structure constants.
//
// Basis products are e_i e_j = sum_k c(i,j,k) e_k.  The norm is one of
//   spectral      largest singular value of sum_i x_i R_i (needs a realization)
//   frobenius     Frobenius norm of sum_i x_i R_i, or the coordinate
//                 Euclidean norm when no realization is attached
//   unitization   |lambda| + ||a||_inner on C1 (+)_1 A_inner

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "amnm/random.hpp"

namespace amnm {

/// Inconsistent or unsupported configuration (norm mode, missing data).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A checker or operator refused its input because a hypothesis failed.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class NormMode { spectral, frobenius, unitization };

inline const char* to_string(NormMode m) {
  switch (m) {
    case NormMode::spectral: return "spectral";
    case NormMode::frobenius: return "frobenius";
    case NormMode::unitization: return "unitization-composite";
  }
  return "?";
}

inline NormMode norm_mode_from_string(const std::string& s) {
  if (s == "spectral") return NormMode::spectral;
  if (s == "frobenius") return NormMode::frobenius;
  if (s == "unitization-composite" || s == "unitization") return NormMode::unitization;
  throw ConfigError("unknown norm mode '" + s + "'");
}

/// How an algebra was built; library diagonals dispatch on this.
enum class AlgebraKind { generic, full_matrix, commutative, direct_sum, unitization, opposite };

class Algebra;
using AlgebraPtr = std::shared_ptr<const Algebra>;

struct AlgebraSpec {
  std::vector<std::string> labels;
  std::vector<cplx> structure;  // c(i,j,k) at (i*dim + j)*dim + k
  Vec unit;
  NormMode mode = NormMode::frobenius;
  std::vector<Mat> realization;  // optional
  AlgebraPtr inner;              // unitization mode only
  AlgebraKind kind = AlgebraKind::generic;
  int order = 0;                 // k for M_k / C^k
  std::vector<AlgebraPtr> children;
};

class Algebra {
 public:
  /// Validates and freezes an algebra.  Associativity, the two-sided unit and
  /// realization consistency are checked eagerly (relative tolerance 1e-9).
  static AlgebraPtr create(AlgebraSpec spec) {
    return AlgebraPtr(new Algebra(std::move(spec)));
  }

  int dim() const { return dim_; }
  const std::vector<std::string>& labels() const { return spec_.labels; }
  const std::vector<cplx>& structure() const { return spec_.structure; }
  cplx c(int i, int j, int k) const { return spec_.structure[(i * dim_ + j) * dim_ + k]; }
  const Vec& unit() const { return spec_.unit; }
  NormMode mode() const { return spec_.mode; }
  bool has_realization() const { return !spec_.realization.empty(); }
  const std::vector<Mat>& realization() const { return spec_.realization; }
  const AlgebraPtr& inner() const { return spec_.inner; }
  AlgebraKind kind() const { return spec_.kind; }
  int order() const { return spec_.order; }
  const std::vector<AlgebraPtr>& children() const { return spec_.children; }
  const AlgebraSpec& spec() const { return spec_; }

  Vec basis(int i) const {
    Vec e = Vec::Zero(dim_);
    e(i) = 1.0;
    return e;
  }

  /// Left multiplication operator of basis element i: (L_i)_{k,j} = c(i,j,k).
  const Mat& left_basis(int i) const { return left_[i]; }

  Vec multiply(const Vec& a, const Vec& b) const { return left_matrix(a) * b; }

  /// Matrix of b -> a b.
  Mat left_matrix(const Vec& a) const {
    Mat m = Mat::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      if (a(i) != cplx(0)) m += a(i) * left_[i];
    return m;
  }

  /// Matrix of a -> a b.
  Mat right_matrix(const Vec& b) const {
    Mat m(dim_, dim_);
    for (int i = 0; i < dim_; ++i) m.col(i) = left_[i] * b;
    return m;
  }

  Mat realize(const Vec& x) const {
    const auto m = spec_.realization[0].rows();
    const Vec flat = envelope_ * x;
    return Eigen::Map<const Mat>(flat.data(), m, m);
  }

  double norm(const Vec& x) const {
    switch (spec_.mode) {
      case NormMode::spectral: {
        const Mat m = realize(x);
        if (m.rows() == 2) return std::sqrt(top_eigen_2x2(m.adjoint() * m, nullptr));
        Eigen::JacobiSVD<Mat> svd(m);
        return svd.singularValues()(0);
      }
      case NormMode::frobenius:
        return has_realization() ? realize(x).norm() : x.norm();
      case NormMode::unitization:
        return std::abs(x(0)) + spec_.inner->norm(x.tail(dim_ - 1));
    }
    return 0.0;
  }

  /// A functional xi with dual norm <= 1 and Re sum_i xi_i z_i = ||z||.
  Vec norming_functional(const Vec& z) const {
    switch (spec_.mode) {
      case NormMode::spectral: {
        const Mat m = realize(z);
        Eigen::VectorXcd u, v;
        if (m.rows() == 2) {
          const double s = std::sqrt(top_eigen_2x2(m.adjoint() * m, &v));
          if (s == 0.0) return Vec::Zero(dim_);
          u = m * v / s;
        } else {
          Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
          u = svd.matrixU().col(0);
          v = svd.matrixV().col(0);
        }
        const Mat outer = u.conjugate() * v.transpose();
        return envelope_.transpose() * Eigen::Map<const Vec>(outer.data(), outer.size());
      }
      case NormMode::frobenius: {
        const double n = norm(z);
        if (n == 0.0) return Vec::Zero(dim_);
        return (gram_ * z).conjugate() / n;
      }
      case NormMode::unitization: {
        Vec xi(dim_);
        const double a = std::abs(z(0));
        xi(0) = a > 0 ? std::conj(z(0)) / a : cplx(1.0);
        xi.tail(dim_ - 1) = spec_.inner->norming_functional(z.tail(dim_ - 1));
        return xi;
      }
    }
    return Vec::Zero(dim_);
  }

  /// A point of the closed unit ball (approximately) maximizing
  /// Re sum_i g_i x_i.  Always feasible: the result is renormalized.
  Vec maximize_functional(const Vec& g) const {
    Vec x;
    switch (spec_.mode) {
      case NormMode::spectral: {
        // Representer H in the span with tr(H^* R_i) = g_i, then the polar
        // factor of H, projected back to the span.
        const Mat h = realize(gram_inv_ * g.conjugate());
        x = coordinates_of(polar_factor(h));
        break;
      }
      case NormMode::frobenius:
        x = gram_inv_ * g.conjugate();
        break;
      case NormMode::unitization: {
        const Vec xin = spec_.inner->maximize_functional(g.tail(dim_ - 1));
        const double inner_value = (g.tail(dim_ - 1).transpose() * xin)(0).real();
        x = Vec::Zero(dim_);
        if (std::abs(g(0)) >= inner_value) {
          x(0) = std::abs(g(0)) > 0 ? std::conj(g(0)) / std::abs(g(0)) : cplx(1.0);
        } else {
          x.tail(dim_ - 1) = xin;
        }
        break;
      }
    }
    const double n = norm(x);
    if (n > 0) x /= n;
    return x;
  }

  /// Least-squares coordinates of a matrix in the span of the realization.
  Vec coordinates_of(const Mat& m) const {
    return envelope_pinv_ * Eigen::Map<const Vec>(m.data(), m.size());
  }

  /// Euclidean envelope: alpha ||E x|| <= ||x|| <= beta ||E x||, E injective.
  const Mat& envelope() const { return envelope_; }
  double envelope_lower() const { return env_alpha_; }
  double envelope_upper() const { return env_beta_; }
  /// Left inverse of the envelope.
  const Mat& envelope_pinv() const { return envelope_pinv_; }
  /// True when ||x|| = ||E x|| exactly.
  bool euclidean() const { return env_alpha_ == 1.0 && env_beta_ == 1.0; }

 private:
  explicit Algebra(AlgebraSpec spec) : spec_(std::move(spec)) {
    const auto n = spec_.structure.size();
    dim_ = static_cast<int>(std::lround(std::cbrt(static_cast<double>(n))));
    if (dim_ < 1 || static_cast<std::size_t>(dim_) * dim_ * dim_ != n)
      throw std::domain_error("structure tensor is not cubic");
    if (spec_.unit.size() != dim_) throw std::domain_error("unit has wrong length");
    if (spec_.labels.empty())
      for (int i = 0; i < dim_; ++i) spec_.labels.push_back("b" + std::to_string(i + 1));
    if (static_cast<int>(spec_.labels.size()) != dim_)
      throw std::domain_error("label count differs from dimension");

    left_.assign(dim_, Mat::Zero(dim_, dim_));
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k) left_[i](k, j) = c(i, j, k);

    check_associative();
    check_unit();

    if (spec_.mode == NormMode::spectral && !has_realization())
      throw ConfigError("spectral norm mode requires a matrix realization");
    if (spec_.mode == NormMode::unitization) {
      if (!spec_.inner || spec_.inner->dim() != dim_ - 1)
        throw ConfigError("unitization-composite norm needs an inner algebra of dimension dim-1");
    }
    if (has_realization()) check_realization_shape();
    build_envelope();
    if (has_realization()) check_realization();
  }

  /// A unitary W with H = W |H|.  For 2x2, H + (|det H|/conj(det H)) adj(H)^*
  /// equals (s1 + s2) W.
  static Mat polar_factor(const Mat& h) {
    if (h.rows() == 2) {
      const cplx det = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
      const cplx phase = std::abs(det) > 0 ? std::abs(det) / std::conj(det) : cplx(1.0);
      Mat adj(2, 2);
      adj << h(1, 1), -h(0, 1), -h(1, 0), h(0, 0);
      const Mat sum = h + phase * adj.adjoint();
      const double scale = sum.norm() / std::sqrt(2.0);
      if (scale > 0) return sum / scale;
      return Mat::Identity(2, 2);
    }
    Eigen::JacobiSVD<Mat> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
  }

  /// Largest eigenvalue (and a unit eigenvector) of a Hermitian 2x2 matrix.
  static double top_eigen_2x2(const Mat& h, Eigen::VectorXcd* vec) {
    const double a = h(0, 0).real(), d = h(1, 1).real();
    const cplx b = h(0, 1);
    const double half = 0.5 * (a - d);
    const double lambda = 0.5 * (a + d) + std::hypot(half, std::abs(b));
    if (vec) {
      Eigen::VectorXcd v(2);
      if (b == cplx(0)) {
        v << (a >= d ? 1.0 : 0.0), (a >= d ? 0.0 : 1.0);
      } else if (a >= d) {
        v << lambda - d, std::conj(b);
      } else {
        v << b, lambda - a;
      }
      *vec = v / v.norm();
    }
    return std::max(0.0, lambda);
  }

  double structure_scale() const {
    double s = 1.0;
    for (const auto& v : spec_.structure) s = std::max(s, std::abs(v));
    return s;
  }

  void check_associative() const {
    const double tol = 1e-9 * structure_scale() * structure_scale();
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) {
        // (e_i e_j) e_k versus e_i (e_j e_k), all k at once via operators.
        Mat lhs = Mat::Zero(dim_, dim_);
        const Vec eiej = left_[i].col(j);
        for (int m = 0; m < dim_; ++m) lhs += eiej(m) * left_[m];
        const Mat rhs = left_[i] * left_[j];
        if ((lhs - rhs).cwiseAbs().maxCoeff() > tol)
          throw std::domain_error("structure constants are not associative at (" +
                                  spec_.labels[i] + ", " + spec_.labels[j] + ", *)");
      }
  }

  void check_unit() const {
    const double tol = 1e-9 * structure_scale();
    const Mat l = left_matrix(spec_.unit);
    const Mat r = right_matrix(spec_.unit);
    const Mat id = Mat::Identity(dim_, dim_);
    if ((l - id).cwiseAbs().maxCoeff() > tol || (r - id).cwiseAbs().maxCoeff() > tol)
      throw std::domain_error("unit_coords is not a two-sided identity");
  }

  void check_realization_shape() const {
    if (static_cast<int>(spec_.realization.size()) != dim_)
      throw std::domain_error("realization has wrong number of matrices");
    const auto rows = spec_.realization[0].rows();
    for (const auto& r : spec_.realization)
      if (r.rows() != rows || r.cols() != rows)
        throw std::domain_error("realization matrices must be square of equal size");
  }

  void check_realization() const {
    double scale = 1.0;
    for (const auto& r : spec_.realization) scale = std::max(scale, r.cwiseAbs().maxCoeff());
    const double tol = 1e-9 * scale * scale * structure_scale();
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) {
        const Mat prod = spec_.realization[i] * spec_.realization[j];
        const Mat expect = realize(left_[i].col(j));
        if ((prod - expect).cwiseAbs().maxCoeff() > tol)
          throw std::domain_error("realization does not match structure constants");
      }
  }

  void build_envelope() {
    if (has_realization()) {
      const auto m = spec_.realization[0].rows();
      envelope_.resize(m * m, dim_);
      for (int i = 0; i < dim_; ++i)
        envelope_.col(i) = Eigen::Map<const Vec>(spec_.realization[i].data(), m * m);
      Eigen::JacobiSVD<Mat> svd(envelope_);
      const auto& s = svd.singularValues();
      if (s(dim_ - 1) <= 1e-12 * s(0))
        throw std::domain_error("realization matrices are linearly dependent");
      if (spec_.mode == NormMode::spectral) {
        env_alpha_ = 1.0 / std::sqrt(static_cast<double>(m));
        env_beta_ = 1.0;
      }
    } else if (spec_.mode == NormMode::unitization) {
      const auto& in = *spec_.inner;
      envelope_ = Mat::Zero(in.envelope().rows() + 1, dim_);
      envelope_(0, 0) = 1.0;
      envelope_.bottomRightCorner(in.envelope().rows(), dim_ - 1) = in.envelope();
      env_alpha_ = std::min(1.0, in.envelope_lower());
      env_beta_ = std::sqrt(2.0) * std::max(1.0, in.envelope_upper());
    } else {
      envelope_ = Mat::Identity(dim_, dim_);
    }
    gram_ = envelope_.adjoint() * envelope_;
    envelope_pinv_ = gram_.ldlt().solve(Mat(envelope_.adjoint()));
    if (spec_.mode == NormMode::unitization) gram_ = Mat::Identity(dim_, dim_);
    gram_inv_ = gram_.ldlt().solve(Mat::Identity(dim_, dim_));
  }

  AlgebraSpec spec_;
  int dim_ = 0;
  std::vector<Mat> left_;
  Mat envelope_;
  Mat gram_;
  Mat gram_inv_;
  Mat envelope_pinv_;
  double env_alpha_ = 1.0;
  double env_beta_ = 1.0;
};

/// Structural equality: same dimension, structure constants, unit and norm.
inline bool same_algebra(const Algebra& a, const Algebra& b) {
  if (&a == &b) return true;
  if (a.dim() != b.dim() || a.mode() != b.mode()) return false;
  if (a.structure() != b.structure()) return false;
  if (a.unit() != b.unit()) return false;
  if (a.realization().size() != b.realization().size()) return false;
  for (std::size_t i = 0; i < a.realization().size(); ++i)
    if (a.realization()[i] != b.realization()[i]) return false;
  if (a.mode() == NormMode::unitization) return same_algebra(*a.inner(), *b.inner());
  return true;
}

/// An element together with its parent algebra.
struct Element {
  AlgebraPtr parent;
  Vec coords;

  Element(AlgebraPtr p, Vec c) : parent(std::move(p)), coords(std::move(c)) {
    if (coords.size() != parent->dim()) throw std::domain_error("element has wrong length");
  }
  double norm() const { return parent->norm(coords); }
};

inline Element multiply(const Element& a, const Element& b) {
  if (!same_algebra(*a.parent, *b.parent))
    throw std::domain_error("multiply: elements belong to different algebras");
  return {a.parent, a.parent->multiply(a.coords, b.coords)};
}

inline double element_norm(const Element& a) { return a.norm(); }

// ---------------------------------------------------------------------------
// Constructors

inline AlgebraPtr full_matrix_algebra(int k) {
  if (k < 1) throw std::domain_error("full matrix algebra needs k >= 1");
  const int d = k * k;
  AlgebraSpec s;
  s.structure.assign(static_cast<std::size_t>(d) * d * d, cplx(0));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      s.labels.push_back("e" + std::to_string(i + 1) + std::to_string(j + 1));
      Mat r = Mat::Zero(k, k);
      r(i, j) = 1.0;
      s.realization.push_back(r);
      for (int l = 0; l < k; ++l)  // e_ij e_jl = e_il
        s.structure[((i * k + j) * d + (j * k + l)) * d + (i * k + l)] = 1.0;
    }
  s.unit = Vec::Zero(d);
  for (int i = 0; i < k; ++i) s.unit(i * k + i) = 1.0;
  s.mode = NormMode::spectral;
  s.kind = AlgebraKind::full_matrix;
  s.order = k;
  return Algebra::create(std::move(s));
}

/// C^k with pointwise product.  Spectral mode realizes it as diagonal
/// matrices (sup norm); frobenius mode uses the Euclidean norm.
inline AlgebraPtr commutative_algebra(int k, NormMode mode = NormMode::spectral) {
  if (k < 1) throw std::domain_error("commutative algebra needs k >= 1");
  if (mode == NormMode::unitization)
    throw ConfigError("commutative algebra cannot be built in unitization mode");
  AlgebraSpec s;
  s.structure.assign(static_cast<std::size_t>(k) * k * k, cplx(0));
  for (int i = 0; i < k; ++i) {
    s.labels.push_back("p" + std::to_string(i + 1));
    s.structure[(i * k + i) * k + i] = 1.0;
    if (mode == NormMode::spectral) {
      Mat r = Mat::Zero(k, k);
      r(i, i) = 1.0;
      s.realization.push_back(r);
    }
  }
  s.unit = Vec::Ones(k);
  s.mode = mode;
  s.kind = AlgebraKind::commutative;
  s.order = k;
  return Algebra::create(std::move(s));
}

inline Mat block_diag(const Mat& a, const Mat& b) {
  Mat m = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  m.topLeftCorner(a.rows(), a.cols()) = a;
  m.bottomRightCorner(b.rows(), b.cols()) = b;
  return m;
}

inline AlgebraPtr direct_sum(const AlgebraPtr& a1, const AlgebraPtr& a2) {
  if (a1->mode() != a2->mode())
    throw ConfigError("direct_sum: norm modes differ");
  if (a1->mode() == NormMode::unitization)
    throw ConfigError("direct_sum of unitization-composite algebras is unsupported");
  if (a1->has_realization() != a2->has_realization())
    throw ConfigError("direct_sum: one summand lacks a realization");
  const int d1 = a1->dim(), d2 = a2->dim(), d = d1 + d2;
  AlgebraSpec s;
  s.structure.assign(static_cast<std::size_t>(d) * d * d, cplx(0));
  for (int i = 0; i < d1; ++i)
    for (int j = 0; j < d1; ++j)
      for (int k = 0; k < d1; ++k) s.structure[(i * d + j) * d + k] = a1->c(i, j, k);
  for (int i = 0; i < d2; ++i)
    for (int j = 0; j < d2; ++j)
      for (int k = 0; k < d2; ++k)
        s.structure[((d1 + i) * d + (d1 + j)) * d + (d1 + k)] = a2->c(i, j, k);
  for (const auto& l : a1->labels()) s.labels.push_back(l + "^(1)");
  for (const auto& l : a2->labels()) s.labels.push_back(l + "^(2)");
  s.unit = Vec(d);
  s.unit << a1->unit(), a2->unit();
  if (a1->has_realization()) {
    const Mat z1 = Mat::Zero(a1->realization()[0].rows(), a1->realization()[0].cols());
    const Mat z2 = Mat::Zero(a2->realization()[0].rows(), a2->realization()[0].cols());
    for (const auto& r : a1->realization()) s.realization.push_back(block_diag(r, z2));
    for (const auto& r : a2->realization()) s.realization.push_back(block_diag(z1, r));
  }
  s.mode = a1->mode();
  s.kind = AlgebraKind::direct_sum;
  s.children = {a1, a2};
  return Algebra::create(std::move(s));
}

/// Forced unitization C1 (+)_1 A; coordinate 0 is the adjoined unit.
inline AlgebraPtr unitize(const AlgebraPtr& a) {
  const int da = a->dim(), d = da + 1;
  AlgebraSpec s;
  s.structure.assign(static_cast<std::size_t>(d) * d * d, cplx(0));
  auto at = [&](int i, int j, int k) -> cplx& { return s.structure[(i * d + j) * d + k]; };
  at(0, 0, 0) = 1.0;
  for (int i = 0; i < da; ++i) {
    at(0, i + 1, i + 1) = 1.0;
    at(i + 1, 0, i + 1) = 1.0;
    for (int j = 0; j < da; ++j)
      for (int k = 0; k < da; ++k) at(i + 1, j + 1, k + 1) = a->c(i, j, k);
  }
  s.labels.push_back("1#");
  for (const auto& l : a->labels()) s.labels.push_back(l);
  s.unit = Vec::Zero(d);
  s.unit(0) = 1.0;
  s.mode = NormMode::unitization;
  s.inner = a;
  s.kind = AlgebraKind::unitization;
  s.children = {a};
  return Algebra::create(std::move(s));
}

/// Opposite algebra: x o y = y x.  Realization matrices are transposed, which
/// preserves both the spectral and the Frobenius norm.
inline AlgebraPtr opposite(const AlgebraPtr& a) {
  if (a->kind() == AlgebraKind::opposite) return a->children()[0];
  const int d = a->dim();
  AlgebraSpec s;
  s.structure.assign(static_cast<std::size_t>(d) * d * d, cplx(0));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) s.structure[(i * d + j) * d + k] = a->c(j, i, k);
  s.labels = a->labels();
  s.unit = a->unit();
  s.mode = a->mode();
  for (const auto& r : a->realization()) s.realization.push_back(r.transpose());
  if (a->mode() == NormMode::unitization) s.inner = opposite(a->inner());
  s.kind = AlgebraKind::opposite;
  s.children = {a};
  return Algebra::create(std::move(s));
}

// ---------------------------------------------------------------------------
// Subalgebras

/// A subalgebra D together with an injective homomorphism into its ambient
/// algebra.  D's norm agrees with the norm induced by the ambient algebra.
struct Subalgebra {
  AlgebraPtr algebra;
  AlgebraPtr ambient;
  Mat embedding;  // dim(ambient) x dim(algebra)

  Vec embed(const Vec& x) const { return embedding * x; }
  Vec unit_in_ambient() const { return embedding * algebra->unit(); }
};

/// Wrap an explicit embedding after checking that it is an injective
/// homomorphism and that norms agree on sampled points.
inline Subalgebra embed_subalgebra(AlgebraPtr d, AlgebraPtr a, Mat embedding,
                                   std::uint64_t seed = 1) {
  if (embedding.rows() != a->dim() || embedding.cols() != d->dim())
    throw std::domain_error("embedding shape mismatch");
  double scale = std::max(1.0, embedding.cwiseAbs().maxCoeff());
  for (int i = 0; i < d->dim(); ++i)
    for (int j = 0; j < d->dim(); ++j) {
      const Vec lhs = embedding * d->multiply(d->basis(i), d->basis(j));
      const Vec rhs = a->multiply(embedding.col(i), embedding.col(j));
      if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-9 * scale * scale)
        throw std::domain_error("embedding is not multiplicative");
    }
  Eigen::JacobiSVD<Mat> svd(embedding);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-9 * s(0)) throw std::domain_error("embedding is not injective");
  CounterRng rng(seed, 0x5ab);
  for (int t = 0; t < 16; ++t) {
    const Vec x = rng.complex_vector(d->dim());
    const double nd = d->norm(x), na = a->norm(embedding * x);
    if (std::abs(nd - na) > 1e-9 * std::max(1.0, na))
      throw ConfigError("subalgebra norm differs from the induced ambient norm");
  }
  return {std::move(d), std::move(a), std::move(embedding)};
}

inline Subalgebra whole_algebra(const AlgebraPtr& a) {
  return {a, a, Mat::Identity(a->dim(), a->dim())};
}

/// The scalar subalgebra C 1_A, with basis vector exactly 1_A.
inline Subalgebra scalar_subalgebra(const AlgebraPtr& a) {
  AlgebraSpec s;
  s.structure = {cplx(1.0)};
  s.unit = Vec::Ones(1);
  s.labels = {"1"};
  if (a->has_realization()) {
    s.mode = a->mode();
    s.realization = {a->realize(a->unit())};
  } else {
    if (std::abs(a->norm(a->unit()) - 1.0) > 1e-12)
      throw ConfigError("scalar_subalgebra: needs ||1_A|| = 1 without a realization");
    s.mode = NormMode::frobenius;
  }
  s.kind = AlgebraKind::commutative;
  s.order = 1;
  Mat emb = a->unit();
  return {Algebra::create(std::move(s)), a, emb};
}

/// Smallest (unital if requested) subalgebra containing the generators.  The
/// basis is orthonormal for the ambient envelope inner product (Frobenius on
/// the realization when present); singular values below 1e-9 x largest are
/// dropped.  Unitization-mode ambients are not supported.
inline Subalgebra generated_subalgebra(const AlgebraPtr& a, const std::vector<Element>& generators,
                                       bool unital) {
  if (a->mode() == NormMode::unitization)
    throw ConfigError("generated_subalgebra: unitization-composite ambient is unsupported");
  for (const auto& g : generators)
    if (!same_algebra(*g.parent, *a))
      throw std::domain_error("generated_subalgebra: generator from a different algebra");
  const Mat& e = a->envelope();
  auto orthonormalize = [&](const Mat& cols) -> Mat {
    if (cols.cols() == 0) return Mat(a->dim(), 0);
    const Mat img = e * cols;
    Eigen::JacobiSVD<Mat> svd(img, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    int r = 0;
    while (r < s.size() && s(r) > 1e-9 * s(0)) ++r;
    if (s.size() == 0 || s(0) == 0.0) r = 0;
    // Preimage of the orthonormal image vectors (E is injective).
    const Mat u = svd.matrixU().leftCols(r);
    return e.completeOrthogonalDecomposition().solve(u);
  };
  Mat span(a->dim(), 0);
  {
    std::vector<Vec> cols;
    for (const auto& g : generators) cols.push_back(g.coords);
    if (unital) cols.push_back(a->unit());
    Mat m(a->dim(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = cols[i];
    span = orthonormalize(m);
  }
  for (;;) {
    const auto r = span.cols();
    Mat m(a->dim(), r + r * r);
    m.leftCols(r) = span;
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j)
        m.col(r + i * r + j) = a->multiply(span.col(i), span.col(j));
    Mat next = orthonormalize(m);
    if (next.cols() == r) break;
    span = std::move(next);
  }
  const int dd = static_cast<int>(span.cols());
  if (dd == 0) throw std::domain_error("generated subalgebra is zero");
  // Coordinates w.r.t. the orthonormal basis: x = (E B)^* E y.
  const Mat eb = e * span;
  auto coords = [&](const Vec& y) -> Vec { return eb.adjoint() * (e * y); };

  AlgebraSpec s;
  s.structure.assign(static_cast<std::size_t>(dd) * dd * dd, cplx(0));
  for (int i = 0; i < dd; ++i)
    for (int j = 0; j < dd; ++j) {
      const Vec p = coords(a->multiply(span.col(i), span.col(j)));
      for (int k = 0; k < dd; ++k) s.structure[(i * dd + j) * dd + k] = p(k);
    }
  // Identity of D: the ambient unit when requested, otherwise solve u x = x = x u.
  if (unital) {
    s.unit = coords(a->unit());
  } else {
    Mat sys(2 * dd * dd, dd);
    Vec rhs(2 * dd * dd);
    for (int j = 0; j < dd; ++j)
      for (int k = 0; k < dd; ++k) {
        for (int i = 0; i < dd; ++i) {
          sys(j * dd + k, i) = s.structure[(i * dd + j) * dd + k];             // u e_j
          sys(dd * dd + j * dd + k, i) = s.structure[(j * dd + i) * dd + k];   // e_j u
        }
        rhs(j * dd + k) = rhs(dd * dd + j * dd + k) = (j == k) ? 1.0 : 0.0;
      }
    const Vec u = sys.completeOrthogonalDecomposition().solve(rhs);
    if ((sys * u - rhs).cwiseAbs().maxCoeff() > 1e-8)
      throw std::domain_error("generated subalgebra has no identity element");
    s.unit = u;
  }
  // Round unit coordinates that are numerically exact to remove noise.
  s.mode = a->mode();
  if (a->has_realization())
    for (int i = 0; i < dd; ++i) s.realization.push_back(a->realize(span.col(i)));
  for (int i = 0; i < dd; ++i) s.labels.push_back("d" + std::to_string(i + 1));
  s.kind = AlgebraKind::generic;
  return {Algebra::create(std::move(s)), a, span};
}

/// Unitization of an embedded subalgebra, embedded block-diagonally into the
/// unitization of the ambient algebra.
inline Subalgebra unitize_subalgebra(const Subalgebra& d0, const AlgebraPtr& ambient_unitized) {
  AlgebraPtr d = unitize(d0.algebra);
  return {d, ambient_unitized, block_diag(Mat::Identity(1, 1), d0.embedding)};
}

/// Opposite of an embedded subalgebra inside the opposite ambient algebra.
inline Subalgebra opposite_subalgebra(const Subalgebra& d, const AlgebraPtr& ambient_op) {
  return {opposite(d.algebra), ambient_op, d.embedding};
}

/// Randomized check of ||ab|| <= ||a|| ||b|| (1 + tol).
inline bool check_submultiplicative(const Algebra& a, int samples, std::uint64_t seed,
                                    double tol = 1e-9) {
  CounterRng rng(seed, 0x50b);
  for (int t = 0; t < samples; ++t) {
    const Vec x = rng.complex_vector(a.dim());
    const Vec y = rng.complex_vector(a.dim());
    if (a.norm(a.multiply(x, y)) > a.norm(x) * a.norm(y) * (1.0 + tol) + tol) return false;
  }
  return true;
}

}  // namespace amnm
