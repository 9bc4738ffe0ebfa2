#include <gtest/gtest.h>

#include <cmath>

#include "amnm/instances.hpp"
#include "amnm/multilinear.hpp"

using namespace amnm;

namespace {

Vec from_matrix(const Mat& m) {
  const auto k = m.rows();
  Vec x(k * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) x(i * k + j) = m(i, j);
  return x;
}

Mat to_matrix(const Vec& x, int k) {
  Mat m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m(i, j) = x(i * k + j);
  return m;
}

LinearMap gaussian(const AlgebraPtr& a, const AlgebraPtr& b, CounterRng& rng) {
  return {a, b, rng.complex_matrix(b->dim(), a->dim())};
}

}  // namespace

TEST(Multilinear, CheckMapMatchesDefinition) {
  CounterRng rng(1, 0);
  const AlgebraPtr a = full_matrix_algebra(2), b = full_matrix_algebra(3);
  const LinearMap phi = gaussian(a, b, rng);
  const Cochain c = check_map(phi);
  for (int t = 0; t < 10; ++t) {
    const Vec x = rng.complex_vector(4), y = rng.complex_vector(4);
    const Vec want = phi(a->multiply(x, y)) - b->multiply(phi(x), phi(y));
    EXPECT_LT((evaluate(c, {x, y}) - want).norm(), 1e-11);
  }
}

TEST(Multilinear, CoboundaryHandExpansion) {
  CounterRng rng(2, 0);
  const AlgebraPtr a = full_matrix_algebra(2), b = commutative_algebra(2);
  const LinearMap phi = gaussian(a, b, rng);
  const LinearMap gamma = gaussian(a, b, rng);
  const Cochain d1 = coboundary(1, phi, as_cochain(gamma));
  Cochain psi = Cochain::zero(b, {a, a});
  psi.data = rng.complex_vector(psi.data.size());
  const Cochain d2 = coboundary(2, phi, psi);
  auto mb = [&](const Vec& x, const Vec& y) { return b->multiply(x, y); };
  auto ma = [&](const Vec& x, const Vec& y) { return a->multiply(x, y); };
  auto p2 = [&](const Vec& x, const Vec& y) { return evaluate(psi, {x, y}); };
  for (int t = 0; t < 10; ++t) {
    const Vec x = rng.complex_vector(4), y = rng.complex_vector(4), z = rng.complex_vector(4);
    const Vec want1 = mb(phi(x), gamma(y)) - gamma(ma(x, y)) + mb(gamma(x), phi(y));
    EXPECT_LT((evaluate(d1, {x, y}) - want1).norm(), 1e-10);
    const Vec want2 = mb(phi(x), p2(y, z)) - p2(ma(x, y), z) + p2(x, ma(y, z)) - mb(p2(x, y), phi(z));
    EXPECT_LT((evaluate(d2, {x, y, z}) - want2).norm(), 1e-10);
  }
}

TEST(Multilinear, RestrictSlotEvaluatesThroughEmbedding) {
  CounterRng rng(3, 0);
  const AlgebraPtr a = full_matrix_algebra(3);
  const Subalgebra d = diagonal_subalgebra(a);
  const LinearMap phi = gaussian(a, a, rng);
  const Cochain c = check_map(phi);
  const Cochain r = restrict_slot(c, 0, d);
  const Vec x = rng.complex_vector(3), y = rng.complex_vector(9);
  EXPECT_LT((evaluate(r, {x, y}) - evaluate(c, {d.embed(x), y})).norm(), 1e-11);
}

// Grid search over the unit spheres of C^2 for a C^2-valued bilinear map with
// Euclidean norms everywhere.  Phases are irrelevant for ||T(x, y)||, so
// x = (cos s, e^{it} sin s) covers the sphere up to a phase.
TEST(Multilinear, ThreeTensorAgainstGridSearch) {
  const AlgebraPtr e2 = commutative_algebra(2, NormMode::frobenius);
  CounterRng rng(4, 0);
  for (int trial = 0; trial < 3; ++trial) {
    Cochain t = Cochain::zero(e2, {e2, e2});
    t.data = rng.complex_vector(8);
    const int n = 32;
    std::vector<Vec> pts;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j < 2 * n; ++j) {
        const double s = M_PI / 2 * i / n, u = M_PI * j / n;
        Vec x(2);
        x << std::cos(s), std::polar(std::sin(s), u);
        pts.push_back(x);
      }
    double grid = 0.0;
    for (const auto& x : pts) {
      const Cochain tx = contract_slot(t, 0, x);
      const Eigen::Map<const Mat> m(tx.data.data(), 2, 2);
      for (const auto& y : pts) grid = std::max(grid, (m * y).norm());
    }
    const DefectEstimate e = multilinear_norm(t);
    EXPECT_LE(grid, e.upper * (1 + 1e-12));
    EXPECT_GE(e.lower, grid * (1 - 1e-12));
    EXPECT_LE(e.lower, grid * 1.01);
    EXPECT_LE(e.lower, e.upper);
  }
}

TEST(Multilinear, SimilarityMapAgainstSampling) {
  CounterRng rng(5, 0);
  const AlgebraPtr a = full_matrix_algebra(2);
  const Mat s = Mat::Identity(2, 2) + 0.4 * rng.complex_matrix(2, 2);
  const Mat si = s.inverse();
  Mat m(4, 4);
  for (int j = 0; j < 4; ++j) m.col(j) = from_matrix(s * to_matrix(a->basis(j), 2) * si);
  const LinearMap phi(a, a, m);
  double sampled = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const Mat x = rng.complex_matrix(2, 2);
    Eigen::JacobiSVD<Mat> svd(x);
    const Mat xu = x / svd.singularValues()(0);
    Eigen::JacobiSVD<Mat> svd2(s * xu * si);
    sampled = std::max(sampled, svd2.singularValues()(0));
  }
  const DefectEstimate n = linear_map_norm(phi);
  EXPECT_LE(sampled, n.upper * (1 + 1e-12));
  EXPECT_GE(n.lower, sampled * (1 - 1e-12));
  // phi is a homomorphism, so its defect vanishes up to rounding.
  EXPECT_LE(defect(phi).upper, 1e-12 * std::pow(n.upper, 2));
}

TEST(Multilinear, KnownOperatorNorms) {
  const AlgebraPtr a = full_matrix_algebra(2);
  Mat t = Mat::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) t(j * 2 + i, i * 2 + j) = 1.0;
  const DefectEstimate id = linear_map_norm({a, a, Mat::Identity(4, 4)});
  const DefectEstimate tr = linear_map_norm({a, a, t});
  EXPECT_NEAR(id.lower, 1.0, 1e-12);
  EXPECT_NEAR(tr.lower, 1.0, 1e-12);
  EXPECT_GE(tr.upper, 1.0 - 1e-12);
  // The transpose is anti-multiplicative: (ab)^T - a^T b^T has norm 2 on units e12, e21.
  const DefectEstimate d = defect({a, a, t});
  EXPECT_GE(d.lower, 1.0);
  EXPECT_LE(d.lower, d.upper);
}

TEST(Multilinear, UnitizationFunctionalNorm) {
  // On C (+)_1 C^2 with sup norm on C^2 the dual norm of f is max(|f_0|, |f_1| + |f_2|).
  const AlgebraPtr u = unitize(commutative_algebra(2));
  const AlgebraPtr c1 = commutative_algebra(1);
  Mat f(1, 3);
  f << 1.0, 3.0, -2.0;
  EXPECT_NEAR(linear_map_norm({u, c1, f}).lower, 5.0, 1e-12);
  EXPECT_GE(linear_map_norm({u, c1, f}).upper, 5.0 - 1e-12);
  f << 4.0, 1.0, cplx(0, 1);
  EXPECT_NEAR(linear_map_norm({u, c1, f}).lower, 4.0, 1e-12);
}

TEST(Multilinear, MoreRestartsNeverLowerTheEstimate) {
  CounterRng rng(6, 0);
  const AlgebraPtr a = full_matrix_algebra(2);
  for (int t = 0; t < 5; ++t) {
    const LinearMap phi = gaussian(a, a, rng);
    const double l8 = defect(phi, nullptr, nullptr, {8, 200, 11}).lower;
    const double l32 = defect(phi, nullptr, nullptr, {32, 200, 11}).lower;
    EXPECT_GE(l32, l8);
  }
}

TEST(Multilinear, UpperOnlyPathsAgree) {
  CounterRng rng(7, 0);
  const AlgebraPtr a = full_matrix_algebra(2);
  const LinearMap phi = gaussian(a, a, rng);
  EXPECT_NEAR(linear_map_upper(phi), linear_map_norm(phi).upper, 1e-12);
  EXPECT_NEAR(defect_upper(phi), defect(phi).upper, 1e-12);
}

TEST(Multilinear, ArityLimits) {
  const AlgebraPtr a = commutative_algebra(2);
  const Cochain c = Cochain::zero(a, {a, a, a});
  EXPECT_THROW(multilinear_norm(c), std::domain_error);
  EXPECT_EQ(multilinear_lower(c), 0.0);
}
