#include <gtest/gtest.h>

#include "amnm/instances.hpp"
#include "amnm/stabilizer.hpp"

using namespace amnm;

namespace {

Mat as_matrix(const Vec& x, int k) {
  Mat m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m(i, j) = x(i * k + j);
  return m;
}

Vec as_vec(const Mat& m) {
  const auto k = m.rows();
  Vec v(k * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) v(i * k + j) = m(i, j);
  return v;
}

// Max over diagonal matrix units e and random matrices x of
// |psi(e x) - psi(e) psi(x)| and |psi(x e) - psi(x) psi(e)| in plain matrix arithmetic.
double bimodular_gap(const LinearMap& psi, int k, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  auto apply = [&](const Mat& x) { return as_matrix(psi.matrix * as_vec(x), k); };
  double worst = 0.0;
  for (int t = 0; t < 8; ++t) {
    const Mat x = rng.complex_matrix(k, k);
    for (int i = 0; i < k; ++i) {
      Mat e = Mat::Zero(k, k);
      e(i, i) = 1.0;
      worst = std::max(worst, (apply(e * x) - apply(e) * apply(x)).cwiseAbs().maxCoeff());
      worst = std::max(worst, (apply(x * e) - apply(x) * apply(e)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

StabilizeConfig config(double L = 2.0) {
  StabilizeConfig c;
  c.tol = 1e-8;
  c.max_iter = 30;
  c.L = L;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(Stabilizer, HomomorphismIsAFixedPoint) {
  CounterRng rng(1, 0);
  const AlgebraPtr a = full_matrix_algebra(2);
  const Subalgebra d = diagonal_subalgebra(a);
  const DiagonalCert cert = library_diagonal(d.algebra);
  const LinearMap phi = conjugation_map(a, rng.unitary(2));
  EXPECT_LT(improvement_step(phi, d, cert).matrix.cwiseAbs().maxCoeff(), 1e-12);
  const StabilizeReport r = stabilize(phi, d, cert, config());
  EXPECT_TRUE(r.passed());
  EXPECT_TRUE(r.iterates.empty());
  EXPECT_LT((r.final_map->matrix - phi.matrix).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Stabilizer, PerturbedConjugationBecomesBimodular) {
  for (std::uint64_t i = 0; i < 5; ++i) {
    InstanceConfig ic;
    ic.seed = 17;
    ic.index = i;
    ic.gamma_norm = 1e-3;
    const Instance inst = generate_instance(ic);
    const StabilizeReport r = stabilize(inst.phi, inst.d, inst.cert, config());
    ASSERT_TRUE(r.converged);
    EXPECT_TRUE(r.passed()) << r.note;
    EXPECT_GT(bimodular_gap(inst.phi, 2, i), 1e-5);
    EXPECT_LT(bimodular_gap(*r.final_map, 2, i), 1e-7);
    const Vec one = as_vec(Mat::Identity(2, 2));
    EXPECT_LT((r.final_map->matrix * one - one).norm(), 1e-8);
    // Distance bound with constants read off the inputs: K = 2 for M_2.
    EXPECT_NEAR(r.K, 2.0, 1e-12);
    EXPECT_LE(r.total_distance.lo, 12.0 * 4.0 * 8.0 * r.delta0);
    for (const auto& it : r.iterates) {
      EXPECT_TRUE(it.step_ok);
      EXPECT_TRUE(it.defect_ok);
      EXPECT_TRUE(it.norm_ok);
    }
  }
}

TEST(Stabilizer, ImprovePreservesUnitAndRightModularity) {
  InstanceConfig ic;
  ic.seed = 3;
  ic.gamma_norm = 1e-3;
  const Instance inst = generate_instance(ic);
  const ImproveReport r = improve_report(inst.phi, inst.d, inst.cert);
  EXPECT_TRUE(r.unital_ok);
  EXPECT_TRUE(r.step_ok);
  EXPECT_TRUE(r.defect_ok);
  const Vec one = inst.d.unit_in_ambient();
  EXPECT_LT((r.next.matrix * one - one).norm(), 1e-12);

  CounterRng rng(4, 0);
  const LinearMap rm = right_modular_map(inst.base, inst.d, rng, 1e-3);
  EXPECT_LT(right_modular_residual(rm, inst.d), 1e-12);
  const ImproveReport r2 = improve_report(rm, inst.d, inst.cert);
  EXPECT_TRUE(r2.right_modular_in);
  EXPECT_TRUE(r2.right_modular_out);
}

TEST(Stabilizer, Preconditions) {
  InstanceConfig ic;
  ic.seed = 9;
  ic.gamma_norm = 0.2;
  const Instance big = generate_instance(ic);
  EXPECT_THROW(stabilize(big.phi, big.d, big.cert, config()), PreconditionError);

  ic.gamma_norm = 1e-3;
  const Instance inst = generate_instance(ic);
  EXPECT_THROW(stabilize(inst.phi, inst.d, inst.cert, config(1.0 - 1e-3)), ConfigError);
  StabilizeConfig bad = config();
  bad.tol = 0.0;
  EXPECT_THROW(stabilize(inst.phi, inst.d, inst.cert, bad), ConfigError);

  LinearMap shifted = inst.phi;
  shifted.matrix *= 1.01;
  EXPECT_THROW(improve(shifted, inst.d, inst.cert), PreconditionError);
  DiagonalCert invalid = inst.cert;
  invalid.valid = false;
  EXPECT_THROW(stabilize(inst.phi, inst.d, invalid, config()), PreconditionError);
}

TEST(Stabilizer, NonConvergenceIsReported) {
  InstanceConfig ic;
  ic.seed = 21;
  ic.gamma_norm = 1e-3;
  const Instance inst = generate_instance(ic);
  StabilizeConfig c = config();
  c.max_iter = 1;
  c.tol = 1e-300;
  const StabilizeReport r = stabilize(inst.phi, inst.d, inst.cert, c);
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.iterates.size(), 1u);
}

TEST(Stabilizer, OppositeSwitchIsAnInvolution) {
  InstanceConfig ic;
  const Instance inst = generate_instance(ic);
  const LinearMap twice = opposite_switch(opposite_switch(inst.phi));
  EXPECT_TRUE(same_algebra(*twice.source, *inst.phi.source));
  EXPECT_TRUE(same_algebra(*twice.target, *inst.phi.target));
  EXPECT_FALSE(same_algebra(*opposite_switch(inst.phi).source, *inst.phi.source));
}

TEST(Stabilizer, UnitizedRouteForNonUnitalMaps) {
  CounterRng rng(6, 0);
  const AlgebraPtr a = full_matrix_algebra(2);
  const Subalgebra d0 = diagonal_subalgebra(a);
  LinearMap psi = conjugation_map(a, rng.unitary(2));
  psi.matrix += 1e-4 * rng.complex_matrix(4, 4);
  const LinearMap sharp = unitize_map(psi);
  EXPECT_LT((sharp.matrix.col(0) - a->unit()).norm(), 1e-15);
  EXPECT_LT((sharp.matrix.rightCols(4) - psi.matrix).norm(), 1e-15);
  const UnitizedStabilizeResult r = stabilize_unitized(psi, d0, config());
  ASSERT_TRUE(r.report.passed()) << r.report.note;
  ASSERT_TRUE(r.theta.has_value());
  EXPECT_LT(bimodular_gap(*r.theta, 2, 6), 1e-7);
  EXPECT_LT((r.theta->matrix - psi.matrix).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(Decompose, SplitsOffTheHomomorphicPart) {
  // A = M_2 (+) C, J = M_2 (+) 0 with e = (1, 0).  theta is the identity on
  // M_2 and doubles the C summand, so p = (1, 0) and phi keeps only M_2.
  const AlgebraPtr a = direct_sum(full_matrix_algebra(2), commutative_algebra(1));
  Mat m = Mat::Identity(5, 5);
  m(4, 4) = 2.0;
  const LinearMap theta(a, a, m);
  IdealData j{a, Mat::Identity(5, 5).leftCols(4), Vec::Zero(5)};
  j.e.head(4) = as_vec(Mat::Identity(2, 2));
  const Decomposition dec = decompose_over_ideal(theta, j);
  Mat want = Mat::Identity(5, 5);
  want(4, 4) = 0.0;
  EXPECT_LT((dec.phi.matrix - want).norm(), 1e-12);
  EXPECT_LT((dec.theta_s.matrix - (m - want)).norm(), 1e-12);
  EXPECT_TRUE(dec.certified);
  EXPECT_NEAR(j.bound(), 1.0, 1e-12);
}

TEST(Decompose, RejectsBadIdeals) {
  const AlgebraPtr a = direct_sum(full_matrix_algebra(2), commutative_algebra(1));
  const LinearMap theta(a, a, Mat::Identity(5, 5));
  IdealData not_ideal{a, Mat::Identity(5, 5).leftCols(1), Vec::Zero(5)};
  not_ideal.e(0) = 1.0;
  EXPECT_THROW(decompose_over_ideal(theta, not_ideal), PreconditionError);
  IdealData bad_e{a, Mat::Identity(5, 5).leftCols(4), Vec::Zero(5)};
  bad_e.e(0) = 1.0;
  EXPECT_THROW(decompose_over_ideal(theta, bad_e), PreconditionError);
  IdealData zero{a, Mat(5, 0), Vec::Zero(5)};
  const Decomposition dec = decompose_over_ideal(theta, zero);
  EXPECT_LT(dec.phi.matrix.norm(), 1e-15);
}
