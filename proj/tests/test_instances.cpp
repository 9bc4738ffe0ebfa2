#include <gtest/gtest.h>

#include "amnm/instances.hpp"
#include "amnm/io.hpp"
#include "amnm/stabilizer.hpp"

using namespace amnm;

TEST(Instances, SeedDeterminesInstance) {
  InstanceConfig ic;
  ic.seed = 42;
  ic.index = 3;
  const Instance a = generate_instance(ic), b = generate_instance(ic);
  EXPECT_EQ(a.phi.matrix, b.phi.matrix);
  ic.index = 4;
  EXPECT_NE(generate_instance(ic).phi.matrix, a.phi.matrix);
}

TEST(Instances, PerturbationHasPrescribedShape) {
  for (int order = 2; order <= 3; ++order)
    for (std::uint64_t i = 0; i < 4; ++i) {
      InstanceConfig ic;
      ic.order = order;
      ic.seed = 8;
      ic.index = i;
      ic.gamma_norm = 1e-3;
      const Instance inst = generate_instance(ic);
      EXPECT_TRUE(inst.u.isUnitary(1e-12));
      EXPECT_LT((inst.phi.matrix - inst.base.matrix - inst.gamma.matrix).norm(), 1e-15);
      EXPECT_LT((inst.gamma.matrix * inst.d.unit_in_ambient()).norm(), 1e-15);
      // Measured with an independent estimator seed: the normalization is
      // against the lower estimate, which is within the budget's accuracy.
      NormBudget other;
      other.seed = 999;
      const DefectEstimate g = linear_map_norm(inst.gamma, other);
      EXPECT_GE(g.upper, 1e-3 * (1 - 1e-9));
      EXPECT_NEAR(g.lower, 1e-3, 1e-6);
      // base is multiplicative: u a u* u b u* = u ab u*.
      EXPECT_LT(check_map(inst.base).max_abs(), 1e-12);
    }
}

TEST(Instances, ZeroPerturbationIsExact) {
  InstanceConfig ic;
  ic.gamma_norm = 0.0;
  ic.order = 3;
  const Instance inst = generate_instance(ic);
  EXPECT_EQ(inst.gamma.matrix.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT(check_map(inst.phi).max_abs(), 1e-12);
}

TEST(Instances, FrobeniusMode) {
  InstanceConfig ic;
  ic.mode = NormMode::frobenius;
  ic.gamma_norm = 1e-3;
  const Instance inst = generate_instance(ic);
  EXPECT_EQ(inst.a->mode(), NormMode::frobenius);
  const Vec x = inst.a->basis(1) + 2.0 * inst.a->basis(2);
  EXPECT_NEAR(inst.a->norm(x), std::sqrt(5.0), 1e-14);
}

TEST(Instances, ConfigErrors) {
  InstanceConfig ic;
  ic.order = 5;
  EXPECT_THROW(generate_instance(ic), ConfigError);
  ic.order = 0;
  EXPECT_THROW(generate_instance(ic), ConfigError);
  ic.order = 1;
  ic.gamma_norm = 1e-3;
  EXPECT_THROW(generate_instance(ic), ConfigError);
  ic.gamma_norm = 0.0;
  EXPECT_NO_THROW(generate_instance(ic));
  ic.order = 2;
  ic.gamma_norm = -1e-3;
  EXPECT_THROW(generate_instance(ic), ConfigError);
  ic.gamma_norm = 2.0;
  EXPECT_THROW(generate_instance(ic), ConfigError);
  EXPECT_THROW(matrix_algebra(2, NormMode::unitization), ConfigError);
}

TEST(Io, AlgebraRoundTrip) {
  for (const AlgebraPtr& a : {full_matrix_algebra(2), commutative_algebra(3), unitize(commutative_algebra(2)),
                              matrix_algebra(2, NormMode::frobenius)}) {
    const AlgebraPtr b = algebra_from_json(json::parse(to_json(*a).dump()));
    EXPECT_TRUE(same_algebra(*a, *b));
    EXPECT_EQ(a->mode(), b->mode());
    const Vec x = Vec::LinSpaced(a->dim(), 1.0, 2.0);
    EXPECT_NEAR(a->norm(x), b->norm(x), 1e-14);
  }
}

TEST(Io, MalformedAlgebraIsAConfigError) {
  json j = to_json(*commutative_algebra(2));
  j["structure"][0].erase(1);
  EXPECT_THROW(algebra_from_json(j), ConfigError);
  json k = to_json(*commutative_algebra(2));
  k["unit"] = json::array({json::array({1, 0})});
  EXPECT_THROW(algebra_from_json(k), ConfigError);
  json m = to_json(*commutative_algebra(2));
  m["norm_mode"] = "operator";
  EXPECT_THROW(algebra_from_json(m), ConfigError);
  json n = to_json(*commutative_algebra(2));
  n.erase("unit");
  EXPECT_THROW(algebra_from_json(n), ConfigError);
}

TEST(Io, ReportAndCsvAreStable) {
  InstanceConfig ic;
  ic.seed = 5;
  ic.gamma_norm = 1e-3;
  const Instance inst = generate_instance(ic);
  StabilizeConfig sc;
  sc.tol = 1e-8;
  sc.L = 2.0;
  sc.seed = 1;
  const StabilizeReport r = stabilize(inst.phi, inst.d, inst.cert, sc);
  const std::string a = to_json(r).dump(2), b = to_json(stabilize(inst.phi, inst.d, inst.cert, sc)).dump(2);
  EXPECT_EQ(a, b);
  const std::string csv = iterates_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "iter,step_norm_lo,step_norm_hi,def_da_lo,def_da_hi,claim_step,claim_defect");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), r.iterates.size() + 1);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}
