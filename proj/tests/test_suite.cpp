#include <gtest/gtest.h>

#include <regex>
#include <set>

#include "amnm/suite.hpp"

using namespace amnm;

namespace {

SuiteConfig small_config(unsigned threads) {
  SuiteConfig c;
  c.seed = 13;
  c.instances = 3;
  c.refusals = 3;
  c.threads = threads;
  c.families = {"two_cocycle", "splitting_v1_n2", "improving", "stabilize", "kicsi_nagy_boundary",
                "absorption_valid", "absorption_refused", "norm_dichotomy_refused", "mvn_chain",
                "schreier_flag", "clone_intersection"};
  return c;
}

}  // namespace

TEST(Suite, ThreadCountDoesNotChangeOutput) {
  const SuiteResult one = run_suite(small_config(1));
  const SuiteResult four = run_suite(small_config(4));
  EXPECT_EQ(suite_jsonl(one), suite_jsonl(four));
  EXPECT_EQ(suite_summary(small_config(1), one).dump(), suite_summary(small_config(4), four).dump());
  EXPECT_TRUE(one.passed());
}

TEST(Suite, SeedChangesInstances) {
  SuiteConfig a = small_config(1), b = small_config(1);
  a.families = b.families = {"two_cocycle"};
  b.seed = 14;
  EXPECT_NE(suite_jsonl(run_suite(a)), suite_jsonl(run_suite(b)));
}

TEST(Suite, FamilySelectionKeepsSeeds) {
  // A family's rows do not depend on which other families run alongside it.
  SuiteConfig a = small_config(1);
  a.families = {"improving"};
  const SuiteResult solo = run_suite(a);
  const SuiteResult all = run_suite(small_config(2));
  std::string from_all;
  for (const auto& r : all.rows)
    if (r.lemma.rfind("improving", 0) == 0) from_all += to_json(r).dump() + "\n";
  EXPECT_EQ(suite_jsonl(solo), from_all);
}

TEST(Suite, RowsCarryAnchors) {
  const std::regex numbered(R"([Ss]ection|§|(Lemma|Theorem|Proposition|Corollary|Claim) [0-9]|\([0-9]+\.[0-9]+\))");
  const SuiteResult res = run_suite(small_config(2));
  ASSERT_FALSE(res.rows.empty());
  for (const auto& r : res.rows) {
    EXPECT_FALSE(r.anchor.empty()) << r.lemma;
    EXPECT_FALSE(std::regex_search(r.anchor, numbered)) << r.anchor;
    const json j = json::parse(to_json(r).dump());
    for (const char* key : {"lemma", "instance_seed", "passed", "lhs", "rhs", "anchor"}) EXPECT_TRUE(j.contains(key));
  }
  const json s = suite_summary(small_config(2), res);
  EXPECT_EQ(s.at("schema"), 1);
}

TEST(Suite, RefusalRowsRecordTheReason) {
  SuiteConfig c = small_config(1);
  c.families = {"absorption_refused", "norm_dichotomy_refused", "orthogonal_family_scan_refused"};
  for (const auto& r : run_suite(c).rows) {
    EXPECT_TRUE(r.passed) << r.lemma << ": " << r.detail;
    EXPECT_EQ(r.detail.rfind("refused: ", 0), 0u) << r.detail;
  }
}

TEST(Suite, FamilyRegistry) {
  const auto names = suite_family_names();
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), names.size());
  std::set<int> criteria;
  for (const auto& n : names) {
    const int c = suite_family_criterion(n);
    EXPECT_GE(c, 1);
    EXPECT_LE(c, 6);
    criteria.insert(c);
  }
  EXPECT_EQ(criteria.size(), 6u);
  EXPECT_EQ(suite_family_criterion("no_such_family"), 0);
}

TEST(Suite, ConfigErrors) {
  SuiteConfig c = small_config(1);
  c.families = {"no_such_family"};
  EXPECT_THROW(run_suite(c), ConfigError);
  c = small_config(1);
  c.instances = 0;
  EXPECT_THROW(run_suite(c), ConfigError);
}
