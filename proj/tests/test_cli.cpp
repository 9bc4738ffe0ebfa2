#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct CliRun {
  int code = -1;
  std::string output;  // stdout and stderr
};

CliRun run(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" AMNM_CLI_PATH "\" " + args + " 2>&1";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  while (const std::size_t n = fread(buf.data(), 1, buf.size(), p)) r.output.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("amnm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string config(const json& j, const std::string& name = "config.json") {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return "\"" + p.string() + "\"";
  }
  std::string out(const std::string& sub) { return "\"" + (dir_ / sub).string() + "\""; }

  fs::path dir_;
};

json stabilize_config(double gamma) {
  return {{"schema", 1},
          {"command", "stabilize"},
          {"seed", 11},
          {"instance", {{"order", 2}, {"gamma_norm", gamma}}},
          {"stabilize", {{"tol", 1e-10}, {"max_iter", 30}, {"L", 2.0}}}};
}

}  // namespace

TEST_F(Cli, StabilizeWritesReportAndIterates) {
  const CliRun r = run("stabilize --config " + config(stabilize_config(1e-3)) + " --out " + out("a"));
  ASSERT_EQ(r.code, 0) << r.output;
  const json rep = json::parse(slurp(dir_ / "a" / "stabilize_report.json"));
  EXPECT_EQ(rep.at("schema"), 1);
  const std::string csv = slurp(dir_ / "a" / "stabilize_iterates.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "iter,step_norm_lo,step_norm_hi,def_da_lo,def_da_hi,claim_step,claim_defect");
  const CliRun again = run("stabilize --config " + config(stabilize_config(1e-3)) + " --out " + out("b"));
  ASSERT_EQ(again.code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "stabilize_report.json"), slurp(dir_ / "b" / "stabilize_report.json"));
  EXPECT_EQ(csv, slurp(dir_ / "b" / "stabilize_iterates.csv"));
}

TEST_F(Cli, SeedOverrideChangesTheInstance) {
  const std::string cfg = config(stabilize_config(1e-3));
  ASSERT_EQ(run("stabilize --config " + cfg + " --out " + out("a")).code, 0);
  ASSERT_EQ(run("stabilize --config " + cfg + " --seed 12 --out " + out("b")).code, 0);
  EXPECT_NE(slurp(dir_ / "a" / "stabilize_report.json"), slurp(dir_ / "b" / "stabilize_report.json"));
}

TEST_F(Cli, PreconditionFailureExitsOne) {
  const CliRun r = run("stabilize --config " + config(stabilize_config(0.2)) + " --out " + out("a"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("precondition"), std::string::npos) << r.output;
}

TEST_F(Cli, NonConvergenceExitsOne) {
  json c = stabilize_config(1e-3);
  c["stabilize"]["max_iter"] = 1;
  c["stabilize"]["tol"] = 1e-300;
  EXPECT_EQ(run("stabilize --config " + config(c) + " --out " + out("a")).code, 1);
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  json bad_schema = stabilize_config(1e-3);
  bad_schema["schema"] = 2;
  EXPECT_EQ(run("stabilize --config " + config(bad_schema)).code, 2);
  json no_seed = stabilize_config(1e-3);
  no_seed.erase("seed");
  EXPECT_EQ(run("stabilize --config " + config(no_seed)).code, 2);
  json wrong_command = stabilize_config(1e-3);
  wrong_command["command"] = "suite";
  EXPECT_EQ(run("stabilize --config " + config(wrong_command)).code, 2);
  json bad_budget = stabilize_config(1e-3);
  bad_budget["budget"] = {{"restarts", 0}};
  EXPECT_EQ(run("stabilize --config " + config(bad_budget)).code, 2);
  const fs::path garbage = dir_ / "garbage.json";
  std::ofstream(garbage) << "{ not json";
  EXPECT_EQ(run("stabilize --config \"" + garbage.string() + "\"").code, 2);
  EXPECT_EQ(run("stabilize --config \"" + (dir_ / "missing.json").string() + "\"").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("tsirelson norm --vector '[1, 2'").code, 2);
  EXPECT_EQ(run("suite --config " + config(json{{"schema", 1}, {"seed", 1}, {"suite", {{"families", {"nope"}}}}})).code,
            2);
  const json tiny = {{"schema", 1}, {"seed", 1}, {"suite", {{"instances", 1}, {"refusals", 1}, {"families", {"two_cocycle"}}}}};
  EXPECT_EQ(run("suite --config " + config(tiny, "tiny.json") + " --out " + out("t"), "AMNM_THREADS=zero").code, 2);
}

TEST_F(Cli, SuiteIsIdenticalAcrossThreadCaps) {
  const json c = {{"schema", 1},
                  {"command", "suite"},
                  {"seed", 3},
                  {"threads", 8},
                  {"suite",
                   {{"instances", 2},
                    {"refusals", 2},
                    {"families", {"two_cocycle", "improving", "stabilize", "mvn_chain", "absorption_refused"}}}}};
  const std::string cfg = config(c);
  const CliRun one = run("suite --config " + cfg + " --out " + out("one"), "AMNM_THREADS=1");
  const CliRun eight = run("suite --config " + cfg + " --out " + out("eight"), "AMNM_THREADS=8");
  ASSERT_EQ(one.code, 0) << one.output;
  ASSERT_EQ(eight.code, 0) << eight.output;
  EXPECT_EQ(slurp(dir_ / "one" / "suite.jsonl"), slurp(dir_ / "eight" / "suite.jsonl"));
  EXPECT_EQ(slurp(dir_ / "one" / "suite_summary.json"), slurp(dir_ / "eight" / "suite_summary.json"));
  const json s = json::parse(slurp(dir_ / "one" / "suite_summary.json"));
  EXPECT_EQ(s.at("schema"), 1);
  EXPECT_TRUE(s.at("passed").get<bool>());
}

TEST_F(Cli, DefectOfAnExplicitMap) {
  // phi(e1) = 1, phi(e2) = 0.01 on C^2 with the Euclidean norm:
  // phi(ab) - phi(a)phi(b) = b^T M a with M = [[0, -0.01], [-0.01, 0.0099]],
  // so the defect is the spectral norm of M.
  const json c2 = {{"dim", 2},
                   {"structure", {{{1, 0}, {0, 0}}, {{0, 0}, {0, 1}}}},
                   {"unit", {1, 1}},
                   {"norm_mode", "frobenius"}};
  const json c1 = {{"dim", 1}, {"structure", {{{1}}}}, {"unit", {1}}, {"norm_mode", "frobenius"}};
  const json c = {{"schema", 1},
                  {"command", "defect"},
                  {"seed", 1},
                  {"defect", {{"map", {{"source", c2}, {"target", c1}, {"matrix", {{1.0, 0.01}}}}}}}};
  const CliRun r = run("defect --config " + config(c) + " --out " + out("d"));
  ASSERT_EQ(r.code, 0) << r.output;
  const json rep = json::parse(slurp(dir_ / "d" / "defect_report.json"));
  EXPECT_EQ(rep.at("schema"), 1);
  const double lo = rep.at("defect").at("lower").get<double>(), hi = rep.at("defect").at("upper").get<double>();
  const double exact = (0.0099 + std::sqrt(0.0099 * 0.0099 + 4e-4)) / 2.0;
  EXPECT_LE(lo, exact + 1e-15);
  EXPECT_GE(hi, exact - 1e-15);
  EXPECT_NEAR(lo, exact, 1e-12);
  json wrong = c;
  wrong["defect"]["map"]["matrix"] = {{1.0}};
  EXPECT_EQ(run("defect --config " + config(wrong, "wrong.json") + " --out " + out("e")).code, 2);
}

TEST_F(Cli, TsirelsonAndClones) {
  const CliRun t = run("tsirelson norm --vector '[1, 1, 1, 1, 1, 1]'");
  ASSERT_EQ(t.code, 0) << t.output;
  const json tj = json::parse(t.output);
  EXPECT_EQ(tj.at("norm"), 1.5);
  const CliRun s = run("tsirelson schreier --vector '[0, 0, 2, 2, 2]' --schreier '[3, 4, 5]'");
  ASSERT_EQ(s.code, 0) << s.output;
  EXPECT_TRUE(json::parse(s.output).at("schreier").at("holds").get<bool>());
  const CliRun c = run("clones --word 0110 --n 12 --horizon 20");
  ASSERT_EQ(c.code, 0) << c.output;
  const json cj = json::parse(c.output);
  EXPECT_EQ(cj.at("schema"), 1);
}
