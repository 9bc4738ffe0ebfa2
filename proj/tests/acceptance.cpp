// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every line passes.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <utility>
#include <string>
#include <vector>

#include "amnm/suite.hpp"

using namespace amnm;

namespace {

using Clock = std::chrono::steady_clock;

struct Group {
  SuiteResult result;
  double seconds = 0.0;
};

std::vector<std::string> families_of(int criterion) {
  std::vector<std::string> out;
  for (const auto& n : suite_family_names())
    if (suite_family_criterion(n) == criterion) out.push_back(n);
  return out;
}

Group run_group(const SuiteConfig& base, int criterion) {
  SuiteConfig c = base;
  c.families = families_of(criterion);
  const auto t0 = Clock::now();
  Group g{run_suite(c), 0.0};
  g.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return g;
}

bool report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  return ok;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int min_family_rows(const SuiteResult& r) {
  int m = r.families.empty() ? 0 : r.families.front().rows;
  for (const auto& f : r.families) m = std::min(m, f.rows);
  return m;
}

int failed_rows(const SuiteResult& r) {
  int n = 0;
  for (const auto& row : r.rows) n += row.passed ? 0 : 1;
  return n;
}

void list_failures(const SuiteResult& r, int limit = 5) {
  for (const auto& row : r.rows) {
    if (row.passed) continue;
    if (limit-- == 0) return;
    std::printf("    %s seed %llu: lhs [%g, %g] rhs [%g, %g] %s\n", row.lemma.c_str(),
                static_cast<unsigned long long>(row.instance_seed), row.lhs.lo, row.lhs.hi, row.rhs.lo, row.rhs.hi,
                row.detail.c_str());
  }
}

}  // namespace

int main() {
  const auto start = Clock::now();
  SuiteConfig base;  // seed 7, 100 instances, 100 refusals, default budget
  base.threads = 1;
  std::map<int, Group> groups;
  bool all = true;

  {
    groups[1] = run_group(base, 1);
    const SuiteResult& r = groups[1].result;
    double worst = 0.0, tol = 0.0;
    for (const auto& row : r.rows) {
      worst = std::max(worst, row.lhs.hi);
      tol = std::max(tol, row.rhs.hi);
    }
    const bool ok = r.passed() && failed_rows(r) == 0 && min_family_rows(r) >= 100 && tol <= 1e-10 &&
                    groups[1].seconds < 30.0;
    all &= report(1, "exact identities", ok,
                  std::to_string(r.families.size()) + " families, " + std::to_string(r.rows.size()) +
                      " rows, at least " + std::to_string(min_family_rows(r)) + " instances each, max residual " +
                      fmt("%.3g", worst) + " <= tol " + fmt("%.0e", tol) + ", " + fmt("%.1f", groups[1].seconds) +
                      " s (limit 30 s)");
    if (!ok) list_failures(r);
  }
  {
    groups[2] = run_group(base, 2);
    groups[3] = run_group(base, 3);  // carries the est0 rows
    const SuiteResult& r = groups[2].result;
    int est0 = 0, est0_ok = 0;
    for (const auto& row : groups[3].result.rows)
      if (row.lemma == "est0") {
        ++est0;
        est0_ok += row.passed ? 1 : 0;
      }
    const bool ok = r.passed() && failed_rows(r) == 0 && min_family_rows(r) >= 100 && est0 >= 100 &&
                    est0_ok == est0 && groups[2].seconds < 120.0;
    all &= report(2, "no falsification of the estimates", ok,
                  std::to_string(r.families.size()) + " families, " + std::to_string(r.rows.size() - failed_rows(r)) +
                      "/" + std::to_string(r.rows.size()) + " rows not falsified, est0 " + std::to_string(est0_ok) +
                      "/" + std::to_string(est0) + ", " + fmt("%.1f", groups[2].seconds) + " s (limit 120 s)");
    if (!ok) list_failures(r);
  }
  {
    const SuiteResult& r = groups[3].result;
    std::map<std::uint64_t, std::map<std::string, bool>> by_seed;
    for (const auto& row : r.rows) by_seed[row.instance_seed][row.lemma] = row.passed;
    int converged = 0, bounds_ok = 0;
    for (const auto& [seed, rows] : by_seed) {
      if (!rows.at("stabilize_convergence")) continue;
      ++converged;
      if (rows.at("stabilize_distance") && rows.at("stabilize_claims") && rows.at("est0")) ++bounds_ok;
    }
    const int n = static_cast<int>(by_seed.size());
    const bool ok = n >= 100 && converged * 100 >= 95 * n && bounds_ok == converged && groups[3].seconds < 60.0;
    all &= report(3, "stabilization on M_2 with diagonal D, L = 2", ok,
                  std::to_string(converged) + "/" + std::to_string(n) +
                      " converged to def_DxA <= 1e-8 within 30 iterations (need 95%), " + std::to_string(bounds_ok) +
                      "/" + std::to_string(converged) + " converged runs within the claim and distance bounds, " +
                      fmt("%.1f", groups[3].seconds) + " s (limit 60 s)");
    if (!ok) list_failures(r);
  }
  {
    groups[4] = run_group(base, 4);
    const SuiteResult& r = groups[4].result;
    int grid = 0;
    for (const auto& row : r.rows) grid += row.lemma == "kicsi_nagy" ? 1 : 0;
    all &= report(4, "dichotomy numerics", r.passed() && failed_rows(r) == 0,
                  std::to_string(grid) + " grid points c in [0, 2/9], boundary c = 2/9 and thresholds 1/3, 2/3: " +
                      std::to_string(r.rows.size() - failed_rows(r)) + "/" + std::to_string(r.rows.size()) +
                      " rows pass");
    if (!r.passed()) list_failures(r);
  }
  {
    groups[5] = run_group(base, 5);
    const SuiteResult& r = groups[5].result;
    int valid = 1 << 30, refused = 1 << 30;
    for (const auto& f : r.families) {
      if (f.name.size() > 6 && f.name.compare(f.name.size() - 6, 6, "_valid") == 0) valid = std::min(valid, f.rows);
      if (f.name.size() > 8 && f.name.compare(f.name.size() - 8, 8, "_refused") == 0)
        refused = std::min(refused, f.rows);
    }
    const bool ok = r.passed() && failed_rows(r) == 0 && valid >= 100 && refused >= 100 && groups[5].seconds < 30.0;
    all &= report(5, "elementary-lemma checkers", ok,
                  std::to_string(r.families.size()) + " families, at least " + std::to_string(valid) +
                      " valid and " + std::to_string(refused) + " refused instances per checker, " +
                      std::to_string(r.rows.size() - failed_rows(r)) + "/" + std::to_string(r.rows.size()) +
                      " rows pass, " + fmt("%.1f", groups[5].seconds) + " s (limit 30 s)");
    if (!ok) list_failures(r);
  }
  {
    groups[6] = run_group(base, 6);
    const SuiteResult& r = groups[6].result;
    const bool ok = r.passed() && failed_rows(r) == 0 && groups[6].seconds < 60.0;
    all &= report(6, "Tsirelson norm, Schreier sets and clone families", ok,
                  std::to_string(r.rows.size() - failed_rows(r)) + "/" + std::to_string(r.rows.size()) +
                      " rows pass, " + fmt("%.1f", groups[6].seconds) + " s (limit 60 s)");
    if (!ok) list_failures(r);
  }
  {
    auto full_run = [&](unsigned threads) {
      SuiteConfig c = base;
      c.threads = threads;
      const SuiteResult r = run_suite(c);
      return std::make_pair(suite_jsonl(r), suite_summary(c, r).dump(2));
    };
    const auto t0 = Clock::now();
    const auto a1 = full_run(1), b1 = full_run(1), a8 = full_run(8), b8 = full_run(8);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::string grouped;
    for (auto& [id, g] : groups) grouped += suite_jsonl(g.result);
    const bool same1 = a1 == b1, same8 = a8 == b8, across = a1 == a8, matches_groups = grouped == a1.first;
    all &= report(7, "determinism", same1 && same8 && across && matches_groups && !a1.first.empty(),
                  std::to_string(a1.first.size()) + " bytes of rows; two runs at 1 thread identical: " +
                      (same1 ? "yes" : "no") + ", two runs at 8 threads identical: " + (same8 ? "yes" : "no") +
                      ", 1 vs 8 threads identical: " + (across ? "yes" : "no") +
                      ", per-criterion runs identical to the full run: " + (matches_groups ? "yes" : "no") + ", " +
                      fmt("%.1f", secs) + " s for four full runs");
  }
  const double total = std::chrono::duration<double>(Clock::now() - start).count();
  std::printf("total %.1f s (limit 300 s)\n", total);
  if (total >= 300.0) {
    std::printf("FAIL full acceptance run exceeded 300 s\n");
    all = false;
  }
  return all ? 0 : 1;
}
