// amnm: command-line harness for stabilization runs, defect estimates, the
// seeded suite and the Tsirelson/clone utilities.
//
// Exit codes: 0 all checks passed, 1 falsification / non-convergence /
// precondition failure, 2 configuration error.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "amnm/amnm.hpp"

namespace fs = std::filesystem;
using namespace amnm;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string action = "norm";
  std::string vector;
  std::string schreier;
  std::vector<std::string> words;
  int n = 0;
  int horizon = 0;
};

json load_config(const Options& o, const std::string& command) {
  json cfg = json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw ConfigError("cannot open config '" + o.config_path + "'");
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  }
  if (cfg.contains("schema") && cfg["schema"] != 1) throw ConfigError("unsupported config schema (expected 1)");
  if (cfg.contains("command") && cfg["command"] != command)
    throw ConfigError("config is for command '" + cfg["command"].dump() + "', not '" + command + "'");
  if (o.seed) cfg["seed"] = *o.seed;
  if (!o.out.empty()) cfg["out"] = o.out;
  return cfg;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

const json& section(const json& cfg, const char* key) {
  static const json empty = json::object();
  if (!cfg.contains(key)) return empty;
  if (!cfg.at(key).is_object()) throw ConfigError(std::string("section '") + key + "' must be an object");
  return cfg.at(key);
}

std::uint64_t require_seed(const json& cfg) {
  if (!cfg.contains("seed")) throw ConfigError("seed is mandatory (config field or --seed)");
  if (!cfg["seed"].is_number_unsigned() && !cfg["seed"].is_number_integer())
    throw ConfigError("seed must be a non-negative integer");
  if (cfg["seed"].is_number_integer() && cfg["seed"].get<std::int64_t>() < 0)
    throw ConfigError("seed must be a non-negative integer");
  return cfg["seed"].get<std::uint64_t>();
}

NormBudget budget_from(const json& cfg, std::uint64_t seed) {
  const json& b = section(cfg, "budget");
  NormBudget out;
  out.restarts = get_or(b, "restarts", out.restarts);
  out.sweeps = get_or(b, "sweeps", out.sweeps);
  if (out.restarts < 1 || out.restarts > 4096) throw ConfigError("budget.restarts must lie in [1, 4096]");
  if (out.sweeps < 1 || out.sweeps > 100000) throw ConfigError("budget.sweeps must lie in [1, 100000]");
  out.seed = derive_seed(seed, 0xb0d9e7);
  return out;
}

InstanceConfig instance_from(const json& cfg, std::uint64_t seed, const NormBudget& budget) {
  const json& s = section(cfg, "instance");
  InstanceConfig ic;
  ic.order = get_or(s, "order", ic.order);
  ic.mode = norm_mode_from_string(get_or<std::string>(s, "norm_mode", "spectral"));
  ic.gamma_norm = get_or(s, "gamma_norm", ic.gamma_norm);
  ic.index = get_or<std::uint64_t>(s, "index", 0);
  ic.seed = seed;
  ic.budget = budget;
  return ic;
}

unsigned thread_count(const json& cfg) {
  unsigned n = std::max(1U, std::thread::hardware_concurrency());
  if (cfg.contains("threads")) {
    const int t = get_or(cfg, "threads", 1);
    if (t < 1) throw ConfigError("threads must be positive");
    n = static_cast<unsigned>(t);
  }
  if (const char* env = std::getenv("AMNM_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) throw ConfigError("AMNM_THREADS must be a positive integer");
    n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

fs::path out_dir(const json& cfg) {
  const fs::path dir = get_or<std::string>(cfg, "out", "amnm-out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_stabilize(const Options& o) {
  const json cfg = load_config(o, "stabilize");
  const std::uint64_t seed = require_seed(cfg);
  const NormBudget budget = budget_from(cfg, seed);
  const Instance in = generate_instance(instance_from(cfg, seed, budget));
  const json& s = section(cfg, "stabilize");
  StabilizeConfig sc;
  sc.tol = get_or(s, "tol", sc.tol);
  sc.max_iter = get_or(s, "max_iter", sc.max_iter);
  sc.L = get_or(s, "L", sc.L);
  sc.check_paper_bounds = get_or(s, "check_paper_bounds", sc.check_paper_bounds);
  sc.seed = budget.seed;
  sc.restarts = budget.restarts;
  sc.sweeps = budget.sweeps;
  const fs::path dir = out_dir(cfg);
  const StabilizeReport r = stabilize(in.phi, in.d, in.cert, sc);
  write_file(dir / "stabilize_report.json", dump(to_json(r)));
  write_file(dir / "stabilize_iterates.csv", iterates_csv(r));
  std::cout << "converged " << (r.converged ? "yes" : "no") << ", iterations " << r.iterates.size()
            << ", distance <= " << format_double(r.total_distance.hi) << " (bound "
            << format_double(r.theorem_bound) << ")\n";
  return r.passed() ? 0 : 1;
}

int cmd_defect(const Options& o) {
  const json cfg = load_config(o, "defect");
  const std::uint64_t seed = require_seed(cfg);
  const NormBudget budget = budget_from(cfg, seed);
  const json& s = section(cfg, "defect");
  json report = {{"schema", 1}, {"seed", seed}};
  if (s.contains("map")) {
    const json& m = s.at("map");
    AlgebraPtr a, b;
    Mat mat;
    try {
      a = algebra_from_json(m.at("source"));
      b = algebra_from_json(m.at("target"));
      mat = mat_from_json(m.at("matrix"));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("defect.map: ") + e.what());
    }
    if (mat.rows() != b->dim() || mat.cols() != a->dim()) throw ConfigError("defect.map.matrix has the wrong shape");
    const LinearMap phi(a, b, mat);
    report["norm"] = to_json(linear_map_norm(phi, budget));
    report["defect"] = to_json(defect(phi, nullptr, nullptr, budget));
  } else {
    const Instance in = generate_instance(instance_from(cfg, seed, budget));
    report["instance"] = {{"source", to_json(*in.a)}, {"phi", to_json(in.phi.matrix)}};
    report["norm"] = to_json(linear_map_norm(in.phi, budget));
    report["gamma_norm"] = to_json(linear_map_norm(in.gamma, budget));
    report["defect"] = to_json(defect(in.phi, nullptr, nullptr, budget));
    report["defect_DA"] = to_json(defect(in.phi, &in.d, nullptr, budget));
    report["defect_AD"] = to_json(defect(in.phi, nullptr, &in.d, budget));
    report["defect_DD"] = to_json(defect(in.phi, &in.d, &in.d, budget));
  }
  const fs::path dir = out_dir(cfg);
  write_file(dir / "defect_report.json", dump(report));
  std::cout << "defect in [" << format_double(report["defect"]["lower"].get<double>()) << ", "
            << format_double(report["defect"]["upper"].get<double>()) << "]\n";
  return 0;
}

int cmd_suite(const Options& o) {
  const json cfg = load_config(o, "suite");
  const std::uint64_t seed = require_seed(cfg);
  const json& s = section(cfg, "suite");
  SuiteConfig sc;
  sc.seed = seed;
  sc.budget = budget_from(cfg, seed);
  sc.instances = get_or(s, "instances", sc.instances);
  sc.refusals = get_or(s, "refusals", sc.refusals);
  sc.families = get_or(s, "families", sc.families);
  const json& c = section(s, "convergence");
  sc.convergence.gamma_norm = get_or(c, "gamma_norm", sc.convergence.gamma_norm);
  sc.convergence.L = get_or(c, "L", sc.convergence.L);
  sc.convergence.tol = get_or(c, "tol", sc.convergence.tol);
  sc.convergence.max_iter = get_or(c, "max_iter", sc.convergence.max_iter);
  sc.convergence.min_pass_fraction = get_or(c, "min_pass_fraction", sc.convergence.min_pass_fraction);
  if (sc.instances > 100000 || sc.refusals > 100000) throw ConfigError("suite instance counts must be at most 100000");
  sc.threads = thread_count(cfg);
  const fs::path dir = out_dir(cfg);
  const SuiteResult r = run_suite(sc);
  write_file(dir / "suite.jsonl", suite_jsonl(r));
  write_file(dir / "suite_summary.json", dump(suite_summary(sc, r)));
  int failed = 0;
  for (const auto& f : r.families)
    if (!f.ok()) {
      ++failed;
      std::cerr << "FAIL " << f.name << ": " << f.passed << "/" << f.rows << " rows passed\n";
    }
  for (const auto& row : r.rows)
    if (!row.passed && failed > 0)
      std::cerr << "  " << row.lemma << " instance_seed " << row.instance_seed << ": " << row.detail << "\n";
  std::cout << r.rows.size() << " rows, " << r.families.size() - static_cast<std::size_t>(failed) << "/"
            << r.families.size() << " families passed\n";
  return failed == 0 ? 0 : 1;
}

TsirelsonVector parse_vector(const json& j) {
  TsirelsonVector x;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      const cplx v = complex_from_json(j[i]);
      if (v != cplx(0)) x[static_cast<int>(i) + 1] = v;
    }
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      int idx = 0;
      try {
        idx = std::stoi(k);
      } catch (const std::exception&) {
        throw ConfigError("vector keys must be positive integers");
      }
      x[idx] = complex_from_json(v);
    }
  } else {
    throw ConfigError("vector must be an array (t_1, t_2, ...) or an {index: value} object");
  }
  return x;
}

json parse_json_arg(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

int cmd_tsirelson(const Options& o) {
  const json cfg = load_config(o, "tsirelson");
  const json& s = section(cfg, "tsirelson");
  json vec_json = o.vector.empty() ? s.value("vector", json()) : parse_json_arg(o.vector, "--vector");
  if (vec_json.is_null()) throw ConfigError("tsirelson needs a vector (--vector or tsirelson.vector)");
  const TsirelsonVector x = parse_vector(vec_json);
  const int cap = get_or(s, "support_cap", 16);
  json out = {{"schema", 1}, {"command", "tsirelson"}};
  try {
    const TsirelsonNorm n = tsirelson_norm_detail(x, cap);
    out["norm"] = n.value;
    out["iterations"] = n.steps;
    if (o.action == "schreier" || !o.schreier.empty() || s.contains("schreier_set")) {
      const json jj = o.schreier.empty() ? s.value("schreier_set", json::array({3, 4, 5}))
                                         : parse_json_arg(o.schreier, "--schreier");
      const std::vector<int> j = jj.get<std::vector<int>>();
      const SchreierInequality si = schreier_inequality(x, j, cap);
      out["schreier"] = {{"set", j},        {"is_schreier", si.schreier}, {"half_sum", si.half_sum},
                         {"norm", si.norm}, {"holds", si.holds}};
    }
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  if (cfg.contains("out")) write_file(out_dir(cfg) / "tsirelson_report.json", dump(out));
  std::cout << dump(out);
  if (out.contains("schreier") && !out["schreier"]["holds"].get<bool>()) return 1;
  return 0;
}

int cmd_clones(const Options& o) {
  const json cfg = load_config(o, "clones");
  const json& s = section(cfg, "clones");
  std::vector<std::string> words = o.words.empty() ? get_or(s, "words", std::vector<std::string>{}) : o.words;
  if (words.empty()) throw ConfigError("clones needs at least one --word");
  const int n = o.n > 0 ? o.n : get_or(s, "n", 12);
  const int horizon = o.horizon > 0 ? o.horizon : get_or(s, "horizon", 20);
  const int big_n = get_or(s, "N", 20);
  if (n < 1 || n > 62) throw ConfigError("n must lie in [1, 62]");
  if (horizon < 1 || horizon > 62) throw ConfigError("horizon must lie in [1, 62]");
  std::vector<Word> parsed;
  try {
    for (const auto& w : words) parsed.push_back(parse_word(w));
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  json fams = json::array();
  bool ok = true;
  std::vector<CloneFamily> families;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const CloneFamily c = clone_family(parsed[i], n);
    const bool g = growth_condition(c), sch = interval_schreier(c);
    ok = ok && g && sch;
    fams.push_back({{"word", words[i]}, {"terms", c.terms}, {"growth", g}, {"interval_schreier", sch}});
    families.push_back(c);
  }
  json out = {{"schema", 1}, {"command", "clones"}, {"n", n}, {"horizon", horizon}, {"families", fams}};
  json pairs = json::array();
  for (std::size_t i = 0; i < parsed.size(); ++i)
    for (std::size_t j = i + 1; j < parsed.size(); ++j) {
      const Intersection r = intersection_size(parsed[i], parsed[j], horizon);
      ok = ok && r.matches;
      pairs.push_back({{"words", {words[i], words[j]}},
                       {"count", r.count},
                       {"first_disagreement", r.first_disagreement},
                       {"equal_within_horizon", r.equal_within_horizon},
                       {"matches", r.matches}});
    }
  out["intersections"] = pairs;
  const CloneSystemReport sys = clone_system_verify(families, big_n, get_or<std::uint64_t>(cfg, "seed", 0));
  out["projections"] = {{"N", big_n},
                        {"idempotent", sys.idempotent},
                        {"contractive", sys.contractive},
                        {"attains_one", sys.attains_one},
                        {"ranks_match", sys.ranks_match}};
  ok = ok && sys.idempotent && sys.contractive && sys.attains_one && sys.ranks_match;
  if (cfg.contains("out")) write_file(out_dir(cfg) / "clones_report.json", dump(out));
  std::cout << dump(out);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximately multiplicative maps: stabilization, estimates and suites"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration (schema 1)");
    sub->add_option("--seed", o.seed, "Seed override");
    sub->add_option("--out", o.out, "Output directory");
  };
  CLI::App* stab = app.add_subcommand("stabilize", "Iterate the improving operator on a seeded instance");
  CLI::App* def = app.add_subcommand("defect", "Certified norm and defect intervals");
  CLI::App* suite = app.add_subcommand("suite", "Run the seeded lemma suite");
  CLI::App* ts = app.add_subcommand("tsirelson", "Tsirelson norm and Schreier checks");
  CLI::App* cl = app.add_subcommand("clones", "Branching families and clone projections");
  for (auto* s : {stab, def, suite, ts, cl}) common(s);
  ts->add_option("action", o.action, "norm or schreier")->check(CLI::IsMember({"norm", "schreier"}));
  ts->add_option("--vector", o.vector, "JSON array of coefficients of t_1, t_2, ...");
  ts->add_option("--schreier", o.schreier, "JSON array J for the Schreier inequality");
  cl->add_option("--word", o.words, "Binary word (repeatable)");
  cl->add_option("--n", o.n, "Number of terms");
  cl->add_option("--horizon", o.horizon, "Intersection horizon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*stab) return cmd_stabilize(o);
    if (*def) return cmd_defect(o);
    if (*suite) return cmd_suite(o);
    if (*ts) return cmd_tsirelson(o);
    if (*cl) return cmd_clones(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
