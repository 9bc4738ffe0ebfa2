#pragma once

// Figiel-Johnson Tsirelson norm on finitely supported vectors, Schreier
// sets, the binary-branching families M(f) and coordinate projections on
// finite truncations.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "amnm/algebra.hpp"
#include "amnm/random.hpp"

namespace amnm {

/// Finitely supported vector: index (>= 1) -> coefficient.
using TsirelsonVector = std::map<int, cplx>;

inline TsirelsonVector unit_vector(int n) { return {{n, cplx(1.0)}}; }

struct TsirelsonNorm {
  double value = 0.0;
  int steps = 0;                 // iterations until the table stopped changing
  std::vector<double> history;   // ||x||_m for m = 0..steps
};

/// Iterates ||x||_0 = ||x||_oo,
///   ||x||_{m+1} = max(||x||_m, 1/2 max sum_j ||E_j x||_m)
/// over k <= E_1 < ... < E_k, to exact stabilization.  Because the norm is
/// 1-unconditional only the support matters: the sets can be taken as runs
/// of consecutive support points, the first run starting at support index s
/// allows up to s runs.  Tables are indexed by support ranges [a, b].
inline TsirelsonNorm tsirelson_norm_detail(const TsirelsonVector& x, int cap = 16) {
  std::vector<int> idx;
  std::vector<double> mag;
  for (const auto& [i, v] : x) {
    if (i < 1) throw std::domain_error("tsirelson: indices start at 1");
    if (v != cplx(0)) {
      idx.push_back(i);
      mag.push_back(std::abs(v));
    }
  }
  const int r = static_cast<int>(idx.size());
  if (r > cap)
    throw std::domain_error("tsirelson: support size " + std::to_string(r) + " exceeds the cap of " +
                            std::to_string(cap));
  TsirelsonNorm out;
  if (r == 0) {
    out.history.push_back(0.0);
    return out;
  }
  // old[a][b] = ||x restricted to support points a..b||_m
  std::vector<std::vector<double>> old(r, std::vector<double>(r, 0.0));
  for (int a = 0; a < r; ++a) {
    double m = 0.0;
    for (int b = a; b < r; ++b) {
      m = std::max(m, mag[b]);
      old[a][b] = m;
    }
  }
  out.history.push_back(old[0][r - 1]);
  // best[k][s][b]: max over partitions of [s..b] into at most k runs.
  std::vector<std::vector<std::vector<double>>> best(
      r + 1, std::vector<std::vector<double>>(r, std::vector<double>(r, 0.0)));
  for (;;) {
    for (int s = 0; s < r; ++s)
      for (int b = s; b < r; ++b) best[1][s][b] = old[s][b];
    for (int k = 2; k <= r; ++k)
      for (int s = 0; s < r; ++s)
        for (int b = s; b < r; ++b) {
          double v = best[k - 1][s][b];
          for (int t = s; t < b; ++t) v = std::max(v, old[s][t] + best[k - 1][t + 1][b]);
          best[k][s][b] = v;
        }
    bool changed = false;
    std::vector<std::vector<double>> next = old;
    for (int a = 0; a < r; ++a)
      for (int b = a; b < r; ++b) {
        double v = old[a][b];
        for (int s = a; s <= b; ++s) {
          const int k = std::min(idx[s], b - s + 1);
          v = std::max(v, 0.5 * best[k][s][b]);
        }
        if (v > old[a][b]) {
          next[a][b] = v;
          changed = true;
        }
      }
    if (!changed) break;
    old = std::move(next);
    ++out.steps;
    out.history.push_back(old[0][r - 1]);
  }
  out.value = old[0][r - 1];
  return out;
}

inline double tsirelson_norm(const TsirelsonVector& x, int cap = 16) {
  return tsirelson_norm_detail(x, cap).value;
}

struct SchreierCert {
  std::vector<int> J;
  bool schreier = false;
  double sigma_bound = 0.0;  // 2 when J is Schreier
};

/// |J| <= min J.
inline SchreierCert schreier_check(const std::vector<int>& J) {
  SchreierCert c;
  c.J = J;
  if (J.empty()) return c;
  const int mn = *std::min_element(J.begin(), J.end());
  const std::set<int> distinct(J.begin(), J.end());
  c.schreier = mn >= 1 && static_cast<int>(distinct.size()) <= mn;
  if (c.schreier) c.sigma_bound = 2.0;
  return c;
}

struct SchreierInequality {
  bool schreier = false;
  double norm = 0.0;
  double half_sum = 0.0;  // (1/2) sum_{j in J} |x_j|
  bool holds = true;
};

/// For a Schreier set J: ||x|| >= (1/2) sum_{j in J} |x_j|.
inline SchreierInequality schreier_inequality(const TsirelsonVector& x, const std::vector<int>& J, int cap = 16) {
  if (J.empty()) throw std::domain_error("schreier_inequality: J must be nonempty");
  SchreierInequality s;
  s.schreier = schreier_check(J).schreier;
  s.norm = tsirelson_norm(x, cap);
  for (int j : std::set<int>(J.begin(), J.end())) {
    const auto it = x.find(j);
    if (it != x.end()) s.half_sum += 0.5 * std::abs(it->second);
  }
  if (s.schreier) s.holds = s.norm >= s.half_sum - 1e-12;
  return s;
}

// ---------------------------------------------------------------------------
// Clone families

using Word = std::vector<int>;  // f(1), f(2), ... with values in {0, 1}

inline Word parse_word(const std::string& s) {
  Word w;
  for (char ch : s) {
    if (ch != '0' && ch != '1') throw std::domain_error("binary word may only contain 0 and 1");
    w.push_back(ch - '0');
  }
  return w;
}

struct CloneFamily {
  Word f;
  std::vector<std::int64_t> terms;  // m_1 .. m_n
};

/// m_1 = 1, m_{j+1} = 2 m_j + f(j); letters beyond the word count as 0.
inline CloneFamily clone_family(const Word& f, int n) {
  if (n < 1) throw std::domain_error("clone_family: n must be at least 1");
  if (n > 62) throw std::domain_error("clone_family: n above 62 overflows 64-bit terms");
  CloneFamily c{f, {1}};
  for (int j = 1; j < n; ++j) {
    const int fj = j <= static_cast<int>(f.size()) ? f[j - 1] : 0;
    c.terms.push_back(2 * c.terms.back() + fj);
  }
  return c;
}

/// m_n = 2^{n-1} + sum_{j<n} f(j) 2^{n-1-j}.
inline std::int64_t clone_term_closed_form(const Word& f, int n) {
  std::int64_t m = std::int64_t{1} << (n - 1);
  for (int j = 1; j < n; ++j) {
    const int fj = j <= static_cast<int>(f.size()) ? f[j - 1] : 0;
    m += static_cast<std::int64_t>(fj) << (n - 1 - j);
  }
  return m;
}

/// m_{j+1} <= 2 m_j + 2 for all recorded j.
inline bool growth_condition(const CloneFamily& c) {
  if (c.terms.empty() || c.terms[0] != 1) return false;
  for (std::size_t j = 0; j + 1 < c.terms.size(); ++j)
    if (c.terms[j + 1] > 2 * c.terms[j] + 2 || c.terms[j + 1] <= c.terms[j]) return false;
  return true;
}

/// Every maximal interval J strictly between consecutive terms is Schreier.
inline bool interval_schreier(const CloneFamily& c) {
  for (std::size_t j = 0; j + 1 < c.terms.size(); ++j) {
    const std::int64_t lo = c.terms[j] + 1, hi = c.terms[j + 1] - 1;
    if (hi < lo) continue;
    if (hi - lo + 1 > lo) return false;
  }
  return true;
}

struct Intersection {
  int count = 0;
  int first_disagreement = 0;  // 1-based k; 0 when the words agree within the horizon
  bool equal_within_horizon = false;
  bool matches = false;        // count == k
};

/// |M(f) cap M(g)| over the first N terms of each family.
inline Intersection intersection_size(const Word& f, const Word& g, int horizon) {
  const CloneFamily a = clone_family(f, horizon), b = clone_family(g, horizon);
  Intersection r;
  std::set<std::int64_t> sa(a.terms.begin(), a.terms.end());
  for (auto t : b.terms) r.count += static_cast<int>(sa.count(t));
  for (int j = 1; j < horizon; ++j) {
    const int fj = j <= static_cast<int>(f.size()) ? f[j - 1] : 0;
    const int gj = j <= static_cast<int>(g.size()) ? g[j - 1] : 0;
    if (fj != gj) {
      r.first_disagreement = j;
      break;
    }
  }
  r.equal_within_horizon = r.first_disagreement == 0;
  r.matches = r.equal_within_horizon ? r.count == horizon : r.count == r.first_disagreement;
  return r;
}

// ---------------------------------------------------------------------------
// Basis projections on truncations

/// Coordinate projection onto span{t_m : m in M, m <= N}.
inline Eigen::MatrixXd basis_projection(const std::vector<std::int64_t>& M, int N) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(N, N);
  for (auto m : M)
    if (m >= 1 && m <= N) p(m - 1, m - 1) = 1.0;
  return p;
}

inline TsirelsonVector apply_projection(const Eigen::MatrixXd& p, const TsirelsonVector& x) {
  TsirelsonVector y;
  for (const auto& [i, v] : x)
    if (i <= p.rows() && p(i - 1, i - 1) != 0.0) y[i] = v;
  return y;
}

/// Seeded vector with at most `support` nonzero entries in [1, N].
inline TsirelsonVector random_tsirelson_vector(CounterRng& rng, int N, int support) {
  TsirelsonVector x;
  std::vector<int> pool(N);
  for (int i = 0; i < N; ++i) pool[i] = i + 1;
  const int s = std::min(support, N);
  for (int i = 0; i < s; ++i) {
    const int j = i + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(N - i));
    std::swap(pool[i], pool[j]);
    x[pool[i]] = rng.complex_normal();
  }
  return x;
}

struct CloneSystemReport {
  int families = 0;
  int N = 0;
  bool idempotent = true;
  bool contractive = true;    // ||P_M x|| <= ||x|| on seeded vectors
  bool attains_one = true;    // ||P_M t_m|| = 1 for m in M
  bool ranks_match = true;    // rank(P_M P_M') = |M cap M' cap [1,N]|
  int pairs_checked = 0;
  bool passed() const { return idempotent && contractive && attains_one && ranks_match; }
};

inline CloneSystemReport clone_system_verify(const std::vector<CloneFamily>& families, int N, std::uint64_t seed,
                                             int samples = 8, int support = 12) {
  CloneSystemReport rep;
  rep.families = static_cast<int>(families.size());
  rep.N = N;
  std::vector<Eigen::MatrixXd> proj;
  for (const auto& f : families) proj.push_back(basis_projection(f.terms, N));
  for (std::size_t i = 0; i < families.size(); ++i) {
    const auto& p = proj[i];
    if ((p * p - p).cwiseAbs().maxCoeff() != 0.0) rep.idempotent = false;
    CounterRng rng(seed, i);
    for (int t = 0; t < samples; ++t) {
      const TsirelsonVector x = random_tsirelson_vector(rng, N, support);
      if (tsirelson_norm(apply_projection(p, x)) > tsirelson_norm(x) + 1e-12) rep.contractive = false;
    }
    for (auto m : families[i].terms)
      if (m <= N && tsirelson_norm(apply_projection(p, unit_vector(static_cast<int>(m)))) != 1.0)
        rep.attains_one = false;
  }
  for (std::size_t i = 0; i < families.size(); ++i)
    for (std::size_t j = i + 1; j < families.size(); ++j) {
      const Eigen::MatrixXd prod = proj[i] * proj[j];
      const auto rank = Eigen::FullPivLU<Eigen::MatrixXd>(prod).rank();
      std::set<std::int64_t> a, common;
      for (auto m : families[i].terms)
        if (m <= N) a.insert(m);
      for (auto m : families[j].terms)
        if (m <= N && a.count(m)) common.insert(m);
      if (rank != static_cast<Eigen::Index>(common.size())) rep.ranks_match = false;
      ++rep.pairs_checked;
    }
  return rep;
}

}  // namespace amnm
