#pragma once

// Independent test oracles.  Nothing here is shared with the production
// implementation paths it checks.

#include "tubqi/feasibility.hpp"
#include "tubqi/psets.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace oracle {

// Difference-constraint feasibility by exhaustive simple-cycle enumeration
// (Farkas: infeasible iff some cycle of x-y<=c arcs has negative total).
inline bool feasible_by_cycle_enumeration(const tubqi::ConstraintSystem& sys) {
  int n = static_cast<int>(sys.vars.size());
  struct Arc {
    int from, to;
    tubqi::LogValue w;
  };
  std::vector<Arc> arcs;
  for (const auto& c : sys.constraints)
    arcs.push_back({sys.var_index(c.y), sys.var_index(c.x), c.c});

  bool negative = false;
  std::vector<char> on_path(n, 0);
  std::function<void(int, int, const tubqi::LogValue&)> walk =
      [&](int start, int v, const tubqi::LogValue& total) {
        if (negative) return;
        for (const auto& a : arcs) {
          if (a.from != v) continue;
          tubqi::LogValue t = total + a.w;
          if (a.to == start) {
            if (t.sign() < 0) negative = true;
            continue;
          }
          if (a.to < start || on_path[a.to]) continue;  // canonical start = min node
          on_path[a.to] = 1;
          walk(start, a.to, t);
          on_path[a.to] = 0;
        }
      };
  for (int s = 0; s < n && !negative; ++s) walk(s, s, tubqi::LogValue());
  return !negative;
}

// Floyd-Warshall potentials; a second independent feasibility route that also
// produces a witness assignment when feasible.
inline std::optional<std::vector<tubqi::LogValue>> feasible_by_floyd_warshall(
    const tubqi::ConstraintSystem& sys) {
  int n = static_cast<int>(sys.vars.size());
  std::vector<std::vector<std::optional<tubqi::LogValue>>> d(
      n, std::vector<std::optional<tubqi::LogValue>>(n));
  for (int i = 0; i < n; ++i) d[i][i] = tubqi::LogValue();
  for (const auto& c : sys.constraints) {
    int u = sys.var_index(c.y), v = sys.var_index(c.x);
    if (!d[u][v] || c.c < *d[u][v]) d[u][v] = c.c;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (!d[i][k]) continue;
      for (int j = 0; j < n; ++j) {
        if (!d[k][j]) continue;
        tubqi::LogValue t = *d[i][k] + *d[k][j];
        if (!d[i][j] || t < *d[i][j]) d[i][j] = t;
      }
    }
  for (int i = 0; i < n; ++i)
    if (d[i][i]->sign() < 0) return std::nullopt;
  // Potentials: shortest distance from each node to everything, min over rows.
  std::vector<tubqi::LogValue> pot(n);
  for (int j = 0; j < n; ++j) {
    std::optional<tubqi::LogValue> m;
    for (int i = 0; i < n; ++i)
      if (d[i][j] && (!m || *d[i][j] < *m)) m = d[i][j];
    pot[j] = m ? *m : tubqi::LogValue();
  }
  return pot;
}

// Brute-force maximum mean cycle over the same transit arcs max_slope uses,
// by enumerating all simple cycles.
struct RatioArc {
  int to;
  tubqi::LogValue gain;
};

inline std::optional<tubqi::SlopeRatio> max_mean_cycle_brute(
    const std::vector<std::vector<RatioArc>>& arcs) {
  int n = static_cast<int>(arcs.size());
  std::optional<tubqi::SlopeRatio> best;
  std::vector<char> on_path(n, 0);
  std::function<void(int, int, const tubqi::LogValue&, unsigned)> walk =
      [&](int start, int v, const tubqi::LogValue& total, unsigned len) {
        for (const auto& a : arcs[v]) {
          tubqi::LogValue t = total + a.gain;
          if (a.to == start) {
            tubqi::SlopeRatio r{t, len + 1};
            if (!best || *best < r) best = r;
            continue;
          }
          if (a.to < start || on_path[a.to]) continue;
          on_path[a.to] = 1;
          walk(start, a.to, t, len + 1);
          on_path[a.to] = 0;
        }
      };
  for (int s = 0; s < n; ++s) walk(s, s, tubqi::LogValue(), 0);
  return best;
}

// Direct Gram averaging over an explicitly supplied symmetry group list;
// used to cross-check symmetric_gram against its own group computation.
inline tubqi::Gram average_gram(const std::vector<tubqi::Moebius>& group) {
  tubqi::Rational s11(0), s12(0), s22(0);
  for (const auto& m : group) {
    tubqi::Rational ad = tubqi::Rational(m.det()).abs();
    s11 += tubqi::Rational(m.m[0] * m.m[0] + m.m[2] * m.m[2]) / ad;
    s12 += tubqi::Rational(m.m[0] * m.m[1] + m.m[2] * m.m[3]) / ad;
    s22 += tubqi::Rational(m.m[1] * m.m[1] + m.m[3] * m.m[3]) / ad;
  }
  return tubqi::Gram{s11, s12, s22}.canonical();
}

// Deterministic xorshift generator for the property suites.
struct Rng {
  uint64_t state = 0x9e3779b97f4a7c15ULL;
  uint64_t next() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  }
  int below(int n) { return static_cast<int>(next() % static_cast<uint64_t>(n)); }
};

}  // namespace oracle
