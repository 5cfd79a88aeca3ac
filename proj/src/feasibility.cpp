#include "tubqi/feasibility.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace tubqi {

std::string Var::str() const {
  const char* k = kind == VarKind::L ? "L" : kind == VarKind::M ? "M" : "U";
  return std::string(k) + std::to_string(match_index);
}

std::string Constraint::str() const {
  return x.str() + " - " + y.str() + " <= " + c.str();
}

void ConstraintSystem::add_var(const Var& v) {
  if (var_index(v) < 0) vars.push_back(v);
}

int ConstraintSystem::var_index(const Var& v) const {
  for (size_t i = 0; i < vars.size(); ++i)
    if (vars[i] == v) return static_cast<int>(i);
  return -1;
}

void ConstraintSystem::add(const Var& x, const Var& y, const LogValue& c,
                           std::string provenance) {
  add_var(x);
  add_var(y);
  constraints.push_back({x, y, c, std::move(provenance)});
}

const LogValue* Assignment::value_of(const Var& v) const {
  for (size_t i = 0; i < vars.size(); ++i)
    if (vars[i] == v) return &values[i];
  return nullptr;
}

namespace {

struct Edge {
  int from, to;     // potential(to) <= potential(from) + w
  LogValue w;
  int constraint;   // index into sys.constraints, -1 for source edges
};

// Bellman-Ford over exact LogValues.  Node n is the virtual source.
struct BfOutcome {
  bool feasible = true;
  std::vector<LogValue> dist;
  std::vector<int> cycle_constraints;  // when infeasible
};

BfOutcome bellman_ford(int n, const std::vector<Edge>& edges) {
  BfOutcome out;
  std::vector<LogValue> dist(n + 1);
  std::vector<int> pred_edge(n + 1, -1);
  int last_relaxed = -1;
  for (int round = 0; round <= n + 1; ++round) {
    last_relaxed = -1;
    for (size_t ei = 0; ei < edges.size(); ++ei) {
      const Edge& e = edges[ei];
      LogValue cand = dist[e.from] + e.w;
      if (cand < dist[e.to]) {
        dist[e.to] = cand;
        pred_edge[e.to] = static_cast<int>(ei);
        last_relaxed = e.to;
      }
    }
    if (last_relaxed < 0) break;
  }
  if (last_relaxed < 0) {
    out.dist = std::move(dist);
    return out;
  }
  // A relaxation survived n+1 rounds: walk predecessors into the cycle.
  out.feasible = false;
  int v = last_relaxed;
  for (int i = 0; i <= n + 1; ++i) v = edges[pred_edge[v]].from;
  std::vector<int> path;
  int u = v;
  do {
    int ei = pred_edge[u];
    path.push_back(ei);
    u = edges[ei].from;
  } while (u != v);
  std::reverse(path.begin(), path.end());
  for (int ei : path) out.cycle_constraints.push_back(edges[ei].constraint);
  return out;
}

std::vector<Edge> system_edges(const ConstraintSystem& sys) {
  std::vector<Edge> edges;
  int n = static_cast<int>(sys.vars.size());
  for (size_t ci = 0; ci < sys.constraints.size(); ++ci) {
    const Constraint& c = sys.constraints[ci];
    int xi = sys.var_index(c.x), yi = sys.var_index(c.y);
    edges.push_back({yi, xi, c.c, static_cast<int>(ci)});
  }
  for (int v = 0; v < n; ++v) edges.push_back({n, v, LogValue(), -1});
  return edges;
}

}  // namespace

bool satisfies(const ConstraintSystem& sys, const Assignment& a) {
  for (const auto& c : sys.constraints) {
    const LogValue* x = a.value_of(c.x);
    const LogValue* y = a.value_of(c.y);
    if (!x || !y) return false;
    if (!(*x - *y <= c.c)) return false;
  }
  return true;
}

SolveResult solve(const ConstraintSystem& sys) {
  SolveResult result;
  int n = static_cast<int>(sys.vars.size());
  auto edges = system_edges(sys);
  BfOutcome bf = bellman_ford(n, edges);
  if (!bf.feasible) {
    InfeasibilityWitness w;
    LogValue total;
    for (int ci : bf.cycle_constraints) {
      if (ci < 0) throw std::logic_error("solve: source edge on a negative cycle");
      w.cycle.push_back(sys.constraints[ci]);
      total = total + sys.constraints[ci].c;
    }
    w.total = total;
    result.witness = std::move(w);
    return result;
  }

  Assignment a;
  a.vars = sys.vars;
  a.values.assign(bf.dist.begin(), bf.dist.begin() + n);

  // Attempt the M-zero normalization: equalize all M variables, re-solve,
  // then shift the solution so they sit at zero.  Verified rather than
  // assumed; dropped when the equalized system is infeasible.
  int first_m = -1;
  auto pinned = edges;
  for (int v = 0; v < n; ++v) {
    if (sys.vars[v].kind != VarKind::M) continue;
    if (first_m < 0) {
      first_m = v;
      continue;
    }
    pinned.push_back({first_m, v, LogValue(), -1});
    pinned.push_back({v, first_m, LogValue(), -1});
  }
  if (first_m >= 0) {
    BfOutcome bf0 = bellman_ford(n, pinned);
    if (bf0.feasible) {
      Assignment b;
      b.vars = sys.vars;
      for (int v = 0; v < n; ++v) b.values.push_back(bf0.dist[v] - bf0.dist[first_m]);
      b.m_zero_normalized = true;
      // Inflate bounds for strict margins: U += 1, L -= 1 preserves every
      // constraint the builder emits; verified below rather than trusted.
      LogValue margin = LogValue::integer(1);
      Assignment inflated = b;
      bool sane = true;
      for (size_t i = 0; i < inflated.vars.size(); ++i) {
        if (inflated.vars[i].kind == VarKind::U)
          inflated.values[i] = inflated.values[i] + margin;
        if (inflated.vars[i].kind == VarKind::L)
          inflated.values[i] = inflated.values[i] - margin;
        if (inflated.vars[i].kind == VarKind::M && !inflated.values[i].is_zero()) sane = false;
      }
      if (sane && satisfies(sys, inflated)) {
        result.assignment = std::move(inflated);
        return result;
      }
      if (satisfies(sys, b)) {
        result.assignment = std::move(b);
        return result;
      }
    }
  }
  if (!satisfies(sys, a)) throw std::logic_error("solve: potentials violate a constraint");
  result.assignment = std::move(a);
  return result;
}

}  // namespace tubqi
