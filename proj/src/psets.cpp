#include "tubqi/psets.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace tubqi {

int GroupAnalysis::node_id(int vertex, const ProjectiveSlope& s) const {
  const auto& pat = patterns[vertex].slopes;
  auto it = std::lower_bound(pat.begin(), pat.end(), s);
  if (it == pat.end() || !(*it == s)) return -1;
  return vertex_nodes[vertex][it - pat.begin()];
}

std::vector<TypeRef> GroupAnalysis::type_multiset(int vertex) const {
  std::vector<TypeRef> out;
  for (int node : vertex_nodes[vertex]) out.push_back(node_type[node]);
  return out;
}

bool GroupAnalysis::all_bounded() const {
  return std::all_of(classes.begin(), classes.end(),
                     [](const PsetClass& c) { return c.bounded; });
}

GroupAnalysis analyze(const GraphOfGroups& g, const std::vector<Rational>* gram_scales) {
  GroupAnalysis a;
  a.graph = g;

  a.patterns.resize(g.vertices.size());
  for (size_t v = 0; v < g.vertices.size(); ++v) a.patterns[v].vertex = static_cast<int>(v);
  for (const auto& e : g.edges) {
    a.patterns[e.v0].slopes.push_back(slope_of(e.vec0));
    a.patterns[e.v1].slopes.push_back(slope_of(e.vec1));
  }
  for (auto& p : a.patterns) {
    std::sort(p.slopes.begin(), p.slopes.end());
    p.slopes.erase(std::unique(p.slopes.begin(), p.slopes.end()), p.slopes.end());
    if (p.slopes.size() < 2) throw std::invalid_argument("analyze: input failed validation");
  }

  a.grams.resize(g.vertices.size());
  a.symmetry_orders.assign(g.vertices.size(), 0);
  for (size_t v = 0; v < g.vertices.size(); ++v) {
    a.grams[v] = symmetric_gram(a.patterns[v]);
    if (a.patterns[v].slopes.size() >= 3) {
      int order = static_cast<int>(symmetry_group(a.patterns[v]).size());
      a.symmetry_orders[v] = order;
      if (order == 1 && a.patterns[v].slopes.size() >= 5) {
        a.warnings.push_back({Severity::Warning, "ambiguous-metric",
                              "vertex '" + g.vertices[v] +
                                  "' has a trivial symmetry group; the metric choice is "
                                  "not canonical",
                              0, 0});
      }
    }
    if (gram_scales) a.grams[v] = a.grams[v].scaled((*gram_scales)[v]);
  }

  // Slope graph: one node per (vertex, slope), one link per edge.
  a.vertex_nodes.resize(g.vertices.size());
  for (size_t v = 0; v < g.vertices.size(); ++v) {
    for (size_t s = 0; s < a.patterns[v].slopes.size(); ++s) {
      a.vertex_nodes[v].push_back(static_cast<int>(a.nodes.size()));
      a.nodes.push_back({static_cast<int>(v), static_cast<int>(s)});
    }
  }
  for (size_t ei = 0; ei < g.edges.size(); ++ei) {
    const auto& e = g.edges[ei];
    SlopeLink link;
    link.edge = static_cast<int>(ei);
    link.from = a.node_id(e.v0, slope_of(e.vec0));
    link.to = a.node_id(e.v1, slope_of(e.vec1));
    link.height = edge_height(a.grams[e.v0], a.grams[e.v1], e.vec0, e.vec1);
    a.links.push_back(link);
  }

  // Connected components with potentials; a class is bounded exactly when
  // every fundamental cycle has height sum zero.
  int n = static_cast<int>(a.nodes.size());
  std::vector<int> comp(n, -1);
  a.node_type.resize(n);
  struct Adj {
    int link, other, dir;  // dir +1 traverses end0->end1
  };
  std::vector<std::vector<Adj>> adj(n);
  for (size_t li = 0; li < a.links.size(); ++li) {
    adj[a.links[li].from].push_back({static_cast<int>(li), a.links[li].to, +1});
    adj[a.links[li].to].push_back({static_cast<int>(li), a.links[li].from, -1});
  }
  for (int start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    PsetClass cls;
    cls.id = static_cast<int>(a.classes.size());
    std::vector<LogValue> pot(n);
    std::vector<int> stack{start};
    comp[start] = cls.id;
    pot[start] = LogValue();
    std::vector<char> link_seen(a.links.size(), 0);
    bool bounded = true;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      cls.nodes.push_back(u);
      for (auto [li, w, dir] : adj[u]) {
        const SlopeLink& link = a.links[li];
        LogValue delta = dir > 0 ? link.height : -link.height;
        if (!link_seen[li]) {
          link_seen[li] = 1;
          cls.links.push_back(li);
        }
        if (comp[w] < 0) {
          comp[w] = cls.id;
          pot[w] = pot[u] + delta;
          stack.push_back(w);
        } else if (pot[w] != pot[u] + delta) {
          bounded = false;
        }
      }
    }
    std::sort(cls.nodes.begin(), cls.nodes.end());
    std::sort(cls.links.begin(), cls.links.end());
    cls.bounded = bounded;
    if (bounded) {
      // Shift so the first node in canonical order sits at zero.
      LogValue base = pot[cls.nodes.front()];
      for (int node : cls.nodes) cls.potentials.push_back(pot[node] - base);
    }
    for (size_t i = 0; i < cls.nodes.size(); ++i)
      a.node_type[cls.nodes[i]] = TypeRef{cls.id, static_cast<int>(i)};
    a.classes.push_back(std::move(cls));
  }

  return a;
}

namespace {

struct TransitArc {
  int to;
  LogValue gain;
};

// Composite transit graph: an arc x -> x' means "enter the class of x at type
// x, exit at some type y sharing x''s vertex, switch slope at that vertex".
std::vector<std::vector<TransitArc>> transit_graph(const GroupAnalysis& a) {
  int n = static_cast<int>(a.nodes.size());
  std::vector<std::vector<TransitArc>> arcs(n);
  for (int x = 0; x < n; ++x) {
    const PsetClass& cls = a.classes[a.node_type[x].class_id];
    const LogValue& px = cls.potentials[a.node_type[x].type_index];
    for (size_t yi = 0; yi < cls.nodes.size(); ++yi) {
      int y = cls.nodes[yi];
      LogValue gain = cls.potentials[yi] - px;
      int v = a.nodes[y].vertex;
      for (int xp : a.vertex_nodes[v]) {
        if (xp == y) continue;  // must switch to a different family
        // Keep only the best gain per (x, xp); dominated arcs never help.
        bool replaced = false;
        for (auto& arc : arcs[x]) {
          if (arc.to == xp) {
            if (gain > arc.gain) arc.gain = gain;
            replaced = true;
            break;
          }
        }
        if (!replaced) arcs[x].push_back({xp, gain});
      }
    }
  }
  return arcs;
}

}  // namespace

std::optional<SlopeRatio> GroupAnalysis::max_slope() const {
  for (size_t v = 0; v < graph.vertices.size(); ++v)
    if (line_count(static_cast<int>(v)) < 3) return std::nullopt;
  if (!all_bounded()) return std::nullopt;

  // Karp's maximum mean cycle with a super-source; weights are exact
  // LogValues and means are compared by cross-powering.
  auto arcs = transit_graph(*this);
  int n = static_cast<int>(nodes.size());
  int rounds = n + 1;
  std::vector<std::vector<std::optional<LogValue>>> best(
      rounds + 1, std::vector<std::optional<LogValue>>(n));
  for (int v = 0; v < n; ++v) best[0][v] = LogValue();  // super-source arcs
  for (int k = 1; k <= rounds; ++k) {
    for (int u = 0; u < n; ++u) {
      if (!best[k - 1][u]) continue;
      for (const auto& arc : arcs[u]) {
        LogValue cand = *best[k - 1][u] + arc.gain;
        if (!best[k][arc.to] || cand > *best[k][arc.to]) best[k][arc.to] = cand;
      }
    }
  }
  std::optional<SlopeRatio> result;
  for (int v = 0; v < n; ++v) {
    if (!best[rounds][v]) continue;
    std::optional<SlopeRatio> vmin;
    for (int k = 0; k < rounds; ++k) {
      if (!best[k][v]) continue;
      SlopeRatio r{*best[rounds][v] - *best[k][v], static_cast<unsigned>(rounds - k)};
      if (!vmin || r < *vmin) vmin = r;
    }
    if (vmin && (!result || *result < *vmin)) result = vmin;
  }
  if (result) *result = result->reduced();
  return result;
}

SlopeRatio SlopeRatio::reduced() const {
  // Largest divisor d of steps for which the ratio is a perfect d-th power.
  for (unsigned d = steps; d >= 2; --d) {
    if (steps % d != 0) continue;
    Int num = total.ratio().numerator(), den = total.ratio().denominator();
    Int rnum, rden;
    if (!mpz_root(rnum.get_mpz_t(), num.get_mpz_t(), d)) continue;
    if (!mpz_root(rden.get_mpz_t(), den.get_mpz_t(), d)) continue;
    return SlopeRatio{LogValue::half_log2_of(Rational(rnum, rden)), steps / d};
  }
  return *this;
}

}  // namespace tubqi
