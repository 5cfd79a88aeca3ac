#pragma once

#include "tubqi/model.hpp"
#include "tubqi/pattern.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tubqi {

struct LineNode {
  int vertex = -1;
  int slope_idx = -1;  // index into the vertex's pattern
};

struct SlopeLink {
  int edge = -1;  // index into GraphOfGroups::edges
  int from = -1;  // node id of end 0
  int to = -1;    // node id of end 1
  LogValue height;  // oriented end0 -> end1
};

struct TypeRef {
  int class_id = -1;
  int type_index = -1;  // position of the node within its class, canonical order
  bool operator==(const TypeRef& o) const {
    return class_id == o.class_id && type_index == o.type_index;
  }
};

struct PsetClass {
  int id = -1;
  std::vector<int> nodes;  // ascending node ids; position = type index
  std::vector<int> links;  // induced link ids
  bool bounded = false;
  // Exact potential per type (bounded classes only), base = first node at 0.
  std::vector<LogValue> potentials;
};

// Exact ratio (total height)/(steps); compared by cross-powering.
struct SlopeRatio {
  LogValue total;
  unsigned steps = 1;

  bool operator==(const SlopeRatio& o) const {
    return total.scaled(o.steps) == o.total.scaled(steps);
  }
  bool operator<(const SlopeRatio& o) const {
    return total.scaled(o.steps) < o.total.scaled(steps);
  }
  double to_double() const { return total.to_double() / steps; }
  SlopeRatio reduced() const;  // lowest exact terms, e.g. 8/4 -> 2/1
};

// Everything the downstream modules need about one group, computed once.
struct GroupAnalysis {
  GraphOfGroups graph;
  std::vector<EdgePattern> patterns;           // per vertex
  std::vector<Gram> grams;                     // per vertex
  std::vector<int> symmetry_orders;            // per vertex (0 for 2-line)
  std::vector<LineNode> nodes;                 // canonical order
  std::vector<std::vector<int>> vertex_nodes;  // per vertex: node ids by slope order
  std::vector<SlopeLink> links;                // one per edge
  std::vector<PsetClass> classes;              // canonical order
  std::vector<TypeRef> node_type;              // per node id
  std::vector<Diagnostic> warnings;

  int node_id(int vertex, const ProjectiveSlope& s) const;
  int line_count(int vertex) const { return static_cast<int>(patterns[vertex].slopes.size()); }
  // One entry per slope of the vertex, canonical slope order.
  std::vector<TypeRef> type_multiset(int vertex) const;
  bool all_bounded() const;

  std::optional<SlopeRatio> max_slope() const;  // std::nullopt = Undefined
};

// Precondition: validate(g).ok.  Optional per-vertex positive scales multiply
// the symmetric Grams (used by the scale-robustness suites).
GroupAnalysis analyze(const GraphOfGroups& g,
                      const std::vector<Rational>* gram_scales = nullptr);

}  // namespace tubqi
