#pragma once

#include "tubqi/rational.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tubqi {

struct Vec2 {
  Int a, b;
  bool is_zero() const { return a == 0 && b == 0; }
  bool operator==(const Vec2& o) const { return a == o.a && b == o.b; }
  std::string str() const { return "(" + a.get_str() + "," + b.get_str() + ")"; }
};

struct EdgeDecl {
  std::string name;
  int v0 = 0;      // vertex index of end 0
  Vec2 vec0;       // image of the edge generator at end 0, as written
  int v1 = 0;
  Vec2 vec1;
};

// A tubular-group presentation: finite graph, Z^2 vertex groups, Z edge
// groups, integer attaching vectors at each edge end.
struct GraphOfGroups {
  std::vector<std::string> vertices;
  std::vector<EdgeDecl> edges;

  int vertex_index(const std::string& name) const;
};

enum class Severity { Error, Info, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  int line = 0;  // 1-based, 0 = whole document
  int col = 0;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Diagnostic> diagnostics;
};

struct ParseResult {
  std::optional<GraphOfGroups> graph;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return graph.has_value(); }
};

ParseResult parse_graph(const std::string& text);

// Canonical rendering; parse(print(g)) reproduces g exactly.
std::string print_graph(const GraphOfGroups& g);

ValidationReport validate(const GraphOfGroups& g);

std::string severity_name(Severity s);

}  // namespace tubqi
