#include "tubqi/model.hpp"

#include "tubqi/pattern.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace tubqi {

int GraphOfGroups::vertex_index(const std::string& name) const {
  for (size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

struct Cursor {
  const std::string& s;
  size_t pos = 0;
  int line;

  int col() const { return static_cast<int>(pos) + 1; }
  bool eol() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }

  void skip_ws() {
    while (!eol() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
};

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool read_name(Cursor& c, std::string& out) {
  c.skip_ws();
  if (c.eol() || !is_name_start(c.peek())) return false;
  size_t start = c.pos;
  while (!c.eol() && is_name_char(c.peek())) ++c.pos;
  out = c.s.substr(start, c.pos - start);
  return true;
}

bool read_int(Cursor& c, Int& out) {
  size_t start = c.pos;
  if (!c.eol() && c.peek() == '-') ++c.pos;
  size_t digits = c.pos;
  while (!c.eol() && std::isdigit(static_cast<unsigned char>(c.peek()))) ++c.pos;
  if (c.pos == digits) { c.pos = start; return false; }
  out = Int(c.s.substr(start, c.pos - start), 10);
  return true;
}

bool read_token(Cursor& c, const std::string& tok) {
  c.skip_ws();
  if (c.s.compare(c.pos, tok.size(), tok) != 0) return false;
  c.pos += tok.size();
  return true;
}

bool read_vec(Cursor& c, Vec2& out) {
  c.skip_ws();
  if (!read_token(c, "(")) return false;
  if (!read_int(c, out.a)) return false;
  if (!read_token(c, ",")) return false;
  if (!read_int(c, out.b)) return false;
  return read_token(c, ")");
}

}  // namespace

ParseResult parse_graph(const std::string& text) {
  ParseResult result;
  GraphOfGroups g;
  std::vector<Diagnostic> diags;
  std::set<std::string> names;

  auto error = [&](int line, int col, const std::string& code, const std::string& msg) {
    diags.push_back({Severity::Error, code, msg, line, col});
  };

  struct PendingEdge {
    std::string name, n0, n1;
    Vec2 vec0, vec1;
    int line;
  };
  std::vector<PendingEdge> pending;

  int lineno = 0;
  size_t off = 0;
  while (off <= text.size()) {
    size_t nl = text.find('\n', off);
    std::string line = text.substr(off, nl == std::string::npos ? std::string::npos : nl - off);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++lineno;

    Cursor c{line, 0, lineno};
    c.skip_ws();
    if (!c.eol() && c.peek() != '#') {
      size_t diags_before = diags.size();
      std::string kw;
      if (!read_name(c, kw)) {
        error(lineno, c.col(), "syntax", "expected 'vertex' or 'edge' declaration");
      } else if (kw == "vertex") {
        std::string name;
        if (!read_name(c, name)) {
          error(lineno, c.col(), "syntax", "expected vertex name");
        } else if (!names.insert(name).second) {
          error(lineno, c.col(), "duplicate-name", "duplicate name '" + name + "'");
        } else {
          g.vertices.push_back(name);
        }
      } else if (kw == "edge") {
        PendingEdge e;
        e.line = lineno;
        bool ok = read_name(c, e.name) && read_token(c, ":") && read_name(c, e.n0) &&
                  read_vec(c, e.vec0) && read_token(c, "->") && read_name(c, e.n1) &&
                  read_vec(c, e.vec1);
        if (!ok) {
          error(lineno, c.col(), "syntax", "malformed edge declaration");
        } else if (!names.insert(e.name).second) {
          error(lineno, c.col(), "duplicate-name", "duplicate name '" + e.name + "'");
        } else {
          pending.push_back(e);
        }
      } else {
        error(lineno, 1, "syntax", "unknown declaration '" + kw + "'");
      }
      c.skip_ws();
      if (diags.size() == diags_before && !c.eol() && c.peek() != '#')
        error(lineno, c.col(), "syntax", "trailing characters");
    }

    if (nl == std::string::npos) break;
    off = nl + 1;
  }

  for (const auto& e : pending) {
    EdgeDecl d;
    d.name = e.name;
    d.v0 = g.vertex_index(e.n0);
    d.v1 = g.vertex_index(e.n1);
    d.vec0 = e.vec0;
    d.vec1 = e.vec1;
    if (d.v0 < 0) error(e.line, 1, "unknown-vertex", "unknown vertex '" + e.n0 + "'");
    if (d.v1 < 0) error(e.line, 1, "unknown-vertex", "unknown vertex '" + e.n1 + "'");
    if (e.vec0.is_zero() || e.vec1.is_zero())
      error(e.line, 1, "zero-vector", "attaching vector must be nonzero in edge '" + e.name + "'");
    g.edges.push_back(d);
  }

  result.diagnostics = std::move(diags);
  for (const auto& d : result.diagnostics)
    if (d.severity == Severity::Error) return result;
  result.graph = std::move(g);
  return result;
}

std::string print_graph(const GraphOfGroups& g) {
  std::string out;
  for (const auto& v : g.vertices) out += "vertex " + v + "\n";
  for (const auto& e : g.edges) {
    out += "edge " + e.name + " : " + g.vertices[e.v0] + " " + e.vec0.str() + " -> " +
           g.vertices[e.v1] + " " + e.vec1.str() + "\n";
  }
  return out;
}

ValidationReport validate(const GraphOfGroups& g) {
  ValidationReport report;
  auto add = [&](Severity s, const std::string& code, const std::string& msg) {
    report.diagnostics.push_back({s, code, msg, 0, 0});
    if (s == Severity::Error) report.ok = false;
  };

  if (g.edges.empty()) add(Severity::Error, "no-edges", "presentation has no edges");

  // Distinct projective slopes per vertex; fewer than 2 means the incident
  // edge vectors cannot rationally span the vertex group.
  std::vector<std::set<std::pair<std::string, std::string>>> slopes(g.vertices.size());
  for (const auto& e : g.edges) {
    if (!e.vec0.is_zero()) {
      ProjectiveSlope s = slope_of(e.vec0);
      slopes[e.v0].insert({s.a.get_str(), s.b.get_str()});
    }
    if (!e.vec1.is_zero()) {
      ProjectiveSlope s = slope_of(e.vec1);
      slopes[e.v1].insert({s.a.get_str(), s.b.get_str()});
    }
  }
  for (size_t v = 0; v < g.vertices.size(); ++v) {
    size_t n = slopes[v].size();
    if (n < 2) {
      add(Severity::Error, "crossing-graph",
          "vertex '" + g.vertices[v] + "' has " + std::to_string(n) +
              " line(s); incident edge vectors must span two distinct slopes");
    } else {
      add(Severity::Info, "lines",
          "vertex '" + g.vertices[v] + "' is a " + std::to_string(n) + "-line vertex");
    }
  }

  // Connectivity of the underlying graph.
  if (!g.vertices.empty()) {
    std::vector<char> seen(g.vertices.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (const auto& e : g.edges) {
        for (int w : {e.v0 == v ? e.v1 : -1, e.v1 == v ? e.v0 : -1}) {
          if (w >= 0 && !seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      add(Severity::Error, "disconnected", "underlying graph is not connected");
  }

  return report;
}

std::string severity_name(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Info: return "info";
  }
  return "?";
}

}  // namespace tubqi
