#include "tubqi/engine.hpp"

#include <chrono>
#include <sstream>
#include <stdexcept>

namespace tubqi {

using nlohmann::json;

namespace {

std::string diagnostics_report(const std::string& name, const std::vector<Diagnostic>& diags) {
  std::ostringstream os;
  for (const auto& d : diags) {
    os << name;
    if (d.line > 0) os << ":" << d.line << ":" << d.col;
    os << ": " << severity_name(d.severity) << " [" << d.code << "] " << d.message << "\n";
  }
  return os.str();
}

struct LoadedInput {
  GraphOfGroups graph;
  GroupAnalysis analysis;
};

// exit code 2 material on failure.
std::optional<std::string> load_input(const std::string& name, const std::string& text,
                                      LoadedInput& out) {
  ParseResult pr = parse_graph(text);
  if (!pr.ok()) return diagnostics_report(name, pr.diagnostics);
  ValidationReport vr = validate(*pr.graph);
  if (!vr.ok) return diagnostics_report(name, vr.diagnostics);
  out.graph = *pr.graph;
  out.analysis = analyze(out.graph);
  return std::nullopt;
}

std::string human_report(const std::string& name_a, const std::string& name_b,
                         const GroupAnalysis& g1, const GroupAnalysis& g2, const Decision& d,
                         Convention conv) {
  std::ostringstream os;
  auto group_line = [&](const std::string& name, const GroupAnalysis& g) {
    size_t bounded = 0;
    for (const auto& c : g.classes) bounded += c.bounded;
    os << "  " << name << ": " << g.graph.vertices.size() << " vertex(es), "
       << g.graph.edges.size() << " edge(s), " << g.classes.size() << " P-set class(es) ("
       << bounded << " bounded)";
    auto ms = g.max_slope();
    if (ms)
      os << ", max slope " << ms->total.str() << "/" << ms->steps << " = " << ms->to_double()
         << " per depth-zero-vertex step";
    else
      os << ", max slope undefined";
    os << "\n";
  };
  os << "inputs:\n";
  group_line(name_a, g1);
  group_line(name_b, g2);
  os << "convention: " << convention_name(conv) << "\n";
  switch (d.verdict) {
    case Verdict::QuasiIsometric: {
      os << "verdict: QUASI-ISOMETRIC\n";
      os << "matches:";
      for (const auto& c : d.strategy_set->choices) os << " " << c.match.str();
      os << "\n";
      os << "system: " << d.system->vars.size() << " variable(s), "
         << d.system->constraints.size() << " constraint(s)\n";
      os << "assignment (M-zero normalized: "
         << (d.assignment->m_zero_normalized ? "yes" : "no") << "):\n";
      for (size_t i = 0; i < d.assignment->vars.size(); ++i)
        os << "  " << d.assignment->vars[i].str() << " = " << d.assignment->values[i].str()
           << " = " << d.assignment->values[i].decimal() << "\n";
      break;
    }
    case Verdict::NotQuasiIsometric:
      os << "verdict: NOT QUASI-ISOMETRIC\n";
      os << "reason: " << d.reason << "\n";
      break;
    case Verdict::Inconclusive:
      os << "verdict: INCONCLUSIVE\n";
      os << "reason: " << d.reason << "\n";
      break;
  }
  os << "stats: extensions=" << d.stats.extensions_enumerated
     << " candidates=" << d.stats.candidates_checked << " solves=" << d.stats.solver_calls
     << "\n";
  return os.str();
}

}  // namespace

DecideOutcome decide_texts(const std::string& name_a, const std::string& text_a,
                           const std::string& name_b, const std::string& text_b,
                           const DecideOptions& opts) {
  DecideOutcome out;
  auto t0 = std::chrono::steady_clock::now();

  LoadedInput a, b;
  if (auto err = load_input(name_a, text_a, a)) {
    out.exit_code = 2;
    out.report = *err;
    return out;
  }
  if (auto err = load_input(name_b, text_b, b)) {
    out.exit_code = 2;
    out.report = *err;
    return out;
  }

  SearchOptions sopts;
  sopts.convention = opts.convention;
  sopts.max_candidates = opts.max_candidates;
  sopts.timeout_seconds = opts.timeout_seconds;
  sopts.parallel = opts.parallel;
  Decision d = search(a.analysis, b.analysis, sopts);

  CertificateInputs ci{name_a, text_a, name_b, text_b};
  out.certificate = certificate_json(ci, a.analysis, b.analysis, d, opts.convention);

  if (d.verdict == Verdict::QuasiIsometric) {
    // Independent re-verification before anything is printed.
    auto err = verify_certificate(out.certificate, ci);
    if (err) throw std::logic_error("emitted certificate failed re-verification: " + *err);
  }

  out.exit_code = d.verdict == Verdict::QuasiIsometric      ? 0
                  : d.verdict == Verdict::NotQuasiIsometric ? 1
                                                            : 3;
  out.report = opts.json_output
                   ? out.certificate.dump(2) + "\n"
                   : human_report(name_a, name_b, a.analysis, b.analysis, d, opts.convention);
  auto el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    std::ostringstream ts;
    ts << "elapsed: " << el << "s";
    out.timing_note = ts.str();
  }
  out.decision = std::move(d);
  return out;
}

InspectOutcome inspect_text(const std::string& name, const std::string& text, bool as_json) {
  InspectOutcome out;
  ParseResult pr = parse_graph(text);
  if (!pr.ok()) {
    out.report = diagnostics_report(name, pr.diagnostics);
    return out;
  }
  ValidationReport vr = validate(*pr.graph);
  if (!vr.ok) {
    out.report = diagnostics_report(name, vr.diagnostics);
    return out;
  }
  GroupAnalysis g = analyze(*pr.graph);
  out.exit_code = 0;
  out.json_report = group_json(g);
  out.json_report["name"] = name;
  out.json_report["digest"] = fnv1a64(text);
  json warn = json::array();
  for (const auto& d : g.warnings) warn.push_back(d.message);
  for (const auto& d : vr.diagnostics)
    if (d.severity != Severity::Error) warn.push_back(d.message);
  out.json_report["notes"] = warn;
  if (as_json) {
    out.report = out.json_report.dump(2) + "\n";
    return out;
  }

  std::ostringstream os;
  os << name << " (" << fnv1a64(text) << ")\n";
  for (size_t v = 0; v < g.graph.vertices.size(); ++v) {
    os << "vertex " << g.graph.vertices[v] << ": " << g.line_count(static_cast<int>(v))
       << " lines, slopes";
    for (const auto& s : g.patterns[v].slopes) os << " " << s.str();
    if (g.symmetry_orders[v] > 0) os << ", symmetry order " << g.symmetry_orders[v];
    os << ", gram " << g.grams[v].str() << "\n";
  }
  for (const auto& cls : g.classes) {
    os << "class " << cls.id << ": " << (cls.bounded ? "bounded" : "unbounded") << ", "
       << cls.nodes.size() << " vertex type(s)\n";
    for (size_t i = 0; i < cls.nodes.size(); ++i) {
      const LineNode& n = g.nodes[cls.nodes[i]];
      os << "  type " << i << ": (" << g.graph.vertices[n.vertex] << ", "
         << g.patterns[n.vertex].slopes[n.slope_idx].str() << ")";
      if (cls.bounded)
        os << " potential " << cls.potentials[i].str() << " = " << cls.potentials[i].decimal();
      os << "\n";
    }
  }
  auto ms = g.max_slope();
  if (ms)
    os << "max slope: " << ms->total.str() << "/" << ms->steps << " = " << ms->to_double()
       << " (height per depth-zero-vertex step)\n";
  else
    os << "max slope: undefined\n";
  for (const auto& d : g.warnings) os << "warning: " << d.message << "\n";
  out.report = os.str();
  return out;
}

GraphOfGroups apply_basis_change(const GraphOfGroups& g, int vertex, const Moebius& b) {
  GraphOfGroups out = g;
  Int det = b.det();
  if (det != 1 && det != -1)
    throw std::invalid_argument("apply_basis_change: matrix not in GL2(Z)");
  for (auto& e : out.edges) {
    if (e.v0 == vertex) e.vec0 = b.apply_vec(e.vec0);
    if (e.v1 == vertex) e.vec1 = b.apply_vec(e.vec1);
  }
  return out;
}

GraphOfGroups apply_basis_change_all(const GraphOfGroups& g, const Moebius& b) {
  GraphOfGroups out = g;
  for (size_t v = 0; v < g.vertices.size(); ++v)
    out = apply_basis_change(out, static_cast<int>(v), b);
  return out;
}

GraphOfGroups reorder_declarations(const GraphOfGroups& g, const std::vector<int>& vperm,
                                   const std::vector<int>& eperm) {
  GraphOfGroups out;
  std::vector<int> inv(g.vertices.size());
  for (size_t i = 0; i < vperm.size(); ++i) {
    out.vertices.push_back(g.vertices[vperm[i]]);
    inv[vperm[i]] = static_cast<int>(i);
  }
  for (int ei : eperm) {
    EdgeDecl e = g.edges[ei];
    e.v0 = inv[e.v0];
    e.v1 = inv[e.v1];
    out.edges.push_back(e);
  }
  return out;
}

}  // namespace tubqi
