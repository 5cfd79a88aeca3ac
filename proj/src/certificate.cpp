#include "tubqi/certificate.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

namespace tubqi {

using nlohmann::json;

std::string fnv1a64(const std::string& bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json rational_json(const Rational& r) {
  return json{{"num", r.numerator().get_str()}, {"den", r.denominator().get_str()}};
}

json logvalue_json(const LogValue& v) {
  return json{{"half_log2_of", rational_json(v.ratio())}, {"decimal", v.decimal()}};
}

namespace {

Rational rational_from_json(const json& j) {
  return Rational(Int(j.at("num").get<std::string>(), 10),
                  Int(j.at("den").get<std::string>(), 10));
}

LogValue logvalue_from_json(const json& j) {
  return LogValue::half_log2_of(rational_from_json(j.at("half_log2_of")));
}

json moebius_json(const Moebius& m) {
  return json::array({m.m[0].get_str(), m.m[1].get_str(), m.m[2].get_str(), m.m[3].get_str()});
}

json terminal_json(const Terminal& t) {
  json out{{"label", json::array({t.label.left, t.label.right})}};
  out["error"] = t.error ? logvalue_json(*t.error) : json("undefined");
  return out;
}

json strategy_json(const MatchContext& ctx, const Strategy& s) {
  json cells = json::array();
  for (int i = 0; i < ctx.rho; ++i) {
    json row = json::array();
    for (int j = 0; j < ctx.sigma; ++j) {
      int d = s.digits[i * ctx.sigma + j];
      if (d == 0) {
        row.push_back(0);
      } else {
        const CellOption& opt = ctx.cell[i][j][d - 1];
        json pairs = json::array();
        for (size_t si = 0; si < opt.bij.pair_map.size(); ++si)
          pairs.push_back(json::array({static_cast<int>(si), opt.bij.pair_map[si]}));
        json terms = json::array();
        for (const auto& t : opt.terminals) terms.push_back(terminal_json(t));
        row.push_back(json{{"bijection", pairs},
                           {"witness", moebius_json(opt.bij.witness)},
                           {"terminals", terms}});
      }
    }
    cells.push_back(row);
  }
  return json{{"extension", cells}};
}

json var_json(const Var& v) { return v.str(); }

json system_json(const ConstraintSystem& sys) {
  json vars = json::array();
  for (const auto& v : sys.vars) vars.push_back(var_json(v));
  json cons = json::array();
  for (const auto& c : sys.constraints)
    cons.push_back(json{{"x", c.x.str()},
                        {"y", c.y.str()},
                        {"c", logvalue_json(c.c)},
                        {"provenance", c.provenance}});
  return json{{"vars", vars}, {"constraints", cons}};
}

json assignment_json(const Assignment& a) {
  json values = json::array();
  for (size_t i = 0; i < a.vars.size(); ++i)
    values.push_back(json{{"var", a.vars[i].str()}, {"value", logvalue_json(a.values[i])}});
  return json{{"m_zero_normalized", a.m_zero_normalized}, {"values", values}};
}

Var var_from_str(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("bad var name");
  VarKind k = s[0] == 'L' ? VarKind::L : s[0] == 'M' ? VarKind::M : VarKind::U;
  return Var{k, std::stoi(s.substr(1))};
}

}  // namespace

json group_json(const GroupAnalysis& g) {
  json verts = json::array();
  for (size_t v = 0; v < g.graph.vertices.size(); ++v) {
    json slopes = json::array();
    for (const auto& s : g.patterns[v].slopes) slopes.push_back(s.str());
    verts.push_back(json{{"name", g.graph.vertices[v]},
                         {"lines", g.line_count(static_cast<int>(v))},
                         {"slopes", slopes},
                         {"symmetry_order", g.symmetry_orders[v]},
                         {"gram",
                          json{{"g11", rational_json(g.grams[v].g11)},
                               {"g12", rational_json(g.grams[v].g12)},
                               {"g22", rational_json(g.grams[v].g22)}}}});
  }
  json classes = json::array();
  for (const auto& cls : g.classes) {
    json types = json::array();
    for (size_t i = 0; i < cls.nodes.size(); ++i) {
      const LineNode& n = g.nodes[cls.nodes[i]];
      json t{{"vertex", g.graph.vertices[n.vertex]},
             {"slope", g.patterns[n.vertex].slopes[n.slope_idx].str()}};
      t["potential"] = cls.bounded ? logvalue_json(cls.potentials[i]) : json(nullptr);
      types.push_back(t);
    }
    classes.push_back(json{{"id", cls.id}, {"bounded", cls.bounded}, {"types", types}});
  }
  json out{{"classes", classes}, {"vertices", verts}};
  auto ms = g.max_slope();
  if (ms)
    out["max_slope"] = json{{"total", logvalue_json(ms->total)},
                            {"steps", ms->steps},
                            {"decimal", ms->to_double()},
                            {"unit", "height per depth-zero-vertex step"}};
  else
    out["max_slope"] = "undefined";
  return out;
}

json certificate_json(const CertificateInputs& in, const GroupAnalysis& g1,
                      const GroupAnalysis& g2, const Decision& d, Convention conv) {
  json cert;
  cert["version"] = "tubqi 1.0";
  cert["convention"] = convention_name(conv);
  cert["inputs"] = json::array({json{{"name", in.name_a}, {"digest", fnv1a64(in.text_a)}},
                                json{{"name", in.name_b}, {"digest", fnv1a64(in.text_b)}}});
  cert["verdict"] = d.verdict == Verdict::QuasiIsometric      ? "quasi_isometric"
                    : d.verdict == Verdict::NotQuasiIsometric ? "not_quasi_isometric"
                                                              : "inconclusive";
  cert["classes"] = json::array({group_json(g1), group_json(g2)});
  cert["stats"] = json{{"pattern_filter_passed", d.stats.pattern_filter_passed},
                       {"match_filter_passed", d.stats.match_filter_passed},
                       {"extensions_enumerated", d.stats.extensions_enumerated},
                       {"candidates_checked", d.stats.candidates_checked},
                       {"solver_calls", d.stats.solver_calls}};
  if (!d.reason.empty()) cert["reason"] = d.reason;
  if (d.verdict == Verdict::QuasiIsometric) {
    json matches = json::array();
    json strategies = json::array();
    for (const auto& choice : d.strategy_set->choices) {
      matches.push_back(json::array({choice.match.left, choice.match.right}));
      MatchContext ctx = make_match_context(g1, g2, choice.match);
      strategies.push_back(json{{"match", json::array({choice.match.left, choice.match.right})},
                                {"positive", strategy_json(ctx, choice.positive)},
                                {"negative", strategy_json(ctx, choice.negative)}});
    }
    cert["matches"] = matches;
    cert["strategies"] = strategies;
    cert["system"] = system_json(*d.system);
    cert["assignment"] = assignment_json(*d.assignment);
  }
  return cert;
}

namespace {

struct LoadedCertificate {
  std::vector<Match> matches;
  std::vector<StrategyChoice> choices;  // digits reconstructed
  ConstraintSystem system;
  Assignment assignment;
  Convention convention = Convention::Example;
};

// Rebuild a Strategy from the stored extension by locating each stored
// bijection among the recomputed cell options.
Strategy strategy_from_json(const MatchContext& ctx, const json& sj, std::string& err) {
  Strategy s;
  s.match = ctx.match;
  s.digits.assign(ctx.cells(), 0);
  const json& rows = sj.at("extension");
  if (static_cast<int>(rows.size()) != ctx.rho) {
    err = "extension row count mismatch";
    return s;
  }
  for (int i = 0; i < ctx.rho; ++i) {
    const json& row = rows[i];
    if (static_cast<int>(row.size()) != ctx.sigma) {
      err = "extension column count mismatch";
      return s;
    }
    for (int j = 0; j < ctx.sigma; ++j) {
      const json& cell = row[j];
      if (cell.is_number_integer() && cell.get<int>() == 0) continue;
      std::vector<int> pair_map;
      {
        std::map<int, int> pm;
        for (const auto& p : cell.at("bijection")) pm[p[0].get<int>()] = p[1].get<int>();
        for (auto& [si, ti] : pm) {
          if (si != static_cast<int>(pair_map.size())) {
            err = "bijection indices not contiguous";
            return s;
          }
          pair_map.push_back(ti);
        }
      }
      int found = 0;
      for (size_t k = 0; k < ctx.cell[i][j].size(); ++k) {
        if (ctx.cell[i][j][k].bij.pair_map == pair_map) {
          found = static_cast<int>(k) + 1;
          break;
        }
      }
      if (found == 0) {
        err = "stored bijection not reproducible from linear equivalences at cell (" +
              std::to_string(i) + "," + std::to_string(j) + ")";
        return s;
      }
      {
        const json& wj = cell.at("witness");
        const Moebius& expect = ctx.cell[i][j][found - 1].bij.witness;
        for (int e = 0; e < 4; ++e) {
          if (Int(wj[e].get<std::string>(), 10) != expect.m[e]) {
            err = "witnessing matrix mismatch at cell (" + std::to_string(i) + "," +
                  std::to_string(j) + ")";
            return s;
          }
        }
      }
      s.digits[i * ctx.sigma + j] = static_cast<uint8_t>(found);
      // Check stored terminals match recomputation exactly.
      const CellOption& opt = ctx.cell[i][j][found - 1];
      const json& terms = cell.at("terminals");
      if (terms.size() != opt.terminals.size()) {
        err = "terminal count mismatch";
        return s;
      }
      for (size_t t = 0; t < opt.terminals.size(); ++t) {
        Match label{terms[t].at("label")[0].get<int>(), terms[t].at("label")[1].get<int>()};
        if (!(label == opt.terminals[t].label)) {
          err = "terminal label mismatch";
          return s;
        }
        const json& ej = terms[t].at("error");
        if (ej.is_string()) {
          if (opt.terminals[t].error) {
            err = "terminal expected undefined error";
            return s;
          }
        } else {
          if (!opt.terminals[t].error || !(logvalue_from_json(ej) == *opt.terminals[t].error)) {
            err = "terminal error mismatch";
            return s;
          }
        }
      }
    }
  }
  Strategy rebuilt = build_strategy(ctx, s.digits);
  return rebuilt;
}

std::optional<std::string> load_certificate(const json& cert, const CertificateInputs& in,
                                            const GroupAnalysis& g1, const GroupAnalysis& g2,
                                            LoadedCertificate& out) {
  if (cert.at("verdict").get<std::string>() != "quasi_isometric")
    return "certificate verdict is not quasi_isometric";
  const json& inputs = cert.at("inputs");
  if (inputs[0].at("digest").get<std::string>() != fnv1a64(in.text_a))
    return "input A digest mismatch";
  if (inputs[1].at("digest").get<std::string>() != fnv1a64(in.text_b))
    return "input B digest mismatch";
  out.convention = cert.value("convention", "example") == "prose" ? Convention::Prose
                                                                  : Convention::Example;

  for (const auto& mj : cert.at("matches"))
    out.matches.push_back(Match{mj[0].get<int>(), mj[1].get<int>()});
  if (!std::is_sorted(out.matches.begin(), out.matches.end()))
    return "matches not in canonical order";

  // Covering.
  std::set<int> lefts, rights;
  for (const auto& m : out.matches) {
    if (m.left < 0 || m.left >= static_cast<int>(g1.classes.size()) || m.right < 0 ||
        m.right >= static_cast<int>(g2.classes.size()))
      return "match references unknown class";
    if (g1.classes[m.left].bounded != g2.classes[m.right].bounded)
      return "match pairs bounded with unbounded class";
    lefts.insert(m.left);
    rights.insert(m.right);
  }
  if (lefts.size() != g1.classes.size() || rights.size() != g2.classes.size())
    return "matches do not cover every class";

  const json& strategies = cert.at("strategies");
  if (strategies.size() != out.matches.size()) return "strategy count mismatch";
  for (size_t i = 0; i < out.matches.size(); ++i) {
    MatchContext ctx = make_match_context(g1, g2, out.matches[i]);
    std::string err;
    StrategyChoice choice;
    choice.match = out.matches[i];
    choice.positive = strategy_from_json(ctx, strategies[i].at("positive"), err);
    if (!err.empty()) return err;
    choice.negative = strategy_from_json(ctx, strategies[i].at("negative"), err);
    if (!err.empty()) return err;
    MatchContext check = ctx;  // row/column rule
    if (!check.covers(choice.positive.digits) || !check.covers(choice.negative.digits))
      return "extension violates the row/column coverage rule";
    // Closure.
    for (const Strategy* s : {&choice.positive, &choice.negative})
      if (!s->summary.closed_within(out.matches))
        return "terminal label outside the match set (closure violated)";
    out.choices.push_back(std::move(choice));
  }

  // Rebuild the system and compare with the stored one.
  StrategySet ss;
  ss.choices = out.choices;
  out.system = build_system(ss, g1, g2, out.convention);
  const json& stored = cert.at("system").at("constraints");
  if (stored.size() != out.system.constraints.size())
    return "constraint count mismatch (stored " + std::to_string(stored.size()) +
           ", recomputed " + std::to_string(out.system.constraints.size()) + ")";
  for (size_t i = 0; i < stored.size(); ++i) {
    const Constraint& c = out.system.constraints[i];
    if (stored[i].at("x").get<std::string>() != c.x.str() ||
        stored[i].at("y").get<std::string>() != c.y.str() ||
        !(logvalue_from_json(stored[i].at("c")) == c.c))
      return "constraint " + std::to_string(i) + " mismatch";
  }

  // Assignment: parse and check exactly.
  const json& aj = cert.at("assignment");
  out.assignment.m_zero_normalized = aj.at("m_zero_normalized").get<bool>();
  for (const auto& vj : aj.at("values")) {
    out.assignment.vars.push_back(var_from_str(vj.at("var").get<std::string>()));
    out.assignment.values.push_back(logvalue_from_json(vj.at("value")));
  }
  if (!satisfies(out.system, out.assignment))
    return "assignment does not satisfy the recomputed system";
  return std::nullopt;
}

}  // namespace

std::optional<std::string> verify_certificate(const json& cert, const CertificateInputs& in) {
  ParseResult pa = parse_graph(in.text_a);
  ParseResult pb = parse_graph(in.text_b);
  if (!pa.ok() || !pb.ok()) return "inputs do not parse";
  if (!validate(*pa.graph).ok || !validate(*pb.graph).ok) return "inputs do not validate";
  GroupAnalysis g1 = analyze(*pa.graph);
  GroupAnalysis g2 = analyze(*pb.graph);
  LoadedCertificate loaded;
  return load_certificate(cert, in, g1, g2, loaded);
}

BallReport witness_ball(const json& cert, const CertificateInputs& in, int radius) {
  BallReport report;
  report.radius = radius;

  ParseResult pa = parse_graph(in.text_a);
  ParseResult pb = parse_graph(in.text_b);
  if (!pa.ok() || !pb.ok()) throw std::invalid_argument("witness_ball: inputs do not parse");
  GroupAnalysis g1 = analyze(*pa.graph);
  GroupAnalysis g2 = analyze(*pb.graph);
  LoadedCertificate loaded;
  // The assignment may have been corrupted on purpose (negative controls), so
  // load strategies leniently: structure must verify, bounds come as stored.
  auto err = load_certificate(cert, in, g1, g2, loaded);
  if (err && err->find("assignment does not satisfy") == std::string::npos)
    throw std::invalid_argument("witness_ball: certificate does not verify: " + *err);

  size_t n = loaded.matches.size();
  report.matches = loaded.matches;
  report.min_error.resize(n);
  report.max_error.resize(n);

  auto bound = [&](VarKind k, int i) -> const LogValue* {
    return loaded.assignment.value_of(Var{k, i});
  };
  auto bounded = [&](size_t i) {
    return g1.classes[loaded.matches[i].left].bounded &&
           g2.classes[loaded.matches[i].right].bounded;
  };
  auto match_index = [&](const Match& m) {
    auto it = std::lower_bound(loaded.matches.begin(), loaded.matches.end(), m);
    return static_cast<size_t>(it - loaded.matches.begin());
  };

  struct State {
    size_t match;
    LogValue error;
    int parent;  // index into trace, -1 for roots
  };
  std::vector<State> trace;
  std::deque<std::pair<size_t, int>> frontier;  // (trace index, depth)
  std::set<std::pair<size_t, Rational>> seen;

  auto fail = [&](size_t trace_idx, const std::string& why) {
    report.pass = false;
    report.failure_reason = why;
    for (int t = static_cast<int>(trace_idx); t >= 0; t = trace[t].parent)
      report.failure_path.push_back({loaded.matches[trace[t].match], trace[t].error});
    std::reverse(report.failure_path.begin(), report.failure_path.end());
  };

  auto visit = [&](size_t mi, const LogValue& e, int parent, int depth) -> bool {
    if (!seen.insert({mi, e.ratio()}).second) return true;
    trace.push_back({mi, e, parent});
    ++report.nodes_visited;
    size_t ti = trace.size() - 1;
    if (bounded(mi)) {
      if (!report.min_error[mi] || e < *report.min_error[mi]) report.min_error[mi] = e;
      if (!report.max_error[mi] || *report.max_error[mi] < e) report.max_error[mi] = e;
      LogValue abs = e.sign() < 0 ? -e : e;
      if (report.max_abs_error < abs) report.max_abs_error = abs;
      const LogValue* lo = bound(VarKind::L, static_cast<int>(mi));
      const LogValue* hi = bound(VarKind::U, static_cast<int>(mi));
      if (!lo || !hi || e < *lo || *hi < e) {
        fail(ti, "running error " + e.str() + " escapes [L,U] at match " +
                     loaded.matches[mi].str());
        return false;
      }
    }
    frontier.push_back({ti, depth});
    return true;
  };

  for (size_t mi = 0; mi < n && report.pass; ++mi) visit(mi, LogValue(), -1, 0);

  while (!frontier.empty() && report.pass) {
    auto [ti, depth] = frontier.front();
    frontier.pop_front();
    if (depth >= radius) continue;
    size_t mi = trace[ti].match;
    const StrategyChoice& choice = loaded.choices[mi];
    const Strategy* strat = &choice.positive;
    if (bounded(mi)) {
      const LogValue* m = bound(VarKind::M, static_cast<int>(mi));
      LogValue mval = m ? *m : LogValue();
      strat = (trace[ti].error <= mval) ? &choice.positive : &choice.negative;
    }
    for (const Terminal& t : strat->terminals) {
      size_t child = match_index(t.label);
      LogValue child_error = t.error ? trace[ti].error + *t.error : LogValue();
      if (!visit(child, child_error, static_cast<int>(ti), depth + 1)) break;
    }
  }

  return report;
}

}  // namespace tubqi
