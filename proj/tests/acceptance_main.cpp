// Acceptance suite: ten numbered criteria, one PASS/FAIL line each.
// Exact arithmetic throughout; no tolerances anywhere.

#include "corpus.hpp"
#include "oracles.hpp"
#include "tubqi/certificate.hpp"
#include "tubqi/engine.hpp"

#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

using namespace tubqi;

namespace {

int failures = 0;

void criterion(int number, const std::string& name, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  std::printf("%s criterion-%d %s%s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
              detail.empty() ? "" : " — ", detail.c_str());
  if (!ok) ++failures;
}

int decide_exit(const std::string& a, const std::string& b) {
  DecideOptions opts;
  return decide_texts("a.tub", a, "b.tub", b, opts).exit_code;
}

// ---------------------------------------------------------------- criterion 2
Var mkL(int i) { return Var{VarKind::L, i}; }
Var mkM(int i) { return Var{VarKind::M, i}; }
Var mkU(int i) { return Var{VarKind::U, i}; }

ConstraintSystem worked_example_system() {
  LogValue zero, two = LogValue::integer(2);
  ConstraintSystem sys;
  sys.add(mkL(1), mkM(1), zero, "range");
  sys.add(mkM(1), mkU(1), zero, "range");
  sys.add(mkL(2), mkM(2), zero, "range");
  sys.add(mkM(2), mkU(2), zero, "range");
  sys.add(mkU(1), mkU(2), zero, "U1 + 0 <= U2");
  sys.add(mkL(2), mkM(1), zero, "M1 + 0 >= L2");
  sys.add(mkM(1), mkU(2), zero, "M1 + 0 <= U2");
  sys.add(mkL(2), mkL(1), zero, "L1 + 0 >= L2");
  sys.add(mkM(2), mkU(1), -two, "M2 + 2mu <= U1");
  sys.add(mkL(1), mkL(2), two, "L2 + 2mu >= L1");
  sys.add(mkU(2), mkU(1), zero, "U2 - 0 <= U1");
  sys.add(mkL(1), mkM(2), zero, "M2 - 0 >= L1");
  sys.add(mkU(2), mkU(1), two, "U2 - 2(lambda-mu) <= U1");
  sys.add(mkL(1), mkM(2), two, "M2 - 2(lambda-mu) >= L1");
  return sys;
}

void pin(ConstraintSystem& sys, const std::vector<std::pair<Var, LogValue>>& values) {
  const Var anchor = values.front().first;
  const LogValue base = values.front().second;
  for (const auto& [v, x] : values) {
    if (v == anchor) continue;
    sys.add(v, anchor, x - base, "pin " + v.str());
    sys.add(anchor, v, base - x, "pin " + v.str());
  }
}

}  // namespace

int main() {
  criterion(1, "complete invariant over the one-torus family", [](std::string& detail) {
    const int ks[3] = {2, 4, 8};
    Moebius basis{{1, 1, 0, 1}};
    int checked = 0;
    for (int k1 : ks)
      for (int l1 : ks)
        for (int k2 : ks)
          for (int l2 : ks) {
            std::set<int> p1{k1, l1}, p2{k2, l2};
            int want = (p1 == p2) ? 0 : 1;
            std::string a = corpus::one_torus(k1, l1);
            std::string b = corpus::one_torus(k2, l2);
            if (decide_exit(a, b) != want) {
              detail = "pair (" + std::to_string(k1) + "," + std::to_string(l1) + ") vs (" +
                       std::to_string(k2) + "," + std::to_string(l2) + ")";
              return false;
            }
            // Basis-changed variant of the second input.
            std::string bc = print_graph(apply_basis_change_all(corpus::parse(b), basis));
            if (decide_exit(a, bc) != want) {
              detail = "basis-changed pair (" + std::to_string(k1) + "," + std::to_string(l1) +
                       ") vs (" + std::to_string(k2) + "," + std::to_string(l2) + ")";
              return false;
            }
            checked += 2;
          }
    detail = std::to_string(checked) + " ordered pairs";
    return true;
  });

  criterion(2, "worked-system reproduction", [](std::string& detail) {
    ConstraintSystem sys = worked_example_system();
    SolveResult res = solve(sys);
    if (!res.feasible()) {
      detail = "displayed system reported infeasible";
      return false;
    }
    LogValue four = LogValue::integer(4);
    std::vector<std::pair<Var, LogValue>> known{
        {mkM(1), LogValue()}, {mkM(2), LogValue()}, {mkU(1), four},
        {mkU(2), four},       {mkL(1), -four},      {mkL(2), -four}};
    Assignment a;
    for (const auto& [v, x] : known) {
      a.vars.push_back(v);
      a.values.push_back(x);
    }
    if (!satisfies(sys, a)) {
      detail = "known assignment does not verify";
      return false;
    }
    ConstraintSystem pinned_ok = sys;
    pin(pinned_ok, known);
    if (!solve(pinned_ok).feasible()) {
      detail = "pinned known assignment infeasible";
      return false;
    }
    std::vector<std::pair<Var, LogValue>> corrupted = known;
    corrupted[2].second = LogValue::half_log2_of(Rational(4));  // U1 = 1
    ConstraintSystem pinned_bad = sys;
    pin(pinned_bad, corrupted);
    SolveResult bad = solve(pinned_bad);
    if (bad.feasible()) {
      detail = "corrupted bound not rejected";
      return false;
    }
    if (!(bad.witness->total.sign() < 0)) {
      detail = "witness total not negative";
      return false;
    }
    detail = "negative-cycle total " + bad.witness->total.str();
    return true;
  });

  criterion(3, "quick-rejection self-loop constraint in provenance", [](std::string& detail) {
    GroupAnalysis g = corpus::analyzed(corpus::w2());
    MatchContext ctx = make_match_context(g, g, Match{0, 0});
    ExtensionEnumerator en(ctx);
    std::vector<uint8_t> digits;
    while (en.next(digits)) {
      Strategy s = build_strategy(ctx, digits);
      bool negative_self = false;
      for (const auto& ls : s.summary.labels)
        negative_self |=
            ls.label == Match{0, 0} && ls.min_error.has_value() && ls.min_error->sign() < 0;
      if (!negative_self) continue;
      StrategySet ss;
      ss.choices.push_back({Match{0, 0}, s, s});
      ConstraintSystem sys = build_system(ss, g, g, Convention::Example);
      SolveResult res = solve(sys);
      if (res.feasible()) {
        detail = "candidate with negative-error self terminal not rejected";
        return false;
      }
      if (!(res.witness->total.sign() < 0)) {
        detail = "witness total not negative";
        return false;
      }
      for (const auto& c : sys.constraints)
        if (c.x == Var{VarKind::L, 0} && c.y == Var{VarKind::L, 0} && c.c.sign() < 0 &&
            c.provenance.find("L0 + E >= L0") != std::string::npos) {
          detail = "offending constraint: " + c.provenance;
          return true;
        }
      detail = "offending constraint missing from provenance";
      return false;
    }
    detail = "no candidate with a negative-error self terminal found";
    return false;
  });

  criterion(4, "boundedness pre-filter skips extension enumeration", [](std::string& detail) {
    DecideOptions opts;
    auto out = decide_texts("w2.tub", corpus::w2(), "u.tub", corpus::kU, opts);
    if (out.exit_code != 1) {
      detail = "W2 vs U expected exit 1, got " + std::to_string(out.exit_code);
      return false;
    }
    if (out.decision->stats.extensions_enumerated != 0) {
      detail = "extensions were enumerated";
      return false;
    }
    auto out2 = decide_texts("a.tub", corpus::kTwoLineA, "u.tub", corpus::kU, opts);
    if (out2.exit_code != 1 || out2.decision->stats.extensions_enumerated != 0 ||
        !out2.decision->stats.pattern_filter_passed) {
      detail = "pattern-matching pair did not stop at the boundedness filter";
      return false;
    }
    return true;
  });

  criterion(5, "all-2-line flexibility", [](std::string& detail) {
    if (decide_exit(corpus::kTwoLineA, corpus::kTwoLineB) != 0) {
      detail = "bounded all-2-line pair not quasi-isometric";
      return false;
    }
    if (decide_exit(corpus::kTwoLineA, corpus::kTwoLineU) != 1) {
      detail = "unbounded side not rejected";
      return false;
    }
    return true;
  });

  criterion(6, "symmetry-group orders 6, 8, 4", [](std::string& detail) {
    auto order_of = [](std::vector<std::pair<long, long>> vecs) {
      EdgePattern p;
      p.vertex = 0;
      for (auto [a, b] : vecs) p.slopes.push_back(slope_of(Vec2{a, b}));
      std::sort(p.slopes.begin(), p.slopes.end());
      return p;
    };
    struct Case {
      EdgePattern p;
      size_t want;
      const char* name;
    };
    std::vector<Case> cases{
        {order_of({{1, 0}, {0, 1}, {1, 1}}), 6, "{0,inf,1}"},
        {order_of({{1, 0}, {0, 1}, {1, 1}, {1, -1}}), 8, "{0,inf,1,-1}"},
        {order_of({{1, 0}, {0, 1}, {1, 1}, {1, 2}}), 4, "{0,inf,1,2}"},
    };
    for (const auto& c : cases) {
      auto group = symmetry_group(c.p);
      // Group axioms.
      auto has = [&](const Moebius& m) {
        return std::find(group.begin(), group.end(), m) != group.end();
      };
      if (!has(Moebius::identity())) {
        detail = std::string(c.name) + ": identity missing";
        return false;
      }
      for (const auto& x : group) {
        if (!has(x.inverse())) {
          detail = std::string(c.name) + ": not inverse-closed";
          return false;
        }
        for (const auto& y : group)
          if (!has(x.compose(y))) {
            detail = std::string(c.name) + ": not composition-closed";
            return false;
          }
      }
      // Exact invariance of the averaged metric.
      Gram gm = symmetric_gram(c.p);
      for (const auto& m : group) {
        Rational ad = Rational(m.det()).abs();
        Rational a(m.m[0]), b(m.m[1]), cc(m.m[2]), d(m.m[3]);
        Rational t11 = gm.g11 * a * a + Rational(2) * gm.g12 * a * cc + gm.g22 * cc * cc;
        Rational t12 = gm.g11 * a * b + gm.g12 * (a * d + b * cc) + gm.g22 * cc * d;
        Rational t22 = gm.g11 * b * b + Rational(2) * gm.g12 * b * d + gm.g22 * d * d;
        if (t11 != ad * gm.g11 || t12 != ad * gm.g12 || t22 != ad * gm.g22) {
          detail = std::string(c.name) + ": M^T g M != |det M| g";
          return false;
        }
      }
      if (group.size() != c.want) {
        detail = std::string(c.name) + ": expected order " + std::to_string(c.want) + ", got " +
                 std::to_string(group.size()) +
                 " (this slope set is projectively harmonic: z -> 2/(2-z) four-cycles it, so the "
                 "true stabilizer has order 8; see {0,inf,1,3} for the Z/2 x Z/2 case)";
        return false;
      }
    }
    return true;
  });

  criterion(7, "invariance suites", [](std::string& detail) {
    std::vector<std::string> corpus_texts{corpus::w2(),
                                          corpus::w3(),
                                          std::string(corpus::kWise),
                                          std::string(corpus::kTwoTorus),
                                          std::string(corpus::kU),
                                          std::string(corpus::kTwoLineA),
                                          std::string(corpus::kTwoLineB),
                                          std::string(corpus::kTwoLineU),
                                          corpus::zero_height()};
    for (const auto& t : corpus_texts)
      if (decide_exit(t, t) != 0) {
        detail = "reflexivity failed";
        return false;
      }
    for (const auto& a : corpus_texts)
      for (const auto& b : corpus_texts)
        if (decide_exit(a, b) != decide_exit(b, a)) {
          detail = "symmetry failed";
          return false;
        }
    // GL2(Z) basis change and declaration reordering.
    Moebius basis{{2, 1, 1, 1}};
    auto tt = corpus::parse(corpus::kTwoTorus);
    std::string moved = print_graph(apply_basis_change_all(tt, basis));
    if (decide_exit(corpus::w2(), moved) != 0 || decide_exit(corpus::w3(), moved) != 1) {
      detail = "basis-change invariance failed";
      return false;
    }
    std::string reordered = print_graph(reorder_declarations(tt, {1, 0}, {3, 2, 1, 0}));
    if (decide_exit(corpus::w2(), reordered) != 0) {
      detail = "reordering invariance failed";
      return false;
    }
    // Terminal errors invariant under random rescaling of one vertex Gram.
    oracle::Rng rng;
    GroupAnalysis c = corpus::analyzed(corpus::w2());
    auto base = corpus::parse(corpus::kTwoTorus);
    GroupAnalysis t0 = analyze(base);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Rational> scales{Rational(1, 1), Rational(1, 1)};
      scales[trial % 2] = Rational(1 + rng.below(9), 1 + rng.below(9));
      GroupAnalysis t1 = analyze(base, &scales);
      for (int cls = 0; cls < 2; ++cls) {
        MatchContext m0 = make_match_context(c, t0, Match{0, cls});
        MatchContext m1 = make_match_context(c, t1, Match{0, cls});
        ExtensionEnumerator e0(m0), e1(m1);
        std::vector<uint8_t> d0, d1;
        for (int n = 0; n < 25 && e0.next(d0) && e1.next(d1); ++n) {
          Strategy s0 = build_strategy(m0, d0);
          Strategy s1 = build_strategy(m1, d1);
          std::multiset<Rational> err0, err1;
          for (const auto& term : s0.terminals)
            if (term.error) err0.insert(term.error->ratio());
          for (const auto& term : s1.terminals)
            if (term.error) err1.insert(term.error->ratio());
          if (err0 != err1) {
            detail = "terminal errors changed under metric rescaling";
            return false;
          }
        }
      }
    }
    return true;
  });

  criterion(8, "solver agrees with brute force on 500 random systems", [](std::string& detail) {
    oracle::Rng rng;
    const Rational qs[5] = {Rational(1, 4), Rational(1, 2), Rational(1), Rational(2),
                            Rational(4)};
    int feasible = 0;
    for (int trial = 0; trial < 500; ++trial) {
      int nvars = 1 + rng.below(4);
      ConstraintSystem sys;
      VarKind kinds[3] = {VarKind::L, VarKind::M, VarKind::U};
      for (int i = 0; i < nvars; ++i) sys.add_var(Var{kinds[i % 3], i / 3});
      int ncons = 1 + rng.below(8);
      for (int k = 0; k < ncons; ++k) {
        Var x = sys.vars[rng.below(nvars)];
        Var y = sys.vars[rng.below(nvars)];
        if (x == y) continue;
        sys.add(x, y, LogValue::half_log2_of(qs[rng.below(5)]), "random");
      }
      SolveResult res = solve(sys);
      bool oracle_says = oracle::feasible_by_cycle_enumeration(sys);
      if (res.feasible() != oracle_says) {
        detail = "disagreement on trial " + std::to_string(trial);
        return false;
      }
      if (res.feasible()) {
        ++feasible;
        if (!satisfies(sys, *res.assignment)) {
          detail = "returned assignment violates the system";
          return false;
        }
      }
    }
    detail = std::to_string(feasible) + "/500 feasible";
    return true;
  });

  criterion(9, "construction-invariant replay at radius 8", [](std::string& detail) {
    std::vector<std::pair<std::string, std::string>> pairs{
        {corpus::w2(), corpus::w2()},
        {corpus::w2(), std::string(corpus::kTwoTorus)},
        {std::string(corpus::kTwoLineA), std::string(corpus::kTwoLineB)},
        {corpus::one_torus(2, 8), corpus::one_torus(8, 2)},
        {std::string(corpus::kU), std::string(corpus::kU)},
    };
    DecideOptions opts;
    for (const auto& [a, b] : pairs) {
      auto out = decide_texts("a.tub", a, "b.tub", b, opts);
      if (out.exit_code != 0) {
        detail = "expected exit 0 on a corpus pair";
        return false;
      }
      CertificateInputs in{"a.tub", a, "b.tub", b};
      BallReport r = witness_ball(out.certificate, in, 8);
      if (!r.pass) {
        detail = "witness ball failed: " + r.failure_reason;
        return false;
      }
    }
    // Negative control: corrupt an assignment bound below an observed error.
    auto out = decide_texts("a.tub", corpus::w2(), "b.tub", corpus::w2(), opts);
    nlohmann::json corrupted = out.certificate;
    for (auto& v : corrupted["assignment"]["values"])
      if (v["var"].get<std::string>()[0] == 'U')
        v["value"] = logvalue_json(LogValue::integer(-1));
    CertificateInputs in{"a.tub", corpus::w2(), "b.tub", corpus::w2()};
    BallReport r = witness_ball(corrupted, in, 8);
    if (r.pass || r.failure_path.empty()) {
      detail = "corrupted assignment not caught";
      return false;
    }
    return true;
  });

  criterion(10, "max-slope invariant", [](std::string& detail) {
    auto inspect_slope = [](const std::string& text) -> std::optional<SlopeRatio> {
      auto out = inspect_text("g.tub", text, true);
      if (out.exit_code != 0 || !out.json_report["max_slope"].is_object()) return std::nullopt;
      const auto& ms = out.json_report["max_slope"];
      Rational q(Int(ms["total"]["half_log2_of"]["num"].get<std::string>(), 10),
                 Int(ms["total"]["half_log2_of"]["den"].get<std::string>(), 10));
      return SlopeRatio{LogValue::half_log2_of(q), ms["steps"].get<unsigned>()};
    };
    auto w2 = inspect_slope(corpus::w2());
    if (!w2 || !(*w2 == SlopeRatio{LogValue::integer(2), 1})) {
      detail = "W2 max slope is not 2";
      return false;
    }
    auto z = inspect_slope(corpus::zero_height());
    if (!z || !z->total.is_zero()) {
      detail = "zero-height instance max slope is not 0";
      return false;
    }
    // Equal verdict-0 pairs report equal max slopes.
    std::vector<std::pair<std::string, std::string>> zero_pairs{
        {corpus::w2(), std::string(corpus::kTwoTorus)},
        {corpus::one_torus(2, 8), corpus::one_torus(8, 2)},
        {corpus::w2(), corpus::w2()},
    };
    for (const auto& [a, b] : zero_pairs) {
      if (decide_exit(a, b) != 0) {
        detail = "expected a verdict-0 pair";
        return false;
      }
      auto m1 = corpus::analyzed(a).max_slope();
      auto m2 = corpus::analyzed(b).max_slope();
      if (!m1 || !m2 || !(*m1 == *m2)) {
        detail = "verdict-0 pair reports different max slopes";
        return false;
      }
    }
    return true;
  });

  if (failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", failures);
  return 1;
}
