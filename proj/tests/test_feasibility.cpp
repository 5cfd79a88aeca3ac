#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "tubqi/feasibility.hpp"

using namespace tubqi;

namespace {

Var L(int i) { return Var{VarKind::L, i}; }
Var M(int i) { return Var{VarKind::M, i}; }
Var U(int i) { return Var{VarKind::U, i}; }

void add_ranges(ConstraintSystem& sys, int i) {
  sys.add(L(i), M(i), LogValue(), "range");
  sys.add(M(i), U(i), LogValue(), "range");
}

// The displayed block system of the worked two-group example, with
// lambda = 2 and mu = 1.
ConstraintSystem worked_example_system() {
  LogValue zero;
  LogValue two = LogValue::integer(2);           // 2*mu and 2*(lambda-mu)
  ConstraintSystem sys;
  add_ranges(sys, 1);
  add_ranges(sys, 2);
  sys.add(U(1), U(2), zero, "U1 + 0 <= U2");
  sys.add(L(2), M(1), zero, "M1 + 0 >= L2");
  sys.add(M(1), U(2), zero, "M1 + 0 <= U2");
  sys.add(L(2), L(1), zero, "L1 + 0 >= L2");
  sys.add(M(2), U(1), -two, "M2 + 2mu <= U1");
  sys.add(L(1), L(2), two, "L2 + 2mu >= L1");
  sys.add(U(2), U(1), zero, "U2 - 0 <= U1");
  sys.add(L(1), M(2), zero, "M2 - 0 >= L1");
  sys.add(U(2), U(1), two, "U2 - 2(lambda-mu) <= U1");
  sys.add(L(1), M(2), two, "M2 - 2(lambda-mu) >= L1");
  return sys;
}

Assignment known_assignment(const LogValue& u1) {
  Assignment a;
  LogValue four = LogValue::integer(4);
  a.vars = {L(1), M(1), U(1), L(2), M(2), U(2)};
  a.values = {-four, LogValue(), u1, -four, LogValue(), four};
  return a;
}

// Pin an assignment into the system via differences against M1 (which the
// known solution holds at zero).
void pin(ConstraintSystem& sys, const Assignment& a) {
  for (size_t i = 0; i < a.vars.size(); ++i) {
    if (a.vars[i] == M(1)) continue;
    sys.add(a.vars[i], M(1), a.values[i], "pin upper " + a.vars[i].str());
    sys.add(M(1), a.vars[i], -a.values[i], "pin lower " + a.vars[i].str());
  }
}

ConstraintSystem random_system(oracle::Rng& rng) {
  // <= 4 variables, constants (1/2)log2(q) with q in {1/4, 1/2, 1, 2, 4}.
  const Rational qs[5] = {Rational(1, 4), Rational(1, 2), Rational(1), Rational(2), Rational(4)};
  int nvars = 1 + rng.below(4);
  int ncons = 1 + rng.below(8);
  ConstraintSystem sys;
  VarKind kinds[3] = {VarKind::L, VarKind::M, VarKind::U};
  for (int i = 0; i < nvars; ++i) sys.add_var(Var{kinds[i % 3], i / 3});
  for (int c = 0; c < ncons; ++c) {
    Var x = sys.vars[rng.below(nvars)];
    Var y = sys.vars[rng.below(nvars)];
    if (x == y) continue;
    sys.add(x, y, LogValue::half_log2_of(qs[rng.below(5)]), "random");
  }
  return sys;
}

}  // namespace

TEST_CASE("worked example system is feasible and the known assignment verifies") {
  ConstraintSystem sys = worked_example_system();
  SolveResult res = solve(sys);
  REQUIRE(res.feasible());
  CHECK(satisfies(sys, *res.assignment));
  // The known concrete solution U = 2 lambda, M = 0, L = -2 lambda.
  Assignment known = known_assignment(LogValue::integer(4));
  CHECK(satisfies(sys, known));
  // Pinning it into the system keeps the system feasible.
  ConstraintSystem pinned = sys;
  pin(pinned, known);
  CHECK(solve(pinned).feasible());
}

TEST_CASE("corrupting U1 to 1 yields an infeasibility witness") {
  ConstraintSystem sys = worked_example_system();
  Assignment bad = known_assignment(LogValue::half_log2_of(Rational(4)));  // U1 = 1
  CHECK(!satisfies(sys, bad));
  ConstraintSystem pinned = sys;
  pin(pinned, bad);
  SolveResult res = solve(pinned);
  REQUIRE(!res.feasible());
  REQUIRE(res.witness.has_value());
  CHECK(res.witness->total.sign() < 0);
  // Replaying the cycle certifies infeasibility: the constraints chain and
  // their constants sum to the reported negative total.
  LogValue sum;
  for (const auto& c : res.witness->cycle) sum = sum + c.c;
  CHECK(sum == res.witness->total);
  for (size_t i = 0; i < res.witness->cycle.size(); ++i) {
    const Constraint& cur = res.witness->cycle[i];
    const Constraint& nxt = res.witness->cycle[(i + 1) % res.witness->cycle.size()];
    CHECK(cur.x == nxt.y);
  }
}

TEST_CASE("empty system is feasible with an empty assignment") {
  ConstraintSystem sys;
  SolveResult res = solve(sys);
  REQUIRE(res.feasible());
  CHECK(res.assignment->vars.empty());
}

TEST_CASE("negative self-loop is a length-1 witness") {
  ConstraintSystem sys;
  sys.add(L(1), L(1), LogValue::integer(-1), "L1 + E >= L1 with E = -1");
  SolveResult res = solve(sys);
  REQUIRE(!res.feasible());
  REQUIRE(res.witness->cycle.size() == 1);
  CHECK(res.witness->cycle[0].provenance == "L1 + E >= L1 with E = -1");
  CHECK(res.witness->total == LogValue::integer(-1));
}

TEST_CASE("feasible solutions are M-zero normalized with strict margins") {
  ConstraintSystem sys = worked_example_system();
  SolveResult res = solve(sys);
  REQUIRE(res.feasible());
  CHECK(res.assignment->m_zero_normalized);
  for (size_t i = 0; i < res.assignment->vars.size(); ++i) {
    const Var& v = res.assignment->vars[i];
    const LogValue& x = res.assignment->values[i];
    if (v.kind == VarKind::M) CHECK(x.is_zero());
    if (v.kind == VarKind::U) CHECK(x.sign() > 0);
    if (v.kind == VarKind::L) CHECK(x.sign() < 0);
  }
}

TEST_CASE("solver agrees with the cycle-enumeration oracle on 500 random systems") {
  oracle::Rng rng;
  int feasible_count = 0;
  for (int trial = 0; trial < 500; ++trial) {
    ConstraintSystem sys = random_system(rng);
    SolveResult res = solve(sys);
    bool by_cycles = oracle::feasible_by_cycle_enumeration(sys);
    auto by_fw = oracle::feasible_by_floyd_warshall(sys);
    CHECK(res.feasible() == by_cycles);
    CHECK(res.feasible() == by_fw.has_value());
    if (res.feasible()) {
      ++feasible_count;
      CHECK(satisfies(sys, *res.assignment));
      // The FW potentials are an independent witness.
      Assignment fw;
      fw.vars = sys.vars;
      fw.values = *by_fw;
      CHECK(satisfies(sys, fw));
    } else {
      CHECK(res.witness->total.sign() < 0);
    }
  }
  CHECK(feasible_count > 0);
  CHECK(feasible_count < 500);
}
