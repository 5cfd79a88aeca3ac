#pragma once

#include "tubqi/logvalue.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tubqi {

enum class VarKind { L, M, U };

struct Var {
  VarKind kind = VarKind::M;
  int match_index = 0;

  bool operator==(const Var& o) const {
    return kind == o.kind && match_index == o.match_index;
  }
  bool operator<(const Var& o) const {
    if (match_index != o.match_index) return match_index < o.match_index;
    return static_cast<int>(kind) < static_cast<int>(o.kind);
  }
  std::string str() const;
};

// x - y <= c.
struct Constraint {
  Var x, y;
  LogValue c;
  std::string provenance;

  std::string str() const;
};

struct ConstraintSystem {
  std::vector<Var> vars;
  std::vector<Constraint> constraints;

  void add_var(const Var& v);
  int var_index(const Var& v) const;
  // x - y <= c
  void add(const Var& x, const Var& y, const LogValue& c, std::string provenance);
};

struct Assignment {
  std::vector<Var> vars;
  std::vector<LogValue> values;
  bool m_zero_normalized = false;

  const LogValue* value_of(const Var& v) const;
};

struct InfeasibilityWitness {
  std::vector<Constraint> cycle;  // x-y<=c constraints forming a cycle
  LogValue total;                 // strictly negative
};

struct SolveResult {
  std::optional<Assignment> assignment;  // set iff feasible
  std::optional<InfeasibilityWitness> witness;
  bool feasible() const { return assignment.has_value(); }
};

SolveResult solve(const ConstraintSystem& sys);

// Exact check that the assignment satisfies every constraint.
bool satisfies(const ConstraintSystem& sys, const Assignment& a);

}  // namespace tubqi
