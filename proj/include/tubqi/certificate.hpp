#pragma once

#include "tubqi/strategies.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace tubqi {

std::string fnv1a64(const std::string& bytes);

struct CertificateInputs {
  std::string name_a, text_a;
  std::string name_b, text_b;
};

// Self-contained machine-checkable record of a decide run.
nlohmann::json certificate_json(const CertificateInputs& in, const GroupAnalysis& g1,
                                const GroupAnalysis& g2, const Decision& d, Convention conv);

nlohmann::json group_json(const GroupAnalysis& g);
nlohmann::json logvalue_json(const LogValue& v);
nlohmann::json rational_json(const Rational& r);

// Re-verifies a quasi-isometric certificate against the two inputs from
// scratch: digests, class tables, bijection reproducibility, terminal errors,
// row/column rule, closure, covering, the constraint system, and the
// assignment.  Returns an error description, or nullopt when verification
// passes.
std::optional<std::string> verify_certificate(const nlohmann::json& cert,
                                              const CertificateInputs& in);

struct BallStep {
  Match match;
  LogValue error;
};

struct BallReport {
  int radius = 0;
  uint64_t nodes_visited = 0;
  bool pass = true;
  // Per certificate match: observed error range over visited states.
  std::vector<Match> matches;
  std::vector<std::optional<LogValue>> min_error, max_error;
  LogValue max_abs_error;
  std::vector<BallStep> failure_path;  // nonempty iff !pass
  std::string failure_reason;
};

// Replays the inductive construction at the type level: walk every match from
// error 0, apply the positive strategy when the running error is <= M_i and
// the negative one otherwise, accumulate defined terminal errors, reset on
// undefined ones, and check containment in [L_j, U_j] at every step.
BallReport witness_ball(const nlohmann::json& cert, const CertificateInputs& in, int radius);

}  // namespace tubqi
