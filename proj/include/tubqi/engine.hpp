#pragma once

#include "tubqi/certificate.hpp"
#include "tubqi/strategies.hpp"

#include <string>

namespace tubqi {

struct DecideOptions {
  bool json_output = false;
  Convention convention = Convention::Example;
  unsigned long long max_candidates = 20000000ULL;
  double timeout_seconds = 0;
  bool parallel = true;
};

struct DecideOutcome {
  int exit_code = 2;          // 0 qi, 1 not qi, 2 input error, 3 inconclusive
  std::string report;         // human-readable (or JSON when requested)
  std::string timing_note;    // stderr material, excluded from the certificate
  std::optional<Decision> decision;
  nlohmann::json certificate;
};

DecideOutcome decide_texts(const std::string& name_a, const std::string& text_a,
                           const std::string& name_b, const std::string& text_b,
                           const DecideOptions& opts);

struct InspectOutcome {
  int exit_code = 2;
  std::string report;
  nlohmann::json json_report;
};

InspectOutcome inspect_text(const std::string& name, const std::string& text, bool as_json);

// Test and CLI helpers.
GraphOfGroups apply_basis_change(const GraphOfGroups& g, int vertex, const Moebius& b);
GraphOfGroups apply_basis_change_all(const GraphOfGroups& g, const Moebius& b);
GraphOfGroups reorder_declarations(const GraphOfGroups& g, const std::vector<int>& vperm,
                                   const std::vector<int>& eperm);

}  // namespace tubqi
