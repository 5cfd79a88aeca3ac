#pragma once

#include "tubqi/feasibility.hpp"
#include "tubqi/psets.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tubqi {

// A pair of P-set classes, one per group.
struct Match {
  int left = -1, right = -1;

  bool operator==(const Match& o) const { return left == o.left && right == o.right; }
  bool operator<(const Match& o) const {
    if (left != o.left) return left < o.left;
    return right < o.right;
  }
  std::string str() const {
    return "(" + std::to_string(left) + "," + std::to_string(right) + ")";
  }
};

enum class Convention { Example, Prose };

// Bijection of the type multisets of two vertices induced by a linear
// equivalence of their patterns; pair_map is indexed by the left vertex's
// slope order.
struct TypeBijection {
  std::vector<int> pair_map;
  Moebius witness;
};

struct Terminal {
  Match label;
  std::optional<LogValue> error;  // nullopt = undefined height error
};

struct CellOption {
  TypeBijection bij;
  std::vector<Terminal> terminals;  // non-root pairs, left slope order
};

struct LabelSummary {
  Match label;
  bool has_undefined = false;
  std::optional<LogValue> min_error, max_error;

  bool operator==(const LabelSummary& o) const;
  bool operator<(const LabelSummary& o) const;
};

// The feasibility-relevant content of a strategy: at most three
// representatives per label (min error, max error, one undefined).
struct Summary {
  std::vector<LabelSummary> labels;  // sorted by label

  bool operator==(const Summary& o) const { return labels == o.labels; }
  bool operator<(const Summary& o) const;
  bool closed_within(const std::vector<Match>& matches) const;
};

// All per-cell data for one match: option lists, radices, terminals.
struct MatchContext {
  Match match;
  int rho = 0, sigma = 0;
  std::vector<std::vector<std::vector<CellOption>>> cell;  // [row][col]
  std::vector<unsigned long long> suffix_product;          // saturated
  unsigned long long raw_count = 0;                        // saturated

  // Interned terminal coding for the hot table-building paths: every distinct
  // label and defined error value gets a small index, so summaries compare as
  // integer vectors instead of exact rationals.
  std::vector<Match> label_values;     // sorted
  std::vector<LogValue> error_values;  // sorted
  // Per cell, per option: (label index, error index or kUndefined).
  static constexpr uint8_t kUndefined = 0xff;
  std::vector<std::vector<std::vector<std::pair<uint8_t, uint8_t>>>> term_codes;

  int cells() const { return rho * sigma; }
  const std::vector<CellOption>& options(int c) const { return cell[c / sigma][c % sigma]; }
  int radix(int c) const { return 1 + static_cast<int>(options(c).size()); }
  unsigned long long index_of(const std::vector<uint8_t>& digits) const;
  std::vector<uint8_t> digits_of(unsigned long long index) const;
  bool covers(const std::vector<uint8_t>& digits) const;  // row/column rule
};

std::vector<TypeBijection> entry_bijections(const GroupAnalysis& g1, const GroupAnalysis& g2,
                                            const Match& m, int i, int j);

MatchContext make_match_context(const GroupAnalysis& g1, const GroupAnalysis& g2,
                                const Match& m);

// Lazy canonical-order enumeration of valid extensions with row/column
// feasibility pruning.  Digits: 0 = zero entry, k = option k-1.
class ExtensionEnumerator {
public:
  explicit ExtensionEnumerator(const MatchContext& ctx);
  bool next(std::vector<uint8_t>& digits);

private:
  bool descend();
  const MatchContext& ctx_;
  std::vector<uint8_t> digits_;
  std::vector<int> row_nonzero_, col_nonzero_;
  int pos_ = 0;
  bool done_ = false;
  bool fresh_ = true;
};

struct Strategy {
  Match match;
  std::vector<uint8_t> digits;
  std::vector<Terminal> terminals;
  Summary summary;
};

Strategy build_strategy(const MatchContext& ctx, const std::vector<uint8_t>& digits);

struct SummaryEntry {
  Summary summary;
  unsigned long long first_index = 0;
  std::vector<uint8_t> digits;  // canonically first extension with this summary
};

struct StrategyTable {
  std::vector<SummaryEntry> entries;       // ascending first_index
  unsigned long long valid_scanned = 0;    // coverage-passing extensions counted
  unsigned long long work = 0;             // work units spent building (budget accounting)
  bool truncated = false;                  // budget hit before completion
};

// Scans raw extension indices (parallel or serial reference); used below the
// size threshold and by the benchmark.
StrategyTable build_strategy_table(const MatchContext& ctx, unsigned long long budget,
                                   bool parallel);

// Cell-by-cell dynamic program over (summary, coverage) states; produces the
// identical table without enumerating the full product space.  Used for large
// matches and cross-checked against the scan in tests.
StrategyTable build_strategy_table_dp(const MatchContext& ctx, unsigned long long budget);

struct SearchStats {
  bool pattern_filter_passed = false;
  bool match_filter_passed = false;
  uint64_t extensions_enumerated = 0;
  uint64_t candidates_checked = 0;
  uint64_t solver_calls = 0;
};

struct StrategyChoice {
  Match match;
  Strategy positive, negative;
};

struct StrategySet {
  std::vector<StrategyChoice> choices;  // matches in lexicographic order
  std::vector<Match> matches() const;
};

enum class Verdict { QuasiIsometric, NotQuasiIsometric, Inconclusive };

struct Decision {
  Verdict verdict = Verdict::Inconclusive;
  std::optional<StrategySet> strategy_set;
  std::optional<ConstraintSystem> system;
  std::optional<Assignment> assignment;
  SearchStats stats;
  std::string reason;
};

struct SearchOptions {
  Convention convention = Convention::Example;
  unsigned long long max_candidates = 20000000ULL;
  double timeout_seconds = 0;  // 0 = unlimited
  bool parallel = true;
};

// The consistency system of a closed covering strategy set; variable index =
// position of the match within ss.choices.
ConstraintSystem build_system(const StrategySet& ss, const GroupAnalysis& g1,
                              const GroupAnalysis& g2, Convention conv);

Decision search(const GroupAnalysis& g1, const GroupAnalysis& g2, const SearchOptions& opts);

// True when the two pattern multisets define the same set of linear
// equivalence classes (both directions).
bool patterns_correspond(const GroupAnalysis& g1, const GroupAnalysis& g2);

std::string convention_name(Convention c);

}  // namespace tubqi
