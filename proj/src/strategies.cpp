#include "tubqi/strategies.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <set>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tubqi {

namespace {
constexpr unsigned long long kSat = std::numeric_limits<unsigned long long>::max() / 4;

unsigned long long sat_mul(unsigned long long a, unsigned long long b) {
  if (a == 0 || b == 0) return 0;
  if (a > kSat / b) return kSat;
  return a * b;
}
}  // namespace

bool LabelSummary::operator==(const LabelSummary& o) const {
  return label == o.label && has_undefined == o.has_undefined && min_error == o.min_error &&
         max_error == o.max_error;
}

bool LabelSummary::operator<(const LabelSummary& o) const {
  if (!(label == o.label)) return label < o.label;
  if (has_undefined != o.has_undefined) return has_undefined < o.has_undefined;
  auto cmp_opt = [](const std::optional<LogValue>& a, const std::optional<LogValue>& b) {
    if (a.has_value() != b.has_value()) return a.has_value() ? 1 : -1;
    if (!a) return 0;
    if (*a < *b) return -1;
    if (*b < *a) return 1;
    return 0;
  };
  int c = cmp_opt(min_error, o.min_error);
  if (c != 0) return c < 0;
  return cmp_opt(max_error, o.max_error) < 0;
}

bool Summary::operator<(const Summary& o) const {
  return std::lexicographical_compare(labels.begin(), labels.end(), o.labels.begin(),
                                      o.labels.end());
}

bool Summary::closed_within(const std::vector<Match>& matches) const {
  for (const auto& ls : labels)
    if (!std::binary_search(matches.begin(), matches.end(), ls.label)) return false;
  return true;
}

std::vector<Match> StrategySet::matches() const {
  std::vector<Match> out;
  for (const auto& c : choices) out.push_back(c.match);
  return out;
}

std::vector<TypeBijection> entry_bijections(const GroupAnalysis& g1, const GroupAnalysis& g2,
                                            const Match& m, int i, int j) {
  const PsetClass& left = g1.classes[m.left];
  const PsetClass& right = g2.classes[m.right];
  int lnode = left.nodes[i];
  int rnode = right.nodes[j];
  int v = g1.nodes[lnode].vertex;
  int w = g2.nodes[rnode].vertex;
  const EdgePattern& pv = g1.patterns[v];
  const EdgePattern& pw = g2.patterns[w];
  if (pv.slopes.size() != pw.slopes.size()) return {};
  const ProjectiveSlope& pin_src = pv.slopes[g1.nodes[lnode].slope_idx];
  const ProjectiveSlope& pin_dst = pw.slopes[g2.nodes[rnode].slope_idx];

  std::map<std::vector<int>, Moebius> dedup;
  for (const Moebius& eq : linear_equivalences(pv, pw)) {
    if (!(eq.apply(pin_src) == pin_dst)) continue;
    std::vector<int> pair_map(pv.slopes.size(), -1);
    for (size_t si = 0; si < pv.slopes.size(); ++si) {
      ProjectiveSlope img = eq.apply(pv.slopes[si]);
      auto it = std::lower_bound(pw.slopes.begin(), pw.slopes.end(), img);
      pair_map[si] = static_cast<int>(it - pw.slopes.begin());
    }
    auto it = dedup.find(pair_map);
    if (it == dedup.end() || eq < it->second) dedup[pair_map] = eq;
  }
  std::vector<TypeBijection> out;
  for (auto& [pm, wit] : dedup) out.push_back({pm, wit});
  return out;
}

MatchContext make_match_context(const GroupAnalysis& g1, const GroupAnalysis& g2,
                                const Match& m) {
  MatchContext ctx;
  ctx.match = m;
  const PsetClass& left = g1.classes[m.left];
  const PsetClass& right = g2.classes[m.right];
  ctx.rho = static_cast<int>(left.nodes.size());
  ctx.sigma = static_cast<int>(right.nodes.size());
  bool parents_bounded = left.bounded && right.bounded;
  ctx.cell.assign(ctx.rho, std::vector<std::vector<CellOption>>(ctx.sigma));

  for (int i = 0; i < ctx.rho; ++i) {
    int lnode = left.nodes[i];
    int v = g1.nodes[lnode].vertex;
    int si0 = g1.nodes[lnode].slope_idx;
    for (int j = 0; j < ctx.sigma; ++j) {
      int rnode = right.nodes[j];
      int w = g2.nodes[rnode].vertex;
      for (TypeBijection& bij : entry_bijections(g1, g2, m, i, j)) {
        CellOption opt;
        opt.terminals.reserve(bij.pair_map.size() - 1);
        for (size_t si = 0; si < bij.pair_map.size(); ++si) {
          if (static_cast<int>(si) == si0) continue;  // root pair
          int ln = g1.vertex_nodes[v][si];
          int rn = g2.vertex_nodes[w][bij.pair_map[si]];
          TypeRef lt = g1.node_type[ln];
          TypeRef rt = g2.node_type[rn];
          Terminal t;
          t.label = Match{lt.class_id, rt.class_id};
          bool defined = parents_bounded && g1.classes[lt.class_id].bounded &&
                         g2.classes[rt.class_id].bounded && g1.line_count(v) >= 3;
          if (defined) {
            LogValue lrel = left.potentials[i] - g1.classes[lt.class_id].potentials[lt.type_index];
            LogValue rrel =
                right.potentials[j] - g2.classes[rt.class_id].potentials[rt.type_index];
            t.error = lrel - rrel;
          }
          opt.terminals.push_back(std::move(t));
        }
        opt.bij = std::move(bij);
        ctx.cell[i][j].push_back(std::move(opt));
      }
    }
  }

  int n = ctx.cells();
  ctx.suffix_product.assign(n + 1, 1);
  for (int c = n - 1; c >= 0; --c)
    ctx.suffix_product[c] = sat_mul(ctx.suffix_product[c + 1],
                                    static_cast<unsigned long long>(ctx.radix(c)));
  ctx.raw_count = ctx.suffix_product[0];

  // Intern labels and error values for the table-building hot paths.
  std::set<Match> labels;
  std::set<Rational> errors;
  for (int i = 0; i < ctx.rho; ++i)
    for (int j = 0; j < ctx.sigma; ++j)
      for (const auto& opt : ctx.cell[i][j])
        for (const auto& t : opt.terminals) {
          labels.insert(t.label);
          if (t.error) errors.insert(t.error->ratio());
        }
  ctx.label_values.assign(labels.begin(), labels.end());
  for (const auto& q : errors) ctx.error_values.push_back(LogValue::half_log2_of(q));
  if (ctx.label_values.size() >= MatchContext::kUndefined ||
      ctx.error_values.size() >= MatchContext::kUndefined)
    throw std::logic_error("make_match_context: interning overflow");
  auto label_idx = [&](const Match& m) {
    return static_cast<uint8_t>(std::lower_bound(ctx.label_values.begin(),
                                                 ctx.label_values.end(), m) -
                                ctx.label_values.begin());
  };
  auto error_idx = [&](const LogValue& e) {
    return static_cast<uint8_t>(std::lower_bound(ctx.error_values.begin(),
                                                 ctx.error_values.end(), e) -
                                ctx.error_values.begin());
  };
  ctx.term_codes.resize(n);
  for (int c = 0; c < n; ++c) {
    for (const auto& opt : ctx.options(c)) {
      std::vector<std::pair<uint8_t, uint8_t>> codes;
      for (const auto& t : opt.terminals)
        codes.push_back({label_idx(t.label),
                         t.error ? error_idx(*t.error) : MatchContext::kUndefined});
      ctx.term_codes[c].push_back(std::move(codes));
    }
  }
  return ctx;
}

// Interned per-label accumulator and its packed key form.  One uint32 per
// touched label: label index << 24 | undefined << 16 | (min+1) << 8 | (max+1).
namespace {

struct InternedSummary {
  std::vector<int16_t> min_idx, max_idx;  // -1 = none
  std::vector<uint8_t> undef, touched;

  explicit InternedSummary(size_t nlabels)
      : min_idx(nlabels, -1), max_idx(nlabels, -1), undef(nlabels, 0), touched(nlabels, 0) {}

  void clear() {
    std::fill(min_idx.begin(), min_idx.end(), -1);
    std::fill(max_idx.begin(), max_idx.end(), -1);
    std::fill(undef.begin(), undef.end(), 0);
    std::fill(touched.begin(), touched.end(), 0);
  }

  void add(const std::vector<std::pair<uint8_t, uint8_t>>& codes) {
    for (auto [label, err] : codes) {
      touched[label] = 1;
      if (err == MatchContext::kUndefined) {
        undef[label] = 1;
      } else {
        if (min_idx[label] < 0 || err < min_idx[label]) min_idx[label] = err;
        if (max_idx[label] < 0 || err > max_idx[label]) max_idx[label] = err;
      }
    }
  }

  std::vector<uint32_t> key() const {
    std::vector<uint32_t> out;
    for (size_t l = 0; l < touched.size(); ++l) {
      if (!touched[l]) continue;
      out.push_back(static_cast<uint32_t>(l) << 24 | static_cast<uint32_t>(undef[l]) << 16 |
                    static_cast<uint32_t>(min_idx[l] + 1) << 8 |
                    static_cast<uint32_t>(max_idx[l] + 1));
    }
    return out;
  }
};

Summary decode_summary(const MatchContext& ctx, const std::vector<uint32_t>& key) {
  Summary s;
  for (uint32_t word : key) {
    LabelSummary ls;
    ls.label = ctx.label_values[word >> 24];
    ls.has_undefined = (word >> 16) & 0xff;
    int mn = static_cast<int>((word >> 8) & 0xff) - 1;
    int mx = static_cast<int>(word & 0xff) - 1;
    if (mn >= 0) ls.min_error = ctx.error_values[mn];
    if (mx >= 0) ls.max_error = ctx.error_values[mx];
    s.labels.push_back(std::move(ls));
  }
  return s;
}

}  // namespace

unsigned long long MatchContext::index_of(const std::vector<uint8_t>& digits) const {
  unsigned long long idx = 0;
  for (int c = 0; c < cells(); ++c)
    idx += static_cast<unsigned long long>(digits[c]) * suffix_product[c + 1];
  return idx;
}

std::vector<uint8_t> MatchContext::digits_of(unsigned long long index) const {
  std::vector<uint8_t> d(cells(), 0);
  for (int c = 0; c < cells(); ++c) {
    d[c] = static_cast<uint8_t>(index / suffix_product[c + 1]);
    index %= suffix_product[c + 1];
  }
  return d;
}

bool MatchContext::covers(const std::vector<uint8_t>& digits) const {
  for (int i = 0; i < rho; ++i) {
    bool any = false;
    for (int j = 0; j < sigma; ++j) any |= digits[i * sigma + j] != 0;
    if (!any) return false;
  }
  for (int j = 0; j < sigma; ++j) {
    bool any = false;
    for (int i = 0; i < rho; ++i) any |= digits[i * sigma + j] != 0;
    if (!any) return false;
  }
  return true;
}

ExtensionEnumerator::ExtensionEnumerator(const MatchContext& ctx)
    : ctx_(ctx),
      digits_(ctx.cells(), 0),
      row_nonzero_(ctx.rho, 0),
      col_nonzero_(ctx.sigma, 0) {
  if (ctx_.cells() == 0) done_ = true;
}

// Zero is allowed at a cell unless it is the last chance to cover its row or
// its column.
bool ExtensionEnumerator::descend() {
  while (pos_ < ctx_.cells()) {
    int i = pos_ / ctx_.sigma, j = pos_ % ctx_.sigma;
    bool zero_ok = !(j == ctx_.sigma - 1 && row_nonzero_[i] == 0) &&
                   !(i == ctx_.rho - 1 && col_nonzero_[j] == 0);
    int start = digits_[pos_];
    if (start == 0 && !zero_ok) start = 1;
    if (start >= ctx_.radix(pos_)) return false;
    digits_[pos_] = static_cast<uint8_t>(start);
    if (start != 0) {
      ++row_nonzero_[i];
      ++col_nonzero_[j];
    }
    ++pos_;
  }
  return true;
}

bool ExtensionEnumerator::next(std::vector<uint8_t>& digits) {
  if (done_) return false;
  if (fresh_) {
    fresh_ = false;
    if (descend()) {
      digits = digits_;
      return true;
    }
  }
  // Backtrack: find the rightmost cell that can advance, then descend again.
  while (true) {
    if (pos_ == 0) {
      done_ = true;
      return false;
    }
    --pos_;
    int i = pos_ / ctx_.sigma, j = pos_ % ctx_.sigma;
    if (digits_[pos_] != 0) {
      --row_nonzero_[i];
      --col_nonzero_[j];
    }
    int nxt = digits_[pos_] + 1;
    if (nxt < ctx_.radix(pos_)) {
      digits_[pos_] = static_cast<uint8_t>(nxt);
      ++row_nonzero_[i];
      ++col_nonzero_[j];
      ++pos_;
      // Clear the suffix before descending.
      for (int c = pos_; c < ctx_.cells(); ++c) digits_[c] = 0;
      if (descend()) {
        digits = digits_;
        return true;
      }
      // Suffix infeasible: undo this digit and keep backtracking.
      continue;
    }
    digits_[pos_] = 0;
  }
}

namespace {

Summary summarize(const MatchContext& ctx, const std::vector<uint8_t>& digits) {
  std::map<Match, LabelSummary> acc;
  for (int c = 0; c < ctx.cells(); ++c) {
    if (digits[c] == 0) continue;
    const CellOption& opt = ctx.options(c)[digits[c] - 1];
    for (const Terminal& t : opt.terminals) {
      LabelSummary& ls = acc.try_emplace(t.label, LabelSummary{t.label, false, {}, {}}).first->second;
      if (!t.error) {
        ls.has_undefined = true;
      } else {
        if (!ls.min_error || *t.error < *ls.min_error) ls.min_error = t.error;
        if (!ls.max_error || *ls.max_error < *t.error) ls.max_error = t.error;
      }
    }
  }
  Summary s;
  for (auto& [label, ls] : acc) s.labels.push_back(std::move(ls));
  return s;
}

}  // namespace

Strategy build_strategy(const MatchContext& ctx, const std::vector<uint8_t>& digits) {
  Strategy s;
  s.match = ctx.match;
  s.digits = digits;
  for (int c = 0; c < ctx.cells(); ++c) {
    if (digits[c] == 0) continue;
    if (digits[c] > static_cast<int>(ctx.options(c).size()))
      throw std::invalid_argument("build_strategy: digit out of range");
    const CellOption& opt = ctx.options(c)[digits[c] - 1];
    s.terminals.insert(s.terminals.end(), opt.terminals.begin(), opt.terminals.end());
  }
  s.summary = summarize(ctx, digits);
  return s;
}

StrategyTable build_strategy_table_dp(const MatchContext& ctx, unsigned long long budget) {
  StrategyTable table;
  struct Key {
    std::vector<uint32_t> summary;  // interned, packed per label
    uint32_t colmask = 0;
    bool row_nonzero = false;
    bool operator<(const Key& o) const {
      if (colmask != o.colmask) return colmask < o.colmask;
      if (row_nonzero != o.row_nonzero) return row_nonzero < o.row_nonzero;
      return summary < o.summary;
    }
  };
  struct Entry {
    std::vector<uint8_t> digits;  // lex-min prefix reaching this state
    unsigned long long count = 0;
  };
  auto sat_add = [](unsigned long long a, unsigned long long b) {
    return a > kSat - b ? kSat : a + b;
  };

  size_t nlabels = ctx.label_values.size();
  InternedSummary acc(nlabels);
  auto unpack = [&](const std::vector<uint32_t>& key) {
    acc.clear();
    for (uint32_t word : key) {
      size_t l = word >> 24;
      acc.touched[l] = 1;
      acc.undef[l] = (word >> 16) & 0xff;
      acc.min_idx[l] = static_cast<int16_t>(((word >> 8) & 0xff)) - 1;
      acc.max_idx[l] = static_cast<int16_t>((word & 0xff)) - 1;
    }
  };

  std::map<Key, Entry> states;
  states[Key{}] = Entry{{}, 1};
  unsigned long long work = 0;
  for (int c = 0; c < ctx.cells(); ++c) {
    int j = c % ctx.sigma;
    bool row_end = j == ctx.sigma - 1;
    std::map<Key, Entry> next;
    for (const auto& [key, entry] : states) {
      for (int d = 0; d < ctx.radix(c); ++d) {
        if (++work > budget) {
          table.truncated = true;
          table.work = work;
          return table;
        }
        Key nk;
        nk.colmask = key.colmask;
        nk.row_nonzero = key.row_nonzero;
        if (d != 0) {
          nk.colmask |= 1u << j;
          nk.row_nonzero = true;
          unpack(key.summary);
          acc.add(ctx.term_codes[c][d - 1]);
          nk.summary = acc.key();
        } else {
          nk.summary = key.summary;
        }
        if (row_end && !nk.row_nonzero) continue;  // row must be covered
        if (row_end) nk.row_nonzero = false;
        auto it = next.find(nk);
        if (it == next.end()) {
          Entry ne;
          ne.digits = entry.digits;
          ne.digits.push_back(static_cast<uint8_t>(d));
          ne.count = entry.count;
          next.emplace(std::move(nk), std::move(ne));
        } else {
          it->second.count = sat_add(it->second.count, entry.count);
          // Parents are visited in ascending prefix order per digit, but a
          // later parent with a smaller digit can still win: compare anyway.
          std::vector<uint8_t> cand = entry.digits;
          cand.push_back(static_cast<uint8_t>(d));
          if (cand < it->second.digits) it->second.digits = std::move(cand);
        }
      }
    }
    states = std::move(next);
  }

  table.work = work;
  uint32_t full = ctx.sigma >= 32 ? ~0u : ((1u << ctx.sigma) - 1);
  std::map<std::vector<uint32_t>, SummaryEntry> dedup;
  for (const auto& [key, entry] : states) {
    if (key.colmask != full) continue;
    table.valid_scanned += entry.count;
    auto it = dedup.find(key.summary);
    if (it == dedup.end()) {
      dedup.emplace(key.summary, SummaryEntry{decode_summary(ctx, key.summary),
                                              ctx.index_of(entry.digits), entry.digits});
    } else if (entry.digits < it->second.digits) {
      it->second.first_index = ctx.index_of(entry.digits);
      it->second.digits = entry.digits;
    }
  }
  for (auto& [s, e] : dedup) table.entries.push_back(e);
  std::sort(table.entries.begin(), table.entries.end(),
            [](const SummaryEntry& a, const SummaryEntry& b) {
              return a.first_index < b.first_index;
            });
  return table;
}

namespace {
constexpr unsigned long long kScanThreshold = 1ULL << 20;
}

StrategyTable build_strategy_table(const MatchContext& ctx, unsigned long long budget,
                                   bool parallel) {
  StrategyTable table;
  if (ctx.raw_count > kScanThreshold) return build_strategy_table_dp(ctx, budget);
  table.work = ctx.raw_count;
  if (ctx.raw_count > budget) {
    table.truncated = true;
    return table;
  }
  using InternedKey = std::vector<uint32_t>;
  std::map<InternedKey, SummaryEntry> dedup;
  auto intern = [&ctx](InternedSummary& acc, const std::vector<uint8_t>& digits) {
    acc.clear();
    for (int c = 0; c < ctx.cells(); ++c)
      if (digits[c] != 0) acc.add(ctx.term_codes[c][digits[c] - 1]);
    return acc.key();
  };

  if (!parallel) {
    ExtensionEnumerator en(ctx);
    std::vector<uint8_t> digits;
    InternedSummary acc(ctx.label_values.size());
    while (en.next(digits)) {
      ++table.valid_scanned;
      InternedKey key = intern(acc, digits);
      auto it = dedup.find(key);
      if (it == dedup.end())
        dedup.emplace(std::move(key), SummaryEntry{Summary{}, ctx.index_of(digits), digits});
    }
  } else {
    unsigned long long total = ctx.raw_count;
    int nchunks = 1;
#ifdef _OPENMP
    nchunks = std::max(1, omp_get_max_threads() * 4);
#endif
    unsigned long long chunk = (total + nchunks - 1) / std::max(1, nchunks);
    std::vector<std::map<InternedKey, SummaryEntry>> maps(nchunks);
    std::vector<unsigned long long> counts(nchunks, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (int k = 0; k < nchunks; ++k) {
      unsigned long long lo = chunk * static_cast<unsigned long long>(k);
      unsigned long long hi = std::min(total, lo + chunk);
      InternedSummary acc(ctx.label_values.size());
      std::vector<uint8_t> digits(ctx.cells(), 0);
      for (unsigned long long idx = lo; idx < hi; ++idx) {
        unsigned long long rem = idx;
        for (int c = 0; c < ctx.cells(); ++c) {
          digits[c] = static_cast<uint8_t>(rem / ctx.suffix_product[c + 1]);
          rem %= ctx.suffix_product[c + 1];
        }
        if (!ctx.covers(digits)) continue;
        ++counts[k];
        InternedKey key = intern(acc, digits);
        auto it = maps[k].find(key);
        if (it == maps[k].end()) maps[k].emplace(std::move(key), SummaryEntry{Summary{}, idx, digits});
      }
    }
    for (int k = 0; k < nchunks; ++k) {
      table.valid_scanned += counts[k];
      for (auto& [s, e] : maps[k]) {
        auto it = dedup.find(s);
        if (it == dedup.end())
          dedup.emplace(s, e);
        else if (e.first_index < it->second.first_index)
          it->second = e;
      }
    }
  }

  for (auto& [key, e] : dedup) {
    SummaryEntry entry = e;
    entry.summary = decode_summary(ctx, key);
    table.entries.push_back(std::move(entry));
  }
  std::sort(table.entries.begin(), table.entries.end(),
            [](const SummaryEntry& a, const SummaryEntry& b) {
              return a.first_index < b.first_index;
            });
  return table;
}

namespace {

// Emit the consistency constraints contributed by one signed strategy of one
// match, per the selected convention.
void emit_constraints(ConstraintSystem& sys, int i, const Summary& summary, bool positive,
                      Convention conv, const std::vector<Match>& matches,
                      const std::vector<int>& bounded_var_index) {
  if (bounded_var_index[i] < 0) return;  // unbounded matches carry no variables
  auto idx_of_label = [&](const Match& label) {
    auto it = std::lower_bound(matches.begin(), matches.end(), label);
    return static_cast<int>(it - matches.begin());
  };
  const char* sign = positive ? "positive" : "negative";
  for (const auto& ls : summary.labels) {
    if (!ls.min_error) continue;  // only undefined errors under this label
    int j = idx_of_label(ls.label);
    if (bounded_var_index[j] < 0) continue;
    Var Li{VarKind::L, i}, Mi{VarKind::M, i}, Ui{VarKind::U, i};
    Var Lj{VarKind::L, j}, Uj{VarKind::U, j};
    bool low_rule_on_L;  // example convention: positive uses {L_i+E>=L_j, M_i+E<=U_j}
    low_rule_on_L = (conv == Convention::Example) ? positive : !positive;
    if (low_rule_on_L) {
      sys.add(Lj, Li, *ls.min_error,
              std::string(sign) + " strategy of match " + std::to_string(i) + ": L" +
                  std::to_string(i) + " + E >= L" + std::to_string(j) +
                  " with E = " + ls.min_error->str());
      sys.add(Mi, Uj, -*ls.max_error,
              std::string(sign) + " strategy of match " + std::to_string(i) + ": M" +
                  std::to_string(i) + " + E <= U" + std::to_string(j) +
                  " with E = " + ls.max_error->str());
    } else {
      sys.add(Ui, Uj, -*ls.max_error,
              std::string(sign) + " strategy of match " + std::to_string(i) + ": U" +
                  std::to_string(i) + " + E <= U" + std::to_string(j) +
                  " with E = " + ls.max_error->str());
      sys.add(Lj, Mi, *ls.min_error,
              std::string(sign) + " strategy of match " + std::to_string(i) + ": M" +
                  std::to_string(i) + " + E >= L" + std::to_string(j) +
                  " with E = " + ls.min_error->str());
    }
  }
}

void emit_range_constraints(ConstraintSystem& sys, int i) {
  Var Li{VarKind::L, i}, Mi{VarKind::M, i}, Ui{VarKind::U, i};
  sys.add(Li, Mi, LogValue(), "L" + std::to_string(i) + " <= M" + std::to_string(i));
  sys.add(Mi, Ui, LogValue(), "M" + std::to_string(i) + " <= U" + std::to_string(i));
}

}  // namespace

ConstraintSystem build_system(const StrategySet& ss, const GroupAnalysis& g1,
                              const GroupAnalysis& g2, Convention conv) {
  std::vector<Match> matches = ss.matches();
  std::vector<int> bounded_var_index(matches.size(), -1);
  ConstraintSystem sys;
  int next = 0;
  for (size_t i = 0; i < matches.size(); ++i) {
    if (g1.classes[matches[i].left].bounded && g2.classes[matches[i].right].bounded) {
      bounded_var_index[i] = next++;
      emit_range_constraints(sys, static_cast<int>(i));
    }
  }
  for (size_t i = 0; i < matches.size(); ++i) {
    emit_constraints(sys, static_cast<int>(i), ss.choices[i].positive.summary, true, conv,
                     matches, bounded_var_index);
    emit_constraints(sys, static_cast<int>(i), ss.choices[i].negative.summary, false, conv,
                     matches, bounded_var_index);
  }
  return sys;
}

namespace {

struct CapExceeded {};
struct TimedOut {};

class Searcher {
public:
  Searcher(const GroupAnalysis& g1, const GroupAnalysis& g2, const SearchOptions& opts)
      : g1_(g1), g2_(g2), opts_(opts), start_(std::chrono::steady_clock::now()) {}

  Decision run() {
    Decision d;
    try {
      d = run_inner();
    } catch (const CapExceeded&) {
      d.verdict = Verdict::Inconclusive;
      d.reason = "candidate budget exhausted (--max-candidates)";
    } catch (const TimedOut&) {
      d.verdict = Verdict::Inconclusive;
      d.reason = "timeout exceeded";
    }
    d.stats = stats_;
    return d;
  }

private:
  void check_time() {
    if (opts_.timeout_seconds <= 0) return;
    auto el = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (el > opts_.timeout_seconds) throw TimedOut{};
  }

  const StrategyTable& table_for(const Match& m) {
    auto it = tables_.find(m);
    if (it != tables_.end()) return it->second;
    check_time();
    MatchContext ctx = make_match_context(g1_, g2_, m);
    unsigned long long budget = opts_.max_candidates > work_ ? opts_.max_candidates - work_ : 0;
    StrategyTable table = build_strategy_table(ctx, budget, opts_.parallel);
    stats_.extensions_enumerated += table.valid_scanned;
    work_ += table.work;
    if (table.truncated) throw CapExceeded{};
    contexts_.emplace(m, std::move(ctx));
    return tables_.emplace(m, std::move(table)).first->second;
  }

  bool covering(const std::vector<Match>& matches) const {
    std::vector<char> l(g1_.classes.size(), 0), r(g2_.classes.size(), 0);
    for (const auto& m : matches) {
      l[m.left] = 1;
      r[m.right] = 1;
    }
    return std::find(l.begin(), l.end(), 0) == l.end() &&
           std::find(r.begin(), r.end(), 0) == r.end();
  }

  bool bounded_(const Match& m) const {
    return g1_.classes[m.left].bounded && g2_.classes[m.right].bounded;
  }

  // Flat difference-constraint edge over the mask's variable numbering
  // (var id = 3 * level + kind).
  struct FlatEdge {
    int from, to;
    LogValue w;
  };

  static int vid(size_t level, VarKind k) {
    return static_cast<int>(level) * 3 + static_cast<int>(k);
  }

  // Constraint edges contributed by one signed summary at one level; mirrors
  // emit_constraints exactly.
  std::vector<FlatEdge> flat_edges(const std::vector<Match>& matches, size_t level,
                                   const Summary& summary, bool positive) const {
    std::vector<FlatEdge> out;
    for (const auto& ls : summary.labels) {
      if (!ls.min_error) continue;
      auto it = std::lower_bound(matches.begin(), matches.end(), ls.label);
      size_t j = static_cast<size_t>(it - matches.begin());
      if (!bounded_(matches[j])) continue;
      bool low_rule_on_L = (opts_.convention == Convention::Example) ? positive : !positive;
      if (low_rule_on_L) {
        out.push_back({vid(level, VarKind::L), vid(j, VarKind::L), *ls.min_error});
        out.push_back({vid(j, VarKind::U), vid(level, VarKind::M), -*ls.max_error});
      } else {
        out.push_back({vid(j, VarKind::U), vid(level, VarKind::U), -*ls.max_error});
        out.push_back({vid(level, VarKind::M), vid(j, VarKind::L), *ls.min_error});
      }
    }
    return out;
  }

  // Bellman-Ford negative-cycle test over the stacked edge lists.
  bool flat_feasible(int nvars, const std::vector<const std::vector<FlatEdge>*>& spans) {
    ++stats_.solver_calls;
    dist_.assign(nvars, LogValue());
    for (int round = 0; round <= nvars; ++round) {
      bool relaxed = false;
      for (const auto* span : spans) {
        for (const auto& e : *span) {
          LogValue cand = dist_[e.from] + e.w;
          if (cand < dist_[e.to]) {
            dist_[e.to] = cand;
            relaxed = true;
          }
        }
      }
      if (!relaxed) return true;
    }
    return false;
  }

  // One level of the backtracking: the filtered, pre-encoded strategy choices
  // of a single match within the current mask.
  struct Level {
    bool unbounded = false;
    std::vector<size_t> entries;              // indices into the match's table
    std::vector<std::vector<FlatEdge>> pos;   // per filtered entry
    std::vector<std::vector<FlatEdge>> neg;
    std::vector<char> pos_ok, neg_ok;         // self-loop sign filters
    // (pos, neg) index pairs that survive the level-local feasibility check,
    // in lexicographic order.
    std::vector<std::pair<size_t, size_t>> pairs;
  };

  // The self-label 1-cycle rejection depends on the convention: under the
  // example convention a positive strategy needs min self error >= 0 and a
  // negative one max self error <= 0; the prose convention swaps the roles.
  static bool self_sign_ok(const Summary& s, const Match& self, bool positive,
                           Convention conv) {
    bool wants_nonneg_min = (conv == Convention::Example) ? positive : !positive;
    for (const auto& ls : s.labels) {
      if (!(ls.label == self) || !ls.min_error) continue;
      if (wants_nonneg_min && ls.min_error->sign() < 0) return false;
      if (!wants_nonneg_min && ls.max_error->sign() > 0) return false;
    }
    return true;
  }

  Level make_level(const std::vector<Match>& matches, size_t level,
                   const std::vector<FlatEdge>& ranges) {
    const Match& m = matches[level];
    const StrategyTable& table = table_for(m);
    Level out;
    out.unbounded = !bounded_(m);
    for (size_t e = 0; e < table.entries.size(); ++e) {
      const Summary& s = table.entries[e].summary;
      if (!s.closed_within(matches)) continue;
      out.entries.push_back(e);
      if (!out.unbounded) {
        out.pos.push_back(flat_edges(matches, level, s, true));
        out.neg.push_back(flat_edges(matches, level, s, false));
        out.pos_ok.push_back(self_sign_ok(s, m, true, opts_.convention));
        out.neg_ok.push_back(self_sign_ok(s, m, false, opts_.convention));
      } else {
        out.pos.emplace_back();
        out.neg.emplace_back();
        out.pos_ok.push_back(1);
        out.neg_ok.push_back(1);
      }
    }
    if (out.unbounded) {
      for (size_t pi = 0; pi < out.entries.size(); ++pi) out.pairs.push_back({pi, pi});
      return out;
    }
    // Level-local feasibility: a pair that fails against the ranges alone can
    // never appear in a feasible candidate.
    int nvars = static_cast<int>(matches.size()) * 3;
    std::vector<const std::vector<FlatEdge>*> spans{&ranges, nullptr, nullptr};
    for (size_t pi = 0; pi < out.entries.size(); ++pi) {
      if (!out.pos_ok[pi]) continue;
      spans[1] = &out.pos[pi];
      for (size_t qi = 0; qi < out.entries.size(); ++qi) {
        if (!out.neg_ok[qi]) continue;
        if (++work_ > opts_.max_candidates) throw CapExceeded{};
        spans[2] = &out.neg[qi];
        if (flat_feasible(nvars, spans)) out.pairs.push_back({pi, qi});
      }
    }
    return out;
  }

  // Depth-first assignment of (positive, negative) summaries per match.
  bool assign_level(const std::vector<Match>& matches, const std::vector<Level>& levels,
                    size_t level, std::vector<const std::vector<FlatEdge>*>& spans,
                    std::vector<std::pair<size_t, size_t>>& picks) {
    if (level == matches.size()) return true;  // every level was vetted on entry
    check_time();
    const Level& lv = levels[level];
    int nvars = static_cast<int>(matches.size()) * 3;
    for (const auto& [pi, qi] : lv.pairs) {
      if (lv.unbounded) {
        // No constraints flow from unbounded matches, so deeper failure is
        // independent of this pick: the first closure-valid entry decides.
        picks[level] = {lv.entries[pi], lv.entries[pi]};
        return assign_level(matches, levels, level + 1, spans, picks);
      }
      ++stats_.candidates_checked;
      if (++work_ > opts_.max_candidates) throw CapExceeded{};
      spans.push_back(&lv.pos[pi]);
      spans.push_back(&lv.neg[qi]);
      bool ok = flat_feasible(nvars, spans);
      if (ok) {
        picks[level] = {lv.entries[pi], lv.entries[qi]};
        if (assign_level(matches, levels, level + 1, spans, picks)) return true;
      }
      spans.pop_back();
      spans.pop_back();
    }
    return false;
  }

  Decision run_inner() {
    Decision d;
    if (!patterns_correspond(g1_, g2_)) {
      d.verdict = Verdict::NotQuasiIsometric;
      d.reason = "edge-pattern equivalence classes differ";
      return d;
    }
    stats_.pattern_filter_passed = true;

    std::vector<Match> compat;
    for (size_t a = 0; a < g1_.classes.size(); ++a)
      for (size_t b = 0; b < g2_.classes.size(); ++b)
        if (g1_.classes[a].bounded == g2_.classes[b].bounded)
          compat.push_back({static_cast<int>(a), static_cast<int>(b)});
    if (!covering(compat)) {
      d.verdict = Verdict::NotQuasiIsometric;
      d.reason = "no boundedness-compatible covering matches exist";
      return d;
    }
    stats_.match_filter_passed = true;

    if (compat.size() > 62) throw CapExceeded{};
    std::vector<unsigned long long> masks;
    for (unsigned long long mask = 1; mask < (1ULL << compat.size()); ++mask)
      masks.push_back(mask);
    std::stable_sort(masks.begin(), masks.end(),
                     [](unsigned long long a, unsigned long long b) {
                       int ca = __builtin_popcountll(a), cb = __builtin_popcountll(b);
                       if (ca != cb) return ca < cb;
                       return a < b;
                     });
    for (unsigned long long mask : masks) {
      std::vector<Match> matches;
      for (size_t b = 0; b < compat.size(); ++b)
        if (mask & (1ULL << b)) matches.push_back(compat[b]);
      if (!covering(matches)) continue;
      std::vector<FlatEdge> ranges;  // L_i <= M_i <= U_i for bounded matches
      for (size_t i = 0; i < matches.size(); ++i) {
        if (!bounded_(matches[i])) continue;
        ranges.push_back({vid(i, VarKind::M), vid(i, VarKind::L), LogValue()});
        ranges.push_back({vid(i, VarKind::U), vid(i, VarKind::M), LogValue()});
      }
      std::vector<Level> levels;
      bool dead = false;
      for (size_t i = 0; i < matches.size() && !dead; ++i) {
        levels.push_back(make_level(matches, i, ranges));
        if (levels.back().pairs.empty()) dead = true;
      }
      if (dead) continue;
      std::vector<const std::vector<FlatEdge>*> spans{&ranges};
      std::vector<std::pair<size_t, size_t>> picks(matches.size());
      if (!assign_level(matches, levels, 0, spans, picks)) continue;

      // First feasible candidate in canonical order: build the certificate.
      StrategySet ss;
      for (size_t i = 0; i < matches.size(); ++i) {
        const StrategyTable& table = table_for(matches[i]);
        const MatchContext& ctx = contexts_.at(matches[i]);
        StrategyChoice choice;
        choice.match = matches[i];
        choice.positive = build_strategy(ctx, table.entries[picks[i].first].digits);
        choice.negative = build_strategy(ctx, table.entries[picks[i].second].digits);
        ss.choices.push_back(std::move(choice));
      }
      ConstraintSystem sys = build_system(ss, g1_, g2_, opts_.convention);
      ++stats_.solver_calls;
      SolveResult res = solve(sys);
      if (!res.feasible())
        throw std::logic_error("search: final system infeasible after feasible prefix");
      d.verdict = Verdict::QuasiIsometric;
      d.strategy_set = std::move(ss);
      d.system = std::move(sys);
      d.assignment = std::move(res.assignment);
      return d;
    }

    d.verdict = Verdict::NotQuasiIsometric;
    d.reason = "candidate space exhausted; no consistent set of strategies exists";
    return d;
  }

  const GroupAnalysis& g1_;
  const GroupAnalysis& g2_;
  SearchOptions opts_;
  SearchStats stats_;
  std::map<Match, MatchContext> contexts_;
  std::map<Match, StrategyTable> tables_;
  std::vector<LogValue> dist_;
  unsigned long long work_ = 0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

bool patterns_correspond(const GroupAnalysis& g1, const GroupAnalysis& g2) {
  auto covered = [](const GroupAnalysis& a, const GroupAnalysis& b) {
    for (const auto& p : a.patterns) {
      bool found = false;
      for (const auto& q : b.patterns)
        if (!linear_equivalences(p, q).empty()) {
          found = true;
          break;
        }
      if (!found) return false;
    }
    return true;
  };
  return covered(g1, g2) && covered(g2, g1);
}

Decision search(const GroupAnalysis& g1, const GroupAnalysis& g2, const SearchOptions& opts) {
  return Searcher(g1, g2, opts).run();
}

std::string convention_name(Convention c) {
  return c == Convention::Example ? "example" : "prose";
}

}  // namespace tubqi
