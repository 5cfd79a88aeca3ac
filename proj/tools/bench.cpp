// Benchmark: serial reference vs OpenMP extension-table scan, plus a full
// decide comparison.  The two paths must produce identical tables.
#include "tubqi/engine.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

const char* kOneTorus24 =
    "vertex v\n"
    "edge x : v (1,0) -> v (2,2)\n"
    "edge y : v (0,1) -> v (4,4)\n";

const char* kTwoTorus =
    "vertex u\n"
    "vertex t\n"
    "edge b : u (1,1) -> t (4,4)\n"
    "edge a1 : t (1,0) -> u (4,0)\n"
    "edge a2 : u (0,1) -> u (2,0)\n"
    "edge a3 : t (1,0) -> t (0,2)\n";

double now() {
  using clk = std::chrono::steady_clock;
  return std::chrono::duration<double>(clk::now().time_since_epoch()).count();
}

tubqi::GroupAnalysis analyzed(const char* text) {
  auto pr = tubqi::parse_graph(text);
  return tubqi::analyze(*pr.graph);
}

bool same_table(const tubqi::StrategyTable& a, const tubqi::StrategyTable& b) {
  if (a.entries.size() != b.entries.size() || a.valid_scanned != b.valid_scanned) return false;
  for (size_t i = 0; i < a.entries.size(); ++i) {
    if (a.entries[i].first_index != b.entries[i].first_index) return false;
    if (!(a.entries[i].summary == b.entries[i].summary)) return false;
    if (a.entries[i].digits != b.entries[i].digits) return false;
  }
  return true;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("openmp not enabled; both paths run serially\n");
#endif

  struct Case {
    const char* name;
    tubqi::GroupAnalysis g1, g2;
    tubqi::Match match;
  };
  tubqi::GroupAnalysis one = analyzed(kOneTorus24);
  tubqi::GroupAnalysis two = analyzed(kTwoTorus);

  std::vector<Case> cases;
  cases.push_back({"one-torus self match (3x3 cells)", one, one, tubqi::Match{0, 0}});
  {
    // the larger class of the two-torus group on the right
    int big = static_cast<int>(two.classes[0].nodes.size()) >=
                      static_cast<int>(two.classes[1].nodes.size())
                  ? 0
                  : 1;
    cases.push_back({"one-torus vs two-torus (3x4 cells)", one, two, tubqi::Match{0, big}});
  }

  for (auto& c : cases) {
    tubqi::MatchContext ctx = tubqi::make_match_context(c.g1, c.g2, c.match);
    std::printf("%s: %llu raw extensions\n", c.name,
                static_cast<unsigned long long>(ctx.raw_count));
    double t0 = now();
    auto serial = tubqi::build_strategy_table(ctx, ~0ULL / 8, false);
    double t1 = now();
    auto parallel = tubqi::build_strategy_table(ctx, ~0ULL / 8, true);
    double t2 = now();
    std::printf("  serial   %8.3fs  (%llu valid, %zu summaries)\n", t1 - t0,
                static_cast<unsigned long long>(serial.valid_scanned), serial.entries.size());
    std::printf("  parallel %8.3fs  (speedup %.2fx)\n", t2 - t1,
                (t2 - t1) > 0 ? (t1 - t0) / (t2 - t1) : 0.0);
    if (!same_table(serial, parallel)) {
      std::printf("  MISMATCH between serial and parallel tables\n");
      return 1;
    }
    std::printf("  tables identical\n");
  }

  for (bool parallel : {false, true}) {
    tubqi::DecideOptions opts;
    opts.parallel = parallel;
    double t0 = now();
    auto out = tubqi::decide_texts("a.tub", kOneTorus24, "b.tub", kTwoTorus, opts);
    double t1 = now();
    std::printf("decide one-torus vs two-torus (%s): exit %d in %.3fs\n",
                parallel ? "parallel" : "serial", out.exit_code, t1 - t0);
  }
  return 0;
}
