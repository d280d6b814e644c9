#include <cstdio>
#include <string>
#include <vector>

#include "tspn/verify.hpp"

using namespace tspn;

namespace {

struct Criterion {
  int number;
  std::string title;
  std::vector<std::string> suites;
  double budget_seconds;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "oracle consistency", {"oracle-vs-hk"}, 120},
      {2, "shadow of optima on height <= 3", {"shadow-h3"}, 0},
      {3, "single-line closed form", {"single-line"}, 0},
      {4, "far-apart tip reduction", {"far-apart"}, 0},
      {5, "interval bound", {"interval-bound"}, 0},
      {6, "inner DP vs brute force", {"inner-dp"}, 0},
      {7, "end-to-end PTAS ratio", {"ptas-ratio"}, 600},
      {8, "patching contract", {"patch"}, 0},
      {9, "structural invariants on optima", {"structure"}, 0},
      {10, "axis-parallel ratio", {"axis"}, 0},
      {11, "determinism and numerics", {"determinism", "uncross-monotone", "shadow-dense"}, 0},
  };
  SuiteContext ctx;
  int failed = 0;
  for (const auto& c : criteria) {
    bool ok = true;
    double seconds = 0.0;
    std::string detail;
    for (const auto& name : c.suites) {
      SuiteResult r;
      try {
        r = run_suite(name, 0, 0, &ctx);
      } catch (const std::exception& e) {
        r.name = name;
        r.detail = std::string("exception: ") + e.what();
      }
      ok = ok && r.passed;
      seconds += r.seconds;
      detail += (detail.empty() ? "" : "; ") + r.format();
    }
    if (c.budget_seconds > 0 && seconds > c.budget_seconds) {
      ok = false;
      detail += "; over time budget";
    }
    failed += !ok;
    std::printf("%s criterion %d (%s) [%.1fs]: %s\n", ok ? "PASS" : "FAIL", c.number, c.title.c_str(), seconds,
                detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
