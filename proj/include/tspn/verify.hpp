#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tspn/inner_dp.hpp"
#include "tspn/instance.hpp"

namespace tspn {

/// Random leaf square (side 16 at (1, 1), portals every 2 units on the boundary)
/// with up to max_segments segments, 1..max_pairs portal pairs and up to
/// max_required required portals on the top/bottom sides.
LeafProblem random_leaf(std::uint64_t seed, int max_segments, int max_pairs, int max_required);

struct SuiteResult {
  std::string name;
  bool passed = false;
  int cases = 0;
  int failures = 0;
  double seconds = 0.0;
  std::string detail;

  /// "PASS|FAIL <name> cases=<n> failures=<k> <detail>"
  std::string format() const;
};

/// Shared state between suites; the structure suite reuses oracle tours
/// collected by the earlier ones.
struct SuiteContext {
  std::vector<std::pair<Instance, Tour>> oracle_tours;
};

/// Names accepted by run_suite, in acceptance order.
const std::vector<std::string>& suite_names();

/// seeds = 0 keeps the suite's default case count. Throws std::invalid_argument
/// for an unknown suite.
SuiteResult run_suite(std::string_view name, int seeds = 0, std::uint64_t base_seed = 0,
                      SuiteContext* ctx = nullptr);

}  // namespace tspn
