#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "tspn/geometry.hpp"
#include "tspn/instance.hpp"

namespace tspn {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cyclic list of segment ids, each exactly once.
struct VisitOrder {
  std::vector<int> sequence;
  friend bool operator==(const VisitOrder&, const VisitOrder&) = default;
};

/// Rotates the smallest id to the front and picks the direction whose second
/// entry is smaller.
VisitOrder canonical(VisitOrder order);

struct TouchResult {
  std::vector<Point> points;
  double cost = 0.0;
  int iterations = 0;
  bool converged = true;
};

inline constexpr double kTouchTol = 1e-10;
inline constexpr int kTouchMaxIters = 10000;

/// Best touch point per segment for a fixed cyclic order.
TouchResult optimize_touch_points(const VisitOrder& order, const Instance& inst,
                                  double tol = kTouchTol, int max_iters = kTouchMaxIters);

/// Open-path variant: start -> segments in order -> end, with fixed ends.
TouchResult optimize_touch_path(const Point& start, const std::vector<int>& segment_ids,
                                const Point& end, const Instance& inst, double tol = kTouchTol,
                                int max_iters = kTouchMaxIters);

/// Generic chain node: a vertical range, a fixed point when lo == hi.
struct ChainNode {
  double x = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Optimal y per node for an open (fixed first/last node expected) or closed chain.
TouchResult optimize_touch_chain(const std::vector<ChainNode>& nodes, bool closed,
                                 double tol = kTouchTol, int max_iters = kTouchMaxIters);

/// Tour of bound points built from a touch result.
Tour bound_tour(const VisitOrder& order, const std::vector<Point>& points);

struct OracleResult {
  Tour tour;
  double cost = 0.0;
  VisitOrder order;
  int iterations = 0;
};

OracleResult exact_oracle(const Instance& inst, int max_n = 9, double tol = kTouchTol);

/// One horizontal line meets every segment.
bool single_cover_line(const Instance& inst);

struct DiscreteTour {
  double cost = 0.0;
  /// chosen candidate index per group, in visiting order: (group, candidate)
  std::vector<std::pair<int, int>> visits;
};

/// Exact cyclic TSP choosing one candidate point per group (subset DP).
DiscreteTour held_karp_candidates(const std::vector<std::vector<Point>>& groups);

/// k evenly spaced points per segment including both tips (k = 1: lower tip).
std::vector<Point> segment_samples(const Segment& s, int k);

double held_karp_discretized(const Instance& inst, int k);

}  // namespace tspn
