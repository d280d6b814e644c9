#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tspn/geometry.hpp"
#include "tspn/instance.hpp"

namespace tspn {

class InnerDpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Square {
  double x0 = 0.0;
  double y0 = 0.0;
  double side = 1.0;

  double x1() const { return x0 + side; }
  double y1() const { return y0 + side; }
  bool contains(const Point& p, double tol = 0.0) const {
    return p.x >= x0 - tol && p.x <= x1() + tol && p.y >= y0 - tol && p.y <= y1() + tol;
  }
};

/// A point on the square boundary. id < 0 marks an unnamed terminal (used
/// when a closed tour is split at a tip).
struct Portal {
  int id = -1;
  Point pos;
};

/// Path endpoints (p, q); the path collection has one path per pair.
struct PortalPair {
  Portal p;
  Portal q;
};

struct LeafProblem {
  Square square;
  std::vector<Segment> segments;
  std::vector<PortalPair> pairs;
  /// Required portals: each must be visited by some path.
  std::vector<Portal> required;
};

struct InnerCaps {
  int shadow_cap = 16;
  int reflect_cap = 4;
  /// Hard limits on the enumeration and the per-event table size.
  std::size_t leg_budget = 400000;
  std::size_t state_budget = 200000;

  /// shadow_cap = 4 * ceil(1/eps^2), reflect_cap = 2 * ceil(1/eps).
  static InnerCaps from_epsilon(double epsilon);
};

enum class EventKind { Segment, Portal };

struct EventPoint {
  EventKind kind = EventKind::Segment;
  /// Segment id, or portal id (pair terminals without an id use -1).
  int id = 0;
  double x = 0.0;
};

/// Segments in the square plus portals that are required or pair endpoints,
/// sorted by x (ties: segments first, then by id). Throws InnerDpError when
/// two segments share an x-coordinate.
std::vector<EventPoint> event_points(const LeafProblem& problem);

enum class AnchorKind { Tip, Portal };

struct Anchor {
  AnchorKind kind = AnchorKind::Tip;
  Point pos;
  int segment = -1;  // tips
  int portal = -1;   // portals

  friend bool operator==(const Anchor&, const Anchor&) = default;
};

struct LargeLeg {
  Anchor start;
  Anchor end;
  std::vector<int> reflect_segments;
  /// start, reflection points..., end
  std::vector<Point> realized;
  double length = 0.0;
};

/// Mirror unfolding of end across the reflect segments; nullopt when a
/// reflection falls outside its segment's interior or the unfolded line does
/// not meet the mirrors in order.
std::optional<LargeLeg> realize_large_leg(const Anchor& start, const Anchor& end,
                                          const std::vector<Segment>& reflect_segments);

/// All realizable legs between anchors (tips, pair endpoints, required
/// portals), deduplicated by (endpoints, touched segments) keeping the
/// shortest. Throws InnerDpError when caps.leg_budget is exceeded.
std::vector<LargeLeg> enumerate_large_legs(const LeafProblem& problem, const InnerCaps& caps);

/// Sweep state: active legs and, per leg end (2 * position + end), the
/// opposite end of its partial path. Codes: -1 end already joined,
/// >= 0 leg-end code 2 * leg + end, <= -2 terminal -(t + 2). Terminal 2k is
/// pairs[k].p and 2k + 1 is pairs[k].q.
struct Configuration {
  int i = 0;
  std::vector<int> legs;
  std::vector<int> mates;
};

/// Degree caps (anchors at most 2), no closed sub-path, no path joining two
/// terminals of different pairs, and mate symmetry.
bool check_promising(const Configuration& config, const std::vector<LargeLeg>& legs,
                     const LeafProblem& problem);

struct InnerResult {
  bool feasible = false;
  double cost = 0.0;
  /// One path per pair, from p to q.
  std::vector<std::vector<TourPoint>> paths;
  std::size_t legs = 0;
  std::size_t states = 0;
};

/// Sweep DP over event groups. feasible = false when no collection exists
/// within the caps; throws InnerDpError when a budget is exceeded.
InnerResult inner_dp_solve(const LeafProblem& problem, const InnerCaps& caps);

/// Exhaustive oracle: every assignment of segments and required portals to
/// paths and every order within each path, touch points optimised. At most
/// 5 segments and 2 pairs.
double brute_force_square(const LeafProblem& problem);

}  // namespace tspn
