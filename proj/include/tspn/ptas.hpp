#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tspn/geometry.hpp"
#include "tspn/inner_dp.hpp"
#include "tspn/instance.hpp"
#include "tspn/structure.hpp"

namespace tspn {

class PtasError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- dissection ----------------------------------------------------------

/// Shifted quad-tree over a scaled instance. Leaves are base_side squares on
/// the grid x = a + i * base_side, y = b + j * base_side (a, b odd integers).
struct QuadTree {
  double a = 1.0;
  double b = 1.0;
  double base_side = 4.0;
  int depth = 0;
  int h = 1;
  /// Portal intervals per leaf side; portals sit on the lattice
  /// (a + i * base_side / m, b + j * base_side / m).
  int m = 2;
  double rho = 1.0;

  int leaves_per_side() const { return 1 << depth; }
  double root_side() const { return base_side * leaves_per_side(); }
  double portal_spacing() const { return base_side / m; }
  /// level 0 is the root, level depth the leaves.
  Square square(int level, int i, int j) const;
  Square leaf(int i, int j) const { return square(depth, i, j); }
  /// Leaf holding p; points on a grid line count as left of / below it.
  std::pair<int, int> leaf_of(const Point& p) const;

  long lattice_per_axis() const { return static_cast<long>(m) * leaves_per_side() + 1; }
  int portal_id(long i, long j) const { return static_cast<int>(i * lattice_per_axis() + j); }
  Point portal_position(int id) const;
  /// Grid vertices are corners of leaves and never used as crossing portals.
  bool is_corner(int id) const;
};

/// m = smallest power of two >= (4/eps) log2(N / (rho h)), at least 2.
int default_portal_count(double N, double rho, double epsilon);

/// r = 2 ceil(1/eps).
int default_r(double epsilon);

/// Deterministic for a fixed seed. Throws PtasError for a non-scaled input.
QuadTree build_quadtree(const Instance& scaled, double epsilon, std::uint64_t seed,
                        std::optional<int> m = std::nullopt);

struct CoverLine {
  /// 0 is the top-most line; indices grow downwards.
  int index = 0;
  double y = 0.0;
  int group = 0;
};

struct CoverGroups {
  double spacing = 1.0;
  /// Number of groups.
  int h = 1;
  /// Group holding the horizontal dissecting lines.
  int jstar = 0;
  std::vector<CoverLine> lines;
  /// segment id -> position in lines (top-most line meeting the segment)
  std::map<int, int> assignment;
};

/// Cover-lines aligned to the horizontal dissecting lines with spacing
/// base_side / h' <= rho (h' = ceil(base_side / rho) groups).
CoverGroups group_cover_lines(const QuadTree& qt, const Instance& scaled);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<int> segments;
};

/// Greedy left-to-right intervals of length rho over segments crossing a line.
std::vector<Interval> build_intervals(const std::vector<Segment>& assigned, double rho);

/// Intervals on every cover-line of a set (keyed by line index).
std::map<int, std::vector<Interval>> build_interval_sets(const Instance& scaled,
                                                         const CoverLineSet& lines, double rho);

/// Excursion from a required portal along its dissecting line.
struct Detour {
  int portal = 0;
  Point position;
  /// Leaf below the portal, which must visit it.
  int leaf_i = 0;
  int leaf_j = 0;
  double x_left = 0.0;
  double x_right = 0.0;
  /// Leftmost and rightmost interval served (equal when only one).
  Interval left;
  Interval right;
  std::vector<int> segments;

  double cost() const { return 2.0 * (position.x - x_left) + 2.0 * (x_right - position.x); }
};

struct DropResult {
  Instance reduced;
  std::vector<int> dropped;
  /// One entry per required portal.
  std::vector<Detour> ledger;
};

DropResult drop_and_require(const Instance& scaled, const QuadTree& qt, const CoverGroups& groups);

/// Inserts the ledger excursions after the tour point bound to each required
/// portal. Throws PtasError when a required portal is not on the tour or a
/// dropped segment is not covered by any excursion.
Tour lift_solution(const Tour& tour, const DropResult& drop, const Instance& scaled);

// ---- patching ------------------------------------------------------------

/// Axis-parallel piece of a dissecting line.
struct DissectingSegment {
  Point a;
  Point b;
};

/// Number of times the tour passes from one side of the segment's line to the
/// other through the segment.
int crossing_count(const Tour& tour, const DissectingSegment& seg);

/// Reduces the crossings through seg to at most 2, adding at most 4 times the
/// span of the crossing points. Visited points are kept.
Tour patch(const Tour& tour, const DissectingSegment& seg);

// ---- outer DP ------------------------------------------------------------

struct OuterDpConfig {
  int r = 4;
  InnerCaps caps;
  /// Entries kept per square.
  int beam = 48;
  /// Candidate tours deriving leaf interfaces.
  int pool = 6;
  std::uint64_t seed = 0;
};

struct OuterDpResult {
  Tour tour;
  double cost = 0.0;
  int leaves_inner = 0;
  /// Leaf interfaces kept with the candidate tour's own paths because the
  /// inner DP hit a budget.
  int leaves_fallback = 0;
  int patches = 0;
  int max_side_crossings = 0;
};

/// Portal-respecting closed tour of the reduced instance visiting every
/// required portal. Throws PtasError when no child combination closes.
OuterDpResult outer_dp(const Instance& reduced, const QuadTree& qt, const DropResult& drop,
                       const OuterDpConfig& config);

/// Largest number of crossings through a single leaf side.
int max_side_crossings(const Tour& tour, const QuadTree& qt);

// ---- end to end ----------------------------------------------------------

struct PtasConfig {
  double epsilon = 0.5;
  std::uint64_t seed = 0;
  int shifts = 5;
  std::optional<int> r;
  std::optional<int> m;
  std::optional<int> shadow_cap;
  std::optional<int> reflect_cap;
  int beam = 48;
  int pool = 6;
  /// Shift seeds run concurrently on up to this many threads.
  int threads = 1;
};

struct StageDelta {
  std::string name;
  double delta = 0.0;
};

struct SolveReport {
  Tour tour;
  double cost = 0.0;
  std::vector<StageDelta> stages;
  bool feasible = false;
  bool fallback = false;

  /// COST, STAGE lines, FEASIBLE, FALLBACK, then the tour block.
  std::string format() const;
};

SolveReport solve_ptas(const Instance& raw, const PtasConfig& config = {});

/// Same pipeline with extra points that must be visited exactly (they skip
/// snapping and become zero-length segments).
SolveReport solve_ptas_with_points(const Instance& raw, const std::vector<Point>& points,
                                   const PtasConfig& config = {});

}  // namespace tspn
