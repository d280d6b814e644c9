#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace tspn {

/// Incidence/collinearity tolerance, relative to the bounding-box diagonal.
inline constexpr double kEpsGeom = 1e-9;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(const Point& a, const Point& b);

struct SegmentId {
  int value = 0;
  friend bool operator==(const SegmentId&, const SegmentId&) = default;
};

struct PortalId {
  int value = 0;
  friend bool operator==(const PortalId&, const PortalId&) = default;
};

/// Strip-boundary or otherwise unbound point.
struct Dummy {
  friend bool operator==(const Dummy&, const Dummy&) = default;
};

using Binding = std::variant<Dummy, SegmentId, PortalId>;

struct TourPoint {
  Point position;
  Binding binding = Dummy{};

  std::optional<int> segment() const {
    if (auto* s = std::get_if<SegmentId>(&binding)) return s->value;
    return std::nullopt;
  }

  friend bool operator==(const TourPoint&, const TourPoint&) = default;
};

/// Ordered sequence of visited points; when closed the last point connects
/// back to the first.
struct Tour {
  std::vector<TourPoint> points;
  bool closed = true;

  std::size_t size() const { return points.size(); }
  /// Number of legs (closing leg included when closed).
  std::size_t leg_count() const;
  /// Endpoints of leg i (p_i -> p_{i+1}).
  std::pair<Point, Point> leg(std::size_t i) const;

  friend bool operator==(const Tour&, const Tour&) = default;
};

Tour make_tour(std::span<const Point> pts, bool closed = true);

/// Tour length; includes the closing leg when closed.
double tour_cost(const Tour& tour);

/// Scale for tolerance tests: diagonal of the tour's bounding box (>= 1).
double tolerance_scale(std::span<const Point> pts);

/// First pair (i, j), i < j, of non-adjacent legs that properly intersect or
/// overlap collinearly.
std::optional<std::pair<std::size_t, std::size_t>> is_self_crossing(const Tour& tour);

struct UncrossResult {
  Tour tour;
  std::size_t moves = 0;
  /// Set when a crossing remains that no rewiring strictly shortens, or the
  /// n^2 move guard tripped.
  bool degenerate = false;
};

/// Repeated 2-opt rewiring of crossing leg pairs. Never increases cost and
/// never changes the set of visited points.
UncrossResult uncross(const Tour& tour);

bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d,
                        double eps);

// ---- shadow ---------------------------------------------------------------

/// Open or closed polyline.
struct Polyline {
  std::vector<Point> points;
  bool closed = false;
};

Polyline as_polyline(const Tour& tour);

struct XInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Piecewise-constant leg-stabbing count. counts[k] is the count on the open
/// interval (breakpoints[k-1], breakpoints[k]); counts.front() and
/// counts.back() cover the unbounded ends.
struct ShadowProfile {
  std::vector<double> breakpoints;
  std::vector<int> counts;

  /// Count at x; at a breakpoint, the max of the two adjacent intervals.
  int at(double x) const;
};

ShadowProfile shadow_profile(std::span<const Polyline> paths,
                             std::optional<XInterval> window = std::nullopt);

int shadow_max(std::span<const Polyline> paths, XInterval interval);
/// Max over the whole x-axis.
int shadow_max(std::span<const Polyline> paths);

/// Naive stabbing count of non-vertical legs whose closed x-span contains x.
int stabbing_count(std::span<const Polyline> paths, double x);

}  // namespace tspn
