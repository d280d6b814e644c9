#include "tspn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tspn {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::size_t Tour::leg_count() const {
  if (points.size() < 2) return 0;
  return closed ? points.size() : points.size() - 1;
}

std::pair<Point, Point> Tour::leg(std::size_t i) const {
  return {points[i].position, points[(i + 1) % points.size()].position};
}

Tour make_tour(std::span<const Point> pts, bool closed) {
  Tour t;
  t.closed = closed;
  t.points.reserve(pts.size());
  for (const auto& p : pts) t.points.push_back(TourPoint{p, Dummy{}});
  return t;
}

double tour_cost(const Tour& tour) {
  double total = 0.0;
  for (std::size_t i = 0; i < tour.leg_count(); ++i) {
    auto [a, b] = tour.leg(i);
    total += distance(a, b);
  }
  return total;
}

double tolerance_scale(std::span<const Point> pts) {
  if (pts.empty()) return 1.0;
  double x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
  for (const auto& p : pts) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return std::max(1.0, std::hypot(x1 - x0, y1 - y0));
}

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int orientation(const Point& o, const Point& a, const Point& b, double eps) {
  const double c = cross(o, a, b);
  const double thr = eps * std::max(1.0, distance(o, a)) * std::max(1.0, distance(o, b));
  if (c > thr) return 1;
  if (c < -thr) return -1;
  return 0;
}

// Length of the overlap of two collinear segments, measured along ab.
double collinear_overlap(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return 0.0;
  auto proj = [&](const Point& p) { return ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2; };
  double t0 = proj(c), t1 = proj(d);
  if (t0 > t1) std::swap(t0, t1);
  const double lo = std::max(0.0, t0), hi = std::min(1.0, t1);
  return std::max(0.0, hi - lo) * std::sqrt(len2);
}

std::vector<Point> positions(const Tour& tour) {
  std::vector<Point> out;
  out.reserve(tour.size());
  for (const auto& p : tour.points) out.push_back(p.position);
  return out;
}

bool legs_conflict(const Point& a, const Point& b, const Point& c, const Point& d, double eps,
                   double scale) {
  const int o1 = orientation(a, b, c, eps);
  const int o2 = orientation(a, b, d, eps);
  const int o3 = orientation(c, d, a, eps);
  const int o4 = orientation(c, d, b, eps);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && o2 == 0 && o3 == 0 && o4 == 0) {
    return collinear_overlap(a, b, c, d) > eps * scale;
  }
  return false;
}

}  // namespace

bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d,
                        double eps) {
  const int o1 = orientation(a, b, c, eps);
  const int o2 = orientation(a, b, d, eps);
  const int o3 = orientation(c, d, a, eps);
  const int o4 = orientation(c, d, b, eps);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  auto on_seg = [&](const Point& p, const Point& q, const Point& r) {
    return std::min(p.x, q.x) - eps <= r.x && r.x <= std::max(p.x, q.x) + eps &&
           std::min(p.y, q.y) - eps <= r.y && r.y <= std::max(p.y, q.y) + eps;
  };
  if (o1 == 0 && on_seg(a, b, c)) return true;
  if (o2 == 0 && on_seg(a, b, d)) return true;
  if (o3 == 0 && on_seg(c, d, a)) return true;
  if (o4 == 0 && on_seg(c, d, b)) return true;
  return false;
}

std::optional<std::pair<std::size_t, std::size_t>> is_self_crossing(const Tour& tour) {
  const std::size_t legs = tour.leg_count();
  if (legs < 3) return std::nullopt;
  const auto pts = positions(tour);
  const double scale = tolerance_scale(pts);
  const std::size_t n = tour.size();
  for (std::size_t i = 0; i < legs; ++i) {
    for (std::size_t j = i + 2; j < legs; ++j) {
      if (tour.closed && i == 0 && j == n - 1) continue;  // adjacent through the closing point
      auto [a, b] = tour.leg(i);
      auto [c, d] = tour.leg(j);
      if (legs_conflict(a, b, c, d, kEpsGeom, scale)) return std::make_pair(i, j);
    }
  }
  return std::nullopt;
}

UncrossResult uncross(const Tour& tour) {
  UncrossResult res{tour, 0, false};
  Tour& t = res.tour;
  const std::size_t n = t.size();
  if (t.leg_count() < 3) return res;
  const double scale = tolerance_scale(positions(t));
  const std::size_t guard = std::max<std::size_t>(16, n * n);
  const std::size_t legs = t.leg_count();

  while (true) {
    bool any_crossing = false;
    bool moved = false;
    for (std::size_t i = 0; i < legs && !moved; ++i) {
      for (std::size_t j = i + 2; j < legs && !moved; ++j) {
        if (t.closed && i == 0 && j == n - 1) continue;
        auto [a, b] = t.leg(i);
        auto [c, d] = t.leg(j);
        if (!legs_conflict(a, b, c, d, kEpsGeom, scale)) continue;
        any_crossing = true;
        const double delta = distance(a, c) + distance(b, d) - distance(a, b) - distance(c, d);
        if (delta < -1e-12 * scale) {
          std::reverse(t.points.begin() + static_cast<std::ptrdiff_t>(i + 1),
                       t.points.begin() + static_cast<std::ptrdiff_t>(j + 1));
          moved = true;
        }
      }
    }
    if (!moved) {
      res.degenerate = any_crossing;
      break;
    }
    if (++res.moves >= guard) {
      res.degenerate = true;
      break;
    }
  }
  return res;
}

// ---- shadow ---------------------------------------------------------------

Polyline as_polyline(const Tour& tour) {
  Polyline p;
  p.closed = tour.closed;
  p.points = positions(tour);
  return p;
}

namespace {

template <typename F>
void for_each_leg(std::span<const Polyline> paths, F&& f) {
  for (const auto& path : paths) {
    const std::size_t n = path.points.size();
    if (n < 2) continue;
    const std::size_t legs = path.closed ? n : n - 1;
    for (std::size_t i = 0; i < legs; ++i) f(path.points[i], path.points[(i + 1) % n]);
  }
}

}  // namespace

int ShadowProfile::at(double x) const {
  auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), x);
  const auto k = static_cast<std::size_t>(it - breakpoints.begin());
  if (it != breakpoints.end() && *it == x) return std::max(counts[k], counts[k + 1]);
  return counts[k];
}

ShadowProfile shadow_profile(std::span<const Polyline> paths, std::optional<XInterval> window) {
  ShadowProfile prof;
  for_each_leg(paths, [&](const Point& a, const Point& b) {
    prof.breakpoints.push_back(a.x);
    prof.breakpoints.push_back(b.x);
  });
  std::sort(prof.breakpoints.begin(), prof.breakpoints.end());
  prof.breakpoints.erase(std::unique(prof.breakpoints.begin(), prof.breakpoints.end()),
                         prof.breakpoints.end());
  std::vector<int> diff(prof.breakpoints.size() + 2, 0);
  auto index_of = [&](double x) {
    return static_cast<std::size_t>(
        std::lower_bound(prof.breakpoints.begin(), prof.breakpoints.end(), x) -
        prof.breakpoints.begin());
  };
  for_each_leg(paths, [&](const Point& a, const Point& b) {
    const std::size_t i0 = index_of(std::min(a.x, b.x));
    const std::size_t i1 = index_of(std::max(a.x, b.x));
    if (i0 == i1) return;  // vertical leg: no open interval
    diff[i0 + 1] += 1;
    diff[i1 + 1] -= 1;
  });
  prof.counts.assign(prof.breakpoints.size() + 1, 0);
  int run = 0;
  for (std::size_t k = 0; k < prof.counts.size(); ++k) {
    run += diff[k];
    prof.counts[k] = run;
  }
  if (!window) return prof;

  ShadowProfile clipped;
  clipped.breakpoints.push_back(window->lo);
  clipped.counts.push_back(0);
  for (double b : prof.breakpoints)
    if (b > window->lo && b < window->hi) clipped.breakpoints.push_back(b);
  if (window->hi > window->lo) clipped.breakpoints.push_back(window->hi);
  for (std::size_t k = 1; k < clipped.breakpoints.size(); ++k) {
    const double mid = 0.5 * (clipped.breakpoints[k - 1] + clipped.breakpoints[k]);
    clipped.counts.push_back(prof.at(mid));
  }
  clipped.counts.push_back(0);
  return clipped;
}

int shadow_max(std::span<const Polyline> paths, XInterval interval) {
  const auto prof = shadow_profile(paths);
  const auto& bp = prof.breakpoints;
  int best = 0;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < prof.counts.size(); ++k) {
    const double l = k == 0 ? -inf : bp[k - 1];
    const double r = k == bp.size() ? inf : bp[k];
    if (l <= interval.hi && r >= interval.lo) best = std::max(best, prof.counts[k]);
  }
  return best;
}

int shadow_max(std::span<const Polyline> paths) {
  const auto prof = shadow_profile(paths);
  int best = 0;
  for (int c : prof.counts) best = std::max(best, c);
  return best;
}

int stabbing_count(std::span<const Polyline> paths, double x) {
  int count = 0;
  for_each_leg(paths, [&](const Point& a, const Point& b) {
    if (a.x == b.x) return;
    if (std::min(a.x, b.x) <= x && x <= std::max(a.x, b.x)) ++count;
  });
  return count;
}

}  // namespace tspn
