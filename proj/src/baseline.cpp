#include "tspn/baseline.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <map>
#include <set>

#include "tspn/structure.hpp"

namespace tspn {

namespace {

struct LineRun {
  double y;
  const Segment* left;
  const Segment* right;
};

void push_point(Tour& t, const TourPoint& p) {
  if (!t.points.empty() && t.points.back().position == p.position) return;
  t.points.push_back(p);
}

void close_up(Tour& t) {
  while (t.points.size() > 1 && t.points.back().position == t.points.front().position)
    t.points.pop_back();
}

// Lines top to bottom, each run end to end; directions picked by a two-state
// DP over which end the sweep leaves from.
Tour stitch_snake(const std::vector<LineRun>& runs) {
  const std::size_t m = runs.size();
  auto end_point = [&](std::size_t k, int side) {
    const Segment* s = side == 0 ? runs[k].left : runs[k].right;
    return Point{s->x, runs[k].y};
  };
  // cost[k][e]: best cost with line k finished at end e (0 left, 1 right);
  // the first line is entered at its opposite end.
  double best_total = std::numeric_limits<double>::infinity();
  std::vector<int> best_dirs;
  for (int first_exit = 0; first_exit < 2; ++first_exit) {
    std::vector<std::array<double, 2>> cost(m);
    std::vector<std::array<int, 2>> from(m);
    const double inf = std::numeric_limits<double>::infinity();
    cost[0] = {inf, inf};
    cost[0][static_cast<std::size_t>(first_exit)] = distance(end_point(0, 0), end_point(0, 1));
    for (std::size_t k = 1; k < m; ++k)
      for (int e = 0; e < 2; ++e) {
        cost[k][static_cast<std::size_t>(e)] = inf;
        const double span = distance(end_point(k, 0), end_point(k, 1));
        for (int pe = 0; pe < 2; ++pe) {
          const double v = cost[k - 1][static_cast<std::size_t>(pe)] +
                           distance(end_point(k - 1, pe), end_point(k, 1 - e)) + span;
          if (v < cost[k][static_cast<std::size_t>(e)]) {
            cost[k][static_cast<std::size_t>(e)] = v;
            from[k][static_cast<std::size_t>(e)] = pe;
          }
        }
      }
    for (int e = 0; e < 2; ++e) {
      const double total = cost[m - 1][static_cast<std::size_t>(e)] +
                           distance(end_point(m - 1, e), end_point(0, 1 - first_exit));
      if (total < best_total) {
        best_total = total;
        best_dirs.assign(m, 0);
        int cur = e;
        for (std::size_t k = m; k-- > 0;) {
          best_dirs[k] = cur;
          if (k > 0) cur = from[k][static_cast<std::size_t>(cur)];
        }
      }
    }
  }
  Tour t;
  for (std::size_t k = 0; k < m; ++k) {
    const int exit = best_dirs[k];
    const Segment* in = exit == 0 ? runs[k].right : runs[k].left;
    const Segment* out = exit == 0 ? runs[k].left : runs[k].right;
    push_point(t, {{in->x, runs[k].y}, SegmentId{in->id}});
    push_point(t, {{out->x, runs[k].y}, SegmentId{out->id}});
  }
  close_up(t);
  return t;
}

// Downward pass drifting right takes every line whose run reaches the current
// x; the remaining lines are taken on the way back up, drifting left.
Tour stitch_two_pass(const std::vector<LineRun>& runs) {
  Tour t;
  std::vector<std::size_t> deferred;
  double x = runs.front().left->x;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& r = runs[k];
    if (r.right->x < x) {
      deferred.push_back(k);
      continue;
    }
    if (r.left->x < x) push_point(t, {{x, r.y}, Dummy{}});
    push_point(t, {{r.left->x, r.y}, SegmentId{r.left->id}});
    push_point(t, {{r.right->x, r.y}, SegmentId{r.right->id}});
    x = r.right->x;
  }
  for (auto it = deferred.rbegin(); it != deferred.rend(); ++it) {
    const auto& r = runs[*it];
    push_point(t, {{r.right->x, r.y}, SegmentId{r.right->id}});
    push_point(t, {{r.left->x, r.y}, SegmentId{r.left->id}});
  }
  close_up(t);
  return t;
}

}  // namespace

Tour coverline_stitch(const Instance& inst) {
  if (inst.segments.empty()) throw InstanceError("coverline_stitch: empty instance");
  const auto cover = build_cover_lines(inst);
  std::map<int, std::vector<const Segment*>> per_line;
  for (const auto& s : inst.segments) per_line[cover.assignment.at(s.id)].push_back(&s);
  std::vector<LineRun> runs;
  for (auto& [k, segs] : per_line) {
    auto by_x = [](const Segment* a, const Segment* b) {
      return a->x != b->x ? a->x < b->x : a->id < b->id;
    };
    // the horizontal run stabs everything between its two ends
    runs.push_back({cover.line_y(k), *std::min_element(segs.begin(), segs.end(), by_x),
                    *std::max_element(segs.begin(), segs.end(), by_x)});
  }
  Tour snake = stitch_snake(runs);
  Tour two = stitch_two_pass(runs);
  return tour_cost(two) < tour_cost(snake) ? two : snake;
}

VisitOrder order_of(const Tour& tour) {
  VisitOrder o;
  std::set<int> seen;
  for (const auto& p : tour.points)
    if (auto s = p.segment(); s && seen.insert(*s).second) o.sequence.push_back(*s);
  return o;
}

namespace {

// First-improvement 2-opt on a cyclic point sequence.
void two_opt(std::vector<int>& perm, const std::vector<Point>& pts, int rounds) {
  const std::size_t n = perm.size();
  if (n < 4) return;
  auto d = [&](int a, int b) { return distance(pts[static_cast<std::size_t>(a)], pts[static_cast<std::size_t>(b)]); };
  for (int r = 0; r < rounds; ++r) {
    bool improved = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        const int a = perm[i], b = perm[i + 1], c = perm[j], e = perm[(j + 1) % n];
        const double delta = d(a, c) + d(b, e) - d(a, b) - d(c, e);
        if (delta < -1e-12) {
          std::reverse(perm.begin() + static_cast<std::ptrdiff_t>(i + 1),
                       perm.begin() + static_cast<std::ptrdiff_t>(j + 1));
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
}

}  // namespace

Tour nn_2opt(const Instance& inst, const BaselineConfig& config) {
  const std::size_t n = inst.size();
  if (n == 0) throw InstanceError("nn_2opt: empty instance");
  std::vector<Point> mid;
  for (const auto& s : inst.segments) mid.push_back({s.x, 0.5 * (s.y_bot + s.y_top)});
  std::vector<int> perm;
  std::vector<bool> used(n, false);
  int cur = static_cast<int>(config.seed % n);
  perm.push_back(cur);
  used[static_cast<std::size_t>(cur)] = true;
  for (std::size_t step = 1; step < n; ++step) {
    int best = -1;
    double bd = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double dj = distance(mid[static_cast<std::size_t>(cur)], mid[j]);
      if (best < 0 || dj < bd) {
        best = static_cast<int>(j);
        bd = dj;
      }
    }
    perm.push_back(best);
    used[static_cast<std::size_t>(best)] = true;
    cur = best;
  }
  two_opt(perm, mid, std::max(0, config.two_opt_rounds));
  VisitOrder order;
  for (int i : perm) order.sequence.push_back(inst.segments[static_cast<std::size_t>(i)].id);
  auto touch = optimize_touch_points(order, inst);
  return bound_tour(order, touch.points);
}

Tour run_baseline(const Instance& inst, const BaselineConfig& config) {
  return config.kind == BaselineKind::CoverlineStitch ? coverline_stitch(inst)
                                                      : nn_2opt(inst, config);
}

Tour local_search(const Instance& inst, const VisitOrder& start, int max_rounds) {
  VisitOrder best = start;
  auto eval = [&](const VisitOrder& o) { return optimize_touch_points(o, inst, 1e-10, 200).cost; };
  double best_cost = eval(best);
  const std::size_t n = best.sequence.size();
  for (int round = 0; round < max_rounds && n >= 4; ++round) {
    bool improved = false;
    // 2-opt
    for (std::size_t i = 0; i + 1 < n && !improved; ++i)
      for (std::size_t j = i + 2; j < n && !improved; ++j) {
        if (i == 0 && j == n - 1) continue;
        VisitOrder c = best;
        std::reverse(c.sequence.begin() + static_cast<std::ptrdiff_t>(i + 1),
                     c.sequence.begin() + static_cast<std::ptrdiff_t>(j + 1));
        const double v = eval(c);
        if (v < best_cost - 1e-9 * std::max(1.0, best_cost)) {
          best = std::move(c);
          best_cost = v;
          improved = true;
        }
      }
    // or-opt: move one segment elsewhere
    for (std::size_t i = 0; i < n && !improved; ++i)
      for (std::size_t j = 0; j < n && !improved; ++j) {
        if (i == j) continue;
        VisitOrder c = best;
        const int id = c.sequence[i];
        c.sequence.erase(c.sequence.begin() + static_cast<std::ptrdiff_t>(i));
        c.sequence.insert(c.sequence.begin() + static_cast<std::ptrdiff_t>(j), id);
        const double v = eval(c);
        if (v < best_cost - 1e-9 * std::max(1.0, best_cost)) {
          best = std::move(c);
          best_cost = v;
          improved = true;
        }
      }
    if (!improved) break;
  }
  auto touch = optimize_touch_points(best, inst);
  auto un = uncross(bound_tour(best, touch.points));
  return un.tour;
}

}  // namespace tspn
