#include "tspn/structure.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace tspn {

std::string_view to_string(PointKind k) {
  switch (k) {
    case PointKind::Straight: return "straight";
    case PointKind::Break: return "break";
    case PointKind::ReflectionLeft: return "reflection-left";
    case PointKind::ReflectionRight: return "reflection-right";
  }
  return "?";
}

std::string_view to_string(StripPathKind k) {
  switch (k) {
    case StripPathKind::Loop: return "loop";
    case StripPathKind::Ladder: return "ladder";
    case StripPathKind::CoverLineLoop: return "cover-line-loop";
  }
  return "?";
}

namespace {

double instance_tolerance(const Instance& inst) {
  if (inst.segments.empty()) return kEpsGeom;
  const auto box = bounding_box(inst);
  return kEpsGeom * std::max(1.0, std::hypot(box.width(), box.height()));
}

}  // namespace

std::vector<std::optional<PointClass>> classify_points(const Tour& tour, const Instance& inst) {
  const std::size_t n = tour.size();
  std::vector<std::optional<PointClass>> out(n);
  if (n < 2) return out;
  const double tol = instance_tolerance(inst);
  for (std::size_t i = 0; i < n; ++i) {
    const auto seg_id = tour.points[i].segment();
    if (!seg_id) continue;
    if (!tour.closed && (i == 0 || i + 1 == n)) continue;
    const Segment& s = inst.by_id(*seg_id);
    const Point p = tour.points[i].position;
    const Point a = tour.points[(i + n - 1) % n].position;
    const Point b = tour.points[(i + 1) % n].position;
    if (std::abs(a.x - p.x) <= tol || std::abs(b.x - p.x) <= tol)
      throw InstanceError("vertical leg at tour point " + std::to_string(i) +
                          " (instance not perturbed?)");
    PointClass c;
    c.segment = *seg_id;
    c.at_tip = std::abs(p.y - s.y_bot) <= tol || std::abs(p.y - s.y_top) <= tol;
    const bool a_right = a.x > p.x;
    const bool b_right = b.x > p.x;
    if (a_right != b_right) {
      const double ux = p.x - a.x, uy = p.y - a.y;
      const double vx = b.x - p.x, vy = b.y - p.y;
      const double turn = std::atan2(ux * vy - uy * vx, ux * vx + uy * vy);
      c.kind = std::abs(turn) <= kEpsAngle ? PointKind::Straight : PointKind::Break;
    } else {
      c.kind = a_right ? PointKind::ReflectionRight : PointKind::ReflectionLeft;
      const double slope_in = (a.y - p.y) / std::abs(a.x - p.x);
      const double slope_out = (b.y - p.y) / std::abs(b.x - p.x);
      c.vertical_sense = slope_out >= slope_in ? VerticalSense::Ascending : VerticalSense::Descending;
      c.pure = std::abs(std::atan(slope_in) + std::atan(slope_out)) <= kEpsAngle;
    }
    out[i] = c;
  }
  return out;
}

CoverLineSet build_cover_lines(const Instance& inst, std::optional<double> spacing) {
  if (inst.segments.empty()) throw InstanceError("cover lines of an empty instance");
  CoverLineSet c;
  c.spacing = spacing.value_or(inst.stage == Stage::Scaled && inst.rho ? *inst.rho : 1.0);
  if (!(c.spacing > 0.0)) throw InstanceError("cover-line spacing must be positive");
  // The highest lower tip; for unit segments this is the bottom of the top-most one.
  c.y0 = inst.segments[0].y_bot;
  for (const auto& s : inst.segments) c.y0 = std::max(c.y0, s.y_bot);
  const double tol = instance_tolerance(inst);
  for (const auto& s : inst.segments) {
    int k = static_cast<int>(std::ceil((c.y0 - s.y_top) / c.spacing - 1e-9));
    k = std::max(k, 0);
    if (c.line_y(k) < s.y_bot - tol)
      throw InstanceError("segment " + std::to_string(s.id) +
                          " is shorter than the cover-line spacing and misses every line");
    c.assignment[s.id] = k;
    c.count = std::max(c.count, k + 1);
  }
  return c;
}

// ---- strips -----------------------------------------------------------------

std::vector<StripPath> restrict_to_strip(const Tour& tour, int strip_index,
                                         const CoverLineSet& cover_lines) {
  std::vector<StripPath> out;
  const std::size_t n = tour.size();
  if (n == 0) return out;
  const double hi = cover_lines.line_y(strip_index);
  const double lo = cover_lines.line_y(strip_index + 1);
  std::vector<Point> pos;
  for (const auto& p : tour.points) pos.push_back(p.position);
  const double tol = kEpsGeom * tolerance_scale(pos) * std::max(1.0, cover_lines.spacing);
  auto inside = [&](double y) { return y >= lo - tol && y <= hi + tol; };
  auto on_line = [&](double y, double line) { return std::abs(y - line) <= tol; };

  auto classify = [&](StripPath& path) {
    path.entry = path.points.front().position;
    path.exit = path.points.back().position;
    for (double line : {hi, lo}) {
      bool all = true;
      for (const auto& p : path.points) all = all && on_line(p.position.y, line);
      if (all) {
        path.kind = StripPathKind::CoverLineLoop;
        return;
      }
    }
    if (path.closed) {
      path.kind = StripPathKind::Loop;
      return;
    }
    const bool entry_top = on_line(path.entry.y, hi);
    const bool exit_top = on_line(path.exit.y, hi);
    path.kind = entry_top == exit_top ? StripPathKind::Loop : StripPathKind::Ladder;
  };

  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i)
    if (!inside(pos[i].y)) {
      start = i;
      break;
    }
  if (start == n) {
    StripPath path;
    path.closed = tour.closed;
    path.points = tour.points;
    for (std::size_t i = 0; i < n; ++i) path.source.push_back(static_cast<int>(i));
    classify(path);
    out.push_back(std::move(path));
    return out;
  }
  std::optional<StripPath> cur;
  auto push = [&](const TourPoint& tp, int src) {
    if (!cur->points.empty()) {
      const Point& last = cur->points.back().position;
      if (std::abs(last.x - tp.position.x) <= tol && std::abs(last.y - tp.position.y) <= tol)
        return;
    }
    cur->points.push_back(tp);
    cur->source.push_back(src);
  };
  auto finish = [&] {
    if (cur && cur->points.size() >= 2) {
      classify(*cur);
      out.push_back(std::move(*cur));
    }
    cur.reset();
  };

  const std::size_t legs = tour.closed ? n : n - 1;
  for (std::size_t k = 0; k < legs; ++k) {
    const std::size_t i = (start + k) % n;
    const std::size_t j = (i + 1) % n;
    if (!tour.closed && j == 0) break;
    const Point a = pos[i], b = pos[j];
    double t0 = 0.0, t1 = 1.0;
    if (std::abs(b.y - a.y) <= tol * 1e-3) {
      if (!inside(a.y)) t0 = 2.0;  // empty
    } else {
      double ta = (lo - a.y) / (b.y - a.y), tb = (hi - a.y) / (b.y - a.y);
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(0.0, ta);
      t1 = std::min(1.0, tb);
      if (inside(a.y)) t0 = 0.0;
      if (inside(b.y)) t1 = 1.0;
    }
    if (t0 > t1) {
      finish();
      continue;
    }
    auto at = [&](double t) { return Point{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; };
    if (!cur) {
      cur.emplace();
      if (t0 == 0.0) push(tour.points[i], static_cast<int>(i));
      else push(TourPoint{at(t0), Dummy{}}, -1);
    }
    if (t1 >= 1.0) {
      push(tour.points[j], static_cast<int>(j));
    } else {
      push(TourPoint{at(t1), Dummy{}}, -1);
      finish();
    }
  }
  finish();
  return out;
}

ZigZagSinkPartition partition_zigzag_sink(const StripPath& path,
                                          const std::vector<std::optional<PointClass>>& classes,
                                          const Instance& inst, const CoverLineSet& cover_lines,
                                          int strip_index) {
  ZigZagSinkPartition part;
  std::vector<VerticalSense> sense;
  const double hi = cover_lines.line_y(strip_index);
  for (std::size_t k = 0; k < path.points.size(); ++k) {
    const int src = path.source[k];
    if (src < 0 || static_cast<std::size_t>(src) >= classes.size()) continue;
    const auto& c = classes[static_cast<std::size_t>(src)];
    if (!c || !c->is_reflection()) continue;
    // the two ends of an open strip piece are not reflections of the piece
    if (!path.closed && (k == 0 || k + 1 == path.points.size())) continue;
    part.reflections.push_back(static_cast<int>(k));
    sense.push_back(c->vertical_sense.value_or(VerticalSense::Ascending));
    const auto it = cover_lines.assignment.find(c->segment);
    bool top = false;
    if (it != cover_lines.assignment.end() && it->second == strip_index) top = true;
    else if (it != cover_lines.assignment.end() && it->second == strip_index + 1) top = false;
    else top = inst.by_id(c->segment).y_top >= hi;
    part.on_top.push_back(top);
  }

  const int total = static_cast<int>(part.reflections.size());
  int run_start = 0;
  while (run_start < total) {
    int run_end = run_start;
    while (run_end + 1 < total && sense[static_cast<std::size_t>(run_end + 1)] ==
                                      sense[static_cast<std::size_t>(run_start)])
      ++run_end;
    auto side = [&](int r) { return part.on_top[static_cast<std::size_t>(r)]; };
    int i = run_start;
    while (i <= run_end) {
      ZigZagSinkPart p;
      int j = i;
      while (j + 1 <= run_end && side(j + 1) == side(j)) ++j;
      int z0 = i;
      if (j > i) {
        p.sink_before = IndexRange{i, j};
        z0 = j;
      }
      int z = z0;
      while (z + 1 <= run_end && side(z + 1) != side(z)) ++z;
      int last = z;
      if (z > z0) {
        p.zigzag = IndexRange{z0, z};
        int w = z;
        while (w + 1 <= run_end && side(w + 1) == side(w)) ++w;
        if (w > z) {
          p.sink_after = IndexRange{z, w};
          last = w;
        }
      } else if (!p.sink_before) {
        p.zigzag = IndexRange{i, i};  // lone reflection
      }
      part.parts.push_back(p);
      i = last + 1;
    }
    run_start = run_end + 1;
  }
  return part;
}

std::vector<ReflectionSequence> pure_reflection_sequences(
    const Tour& tour, const std::vector<std::optional<PointClass>>& classes) {
  std::vector<ReflectionSequence> out;
  const int n = static_cast<int>(tour.size());
  if (n == 0 || static_cast<int>(classes.size()) != n) return out;
  auto smooth = [&](int i) {
    const auto& c = classes[static_cast<std::size_t>(i)];
    if (!c) return false;
    if (c->kind == PointKind::Straight) return true;
    return c->is_reflection() && c->pure && !c->at_tip;
  };
  auto reflection = [&](int i) {
    const auto& c = classes[static_cast<std::size_t>(i)];
    return c && c->is_reflection();
  };
  int start = -1;
  for (int i = 0; i < n; ++i)
    if (!smooth(i)) {
      start = i;
      break;
    }
  auto emit = [&](const std::vector<int>& run) {
    std::vector<int> refl;
    for (int i : run)
      if (reflection(i)) refl.push_back(i);
    if (refl.empty()) return;
    out.push_back({refl.front(), refl.back(), static_cast<int>(refl.size())});
  };
  if (start < 0) {  // every point smooth: the whole cycle is one sequence
    std::vector<int> run(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) run[static_cast<std::size_t>(i)] = i;
    emit(run);
    return out;
  }
  std::vector<int> run;
  const int steps = tour.closed ? n : n - start;
  for (int k = 1; k <= steps; ++k) {
    const int i = (start + k) % n;
    if (k == steps || !smooth(i)) {
      if (k < steps || !tour.closed) {
        if (smooth(i)) run.push_back(i);
      }
      emit(run);
      run.clear();
    } else {
      run.push_back(i);
    }
  }
  return out;
}

// ---- optimal-structure checks -------------------------------------------------

bool StructureReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const StructureCheck* StructureReport::find(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string StructureReport::format() const {
  std::string out;
  for (const auto& c : checks) {
    out += "CHECK " + c.name + (c.passed ? " PASS" : " FAIL");
    if (!c.detail.empty()) out += " " + c.detail;
    out += "\n";
  }
  return out;
}

namespace {

StructureCheck check_alternation(const std::vector<std::optional<PointClass>>& classes,
                                 bool closed) {
  StructureCheck chk{"reflection_alternation", true, ""};
  std::vector<std::pair<int, PointKind>> refl;
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] && classes[i]->is_reflection())
      refl.emplace_back(static_cast<int>(i), classes[i]->kind);
  int bad = 0;
  std::string first;
  const std::size_t pairs = refl.size() < 2 ? 0 : (closed ? refl.size() : refl.size() - 1);
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto& a = refl[k];
    const auto& b = refl[(k + 1) % refl.size()];
    if (a.second == b.second) {
      if (bad++ == 0)
        first = "points " + std::to_string(a.first) + "," + std::to_string(b.first);
    }
  }
  chk.passed = bad == 0;
  chk.detail = "reflections=" + std::to_string(refl.size()) + " violations=" + std::to_string(bad);
  if (!first.empty()) chk.detail += " first=" + first;
  return chk;
}

StructureCheck check_exclusivity(const Tour& tour, const Instance& inst,
                                 const std::vector<std::optional<PointClass>>& classes) {
  StructureCheck chk{"reflection_exclusivity", true, ""};
  const std::size_t n = tour.size();
  const double tol = instance_tolerance(inst);
  int bad = 0;
  std::string first;
  for (std::size_t i = 0; i < n; ++i) {
    if (!classes[i] || !classes[i]->is_reflection()) continue;
    const Segment& s = inst.by_id(classes[i]->segment);
    const Point p = tour.points[i].position;
    bool clash = false;
    for (std::size_t j = 0; j < n && !clash; ++j) {
      if (j == i) continue;
      const Point q = tour.points[j].position;
      if (s.contains(q, tol)) clash = true;
    }
    // legs not incident to point i
    for (std::size_t l = 0; l < tour.leg_count() && !clash; ++l) {
      if (l == i || (l + 1) % n == i) continue;
      auto [a, b] = tour.leg(l);
      if (std::min(a.x, b.x) > s.x + tol || std::max(a.x, b.x) < s.x - tol) continue;
      if (std::abs(a.x - b.x) <= tol) continue;
      const double t = (s.x - a.x) / (b.x - a.x);
      const double y = a.y + t * (b.y - a.y);
      if (y >= s.y_bot - tol && y <= s.y_top + tol && std::hypot(s.x - p.x, y - p.y) > tol)
        clash = true;
    }
    if (clash && bad++ == 0) first = "segment " + std::to_string(s.id);
  }
  chk.passed = bad == 0;
  chk.detail = "violations=" + std::to_string(bad);
  if (!first.empty()) chk.detail += " first=" + first;
  return chk;
}

// Each chain strictly monotone; zig-zag chains share direction, sink chains oppose.
bool x_order_ok(const std::vector<double>& xs, bool zigzag) {
  if (xs.size() < 3) return true;
  auto direction = [&](std::size_t parity) -> std::optional<int> {
    std::optional<int> dir;
    for (std::size_t k = parity; k + 2 < xs.size(); k += 2) {
      const double d = xs[k + 2] - xs[k];
      const int sgn = d > 0 ? 1 : (d < 0 ? -1 : 0);
      if (sgn == 0) return 0;
      if (dir && *dir != sgn) return 0;
      dir = sgn;
    }
    return dir;
  };
  const auto d0 = direction(0);
  const auto d1 = direction(1);
  if ((d0 && *d0 == 0) || (d1 && *d1 == 0)) return false;
  if (d0 && d1) return zigzag ? *d0 == *d1 : *d0 != *d1;
  return true;
}

}  // namespace

StructureReport check_optimal_structure(const Tour& tour, const Instance& inst) {
  StructureReport rep;
  const auto classes = classify_points(tour, inst);
  rep.checks.push_back(check_alternation(classes, tour.closed));
  rep.checks.push_back(check_exclusivity(tour, inst, classes));

  const auto cover = build_cover_lines(inst);
  StructureCheck xorder{"zigzag_sink_x_order", true, ""};
  StructureCheck loops{"overlap_caps", true, ""};
  int sections = 0, xbad = 0, max_loops = 0, max_ladders = 0;
  for (int tau = -1; tau <= cover.count; ++tau) {
    const auto paths = restrict_to_strip(tour, tau, cover);
    std::vector<double> xs;
    for (const auto& p : paths)
      for (const auto& q : p.points) xs.push_back(q.position.x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
      const double mid = 0.5 * (xs[k] + xs[k + 1]);
      int nl = 0, nd = 0;
      for (const auto& p : paths) {
        double lo = p.points.front().position.x, hi = lo;
        for (const auto& q : p.points) {
          lo = std::min(lo, q.position.x);
          hi = std::max(hi, q.position.x);
        }
        if (mid < lo || mid > hi) continue;
        if (p.kind == StripPathKind::Ladder) ++nd;
        else ++nl;
      }
      max_loops = std::max(max_loops, nl);
      max_ladders = std::max(max_ladders, nd);
    }
    for (const auto& p : paths) {
      const auto part = partition_zigzag_sink(p, classes, inst, cover, tau);
      for (const auto& pp : part.parts) {
        auto audit = [&](const std::optional<IndexRange>& r, bool zigzag) {
          if (!r || r->size() < 3) return;
          ++sections;
          std::vector<double> rx;
          for (int k = r->first; k <= r->last; ++k)
            rx.push_back(p.points[static_cast<std::size_t>(part.reflections[static_cast<std::size_t>(k)])]
                             .position.x);
          if (!x_order_ok(rx, zigzag)) ++xbad;
        };
        audit(pp.sink_before, false);
        audit(pp.zigzag, true);
        audit(pp.sink_after, false);
      }
    }
  }
  xorder.passed = xbad == 0;
  xorder.detail = "sections=" + std::to_string(sections) + " violations=" + std::to_string(xbad);
  loops.passed = max_loops <= 12 && max_ladders <= 7;
  loops.detail = "max_loops=" + std::to_string(max_loops) +
                 " max_ladders=" + std::to_string(max_ladders);
  rep.checks.push_back(xorder);
  rep.checks.push_back(loops);

  const auto poly = as_polyline(tour);
  const int shadow = shadow_max(std::span<const Polyline>(&poly, 1));
  const auto box = bounding_box(inst);
  StructureCheck h3{"shadow_H3", true, ""};
  if (box.height() <= 3.0 + kEpsGeom) {
    h3.passed = shadow <= 2;
    h3.detail = "height=" + format_double(box.height()) + " shadow=" + std::to_string(shadow);
  } else {
    h3.detail = "not-applicable height=" + format_double(box.height());
  }
  rep.checks.push_back(h3);

  // Count changes only at points whose legs lie on one side.
  StructureCheck changes{"shadow_changes_at_reflections", true, ""};
  const auto prof = shadow_profile(std::span<const Polyline>(&poly, 1));
  std::set<double> turning;
  const std::size_t n = tour.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!tour.closed && (i == 0 || i + 1 == n)) {
      turning.insert(tour.points[i].position.x);
      continue;
    }
    const Point p = tour.points[i].position;
    const Point a = tour.points[(i + n - 1) % n].position;
    const Point b = tour.points[(i + 1) % n].position;
    if ((a.x > p.x) == (b.x > p.x)) turning.insert(p.x);
  }
  int bad_changes = 0;
  for (std::size_t k = 0; k < prof.breakpoints.size(); ++k)
    if (prof.counts[k] != prof.counts[k + 1] && !turning.count(prof.breakpoints[k])) ++bad_changes;
  changes.passed = bad_changes == 0;
  changes.detail = "max_shadow=" + std::to_string(shadow) +
                   " unexplained_changes=" + std::to_string(bad_changes);
  rep.checks.push_back(changes);
  return rep;
}

}  // namespace tspn
