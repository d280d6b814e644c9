#include "tspn/axis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "tspn/instance.hpp"
#include "tspn/oracle.hpp"
#include "tspn/rng.hpp"

namespace tspn {
namespace {

Point swap_xy(const Point& p) { return {p.y, p.x}; }

struct Box {
  double x0, x1, y0, y1;
};

Box bbox(const std::vector<AxisSegment>& segs) {
  Box b{segs[0].a.x, segs[0].a.x, segs[0].a.y, segs[0].a.y};
  for (const auto& s : segs)
    for (const Point& p : {s.a, s.b}) {
      b.x0 = std::min(b.x0, p.x);
      b.x1 = std::max(b.x1, p.x);
      b.y0 = std::min(b.y0, p.y);
      b.y1 = std::max(b.y1, p.y);
    }
  return b;
}

// Shrinks [lo, hi] by 1 on both ends, collapsing to the midpoint when short.
std::pair<double, double> shrink(double lo, double hi) {
  if (hi - lo < 2.0) return {0.5 * (lo + hi), 0.5 * (lo + hi)};
  return {lo + 1.0, hi - 1.0};
}

struct Split {
  std::vector<AxisSegment> vertical, horizontal;
};

Split split(const AxisInstance& inst) {
  Split s;
  for (const auto& seg : inst.segments) (seg.vertical() ? s.vertical : s.horizontal).push_back(seg);
  return s;
}

// Vertical segments as a raw instance; horizontals go through swap_xy first.
Instance as_instance(const std::vector<AxisSegment>& segs, bool rotate) {
  Instance in;
  for (const auto& s : segs) {
    const Point a = rotate ? swap_xy(s.a) : s.a, b = rotate ? swap_xy(s.b) : s.b;
    in.segments.push_back({s.id, a.x, std::min(a.y, b.y), std::max(a.y, b.y)});
  }
  return in;
}

Tour unbind_extra(Tour t, int extra_id) {
  for (auto& tp : t.points)
    if (auto s = tp.segment(); s && *s >= extra_id) tp.binding = Dummy{};
  return t;
}

int next_id(const Instance& in) {
  int id = 0;
  for (const auto& s : in.segments) id = std::max(id, s.id + 1);
  return id;
}

// Rotates a closed tour so it starts at the point nearest p.
std::vector<TourPoint> starting_at(const Tour& t, const Point& p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.points.size(); ++i)
    if (distance(t.points[i].position, p) < distance(t.points[best].position, p)) best = i;
  std::vector<TourPoint> out(t.points.begin() + static_cast<std::ptrdiff_t>(best), t.points.end());
  out.insert(out.end(), t.points.begin(), t.points.begin() + static_cast<std::ptrdiff_t>(best));
  return out;
}

}  // namespace

void validate(const AxisInstance& inst) {
  std::set<int> ids;
  for (const auto& s : inst.segments) {
    for (double v : {s.a.x, s.a.y, s.b.x, s.b.y})
      if (!std::isfinite(v)) throw AxisError("segment " + std::to_string(s.id) + " has a non-finite coordinate");
    if (!ids.insert(s.id).second) throw AxisError("duplicate segment id " + std::to_string(s.id));
    const bool v = s.a.x == s.b.x, h = s.a.y == s.b.y;
    if (v == h) throw AxisError("segment " + std::to_string(s.id) + " is not axis-parallel");
    if (std::abs(s.length() - 1.0) > kEpsGeom)
      throw AxisError("segment " + std::to_string(s.id) + " does not have unit length");
  }
}

AxisInstance generate_axis(int n_vertical, int n_horizontal, double width, double height,
                           std::uint64_t seed) {
  if (n_vertical < 0 || n_horizontal < 0) throw AxisError("segment counts must be non-negative");
  if (width < 1.0 || height < 1.0) throw AxisError("box must be at least 1 x 1");
  Rng rng(seed);
  AxisInstance out;
  int id = 0;
  for (int i = 0; i < n_vertical; ++i) {
    const double x = rng.uniform(0, width), y = rng.uniform(0, height - 1);
    out.segments.push_back({id++, {x, y}, {x, y + 1}});
  }
  for (int i = 0; i < n_horizontal; ++i) {
    const double x = rng.uniform(0, width - 1), y = rng.uniform(0, height);
    out.segments.push_back({id++, {x, y}, {x + 1, y}});
  }
  return out;
}

std::string format_axis_instance(const AxisInstance& inst) {
  std::string out = "TSPN-AXIS 1\nn=" + std::to_string(inst.segments.size()) + "\n";
  for (const auto& s : inst.segments)
    out += std::to_string(s.id) + " " + format_double(s.a.x) + " " + format_double(s.a.y) + " " +
           format_double(s.b.x) + " " + format_double(s.b.y) + "\n";
  return out;
}

AxisInstance parse_axis_instance(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto next = [&]() {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next() || line.rfind("TSPN-AXIS 1", 0) != 0) throw ParseError("missing header 'TSPN-AXIS 1'", 1, 1);
  if (!next() || line.rfind("n=", 0) != 0) throw ParseError("expected 'n=<int>'", line_no, 1);
  long n = 0;
  try {
    n = std::stol(line.substr(2));
  } catch (const std::exception&) {
    throw ParseError("bad segment count", line_no, 3);
  }
  AxisInstance out;
  for (long i = 0; i < n; ++i) {
    if (!next()) throw ParseError("expected " + std::to_string(n) + " segment lines", line_no + 1, 1);
    std::istringstream ls(line);
    AxisSegment s;
    if (!(ls >> s.id >> s.a.x >> s.a.y >> s.b.x >> s.b.y))
      throw ParseError("expected '<id> <x1> <y1> <x2> <y2>'", line_no, 1);
    std::string extra;
    if (ls >> extra) throw ParseError("trailing token", line_no, 1);
    out.segments.push_back(s);
  }
  if (next()) throw ParseError("more segment lines than n", line_no, 1);
  validate(out);
  return out;
}

AxisInstance read_axis_instance(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_axis_instance(ss.str());
}

std::vector<int> missed_segments(const AxisInstance& inst, const Tour& tour) {
  std::vector<int> missed;
  if (inst.segments.empty()) return missed;
  const Box b = bbox(inst.segments);
  const double tol = kEpsGeom * std::max(1.0, std::hypot(b.x1 - b.x0, b.y1 - b.y0));
  for (const auto& s : inst.segments) {
    bool hit = false;
    if (tour.size() == 1) hit = segments_intersect(s.a, s.b, tour.points[0].position, tour.points[0].position, tol);
    for (std::size_t i = 0; i < tour.leg_count() && !hit; ++i) {
      const auto [u, v] = tour.leg(i);
      hit = segments_intersect(u, v, s.a, s.b, tol);
    }
    if (!hit) missed.push_back(s.id);
  }
  return missed;
}

bool is_feasible(const AxisInstance& inst, const Tour& tour) {
  return inst.segments.empty() || (!tour.points.empty() && missed_segments(inst, tour).empty());
}

int axis_candidate_count(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw AxisError("epsilon must lie in (0, 1]");
  return static_cast<int>(std::ceil(8.0 / epsilon - 1e-12));
}

std::vector<Point> axis_candidates(const AxisInstance& inst, double epsilon, bool* forced) {
  const int K = axis_candidate_count(epsilon);
  const Split sp = split(inst);
  if (forced) *forced = false;
  if (sp.vertical.empty() || sp.horizontal.empty()) return {};
  const Box v = bbox(sp.vertical), h = bbox(sp.horizontal);
  const auto [vy0, vy1] = shrink(v.y0, v.y1);
  const auto [hx0, hx1] = shrink(h.x0, h.x1);
  const Box B{std::min(v.x0, hx0), std::max(v.x1, hx1), std::min(vy0, h.y0), std::max(vy1, h.y1)};

  auto by_left = [](const AxisSegment& l, const AxisSegment& r) {
    return std::min(l.a.x, l.b.x) < std::min(r.a.x, r.b.x) ||
           (std::min(l.a.x, l.b.x) == std::min(r.a.x, r.b.x) && l.id < r.id);
  };
  if (hx0 < v.x0) {
    const auto s = *std::min_element(sp.horizontal.begin(), sp.horizontal.end(), by_left);
    if (forced) *forced = true;
    return {{B.x0, s.a.y}};
  }
  if (hx1 > v.x1) {
    auto by_right = [](const AxisSegment& l, const AxisSegment& r) {
      return std::max(l.a.x, l.b.x) > std::max(r.a.x, r.b.x) ||
             (std::max(l.a.x, l.b.x) == std::max(r.a.x, r.b.x) && l.id < r.id);
    };
    const auto s = *std::min_element(sp.horizontal.begin(), sp.horizontal.end(), by_right);
    if (forced) *forced = true;
    return {{B.x1, s.a.y}};
  }
  // Every horizontal segment meets B: split the longest portion inside B.
  const AxisSegment* best = nullptr;
  double best_lo = 0.0, best_len = -1.0;
  for (const auto& s : sp.horizontal) {
    const double lo = std::max(std::min(s.a.x, s.b.x), B.x0), hi = std::min(std::max(s.a.x, s.b.x), B.x1);
    if (hi - lo > best_len) best = &s, best_lo = lo, best_len = hi - lo;
  }
  if (best_len <= 0.0) {
    if (forced) *forced = true;
    return {{std::clamp(best_lo, std::min(best->a.x, best->b.x), std::max(best->a.x, best->b.x)), best->a.y}};
  }
  std::vector<Point> out;
  for (int i = 0; i < K; ++i) out.push_back({best_lo + best_len * i / K, best->a.y});
  return out;
}

AxisResult solve_axis_parallel(const AxisInstance& inst, const PtasConfig& config) {
  validate(inst);
  AxisResult res;
  if (inst.segments.empty()) return res;
  const Split sp = split(inst);
  const Instance V = as_instance(sp.vertical, false), H = as_instance(sp.horizontal, true);

  if (sp.horizontal.empty() || sp.vertical.empty()) {
    const bool rot = sp.vertical.empty();
    const auto rep = solve_ptas(rot ? H : V, config);
    res.tour = rep.tour;
    if (rot)
      for (auto& tp : res.tour.points) tp.position = swap_xy(tp.position);
    res.cost = tour_cost(res.tour);
    res.fallback = rep.fallback;
    return res;
  }

  bool forced = false;
  res.candidates = axis_candidates(inst, config.epsilon, &forced);
  res.forced = forced;
  PtasConfig sub = config;
  sub.epsilon = config.epsilon / (forced ? 2.0 : 4.0);
  const int v_extra = next_id(V), h_extra = next_id(H);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < res.candidates.size(); ++c) {
    const Point p = res.candidates[c];
    const auto r1 = solve_ptas_with_points(V, {p}, sub);
    const auto r2 = solve_ptas_with_points(H, {swap_xy(p)}, sub);
    Tour t2 = r2.tour;
    for (auto& tp : t2.points) tp.position = swap_xy(tp.position);
    const auto a = starting_at(unbind_extra(r1.tour, v_extra), p);
    const auto b = starting_at(unbind_extra(t2, h_extra), p);
    Tour joined;
    joined.points = a;
    const bool same = !a.empty() && !b.empty() && distance(a.front().position, b.front().position) < 1e-12;
    joined.points.insert(joined.points.end(), b.begin() + (same ? 1 : 0), b.end());
    const double cost = tour_cost(joined);
    if (cost < best) {
      best = cost;
      res.tour = std::move(joined);
      res.cost = cost;
      res.chosen = static_cast<int>(c);
      res.fallback = r1.fallback || r2.fallback;
    }
  }
  return res;
}

double axis_discretized_oracle(const AxisInstance& inst, int k) {
  if (k < 1) throw AxisError("k must be at least 1");
  std::vector<std::vector<Point>> groups;
  for (const auto& s : inst.segments) {
    std::vector<Point> g;
    for (int i = 0; i < k; ++i) {
      const double t = k == 1 ? 0.0 : static_cast<double>(i) / (k - 1);
      g.push_back({s.a.x + t * (s.b.x - s.a.x), s.a.y + t * (s.b.y - s.a.y)});
    }
    groups.push_back(std::move(g));
  }
  return held_karp_candidates(groups).cost;
}

}  // namespace tspn
