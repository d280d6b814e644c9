#include <algorithm>
#include <cmath>
#include <numeric>

#include "tspn/ptas.hpp"

namespace tspn {
namespace {

// Work in a frame where the dissecting segment is horizontal.
struct Frame {
  bool vertical = false;
  double y0 = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  explicit Frame(const DissectingSegment& s) {
    vertical = s.a.x == s.b.x && s.a.y != s.b.y;
    if (!vertical && s.a.y != s.b.y) throw PtasError("dissecting segment must be axis-parallel");
    const Point a = to(s.a), b = to(s.b);
    y0 = a.y;
    lo = std::min(a.x, b.x);
    hi = std::max(a.x, b.x);
  }
  Point to(const Point& p) const { return vertical ? Point{p.y, p.x} : p; }
  Point from(const Point& p) const { return to(p); }
  // Points on the line count as below (left of a vertical line).
  int side(const Point& p) const { return p.y > y0 ? 1 : -1; }
};

struct Crossing {
  std::size_t leg = 0;
  double x = 0.0;
};

std::vector<Crossing> crossings(const Tour& tour, const Frame& f) {
  std::vector<Crossing> out;
  const std::size_t legs = tour.leg_count();
  for (std::size_t i = 0; i < legs; ++i) {
    const auto [pa, pb] = tour.leg(i);
    const Point u = f.to(pa), v = f.to(pb);
    if (f.side(u) == f.side(v)) continue;
    const double t = (f.y0 - u.y) / (v.y - u.y);
    const double x = u.x + t * (v.x - u.x);
    if (x >= f.lo && x <= f.hi) out.push_back({i, x});
  }
  return out;
}

}  // namespace

int crossing_count(const Tour& tour, const DissectingSegment& seg) {
  return static_cast<int>(crossings(tour, Frame(seg)).size());
}

Tour patch(const Tour& tour, const DissectingSegment& seg) {
  const Frame f(seg);
  const auto cr = crossings(tour, f);
  const std::size_t k = cr.size();
  if (k <= 2) return tour;
  if (!tour.closed) throw PtasError("patch expects a closed tour");

  double span_lo = cr[0].x, span_hi = cr[0].x;
  for (const auto& c : cr) {
    span_lo = std::min(span_lo, c.x);
    span_hi = std::max(span_hi, c.x);
  }
  const double offset = 1e-7 * std::max(span_hi - span_lo, 1e-3);

  // Vertices: 2 * i + (side > 0) for crossing i.
  auto vpos = [&](std::size_t i, int side) { return Point{cr[i].x, f.y0 + side * offset}; };
  auto vid = [](std::size_t i, int side) { return 2 * i + (side > 0 ? 1 : 0); };

  struct Edge {
    std::size_t u = 0, v = 0;
    std::vector<TourPoint> pts;  // from u to v, endpoints included
  };
  std::vector<Edge> edges;
  const auto& P = tour.points;
  const std::size_t n = P.size();
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t d = (c + 1) % k;
    // Arc from the far end of crossing leg c to the near end of crossing leg d.
    const std::size_t first = (cr[c].leg + 1) % n;
    const std::size_t last = cr[d].leg;
    const int s0 = f.side(f.to(P[first].position));
    const int s1 = f.side(f.to(P[last].position));
    Edge e{vid(c, s0), vid(d, s1), {}};
    e.pts.push_back({f.from(vpos(c, s0)), Dummy{}});
    for (std::size_t i = first;; i = (i + 1) % n) {
      e.pts.push_back(P[i]);
      if (i == last) break;
    }
    e.pts.push_back({f.from(vpos(d, s1)), Dummy{}});
    edges.push_back(std::move(e));
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto l, auto r) { return cr[l].x < cr[r].x; });
  auto connector = [&](std::size_t i, std::size_t j, int side) {
    edges.push_back({vid(i, side), vid(j, side),
                     {{f.from(vpos(i, side)), Dummy{}}, {f.from(vpos(j, side)), Dummy{}}}});
  };
  for (int side : {-1, 1}) {
    for (std::size_t g = 0; g + 1 < k; ++g) {
      connector(order[g], order[g + 1], side);
      if (g % 2 == 1) connector(order[g], order[g + 1], side);
    }
  }
  for (int copy = 0; copy < 2; ++copy)
    edges.push_back({vid(order[0], -1), vid(order[0], 1),
                     {{f.from(vpos(order[0], -1)), Dummy{}}, {f.from(vpos(order[0], 1)), Dummy{}}}});

  // Hierholzer over the multigraph.
  std::vector<std::vector<std::size_t>> adj(2 * k);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    adj[edges[e].u].push_back(e);
    adj[edges[e].v].push_back(e);
  }
  std::vector<bool> used(edges.size(), false);
  std::vector<std::size_t> next(2 * k, 0);
  struct Step {
    std::size_t vertex;
    std::size_t edge;  // edge used to arrive, npos for the start
    bool reversed;
  };
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<Step> stack{{edges[0].u, npos, false}}, circuit;
  while (!stack.empty()) {
    const std::size_t v = stack.back().vertex;
    auto& it = next[v];
    while (it < adj[v].size() && used[adj[v][it]]) ++it;
    if (it == adj[v].size()) {
      circuit.push_back(stack.back());
      stack.pop_back();
      continue;
    }
    const std::size_t e = adj[v][it];
    used[e] = true;
    const bool rev = edges[e].u != v;
    stack.push_back({rev ? edges[e].u : edges[e].v, e, rev});
  }
  std::reverse(circuit.begin(), circuit.end());

  Tour out;
  out.closed = true;
  for (const auto& step : circuit) {
    if (step.edge == npos) continue;
    auto pts = edges[step.edge].pts;
    if (step.reversed) std::reverse(pts.begin(), pts.end());
    // Drop the arrival vertex duplicate of the previous edge's end.
    for (std::size_t i = out.points.empty() ? 0 : 1; i < pts.size(); ++i) out.points.push_back(pts[i]);
  }
  if (out.points.size() > 1 && out.points.front().position == out.points.back().position)
    out.points.pop_back();
  return out;
}

}  // namespace tspn
