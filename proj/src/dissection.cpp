#include <algorithm>
#include <cmath>
#include <map>

#include "tspn/ptas.hpp"
#include "tspn/rng.hpp"

namespace tspn {

Square QuadTree::square(int level, int i, int j) const {
  const double side = base_side * static_cast<double>(1 << (depth - level));
  return {a + i * side, b + j * side, side};
}

std::pair<int, int> QuadTree::leaf_of(const Point& p) const {
  const int L = leaves_per_side();
  auto idx = [&](double v, double origin) {
    const int k = static_cast<int>(std::ceil((v - origin) / base_side)) - 1;
    return std::clamp(k, 0, L - 1);
  };
  return {idx(p.x, a), idx(p.y, b)};
}

Point QuadTree::portal_position(int id) const {
  const long K = lattice_per_axis();
  const long i = id / K, j = id % K;
  return {a + i * portal_spacing(), b + j * portal_spacing()};
}

bool QuadTree::is_corner(int id) const {
  const long K = lattice_per_axis();
  return (id / K) % m == 0 && (id % K) % m == 0;
}

int default_portal_count(double N, double rho, double epsilon) {
  const int h = static_cast<int>(std::ceil(1.0 / epsilon - 1e-12));
  const double target = (4.0 / epsilon) * std::log2(std::max(1.0, N / (rho * h)));
  int m = 2;
  while (m < target) m *= 2;
  return m;
}

int default_r(double epsilon) { return 2 * static_cast<int>(std::ceil(1.0 / epsilon - 1e-12)); }

QuadTree build_quadtree(const Instance& scaled, double epsilon, std::uint64_t seed,
                        std::optional<int> m) {
  if (scaled.stage != Stage::Scaled || !scaled.rho || !scaled.N)
    throw PtasError("build_quadtree expects a scaled instance");
  if (scaled.segments.empty()) throw PtasError("build_quadtree of an empty instance");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw PtasError("epsilon must lie in (0, 1]");
  if (m && (*m < 2 || (*m & (*m - 1)) != 0)) throw PtasError("m must be a power of two >= 2");

  QuadTree qt;
  qt.rho = *scaled.rho;
  qt.h = static_cast<int>(std::ceil(1.0 / epsilon - 1e-12));
  qt.base_side = 4.0 * std::ceil(scaled.lambda * qt.h * qt.rho / 4.0 - 1e-9);
  qt.m = m.value_or(default_portal_count(*scaled.N, qt.rho, epsilon));

  const auto box = bounding_box(scaled);
  Rng rng(seed);
  const auto span = static_cast<std::uint64_t>(qt.base_side);
  auto origin = [&](double lo) {
    double o = std::floor(lo) - static_cast<double>(rng.below(span));
    if (std::fmod(std::abs(o), 2.0) == 0.0) o -= 1.0;
    return o;
  };
  qt.a = origin(box.x_min);
  qt.b = origin(box.y_min);
  while (qt.a + qt.root_side() <= box.x_max || qt.b + qt.root_side() <= box.y_max) ++qt.depth;
  return qt;
}

CoverGroups group_cover_lines(const QuadTree& qt, const Instance& scaled) {
  CoverGroups g;
  g.h = static_cast<int>(std::ceil(qt.base_side / qt.rho - 1e-9));
  g.spacing = qt.base_side / g.h;
  if (scaled.segments.empty()) return g;
  const auto box = bounding_box(scaled);
  const long k_top = static_cast<long>(std::floor((box.y_max - qt.b) / g.spacing));
  const long k_bot = static_cast<long>(std::ceil((box.y_min - qt.b) / g.spacing));
  for (long k = k_top; k >= k_bot; --k) {
    const int tau = static_cast<int>(k_top - k);
    g.lines.push_back({tau, qt.b + k * g.spacing, tau % g.h});
  }
  g.jstar = static_cast<int>(((k_top % g.h) + g.h) % g.h);
  for (const auto& s : scaled.segments) {
    const long k = static_cast<long>(std::floor((s.y_top - qt.b) / g.spacing));
    if (qt.b + k * g.spacing < s.y_bot) continue;  // a point between lines
    g.assignment[s.id] = static_cast<int>(k_top - k);
  }
  return g;
}

std::vector<Interval> build_intervals(const std::vector<Segment>& assigned, double rho) {
  std::vector<Segment> segs = assigned;
  std::sort(segs.begin(), segs.end(),
            [](const Segment& l, const Segment& r) { return l.x < r.x || (l.x == r.x && l.id < r.id); });
  std::vector<Interval> out;
  for (const auto& s : segs) {
    if (out.empty() || s.x > out.back().hi) out.push_back({s.x, s.x + rho, {}});
    out.back().segments.push_back(s.id);
  }
  return out;
}

std::map<int, std::vector<Interval>> build_interval_sets(const Instance& scaled,
                                                         const CoverLineSet& lines, double rho) {
  std::map<int, std::vector<Segment>> by_line;
  for (const auto& s : scaled.segments) {
    auto it = lines.assignment.find(s.id);
    if (it != lines.assignment.end()) by_line[it->second].push_back(s);
  }
  std::map<int, std::vector<Interval>> out;
  for (const auto& [k, segs] : by_line) out[k] = build_intervals(segs, rho);
  return out;
}

DropResult drop_and_require(const Instance& scaled, const QuadTree& qt, const CoverGroups& groups) {
  (void)groups;  // the G_{j*} lines are exactly the horizontal grid lines
  DropResult res;
  res.reduced = scaled;
  res.reduced.segments.clear();
  std::map<long, std::vector<Segment>> crossing;  // grid line index -> segments
  for (const auto& s : scaled.segments) {
    const long k = static_cast<long>(std::floor((s.y_top - qt.b) / qt.base_side));
    const double y = qt.b + k * qt.base_side;
    if (y >= s.y_bot && y <= s.y_top) {
      crossing[k].push_back(s);
      res.dropped.push_back(s.id);
    } else {
      res.reduced.segments.push_back(s);
    }
  }
  std::sort(res.dropped.begin(), res.dropped.end());

  const long K = qt.lattice_per_axis();
  const double delta = qt.portal_spacing();
  std::map<int, Detour> ledger;
  for (const auto& [k, segs] : crossing) {
    const double y = qt.b + k * qt.base_side;
    const long lj = k * qt.m;
    for (const auto& iv : build_intervals(segs, qt.rho)) {
      const double mid = 0.5 * (iv.lo + iv.hi);
      const long i0 = std::lround((mid - qt.a) / delta);
      long best = -1;
      double best_d = 0.0, best_mid = 0.0;
      for (long i = i0 - 2 * qt.m; i <= i0 + 2 * qt.m; ++i) {
        if (i <= 0 || i >= K - 1 || i % qt.m == 0) continue;
        const double x = qt.a + i * delta;
        const double d = x < iv.lo ? iv.lo - x : (x > iv.hi ? x - iv.hi : 0.0);
        const double dm = std::abs(x - mid);
        if (best < 0 || d < best_d || (d == best_d && dm < best_mid)) {
          best = i;
          best_d = d;
          best_mid = dm;
        }
      }
      if (best < 0) throw PtasError("no portal near a dropped interval");
      const int id = qt.portal_id(best, lj);
      auto it = ledger.find(id);
      if (it == ledger.end()) {
        Detour d;
        d.portal = id;
        d.position = {qt.a + best * delta, y};
        d.leaf_i = qt.leaf_of(d.position).first;
        d.leaf_j = static_cast<int>(k) - 1;
        d.x_left = d.x_right = d.position.x;
        d.left = d.right = iv;
        it = ledger.emplace(id, d).first;
      }
      Detour& d = it->second;
      if (iv.lo < d.left.lo) d.left = iv;
      if (iv.hi > d.right.hi) d.right = iv;
      d.x_left = std::min(d.x_left, iv.lo);
      d.x_right = std::max(d.x_right, iv.hi);
      d.segments.insert(d.segments.end(), iv.segments.begin(), iv.segments.end());
    }
  }
  for (auto& [id, d] : ledger) res.ledger.push_back(std::move(d));
  return res;
}

Tour lift_solution(const Tour& tour, const DropResult& drop, const Instance& scaled) {
  for (int id : drop.dropped) {
    const Segment& s = scaled.by_id(id);
    bool covered = false;
    for (const auto& d : drop.ledger)
      covered = covered || (d.position.y >= s.y_bot && d.position.y <= s.y_top &&
                            s.x >= d.x_left && s.x <= d.x_right);
    if (!covered) throw PtasError("dropped segment " + std::to_string(id) + " has no detour");
  }
  const double tol = 1e-9 * std::max(1.0, scaled.N.value_or(1.0));
  std::vector<std::pair<std::size_t, const Detour*>> at;
  for (const auto& d : drop.ledger) {
    std::optional<std::size_t> idx;
    for (std::size_t i = 0; i < tour.points.size() && !idx; ++i) {
      const auto* p = std::get_if<PortalId>(&tour.points[i].binding);
      if (p && p->value == d.portal) idx = i;
    }
    for (std::size_t i = 0; i < tour.points.size() && !idx; ++i)
      if (distance(tour.points[i].position, d.position) <= tol) idx = i;
    if (!idx) throw PtasError("required portal " + std::to_string(d.portal) + " not on the tour");
    at.push_back({*idx, &d});
  }
  std::stable_sort(at.begin(), at.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
  Tour out = tour;
  for (const auto& [idx, d] : at) {
    const TourPoint home{d->position, PortalId{d->portal}};
    std::vector<TourPoint> ins;
    if (d->x_left < d->position.x) {
      ins.push_back({{d->x_left, d->position.y}, Dummy{}});
      ins.push_back(home);
    }
    if (d->x_right > d->position.x) {
      ins.push_back({{d->x_right, d->position.y}, Dummy{}});
      ins.push_back(home);
    }
    out.points.insert(out.points.begin() + static_cast<std::ptrdiff_t>(idx) + 1, ins.begin(),
                      ins.end());
  }
  return out;
}

}  // namespace tspn
