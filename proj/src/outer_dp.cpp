#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "tspn/baseline.hpp"
#include "tspn/ptas.hpp"

namespace tspn {
namespace {

using Cell = std::pair<int, int>;

struct Crossing {
  int portal = -1;
  Point pos;
  Cell from, to;
};

// Cells crossed by the leg p -> q, in order; ties at grid vertices cross the
// vertical line first.
std::vector<Crossing> leg_crossings(const QuadTree& qt, const Point& p, const Point& q) {
  std::vector<Crossing> out;
  Cell cur = qt.leaf_of(p);
  const Cell target = qt.leaf_of(q);
  const double dx = q.x - p.x, dy = q.y - p.y;
  const double inf = std::numeric_limits<double>::infinity();
  const double delta = qt.portal_spacing();
  const int guard = 4 * qt.leaves_per_side() + 4;
  for (int it = 0; cur != target; ++it) {
    if (it > guard) throw PtasError("leaf stepping did not reach the target cell");
    double tx = inf, ty = inf, xl = 0.0, yl = 0.0;
    if (dx > 0) xl = qt.a + (cur.first + 1) * qt.base_side, tx = (xl - p.x) / dx;
    if (dx < 0) xl = qt.a + cur.first * qt.base_side, tx = (xl - p.x) / dx;
    if (dy > 0) yl = qt.b + (cur.second + 1) * qt.base_side, ty = (yl - p.y) / dy;
    if (dy < 0) yl = qt.b + cur.second * qt.base_side, ty = (yl - p.y) / dy;
    if (tx == inf && ty == inf) throw PtasError("leaf stepping on a degenerate leg");
    Crossing c;
    c.from = cur;
    if (tx <= ty) {
      const double y = p.y + tx * dy;
      const long li = std::lround((xl - qt.a) / delta);
      const long lo = static_cast<long>(cur.second) * qt.m + 1, hi = lo + qt.m - 2;
      const long lj = std::clamp(std::lround((y - qt.b) / delta), lo, hi);
      c.portal = qt.portal_id(li, lj);
      cur.first += dx > 0 ? 1 : -1;
    } else {
      const double x = p.x + ty * dx;
      const long lj = std::lround((yl - qt.b) / delta);
      const long lo = static_cast<long>(cur.first) * qt.m + 1, hi = lo + qt.m - 2;
      const long li = std::clamp(std::lround((x - qt.a) / delta), lo, hi);
      c.portal = qt.portal_id(li, lj);
      cur.second += dy > 0 ? 1 : -1;
    }
    c.pos = qt.portal_position(c.portal);
    c.to = cur;
    out.push_back(c);
  }
  return out;
}

struct Path {
  int a = -1, b = -1;  // portal ids
  std::vector<TourPoint> pts;
};

double path_length(const std::vector<TourPoint>& pts, bool closed = false) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) s += distance(pts[i].position, pts[i + 1].position);
  if (closed && pts.size() > 1) s += distance(pts.back().position, pts.front().position);
  return s;
}

struct LeafPieces {
  std::vector<Path> paths;
  bool closed = false;
  std::vector<TourPoint> loop;
};

// Splits a tour into portal-respecting pieces per leaf.
std::map<Cell, LeafPieces> snap_to_portals(const Tour& tour, const QuadTree& qt) {
  std::map<Cell, LeafPieces> out;
  const auto& P = tour.points;
  const std::size_t n = P.size();
  if (n == 0) return out;

  struct Item {
    bool crossing = false;
    TourPoint point;
    Crossing c;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < n; ++i) {
    items.push_back({false, P[i], {}});
    if (n == 1) break;
    for (const auto& c : leg_crossings(qt, P[i].position, P[(i + 1) % n].position))
      items.push_back({true, {c.pos, PortalId{c.portal}}, c});
  }
  const auto first = std::find_if(items.begin(), items.end(), [](const Item& it) { return it.crossing; });
  if (first == items.end()) {
    auto& lp = out[qt.leaf_of(P[0].position)];
    lp.closed = true;
    lp.loop = P;
    return out;
  }
  std::rotate(items.begin(), first, items.end());
  const std::size_t m = items.size();
  for (std::size_t s = 0; s < m;) {
    const Crossing& in = items[s].c;
    Path path;
    path.a = in.portal;
    path.pts.push_back(items[s].point);
    std::size_t e = s + 1;
    for (; !items[e % m].crossing; ++e) {
      const TourPoint& tp = items[e].point;
      if (tp.position != path.pts.back().position) path.pts.push_back(tp);
    }
    const Item& exit = items[e % m];
    if (exit.c.from != in.to) throw PtasError("inconsistent leaf pieces");
    if (path.pts.size() > 1 && path.pts.back().position == exit.point.position) path.pts.pop_back();
    path.pts.push_back(exit.point);
    path.b = exit.c.portal;
    out[in.to].paths.push_back(std::move(path));
    s = e;
  }
  return out;
}

std::string pair_key(std::vector<std::pair<int, int>> ps) {
  for (auto& p : ps)
    if (p.first > p.second) std::swap(p.first, p.second);
  std::sort(ps.begin(), ps.end());
  std::string k;
  for (auto [a, b] : ps) k += std::to_string(a) + "-" + std::to_string(b) + ";";
  return k;
}

struct Entry {
  std::vector<Path> paths;
  bool closed = false;
  std::vector<TourPoint> loop;
  double cost = 0.0;
  /// Candidate the entry derives from alone, -1 when mixed.
  int origin = -1;

  bool empty() const { return !closed && paths.empty(); }
  std::string key() const {
    if (closed) return "closed";
    std::vector<std::pair<int, int>> ps;
    for (const auto& p : paths) ps.push_back({p.a, p.b});
    return pair_key(ps);
  }
};

struct Beam {
  std::map<std::string, Entry> best;  // mixed entries by key
  std::map<int, Entry> pure;          // by origin

  void add(Entry e, int cap) {
    if (e.origin >= 0) {
      auto it = pure.find(e.origin);
      if (it == pure.end() || e.cost < it->second.cost) pure[e.origin] = e;
    }
    const std::string k = e.key();
    auto it = best.find(k);
    if (it == best.end() || e.cost < it->second.cost) best[k] = std::move(e);
    if (static_cast<int>(best.size()) > cap) {
      auto worst = std::max_element(best.begin(), best.end(),
                                    [](const auto& l, const auto& r) { return l.second.cost < r.second.cost; });
      best.erase(worst);
    }
  }
  std::vector<const Entry*> all() const {
    std::vector<const Entry*> out;
    for (const auto& [k, e] : best) out.push_back(&e);
    for (const auto& [o, e] : pure) {
      auto it = best.find(e.key());
      if (it == best.end() || it->second.cost > e.cost) out.push_back(&e);
    }
    return out;
  }
};

enum Side { kBottom, kRight, kTop, kLeft };

int side_of(const Square& sq, const Point& p) {
  if (p.y == sq.y0) return kBottom;
  if (p.x == sq.x1()) return kRight;
  if (p.y == sq.y1()) return kTop;
  if (p.x == sq.x0) return kLeft;
  return -1;
}

std::string side_signature(const Entry& e, const Square& sq, int side, const QuadTree& qt) {
  std::vector<int> ids;
  for (const auto& p : e.paths)
    for (int id : {p.a, p.b})
      if (side_of(sq, qt.portal_position(id)) == side) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  std::string s;
  for (int id : ids) s += std::to_string(id) + ",";
  return s;
}

// Glues child paths at portals strictly inside sq. Every internal portal must
// carry the same number of ends from both neighbouring children.
void combine(const std::array<const Entry*, 4>& kids, const Square& sq, const QuadTree& qt,
             int r, int cap, Beam& beam) {
  int closed = 0, nonempty = 0, origin = kids[0]->origin;
  double cost = 0.0;
  for (const Entry* k : kids) {
    closed += k->closed;
    nonempty += !k->empty();
    cost += k->cost;
    if (k->origin != origin) origin = -1;
  }
  if (closed > 0) {
    if (nonempty != 1) return;
    for (const Entry* k : kids)
      if (k->closed) {
        Entry e = *k;
        e.origin = origin;
        beam.add(std::move(e), cap);
      }
    return;
  }
  std::vector<const Path*> paths;
  std::vector<int> owner;
  for (int c = 0; c < 4; ++c)
    for (const auto& p : kids[c]->paths) {
      paths.push_back(&p);
      owner.push_back(c);
    }
  if (paths.empty()) {
    Entry e;
    e.origin = origin;
    beam.add(std::move(e), cap);
    return;
  }
  // end code = 2 * path + (0 for a, 1 for b)
  auto end_portal = [&](int code) { return code % 2 == 0 ? paths[code / 2]->a : paths[code / 2]->b; };
  std::map<int, std::array<std::vector<int>, 4>> internal;
  std::array<int, 4> per_side{};
  for (int code = 0; code < 2 * static_cast<int>(paths.size()); ++code) {
    const int id = end_portal(code);
    const int side = side_of(sq, qt.portal_position(id));
    if (side < 0) internal[id][owner[code / 2]].push_back(code);
    else if (++per_side[side] > r) return;
  }
  // Each internal portal: two groups of equal size, all permutations.
  struct Group {
    std::vector<int> left, right;
  };
  std::vector<Group> groups;
  for (auto& [id, by_child] : internal) {
    std::vector<std::vector<int>*> present;
    for (auto& v : by_child)
      if (!v.empty()) present.push_back(&v);
    if (present.size() != 2 || present[0]->size() != present[1]->size()) return;
    groups.push_back({*present[0], *present[1]});
  }
  std::vector<int> glue(2 * paths.size(), -1);
  int enumerated = 0;
  auto finish = [&]() {
    std::vector<bool> seen(paths.size(), false);
    Entry e;
    e.cost = cost;
    e.origin = origin;
    auto walk = [&](int start_code, std::vector<TourPoint>& pts) -> int {
      int code = start_code;
      while (true) {
        const int pi = code / 2;
        seen[pi] = true;
        const auto& src = paths[pi]->pts;
        const bool fwd = code % 2 == 0;
        const std::size_t skip = pts.empty() ? 0 : 1;
        for (std::size_t i = skip; i < src.size(); ++i) pts.push_back(fwd ? src[i] : src[src.size() - 1 - i]);
        const int other = code ^ 1;
        if (glue[other] < 0) return other;
        code = glue[other];
        if (seen[code / 2]) return -1;
      }
    };
    for (int code = 0; code < 2 * static_cast<int>(paths.size()); ++code) {
      if (seen[code / 2] || glue[code] >= 0) continue;
      Path p;
      p.a = end_portal(code);
      const int last = walk(code, p.pts);
      if (last < 0) return;
      p.b = end_portal(last);
      e.paths.push_back(std::move(p));
    }
    const auto unseen = std::count(seen.begin(), seen.end(), false);
    if (unseen > 0) {
      if (!e.paths.empty()) return;
      std::vector<TourPoint> loop;
      const int start = static_cast<int>(std::find(seen.begin(), seen.end(), false) - seen.begin());
      int code = 2 * start;
      do {
        const int pi = code / 2;
        seen[pi] = true;
        const auto& src = paths[pi]->pts;
        const bool fwd = code % 2 == 0;
        for (std::size_t i = loop.empty() ? 0 : 1; i < src.size(); ++i)
          loop.push_back(fwd ? src[i] : src[src.size() - 1 - i]);
        code = glue[code ^ 1];
      } while (code / 2 != start);
      if (std::count(seen.begin(), seen.end(), false) > 0) return;  // more than one cycle
      if (loop.size() > 1 && loop.back().position == loop.front().position) loop.pop_back();
      e.closed = true;
      e.loop = std::move(loop);
    }
    beam.add(std::move(e), cap);
  };
  auto rec = [&](auto&& self, std::size_t g) -> void {
    if (enumerated > 256) return;
    if (g == groups.size()) {
      ++enumerated;
      finish();
      return;
    }
    auto right = groups[g].right;
    std::sort(right.begin(), right.end());
    do {
      for (std::size_t i = 0; i < right.size(); ++i) {
        glue[groups[g].left[i]] = right[i];
        glue[right[i]] = groups[g].left[i];
      }
      self(self, g + 1);
    } while (std::next_permutation(right.begin(), right.end()));
  };
  rec(rec, 0);
}

// Crossing counts per (level, line orientation, line index, side index).
std::map<std::tuple<int, int, long, long>, int> side_counts(const Tour& tour, const QuadTree& qt) {
  std::map<std::tuple<int, int, long, long>, int> counts;
  const int L = qt.leaves_per_side();
  for (std::size_t i = 0; i < tour.leg_count(); ++i) {
    const auto [u, v] = tour.leg(i);
    for (int orient = 0; orient < 2; ++orient) {
      // orient 0: horizontal lines (coordinate y), 1: vertical lines (x)
      const double cu = orient == 0 ? u.y : u.x, cv = orient == 0 ? v.y : v.x;
      const double o = orient == 0 ? qt.b : qt.a, oo = orient == 0 ? qt.a : qt.b;
      const long klo = static_cast<long>(std::floor((std::min(cu, cv) - o) / qt.base_side)) - 1;
      const long khi = static_cast<long>(std::ceil((std::max(cu, cv) - o) / qt.base_side)) + 1;
      for (long k = std::max(0L, klo); k <= std::min<long>(L, khi); ++k) {
        const double line = o + k * qt.base_side;
        if ((cu > line) == (cv > line)) continue;
        const double t = (line - cu) / (cv - cu);
        const double w = orient == 0 ? u.x + t * (v.x - u.x) : u.y + t * (v.y - u.y);
        for (int level = 0; level <= qt.depth; ++level) {
          const long step = 1L << (qt.depth - level);
          if (k % step != 0) continue;
          const double side = qt.base_side * step;
          const double f = (w - oo) / side;
          const long s0 = static_cast<long>(std::floor(f));
          for (long s : {s0 - 1, s0}) {
            if (s < 0 || s >= (1L << level)) continue;
            if (w >= oo + s * side && w <= oo + (s + 1) * side) ++counts[{level, orient, k, s}];
          }
        }
      }
    }
  }
  return counts;
}

DissectingSegment side_segment(const QuadTree& qt, int level, int orient, long k, long s) {
  const double side = qt.base_side * static_cast<double>(1L << (qt.depth - level));
  if (orient == 0) {
    const double y = qt.b + k * qt.base_side;
    return {{qt.a + s * side, y}, {qt.a + (s + 1) * side, y}};
  }
  const double x = qt.a + k * qt.base_side;
  return {{x, qt.b + s * side}, {x, qt.b + (s + 1) * side}};
}

}  // namespace

int max_side_crossings(const Tour& tour, const QuadTree& qt) {
  int best = 0;
  for (const auto& [key, c] : side_counts(tour, qt)) best = std::max(best, c);
  return best;
}

OuterDpResult outer_dp(const Instance& reduced, const QuadTree& qt, const DropResult& drop,
                       const OuterDpConfig& config) {
  if (config.r < 2) throw PtasError("r must be at least 2");
  OuterDpResult res;

  // Candidate tours over the reduced instance with required portals as
  // zero-length segments.
  Instance aug = reduced;
  int next_id = 0;
  for (const auto& s : reduced.segments) next_id = std::max(next_id, s.id + 1);
  std::map<int, int> portal_of;
  for (const auto& d : drop.ledger) {
    portal_of[next_id] = d.portal;
    aug.segments.push_back({next_id++, d.position.x, d.position.y, d.position.y});
  }
  if (aug.segments.empty()) throw PtasError("outer_dp on an empty instance");

  std::vector<Tour> pool;
  std::set<std::vector<int>> seen_orders;
  const int pool_size = std::max(1, config.pool);
  for (int k = 0; k < pool_size; ++k) {
    BaselineConfig bc;
    bc.seed = config.seed * 7919 + static_cast<std::uint64_t>(k);
    Tour t = nn_2opt(aug, bc);
    t = local_search(aug, order_of(t));
    auto key = canonical(order_of(t)).sequence;
    if (!seen_orders.insert(key).second) continue;
    for (auto& tp : t.points)
      if (auto s = tp.segment(); s && portal_of.count(*s)) tp.binding = PortalId{portal_of.at(*s)};
    pool.push_back(std::move(t));
  }

  // r-light candidates: patch heavy sides, coarse levels first.
  for (auto& t : pool) {
    for (int round = 0; round < 4; ++round) {
      bool changed = false;
      for (int level = 0; level <= qt.depth; ++level) {
        for (const auto& [key, c] : side_counts(t, qt)) {
          const auto [lv, orient, k, s] = key;
          if (lv != level || c <= config.r) continue;
          t = patch(t, side_segment(qt, lv, orient, k, s));
          ++res.patches;
          changed = true;
          break;
        }
        if (changed) break;
      }
      if (!changed) break;
    }
  }

  // Leaf entries.
  const int L = qt.leaves_per_side();
  std::map<Cell, std::vector<Segment>> leaf_segments;
  for (const auto& s : reduced.segments) leaf_segments[qt.leaf_of(s.bottom())].push_back(s);
  std::map<std::pair<Cell, std::string>, std::optional<InnerResult>> cache;
  std::vector<std::vector<Beam>> beams(L, std::vector<Beam>(L));
  for (std::size_t c = 0; c < pool.size(); ++c) {
    auto pieces = snap_to_portals(pool[c], qt);
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < L; ++j) {
        Entry e;
        e.origin = static_cast<int>(c);
        auto it = pieces.find({i, j});
        if (it != pieces.end()) {
          const auto& lp = it->second;
          if (lp.closed) {
            e.closed = true;
            e.loop = lp.loop;
            e.cost = path_length(lp.loop, true);
          } else {
            e.paths = lp.paths;
            for (const auto& p : e.paths) e.cost += path_length(p.pts);
            std::vector<std::pair<int, int>> ps;
            std::set<int> terminals;
            for (const auto& p : e.paths) {
              ps.push_back({p.a, p.b});
              terminals.insert(p.a);
              terminals.insert(p.b);
            }
            std::vector<Portal> required;
            std::string rkey = "|";
            for (const auto& d : drop.ledger)
              if (d.leaf_i == i && d.leaf_j == j && !terminals.count(d.portal)) {
                required.push_back({d.portal, d.position});
                rkey += std::to_string(d.portal) + ",";
              }
            const auto ck = std::make_pair(Cell{i, j}, pair_key(ps) + rkey);
            auto cit = cache.find(ck);
            if (cit == cache.end()) {
              LeafProblem lp2;
              lp2.square = qt.leaf(i, j);
              lp2.segments = leaf_segments[{i, j}];
              lp2.required = required;
              for (const auto& p : e.paths)
                lp2.pairs.push_back({{p.a, qt.portal_position(p.a)}, {p.b, qt.portal_position(p.b)}});
              std::optional<InnerResult> r;
              try {
                r = inner_dp_solve(lp2, config.caps);
                if (!r->feasible) r.reset();
              } catch (const InnerDpError&) {
              }
              if (r) ++res.leaves_inner; else ++res.leaves_fallback;
              cit = cache.emplace(ck, std::move(r)).first;
            }
            if (cit->second && cit->second->cost < e.cost) {
              e.cost = cit->second->cost;
              for (std::size_t k = 0; k < e.paths.size(); ++k) e.paths[k].pts = cit->second->paths[k];
            }
          }
        } else if (!leaf_segments[{i, j}].empty()) {
          continue;
        }
        beams[i][j].add(std::move(e), config.beam);
      }
  }

  // Combine children level by level.
  for (int level = qt.depth - 1; level >= 0; --level) {
    const int S = 1 << level;
    std::vector<std::vector<Beam>> up(S, std::vector<Beam>(S));
    for (int i = 0; i < S; ++i)
      for (int j = 0; j < S; ++j) {
        const Square sq = qt.square(level, i, j);
        const std::array<Cell, 4> kids{Cell{2 * i, 2 * j}, Cell{2 * i + 1, 2 * j}, Cell{2 * i, 2 * j + 1},
                                       Cell{2 * i + 1, 2 * j + 1}};  // BL, BR, TL, TR
        struct Opt {
          const Entry* e;
          std::array<std::string, 4> sig;
        };
        std::array<std::vector<Opt>, 4> opts;
        for (int c = 0; c < 4; ++c) {
          const Square ks = qt.square(level + 1, kids[c].first, kids[c].second);
          for (const Entry* e : beams[kids[c].first][kids[c].second].all()) {
            Opt o{e, {}};
            for (int side = 0; side < 4; ++side) o.sig[side] = side_signature(*e, ks, side, qt);
            opts[c].push_back(std::move(o));
          }
        }
        std::unordered_map<std::string, std::vector<const Opt*>> tl_by_bottom, tr_by_bottom;
        for (const auto& o : opts[2]) tl_by_bottom[o.sig[kBottom]].push_back(&o);
        for (const auto& o : opts[3]) tr_by_bottom[o.sig[kBottom]].push_back(&o);
        for (const auto& bl : opts[0])
          for (const auto& br : opts[1]) {
            if (bl.sig[kRight] != br.sig[kLeft]) continue;
            auto tl_it = tl_by_bottom.find(bl.sig[kTop]);
            auto tr_it = tr_by_bottom.find(br.sig[kTop]);
            if (tl_it == tl_by_bottom.end() || tr_it == tr_by_bottom.end()) continue;
            for (const Opt* tl : tl_it->second)
              for (const Opt* tr : tr_it->second) {
                if (tl->sig[kRight] != tr->sig[kLeft]) continue;
                combine({bl.e, br.e, tl->e, tr->e}, sq, qt, config.r, config.beam, up[i][j]);
              }
          }
      }
    beams = std::move(up);
  }

  // Root: closed entries visiting every required portal.
  const Entry* best = nullptr;
  for (const Entry* e : beams[0][0].all()) {
    if (!e->closed) continue;
    bool ok = true;
    for (const auto& d : drop.ledger) {
      bool hit = false;
      for (const auto& tp : e->loop) hit = hit || tp.position == d.position;
      ok = ok && hit;
    }
    if (ok && (!best || e->cost < best->cost)) best = e;
  }
  if (!best) throw PtasError("no child combination closes the tour");
  for (const auto& tp : best->loop) {
    if (!res.tour.points.empty() && res.tour.points.back().position == tp.position) {
      if (std::holds_alternative<Dummy>(res.tour.points.back().binding)) res.tour.points.back() = tp;
      continue;
    }
    res.tour.points.push_back(tp);
  }
  while (res.tour.points.size() > 1 && res.tour.points.back().position == res.tour.points.front().position)
    res.tour.points.pop_back();
  res.tour.closed = true;
  res.cost = tour_cost(res.tour);
  res.max_side_crossings = max_side_crossings(res.tour, qt);
  return res;
}

}  // namespace tspn
