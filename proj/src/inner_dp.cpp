#include "tspn/inner_dp.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "tspn/oracle.hpp"

namespace tspn {

InnerCaps InnerCaps::from_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InnerDpError("epsilon must lie in (0, 1]");
  InnerCaps c;
  const int h = static_cast<int>(std::ceil(1.0 / epsilon - 1e-12));
  c.shadow_cap = 4 * static_cast<int>(std::ceil(1.0 / (epsilon * epsilon) - 1e-12));
  c.reflect_cap = 2 * h;
  return c;
}

namespace {

double geom_tol(const LeafProblem& pb) { return 1e-9 * std::max(1.0, pb.square.side); }

// Anchor location with what it has to satisfy.
struct AnchorInfo {
  Anchor anchor;
  std::vector<int> terminals;
  bool required = false;

  int max_degree() const { return terminals.empty() ? 2 : static_cast<int>(terminals.size()); }
};

std::vector<AnchorInfo> build_anchors(const LeafProblem& pb) {
  std::vector<AnchorInfo> out;
  const double tol = geom_tol(pb);
  auto find_at = [&](const Point& p) -> int {
    for (std::size_t i = 0; i < out.size(); ++i)
      if (std::abs(out[i].anchor.pos.x - p.x) <= tol && std::abs(out[i].anchor.pos.y - p.y) <= tol)
        return static_cast<int>(i);
    return -1;
  };
  for (const auto& s : pb.segments) {
    for (const Point& p : {s.bottom(), s.top()}) {
      AnchorInfo a;
      a.anchor.kind = AnchorKind::Tip;
      a.anchor.pos = p;
      a.anchor.segment = s.id;
      out.push_back(a);
    }
  }
  auto add_portal = [&](const Portal& portal) -> AnchorInfo& {
    int at = find_at(portal.pos);
    if (at >= 0 && out[at].anchor.kind == AnchorKind::Tip)
      throw InnerDpError("portal coincides with a segment tip");
    if (at < 0) {
      AnchorInfo a;
      a.anchor.kind = AnchorKind::Portal;
      a.anchor.pos = portal.pos;
      a.anchor.portal = portal.id;
      out.push_back(a);
      at = static_cast<int>(out.size()) - 1;
    }
    return out[at];
  };
  for (std::size_t k = 0; k < pb.pairs.size(); ++k) {
    add_portal(pb.pairs[k].p).terminals.push_back(static_cast<int>(2 * k));
    add_portal(pb.pairs[k].q).terminals.push_back(static_cast<int>(2 * k + 1));
  }
  for (const auto& q : pb.required) add_portal(q).required = true;
  return out;
}

bool leg_touches(const std::vector<Point>& pts, const Segment& s, double tol) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Point& u = pts[i];
    const Point& v = pts[i + 1];
    if (s.x < std::min(u.x, v.x) - tol || s.x > std::max(u.x, v.x) + tol) continue;
    const double dx = v.x - u.x;
    if (std::abs(dx) <= tol) {
      if (std::max(u.y, v.y) >= s.y_bot - tol && std::min(u.y, v.y) <= s.y_top + tol) return true;
      continue;
    }
    const double t = std::clamp((s.x - u.x) / dx, 0.0, 1.0);
    const double y = u.y + t * (v.y - u.y);
    if (y >= s.y_bot - tol && y <= s.y_top + tol) return true;
  }
  return false;
}

std::vector<int> touched_segments(const LargeLeg& leg, const LeafProblem& pb) {
  std::vector<int> out;
  const double tol = geom_tol(pb);
  for (const auto& s : pb.segments)
    if (leg_touches(leg.realized, s, tol)) out.push_back(s.id);
  std::sort(out.begin(), out.end());
  return out;
}

struct EnumeratedLeg {
  LargeLeg leg;
  int a = 0, b = 0;  // anchor indices
  std::vector<int> touched;
};

std::vector<EnumeratedLeg> enumerate_internal(const LeafProblem& pb,
                                              const std::vector<AnchorInfo>& anchors,
                                              const InnerCaps& caps) {
  std::map<std::tuple<int, int, std::vector<int>>, EnumeratedLeg> best;
  std::size_t tried = 0;
  const int ns = static_cast<int>(pb.segments.size());
  const int na = static_cast<int>(anchors.size());

  auto closes_pair = [&](int a) {
    const auto& t = anchors[a].terminals;
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t j = i + 1; j < t.size(); ++j)
        if (t[i] / 2 == t[j] / 2) return true;
    return false;
  };

  for (int a = 0; a < na; ++a) {
    for (int b = closes_pair(a) ? a : a + 1; b < na; ++b) {
      const Anchor& A = anchors[a].anchor;
      const Anchor& B = anchors[b].anchor;
      std::vector<int> seq;
      std::vector<double> unfolded;  // u_j for the current prefix
      std::vector<Segment> refl;

      auto consider = [&]() {
        if (++tried > caps.leg_budget) throw InnerDpError("large-leg enumeration budget exceeded");
        auto leg = realize_large_leg(A, B, refl);
        if (!leg) return;
        EnumeratedLeg e{std::move(*leg), a, b, {}};
        e.touched = touched_segments(e.leg, pb);
        auto key = std::make_tuple(a, b, e.touched);
        auto it = best.find(key);
        if (it == best.end() || e.leg.length < it->second.leg.length) best[key] = std::move(e);
      };

      // depth-first over reflect sequences; prefixes whose mirrors are not
      // met in order cannot be extended
      auto dfs = [&](auto&& self) -> void {
        consider();
        if (static_cast<int>(seq.size()) >= caps.reflect_cap) return;
        for (int s = 0; s < ns; ++s) {
          const Segment& seg = pb.segments[s];
          if (seg.id == A.segment || seg.id == B.segment) continue;
          if (std::find(seq.begin(), seq.end(), s) != seq.end()) continue;
          double v = seg.x;
          for (std::size_t i = refl.size(); i-- > 0;) v = 2.0 * refl[i].x - v;
          const double prev = unfolded.empty() ? A.pos.x : unfolded.back();
          if (v == prev) continue;
          if (!unfolded.empty()) {
            const double dir = unfolded.front() - A.pos.x;
            if ((v - prev) * dir <= 0.0) continue;
          }
          seq.push_back(s);
          refl.push_back(seg);
          unfolded.push_back(v);
          self(self);
          seq.pop_back();
          refl.pop_back();
          unfolded.pop_back();
        }
      };
      dfs(dfs);
    }
  }
  // a pair starting and ending at one location may go out and back along a
  // single leg, so such legs get a second copy
  std::vector<EnumeratedLeg> out;
  out.reserve(best.size());
  for (auto& [k, e] : best) {
    const bool twice = closes_pair(e.a) || closes_pair(e.b);
    out.push_back(std::move(e));
    if (twice) out.push_back(out.back());
  }
  return out;
}

// Sorted distinct x-coordinates of anchors and segments.
struct Groups {
  std::vector<double> xs;
  double tol = 0.0;

  int of(double x) const {
    auto it = std::lower_bound(xs.begin(), xs.end(), x - tol);
    if (it == xs.end() || std::abs(*it - x) > tol) throw InnerDpError("x outside event groups");
    return static_cast<int>(it - xs.begin());
  }
};

struct LegInfo {
  int a = 0, b = 0;
  int gmin = 0, gmax = 0;
  double length = 0.0;
  std::vector<int> touched;  // segment indices
  std::vector<int> reflects;  // segment indices
  std::vector<int> slab;      // crossings of slab gmin + k
};

constexpr int kJoined = -1;
int terminal_code(int t) { return -(t + 2); }
int code_terminal(int c) { return -c - 2; }

struct State {
  std::vector<int> legs;
  std::vector<int> mates;

  int pos(int leg) const {
    auto it = std::lower_bound(legs.begin(), legs.end(), leg);
    if (it == legs.end() || *it != leg) return -1;
    return static_cast<int>(it - legs.begin());
  }
  int& mate(int end_code) { return mates[2 * pos(end_code / 2) + end_code % 2]; }
  int mate(int end_code) const { return mates[2 * pos(end_code / 2) + end_code % 2]; }

  void add(int leg) {
    auto it = std::lower_bound(legs.begin(), legs.end(), leg);
    const auto p = it - legs.begin();
    legs.insert(it, leg);
    mates.insert(mates.begin() + 2 * p, {2 * leg + 1, 2 * leg});
  }
  void remove(int leg) {
    const int p = pos(leg);
    legs.erase(legs.begin() + p);
    mates.erase(mates.begin() + 2 * p, mates.begin() + 2 * p + 2);
  }
};

// Joins ports u and v (leg-end codes >= 0 or terminal codes). False when the
// join closes a cycle or completes a path between non-partner terminals.
bool join(State& st, int u, int v) {
  auto other = [&](int p) { return p >= 0 ? st.mate(p) : p; };
  const int a = other(u);
  const int b = other(v);
  if (a == kJoined || b == kJoined) return false;
  if (u >= 0 && a == v) return false;
  if (u >= 0) st.mate(u) = kJoined;
  if (v >= 0) st.mate(v) = kJoined;
  if (a >= 0) st.mate(a) = b;
  if (b >= 0) st.mate(b) = a;
  if (a < 0 && b < 0) {
    const int ta = code_terminal(a), tb = code_terminal(b);
    if (ta == tb || ta / 2 != tb / 2) return false;
  }
  return true;
}

struct Transition {
  int prev = -1;
  std::vector<int> new_legs;
  std::vector<std::pair<int, int>> joins;
};

struct Entry {
  double cost = 0.0;
  int trans = -1;
};

TourPoint anchor_point(const Anchor& a) {
  if (a.kind == AnchorKind::Tip) return {a.pos, SegmentId{a.segment}};
  if (a.portal >= 0) return {a.pos, PortalId{a.portal}};
  return {a.pos, Dummy{}};
}

std::vector<ChainNode> leaf_items(const LeafProblem& pb) {
  const double tol = geom_tol(pb);
  std::vector<ChainNode> items;
  for (const auto& s : pb.segments) items.push_back({s.x, s.y_bot, s.y_top});
  for (const auto& q : pb.required) {
    bool at_terminal = false;
    for (const auto& pr : pb.pairs)
      for (const Portal* t : {&pr.p, &pr.q})
        if (distance(t->pos, q.pos) <= tol) at_terminal = true;
    if (!at_terminal) items.push_back({q.pos.x, q.pos.y, q.pos.y});
  }
  return items;
}

double chain_cost(const PortalPair& pr, const std::vector<ChainNode>& items,
                  const std::vector<int>& seq) {
  if (seq.empty()) return distance(pr.p.pos, pr.q.pos);
  std::vector<ChainNode> nodes;
  nodes.push_back({pr.p.pos.x, pr.p.pos.y, pr.p.pos.y});
  for (int i : seq) nodes.push_back(items[i]);
  nodes.push_back({pr.q.pos.x, pr.q.pos.y, pr.q.pos.y});
  return optimize_touch_chain(nodes, false, 1e-9, 2000).cost;
}

// Cheapest insertion followed by reinsertion passes; a feasible cost.
double heuristic_upper_bound(const LeafProblem& pb) {
  const auto items = leaf_items(pb);
  const std::size_t k = pb.pairs.size();
  if (k == 0) return items.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> seqs(k);
  std::vector<double> costs(k);
  for (std::size_t p = 0; p < k; ++p) costs[p] = chain_cost(pb.pairs[p], items, seqs[p]);
  auto insert_best = [&](int item) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bp = 0, bi = 0;
    double bc = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t i = 0; i <= seqs[p].size(); ++i) {
        auto s = seqs[p];
        s.insert(s.begin() + i, item);
        const double c = chain_cost(pb.pairs[p], items, s);
        if (c - costs[p] < best) {
          best = c - costs[p];
          bp = p;
          bi = i;
          bc = c;
        }
      }
    }
    seqs[bp].insert(seqs[bp].begin() + bi, item);
    costs[bp] = bc;
  };
  for (std::size_t i = 0; i < items.size(); ++i) insert_best(static_cast<int>(i));
  for (int round = 0; round < 2; ++round) {
    for (std::size_t it = 0; it < items.size(); ++it) {
      for (std::size_t p = 0; p < k; ++p) {
        auto pos = std::find(seqs[p].begin(), seqs[p].end(), static_cast<int>(it));
        if (pos == seqs[p].end()) continue;
        seqs[p].erase(pos);
        costs[p] = chain_cost(pb.pairs[p], items, seqs[p]);
        break;
      }
      insert_best(static_cast<int>(it));
    }
  }
  return std::accumulate(costs.begin(), costs.end(), 0.0);
}

}  // namespace

std::vector<EventPoint> event_points(const LeafProblem& pb) {
  std::vector<EventPoint> ev;
  for (const auto& s : pb.segments) ev.push_back({EventKind::Segment, s.id, s.x});
  std::vector<Portal> portals;
  auto add = [&](const Portal& p) {
    for (const auto& q : portals) {
      if (p.id >= 0 && q.id == p.id) return;
      if (p.id < 0 && q.id < 0 && q.pos == p.pos) return;
    }
    portals.push_back(p);
  };
  for (const auto& pr : pb.pairs) {
    add(pr.p);
    add(pr.q);
  }
  for (const auto& q : pb.required) add(q);
  for (const auto& p : portals) ev.push_back({EventKind::Portal, p.id, p.pos.x});
  std::stable_sort(ev.begin(), ev.end(), [](const EventPoint& l, const EventPoint& r) {
    if (l.x != r.x) return l.x < r.x;
    if (l.kind != r.kind) return l.kind == EventKind::Segment;
    return l.id < r.id;
  });
  for (std::size_t i = 1; i < ev.size(); ++i)
    if (ev[i].kind == EventKind::Segment && ev[i - 1].kind == EventKind::Segment &&
        ev[i].x == ev[i - 1].x)
      throw InnerDpError("two segments share an x-coordinate");
  return ev;
}

std::optional<LargeLeg> realize_large_leg(const Anchor& start, const Anchor& end,
                                          const std::vector<Segment>& reflect_segments) {
  const std::size_t k = reflect_segments.size();
  if (start.pos == end.pos && k == 0) return std::nullopt;
  for (std::size_t j = 0; j < k; ++j) {
    const int id = reflect_segments[j].id;
    if ((start.kind == AnchorKind::Tip && start.segment == id) ||
        (end.kind == AnchorKind::Tip && end.segment == id))
      return std::nullopt;
    for (std::size_t i = 0; i < j; ++i)
      if (reflect_segments[i].id == id) return std::nullopt;
  }
  std::vector<double> u(k);
  for (std::size_t j = 0; j < k; ++j) {
    double v = reflect_segments[j].x;
    for (std::size_t i = j; i-- > 0;) v = 2.0 * reflect_segments[i].x - v;
    u[j] = v;
  }
  double ex = end.pos.x;
  for (std::size_t j = k; j-- > 0;) ex = 2.0 * reflect_segments[j].x - ex;

  if (k > 0) {
    std::vector<double> xs;
    xs.push_back(start.pos.x);
    xs.insert(xs.end(), u.begin(), u.end());
    xs.push_back(ex);
    const double dir = xs[1] - xs[0];
    if (dir == 0.0) return std::nullopt;
    for (std::size_t i = 1; i < xs.size(); ++i)
      if ((xs[i] - xs[i - 1]) * dir <= 0.0) return std::nullopt;
  }

  LargeLeg leg;
  leg.start = start;
  leg.end = end;
  leg.realized.push_back(start.pos);
  for (std::size_t j = 0; j < k; ++j) {
    const Segment& s = reflect_segments[j];
    const double t = (u[j] - start.pos.x) / (ex - start.pos.x);
    const double y = start.pos.y + t * (end.pos.y - start.pos.y);
    const double margin = 1e-12 * std::max(1.0, std::abs(y));
    if (!(y > s.y_bot + margin && y < s.y_top - margin)) return std::nullopt;
    leg.reflect_segments.push_back(s.id);
    leg.realized.push_back({s.x, y});
  }
  leg.realized.push_back(end.pos);
  leg.length = std::hypot(ex - start.pos.x, end.pos.y - start.pos.y);
  return leg;
}

std::vector<LargeLeg> enumerate_large_legs(const LeafProblem& problem, const InnerCaps& caps) {
  const auto anchors = build_anchors(problem);
  auto internal = enumerate_internal(problem, anchors, caps);
  std::vector<LargeLeg> out;
  out.reserve(internal.size());
  for (auto& e : internal) out.push_back(std::move(e.leg));
  return out;
}

bool check_promising(const Configuration& config, const std::vector<LargeLeg>& legs,
                     const LeafProblem& problem) {
  const auto& L = config.legs;
  if (config.mates.size() != 2 * L.size()) return false;
  if (!std::is_sorted(L.begin(), L.end()) || std::adjacent_find(L.begin(), L.end()) != L.end())
    return false;
  for (int l : L)
    if (l < 0 || static_cast<std::size_t>(l) >= legs.size()) return false;
  State st{L, config.mates};
  const int terminals = static_cast<int>(2 * problem.pairs.size());
  std::set<int> used_terminals;
  for (std::size_t p = 0; p < L.size(); ++p) {
    for (int e = 0; e < 2; ++e) {
      const int code = 2 * L[p] + e;
      const int m = config.mates[2 * p + e];
      if (m == kJoined) continue;
      if (m >= 0) {
        if (st.pos(m / 2) < 0 || m == code) return false;
        if (st.mate(m) != code) return false;
      } else {
        const int t = code_terminal(m);
        if (t < 0 || t >= terminals) return false;
        if (!used_terminals.insert(t).second) return false;
      }
    }
  }
  // anchor degree: at most two leg ends per location
  std::map<std::pair<double, double>, int> degree;
  for (int l : L) {
    for (const Anchor* a : {&legs[l].start, &legs[l].end})
      if (++degree[{a->pos.x, a->pos.y}] > 2) return false;
  }
  return true;
}

InnerResult inner_dp_solve(const LeafProblem& pb, const InnerCaps& caps) {
  InnerResult result;
  const auto anchors = build_anchors(pb);
  const auto enumerated = enumerate_internal(pb, anchors, caps);
  result.legs = enumerated.size();
  const double tol = geom_tol(pb);

  std::map<int, int> seg_index;
  for (std::size_t i = 0; i < pb.segments.size(); ++i)
    seg_index[pb.segments[i].id] = static_cast<int>(i);

  Groups groups;
  groups.tol = tol;
  {
    std::vector<double> xs;
    for (const auto& a : anchors) xs.push_back(a.anchor.pos.x);
    for (const auto& s : pb.segments) xs.push_back(s.x);
    std::sort(xs.begin(), xs.end());
    for (double x : xs)
      if (groups.xs.empty() || x - groups.xs.back() > tol) groups.xs.push_back(x);
  }
  const int G = static_cast<int>(groups.xs.size());
  if (G == 0) {
    // nothing at all: no pairs, no segments
    result.feasible = true;
    return result;
  }

  std::vector<LegInfo> legs(enumerated.size());
  std::vector<std::vector<int>> starting(G);
  std::vector<std::vector<std::pair<int, int>>> incident(anchors.size());  // (leg, end)
  for (std::size_t l = 0; l < enumerated.size(); ++l) {
    const auto& e = enumerated[l];
    LegInfo& li = legs[l];
    li.a = e.a;
    li.b = e.b;
    li.length = e.leg.length;
    for (int id : e.touched) li.touched.push_back(seg_index.at(id));
    for (int id : e.leg.reflect_segments) li.reflects.push_back(seg_index.at(id));
    std::vector<int> gs;
    for (const auto& p : e.leg.realized) gs.push_back(groups.of(p.x));
    li.gmin = *std::min_element(gs.begin(), gs.end());
    li.gmax = *std::max_element(gs.begin(), gs.end());
    li.slab.assign(std::max(0, li.gmax - li.gmin), 0);
    for (std::size_t j = 0; j + 1 < gs.size(); ++j)
      for (int s = std::min(gs[j], gs[j + 1]); s < std::max(gs[j], gs[j + 1]); ++s)
        ++li.slab[s - li.gmin];
    starting[li.gmin].push_back(static_cast<int>(l));
    incident[e.a].push_back({static_cast<int>(l), 0});
    incident[e.b].push_back({static_cast<int>(l), 1});
  }

  std::vector<std::vector<int>> anchors_at(G), segments_at(G);
  std::vector<int> anchor_group(anchors.size());
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    anchor_group[a] = groups.of(anchors[a].anchor.pos.x);
    anchors_at[anchor_group[a]].push_back(static_cast<int>(a));
  }
  for (std::size_t s = 0; s < pb.segments.size(); ++s)
    segments_at[groups.of(pb.segments[s].x)].push_back(static_cast<int>(s));

  std::vector<int> segment_group(pb.segments.size());
  for (std::size_t s = 0; s < pb.segments.size(); ++s)
    segment_group[s] = groups.of(pb.segments[s].x);

  // States whose active legs agree on everything still ahead of the sweep
  // are interchangeable; key them by that future signature.
  auto future_key = [&](const State& st, int g) {
    const std::size_t n = st.legs.size();
    std::vector<std::vector<int>> rec(n);
    std::vector<bool> swapped(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      const LegInfo& li = legs[st.legs[i]];
      int ea = anchor_group[li.a] > g ? li.a : -1;
      int eb = anchor_group[li.b] > g ? li.b : -1;
      if (eb < ea) {
        std::swap(ea, eb);
        swapped[i] = true;
      }
      auto& r = rec[i];
      r = {li.gmax, ea, eb};
      for (int s : li.touched)
        if (segment_group[s] > g) r.push_back(s);
      r.push_back(-1);
      for (int s : li.reflects)
        if (segment_group[s] > g) r.push_back(s);
      r.push_back(-1);
      for (int k = g; k < li.gmax; ++k) r.push_back(li.slab[k - li.gmin]);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return rec[x] < rec[y]; });
    std::vector<int> canon(n);
    for (std::size_t c = 0; c < n; ++c) canon[order[c]] = static_cast<int>(c);
    auto map_code = [&](int code) {
      if (code < 0) return code;
      const int p = st.pos(code / 2);
      const int e = (code % 2) ^ (swapped[p] ? 1 : 0);
      return 2 * canon[p] + e;
    };
    std::vector<int> key;
    for (std::size_t c = 0; c < n; ++c) {
      const std::size_t i = order[c];
      key.insert(key.end(), rec[i].begin(), rec[i].end());
      key.push_back(INT_MIN);
      int m0 = st.mates[2 * i], m1 = st.mates[2 * i + 1];
      if (swapped[i]) std::swap(m0, m1);
      key.push_back(map_code(m0));
      key.push_back(map_code(m1));
      key.push_back(INT_MIN);
    }
    return key;
  };

  // every state's cost is a lower bound on its completions
  const double ub = heuristic_upper_bound(pb);
  const double prune_above = ub + 1e-9 * std::max(1.0, ub);

  std::vector<Transition> trans;
  std::map<std::vector<int>, std::pair<State, Entry>> table;
  table[std::vector<int>{}] = {State{}, Entry{0.0, -1}};

  for (int g = 0; g < G; ++g) {
    std::map<std::vector<int>, std::pair<State, Entry>> next;
    const auto& cands = starting[g];

    for (const auto& [key, se] : table) {
      const State& S = se.first;
      const Entry& entry = se.second;

      // degree already used at anchors of this group
      std::map<int, int> deg;
      for (int a : anchors_at[g]) deg[a] = 0;
      std::vector<int> reflected(pb.segments.size(), 0);
      for (int l : S.legs) {
        if (anchor_group[legs[l].a] == g) ++deg[legs[l].a];
        if (anchor_group[legs[l].b] == g) ++deg[legs[l].b];
        for (int r : legs[l].reflects) ++reflected[r];
      }

      std::vector<int> chosen;
      double chosen_cost = entry.cost;
      auto evaluate = [&]() {
        State base = S;
        double cost = entry.cost;
        for (int l : chosen) {
          base.add(l);
          cost += legs[l].length;
        }
        if (cost > prune_above) return;
        for (int s : segments_at[g]) {
          bool covered = false;
          for (int l : base.legs) {
            const auto& t = legs[l].touched;
            if (std::binary_search(t.begin(), t.end(), s)) {
              covered = true;
              break;
            }
          }
          if (!covered) return;
        }

        // anchor joins, branching on terminal assignments
        struct Partial {
          State st;
          std::vector<std::pair<int, int>> joins;
        };
        std::vector<Partial> partials{{base, {}}};
        for (int a : anchors_at[g]) {
          std::vector<int> ends;
          for (int l : base.legs) {
            if (legs[l].a == a) ends.push_back(2 * l);
            if (legs[l].b == a) ends.push_back(2 * l + 1);
          }
          const auto& info = anchors[a];
          std::vector<Partial> out;
          for (auto& P : partials) {
            if (info.terminals.empty()) {
              const int d = static_cast<int>(ends.size());
              if (d == 0 && !info.required) {
                out.push_back(std::move(P));
              } else if (d == 2) {
                Partial Q = P;
                if (join(Q.st, ends[0], ends[1])) {
                  Q.joins.push_back({ends[0], ends[1]});
                  out.push_back(std::move(Q));
                }
              }
              continue;
            }
            const auto& T = info.terminals;
            std::vector<bool> tdone(T.size(), false), edone(ends.size(), false);
            auto assign = [&](auto&& self, Partial cur) -> void {
              std::size_t ti = 0;
              while (ti < T.size() && tdone[ti]) ++ti;
              if (ti == T.size()) {
                if (std::all_of(edone.begin(), edone.end(), [](bool b) { return b; }))
                  out.push_back(std::move(cur));
                return;
              }
              tdone[ti] = true;
              const int tc = terminal_code(T[ti]);
              for (std::size_t tj = ti + 1; tj < T.size(); ++tj) {
                if (tdone[tj] || T[tj] / 2 != T[ti] / 2) continue;
                Partial nx = cur;
                if (join(nx.st, tc, terminal_code(T[tj]))) {
                  nx.joins.push_back({tc, terminal_code(T[tj])});
                  tdone[tj] = true;
                  self(self, std::move(nx));
                  tdone[tj] = false;
                }
              }
              for (std::size_t ej = 0; ej < ends.size(); ++ej) {
                if (edone[ej]) continue;
                Partial nx = cur;
                if (join(nx.st, tc, ends[ej])) {
                  nx.joins.push_back({tc, ends[ej]});
                  edone[ej] = true;
                  self(self, std::move(nx));
                  edone[ej] = false;
                }
              }
              tdone[ti] = false;
            };
            assign(assign, std::move(P));
          }
          partials = std::move(out);
          if (partials.empty()) return;
        }

        for (auto& P : partials) {
          State st = std::move(P.st);
          for (std::size_t i = 0; i < st.legs.size();) {
            const int l = st.legs[i];
            if (legs[l].gmax == g) {
              if (st.mates[2 * i] != kJoined || st.mates[2 * i + 1] != kJoined)
                throw InnerDpError("retiring leg with an open end");
              st.remove(l);
            } else {
              ++i;
            }
          }
          if (g + 1 < G) {
            int shadow = 0;
            for (int l : st.legs) shadow += legs[l].slab[g - legs[l].gmin];
            if (shadow > caps.shadow_cap) continue;
          }
          auto k = future_key(st, g);
          auto it = next.find(k);
          if (it != next.end() && it->second.second.cost <= cost) continue;
          trans.push_back({entry.trans, chosen, std::move(P.joins)});
          const int ti = static_cast<int>(trans.size()) - 1;
          if (it == next.end()) {
            if (next.size() >= caps.state_budget)
              throw InnerDpError("inner DP state budget exceeded");
            next.emplace(std::move(k), std::make_pair(std::move(st), Entry{cost, ti}));
          } else {
            it->second = {std::move(st), Entry{cost, ti}};
          }
        }
      };

      auto pick = [&](auto&& self, std::size_t idx) -> void {
        if (idx == cands.size()) {
          evaluate();
          return;
        }
        self(self, idx + 1);
        const int l = cands[idx];
        const auto& li = legs[l];
        const bool at_a = anchor_group[li.a] == g;
        const bool at_b = anchor_group[li.b] == g;
        if (at_a && deg[li.a] + 1 + (li.a == li.b ? 1 : 0) > anchors[li.a].max_degree()) return;
        if (at_b && deg[li.b] + 1 + (li.a == li.b ? 1 : 0) > anchors[li.b].max_degree()) return;
        for (int r : li.reflects)
          if (reflected[r] > 0) return;
        if (chosen_cost + li.length > prune_above) return;
        if (at_a) ++deg[li.a];
        if (at_b) ++deg[li.b];
        for (int r : li.reflects) ++reflected[r];
        chosen.push_back(l);
        chosen_cost += li.length;
        self(self, idx + 1);
        chosen_cost -= li.length;
        chosen.pop_back();
        for (int r : li.reflects) --reflected[r];
        if (at_a) --deg[li.a];
        if (at_b) --deg[li.b];
      };
      pick(pick, 0);
    }
    result.states += next.size();
    table = std::move(next);
    if (table.empty()) return result;
  }

  auto fin = table.find(std::vector<int>{});
  if (fin == table.end()) return result;
  result.feasible = true;
  result.cost = fin->second.second.cost;

  std::vector<int> used;
  std::map<int, int> jm;
  for (int t = fin->second.second.trans; t >= 0; t = trans[t].prev) {
    used.insert(used.end(), trans[t].new_legs.begin(), trans[t].new_legs.end());
    for (auto [u, v] : trans[t].joins) {
      jm[u] = v;
      jm[v] = u;
    }
  }
  for (std::size_t k = 0; k < pb.pairs.size(); ++k) {
    std::vector<TourPoint> path;
    const auto& pr = pb.pairs[k];
    path.push_back(pr.p.id >= 0 ? TourPoint{pr.p.pos, PortalId{pr.p.id}} : TourPoint{pr.p.pos});
    int cur = terminal_code(static_cast<int>(2 * k));
    for (std::size_t guard = 0; guard <= used.size() + 1; ++guard) {
      const int nx = jm.at(cur);
      if (nx < 0) {
        if (!(pr.q.pos == path.back().position))
          path.push_back(pr.q.id >= 0 ? TourPoint{pr.q.pos, PortalId{pr.q.id}}
                                      : TourPoint{pr.q.pos});
        break;
      }
      const int l = nx / 2;
      const auto& e = enumerated[l];
      std::vector<TourPoint> pts;
      pts.push_back(anchor_point(e.leg.start));
      for (std::size_t j = 0; j < e.leg.reflect_segments.size(); ++j)
        pts.push_back({e.leg.realized[j + 1], SegmentId{e.leg.reflect_segments[j]}});
      pts.push_back(anchor_point(e.leg.end));
      if (nx % 2 == 1) std::reverse(pts.begin(), pts.end());
      path.insert(path.end(), pts.begin() + 1, pts.end());
      cur = 2 * l + (1 - nx % 2);
    }
    result.paths.push_back(std::move(path));
  }
  return result;
}

double brute_force_square(const LeafProblem& pb) {
  if (pb.segments.size() > 5 || pb.pairs.size() > 2)
    throw InnerDpError("brute_force_square: at most 5 segments and 2 pairs");
  const auto items = leaf_items(pb);
  const std::size_t k = pb.pairs.size();
  if (k == 0) return items.empty() ? 0.0 : std::numeric_limits<double>::infinity();

  std::map<std::pair<std::size_t, std::vector<int>>, double> memo;
  auto path_cost = [&](std::size_t pair, const std::vector<int>& seq) {
    auto key = std::make_pair(pair, seq);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const auto& pr = pb.pairs[pair];
    double c;
    if (seq.empty()) {
      c = distance(pr.p.pos, pr.q.pos);
    } else {
      std::vector<ChainNode> nodes;
      nodes.push_back({pr.p.pos.x, pr.p.pos.y, pr.p.pos.y});
      for (int i : seq) nodes.push_back(items[i]);
      nodes.push_back({pr.q.pos.x, pr.q.pos.y, pr.q.pos.y});
      c = optimize_touch_chain(nodes, false).cost;
    }
    memo[key] = c;
    return c;
  };

  std::vector<int> perm(items.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    if (k == 1) {
      best = std::min(best, path_cost(0, perm));
    } else {
      for (std::size_t cut = 0; cut <= perm.size(); ++cut) {
        std::vector<int> first(perm.begin(), perm.begin() + cut);
        std::vector<int> second(perm.begin() + cut, perm.end());
        best = std::min(best, path_cost(0, first) + path_cost(1, second));
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace tspn
