#include "tspn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tspn {

VisitOrder canonical(VisitOrder order) {
  auto& s = order.sequence;
  if (s.size() < 3) {
    if (s.size() == 2 && s[1] < s[0]) std::swap(s[0], s[1]);
    return order;
  }
  std::rotate(s.begin(), std::min_element(s.begin(), s.end()), s.end());
  if (s.back() < s[1]) std::reverse(s.begin() + 1, s.end());
  return order;
}

namespace {

// Touch points along a chain of vertical segments. Fixed ends are encoded as
// variables with lo == hi.
struct Chain {
  std::vector<double> x, lo, hi;
  bool closed = true;

  std::size_t size() const { return x.size(); }

  template <typename F>
  void for_each_leg(F&& f) const {
    const std::size_t m = size();
    if (m < 2) return;
    const std::size_t legs = closed ? m : m - 1;
    for (std::size_t i = 0; i < legs; ++i) f(i, (i + 1) % m);
  }

  double cost(const std::vector<double>& y) const {
    double c = 0.0;
    for_each_leg([&](std::size_t u, std::size_t v) { c += std::hypot(x[u] - x[v], y[u] - y[v]); });
    return c;
  }

  bool fixed(std::size_t i) const { return lo[i] == hi[i]; }
};

void cd_sweep(const Chain& ch, std::vector<double>& y) {
  const std::size_t m = ch.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (ch.fixed(i)) continue;
    std::size_t pa, pb;
    if (ch.closed) {
      pa = (i + m - 1) % m;
      pb = (i + 1) % m;
    } else {
      if (i == 0 || i + 1 == m) continue;
      pa = i - 1;
      pb = i + 1;
    }
    const double da = std::abs(ch.x[i] - ch.x[pa]);
    const double db = std::abs(ch.x[i] - ch.x[pb]);
    double target;
    if (da == 0.0) target = y[pa];
    else if (db == 0.0) target = y[pb];
    else target = y[pa] + (y[pb] - y[pa]) * da / (da + db);
    y[i] = std::clamp(target, ch.lo[i], ch.hi[i]);
  }
}

// Solves A z = r in place (A dense, symmetric positive definite-ish).
bool solve_dense(std::vector<double>& A, std::vector<double>& r, std::size_t n) {
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t k = c + 1; k < n; ++k)
      if (std::abs(A[k * n + c]) > std::abs(A[piv * n + c])) piv = k;
    if (std::abs(A[piv * n + c]) < 1e-300) return false;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(A[c * n + k], A[piv * n + k]);
      std::swap(r[c], r[piv]);
    }
    for (std::size_t k = c + 1; k < n; ++k) {
      const double f = A[k * n + c] / A[c * n + c];
      if (f == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) A[k * n + j] -= f * A[c * n + j];
      r[k] -= f * r[c];
    }
  }
  for (std::size_t c = n; c-- > 0;) {
    double s = r[c];
    for (std::size_t j = c + 1; j < n; ++j) s -= A[c * n + j] * r[j];
    r[c] = s / A[c * n + c];
  }
  return true;
}

// Projected Newton steps on the free coordinates. Returns false when the
// objective is not smooth at y (a zero-length leg with equal x).
bool newton_polish(const Chain& ch, std::vector<double>& y, int steps) {
  const std::size_t m = ch.size();
  for (int it = 0; it < steps; ++it) {
    std::vector<double> g(m, 0.0), H(m * m, 0.0);
    bool smooth = true;
    ch.for_each_leg([&](std::size_t u, std::size_t v) {
      const double dx = ch.x[u] - ch.x[v], dy = y[u] - y[v];
      const double len = std::hypot(dx, dy);
      if (len == 0.0 || dx == 0.0) {
        smooth = false;
        return;
      }
      const double gu = dy / len;
      const double h = dx * dx / (len * len * len);
      g[u] += gu;
      g[v] -= gu;
      H[u * m + u] += h;
      H[v * m + v] += h;
      H[u * m + v] -= h;
      H[v * m + u] -= h;
    });
    if (!smooth) return false;
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < m; ++i) {
      if (ch.fixed(i)) continue;
      const double span = ch.hi[i] - ch.lo[i];
      const double d = 1e-12 * std::max(1.0, span);
      if (y[i] <= ch.lo[i] + d && g[i] > 0) continue;
      if (y[i] >= ch.hi[i] - d && g[i] < 0) continue;
      free.push_back(i);
    }
    if (free.empty()) return true;
    double gmax = 0.0;
    for (auto i : free) gmax = std::max(gmax, std::abs(g[i]));
    if (gmax < 1e-15) return true;
    const std::size_t f = free.size();
    std::vector<double> A(f * f), r(f);
    for (std::size_t a = 0; a < f; ++a) {
      r[a] = -g[free[a]];
      for (std::size_t b = 0; b < f; ++b) A[a * f + b] = H[free[a] * m + free[b]];
      A[a * f + a] += 1e-14;
    }
    if (!solve_dense(A, r, f)) return true;
    const double base = ch.cost(y);
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      std::vector<double> cand = y;
      for (std::size_t a = 0; a < f; ++a)
        cand[free[a]] = std::clamp(y[free[a]] + t * r[a], ch.lo[free[a]], ch.hi[free[a]]);
      if (ch.cost(cand) < base) {
        y = std::move(cand);
        improved = true;
        break;
      }
    }
    if (!improved) return true;
  }
  return true;
}

TouchResult solve_chain(const Chain& ch, std::vector<double> y, double tol, int max_iters) {
  TouchResult res;
  double cur = ch.cost(y);
  int sweeps = 0;
  res.converged = false;
  while (sweeps < max_iters) {
    const double round_start = cur;
    int inner = 0;
    while (sweeps < max_iters && inner < 64) {
      cd_sweep(ch, y);
      ++sweeps;
      ++inner;
      const double next = ch.cost(y);
      const double gain = cur - next;
      cur = next;
      if (gain < tol) break;
    }
    newton_polish(ch, y, 30);
    cd_sweep(ch, y);
    ++sweeps;
    cur = ch.cost(y);
    if (round_start - cur < tol) {
      res.converged = true;
      break;
    }
  }
  res.iterations = sweeps;
  res.cost = cur;
  res.points.resize(ch.size());
  for (std::size_t i = 0; i < ch.size(); ++i) res.points[i] = {ch.x[i], y[i]};
  return res;
}

}  // namespace

TouchResult optimize_touch_points(const VisitOrder& order, const Instance& inst, double tol,
                                  int max_iters) {
  Chain ch;
  ch.closed = true;
  std::vector<double> y;
  for (int id : order.sequence) {
    const Segment& s = inst.by_id(id);
    ch.x.push_back(s.x);
    ch.lo.push_back(s.y_bot);
    ch.hi.push_back(s.y_top);
    y.push_back(0.5 * (s.y_bot + s.y_top));
  }
  if (ch.size() == 1) {
    TouchResult r;
    r.points = {{ch.x[0], ch.lo[0]}};
    return r;
  }
  return solve_chain(ch, std::move(y), tol, max_iters);
}

TouchResult optimize_touch_path(const Point& start, const std::vector<int>& segment_ids,
                                const Point& end, const Instance& inst, double tol,
                                int max_iters) {
  Chain ch;
  ch.closed = false;
  std::vector<double> y;
  auto add_fixed = [&](const Point& p) {
    ch.x.push_back(p.x);
    ch.lo.push_back(p.y);
    ch.hi.push_back(p.y);
    y.push_back(p.y);
  };
  add_fixed(start);
  for (int id : segment_ids) {
    const Segment& s = inst.by_id(id);
    ch.x.push_back(s.x);
    ch.lo.push_back(s.y_bot);
    ch.hi.push_back(s.y_top);
    y.push_back(0.5 * (s.y_bot + s.y_top));
  }
  add_fixed(end);
  auto res = solve_chain(ch, std::move(y), tol, max_iters);
  // strip the fixed ends
  res.points.erase(res.points.begin());
  res.points.pop_back();
  return res;
}

TouchResult optimize_touch_chain(const std::vector<ChainNode>& nodes, bool closed, double tol,
                                 int max_iters) {
  Chain ch;
  ch.closed = closed;
  std::vector<double> y;
  for (const auto& nd : nodes) {
    if (nd.lo > nd.hi) throw OracleError("chain node with lo > hi");
    ch.x.push_back(nd.x);
    ch.lo.push_back(nd.lo);
    ch.hi.push_back(nd.hi);
    y.push_back(0.5 * (nd.lo + nd.hi));
  }
  if (ch.size() <= 1) {
    TouchResult r;
    if (ch.size() == 1) r.points = {{ch.x[0], ch.lo[0]}};
    return r;
  }
  return solve_chain(ch, std::move(y), tol, max_iters);
}

Tour bound_tour(const VisitOrder& order, const std::vector<Point>& points) {
  Tour t;
  t.closed = true;
  for (std::size_t i = 0; i < order.sequence.size(); ++i) {
    const TourPoint tp{points[i], SegmentId{order.sequence[i]}};
    if (!t.points.empty() && t.points.back().position == tp.position) continue;
    t.points.push_back(tp);
  }
  while (t.points.size() > 1 && t.points.back().position == t.points.front().position)
    t.points.pop_back();
  return t;
}

bool single_cover_line(const Instance& inst) {
  if (inst.segments.empty()) return false;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& s : inst.segments) {
    lo = std::max(lo, s.y_bot);
    hi = std::min(hi, s.y_top);
  }
  return lo <= hi;
}

OracleResult exact_oracle(const Instance& inst, int max_n, double tol) {
  const int n = static_cast<int>(inst.size());
  if (n == 0) throw OracleError("exact_oracle: empty instance");
  if (n > max_n)
    throw OracleError("exact_oracle: n = " + std::to_string(n) + " exceeds max_n = " +
                      std::to_string(max_n));
  OracleResult best;
  if (n == 1) {
    const auto& s = inst.segments[0];
    best.order.sequence = {s.id};
    best.tour.points = {TourPoint{s.bottom(), SegmentId{s.id}}};
    return best;
  }
  if (single_cover_line(inst)) {
    // doubled span between the extreme segments, along the common line
    double y = inst.segments[0].y_bot;
    for (const auto& s : inst.segments) y = std::max(y, s.y_bot);
    const Segment* left = &inst.segments[0];
    const Segment* right = &inst.segments[0];
    for (const auto& s : inst.segments) {
      if (s.x < left->x || (s.x == left->x && s.id < left->id)) left = &s;
      if (s.x > right->x || (s.x == right->x && s.id < right->id)) right = &s;
    }
    best.tour.points.push_back({{left->x, y}, SegmentId{left->id}});
    if (right->x != left->x) best.tour.points.push_back({{right->x, y}, SegmentId{right->id}});
    best.cost = tour_cost(best.tour);
    // order: sweep right along the line, then come back
    std::vector<const Segment*> by_x;
    for (const auto& s : inst.segments) by_x.push_back(&s);
    std::sort(by_x.begin(), by_x.end(), [](const Segment* a, const Segment* b) {
      return a->x != b->x ? a->x < b->x : a->id < b->id;
    });
    for (auto* s : by_x) best.order.sequence.push_back(s->id);
    best.order = canonical(best.order);
    return best;
  }

  std::vector<int> ids;
  for (const auto& s : inst.segments) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  std::vector<int> rest(ids.begin() + 1, ids.end());
  best.cost = std::numeric_limits<double>::infinity();
  TouchResult best_touch;
  int total_iters = 0;
  do {
    if (rest.size() >= 2 && rest.back() < rest.front()) continue;  // mirror duplicate
    VisitOrder order;
    order.sequence.push_back(ids[0]);
    order.sequence.insert(order.sequence.end(), rest.begin(), rest.end());
    auto touch = optimize_touch_points(order, inst, tol);
    total_iters += touch.iterations;
    if (touch.cost < best.cost) {
      best.cost = touch.cost;
      best.order = order;
      best_touch = std::move(touch);
    }
  } while (std::next_permutation(rest.begin(), rest.end()));

  auto un = uncross(bound_tour(best.order, best_touch.points));
  best.tour = std::move(un.tour);
  best.cost = tour_cost(best.tour);
  best.iterations = total_iters;
  return best;
}

// ---- discretized cross-check ------------------------------------------------

std::vector<Point> segment_samples(const Segment& s, int k) {
  if (k < 1) throw OracleError("samples per segment must be >= 1");
  if (k == 1) return {s.bottom()};
  std::vector<Point> out;
  for (int j = 0; j < k; ++j)
    out.push_back({s.x, s.y_bot + s.length() * static_cast<double>(j) / (k - 1)});
  return out;
}

DiscreteTour held_karp_candidates(const std::vector<std::vector<Point>>& groups) {
  const int n = static_cast<int>(groups.size());
  DiscreteTour best;
  if (n == 0) throw OracleError("held_karp: no groups");
  if (n > 16) throw OracleError("held_karp: too many groups");
  if (n == 1) {
    best.visits = {{0, 0}};
    return best;
  }
  // flatten candidates
  std::vector<int> offset(n + 1, 0);
  for (int g = 0; g < n; ++g) offset[g + 1] = offset[g] + static_cast<int>(groups[g].size());
  const int total = offset[n];
  std::vector<Point> pts;
  for (const auto& g : groups) pts.insert(pts.end(), g.begin(), g.end());
  std::vector<double> d(static_cast<std::size_t>(total) * total);
  for (int a = 0; a < total; ++a)
    for (int b = 0; b < total; ++b) d[static_cast<std::size_t>(a) * total + b] = distance(pts[a], pts[b]);
  auto dist = [&](int a, int b) { return d[static_cast<std::size_t>(a) * total + b]; };

  const int others = n - 1;  // groups 1..n-1, bit g-1
  const std::size_t masks = std::size_t{1} << others;
  const double inf = std::numeric_limits<double>::infinity();
  best.cost = inf;
  // dp[mask][candidate] for candidates of groups 1..n-1 (flattened index - offset[1])
  const int width = total - offset[1];
  std::vector<double> dp(masks * width);
  std::vector<int> parent(masks * width);
  auto group_of = [&](int c) {
    return static_cast<int>(std::upper_bound(offset.begin(), offset.end(), c) - offset.begin()) - 1;
  };
  for (int s0 = offset[0]; s0 < offset[1]; ++s0) {
    std::fill(dp.begin(), dp.end(), inf);
    for (int c = offset[1]; c < total; ++c) {
      const int g = group_of(c);
      dp[(std::size_t{1} << (g - 1)) * width + (c - offset[1])] = dist(s0, c);
      parent[(std::size_t{1} << (g - 1)) * width + (c - offset[1])] = s0;
    }
    for (std::size_t mask = 1; mask < masks; ++mask) {
      for (int c = offset[1]; c < total; ++c) {
        const double cur = dp[mask * width + (c - offset[1])];
        if (cur == inf) continue;
        for (int g = 1; g < n; ++g) {
          const std::size_t bit = std::size_t{1} << (g - 1);
          if (mask & bit) continue;
          const std::size_t nm = mask | bit;
          for (int e = offset[g]; e < offset[g + 1]; ++e) {
            const double v = cur + dist(c, e);
            double& slot = dp[nm * width + (e - offset[1])];
            if (v < slot) {
              slot = v;
              parent[nm * width + (e - offset[1])] = c;
            }
          }
        }
      }
    }
    const std::size_t full = masks - 1;
    for (int c = offset[1]; c < total; ++c) {
      const double v = dp[full * width + (c - offset[1])] + dist(c, s0);
      if (v < best.cost) {
        best.cost = v;
        // reconstruct
        std::vector<std::pair<int, int>> rev;
        std::size_t mask = full;
        int cur = c;
        while (cur >= offset[1]) {
          const int g = group_of(cur);
          rev.emplace_back(g, cur - offset[g]);
          const int prev = parent[mask * width + (cur - offset[1])];
          mask &= ~(std::size_t{1} << (g - 1));
          cur = prev;
        }
        rev.emplace_back(0, s0 - offset[0]);
        best.visits.assign(rev.rbegin(), rev.rend());
      }
    }
  }
  return best;
}

double held_karp_discretized(const Instance& inst, int k) {
  const int n = static_cast<int>(inst.size());
  if (n > 12) throw OracleError("held_karp_discretized: n must be <= 12");
  if (k < 1 || k > 33) throw OracleError("held_karp_discretized: k must lie in [1, 33]");
  std::vector<std::vector<Point>> groups;
  for (const auto& s : inst.segments) groups.push_back(segment_samples(s, k));
  return held_karp_candidates(groups).cost;
}

}  // namespace tspn
