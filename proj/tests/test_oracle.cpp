#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "tspn/oracle.hpp"
#include "tspn/structure.hpp"

using namespace tspn;

namespace {

Instance make(std::vector<Segment> segs) {
  Instance inst;
  inst.segments = std::move(segs);
  return inst;
}

double cyc_cost(const std::vector<Point>& p) {
  double c = 0;
  for (std::size_t i = 0; i < p.size(); ++i) c += distance(p[i], p[(i + 1) % p.size()]);
  return c;
}

// Cyclic coordinate minimisation by golden-section search; no closed forms.
double golden_cd(const VisitOrder& order, const Instance& inst) {
  std::vector<Point> p;
  for (int id : order.sequence) {
    const auto& s = inst.by_id(id);
    p.push_back({s.x, 0.5 * (s.y_bot + s.y_top)});
  }
  const double g = (std::sqrt(5.0) - 1) / 2;
  double prev = cyc_cost(p);
  for (int sweep = 0; sweep < 20000; ++sweep) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto& s = inst.by_id(order.sequence[i]);
      double a = s.y_bot, b = s.y_top;
      auto f = [&](double y) {
        p[i].y = y;
        return cyc_cost(p);
      };
      double c = b - g * (b - a), d = a + g * (b - a);
      double fc = f(c), fd = f(d);
      for (int it = 0; it < 80; ++it) {
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - g * (b - a);
          fc = f(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + g * (b - a);
          fd = f(d);
        }
      }
      double best = 0.5 * (a + b);
      for (double cand : {s.y_bot, s.y_top})
        if (f(cand) < f(best)) best = cand;
      p[i].y = best;
    }
    const double cur = cyc_cost(p);
    if (prev - cur < 1e-14) break;
    prev = cur;
  }
  return cyc_cost(p);
}

double brute_point_tsp(const std::vector<Point>& pts) {
  std::vector<int> idx(pts.size() - 1);
  std::iota(idx.begin(), idx.end(), 1);
  double best = 1e300;
  do {
    std::vector<Point> seq{pts[0]};
    for (int i : idx) seq.push_back(pts[static_cast<std::size_t>(i)]);
    best = std::min(best, cyc_cost(seq));
  } while (std::next_permutation(idx.begin(), idx.end()));
  return best;
}

}  // namespace

TEST_CASE("canonical orders") {
  CHECK(canonical({{3, 1, 2}}).sequence == std::vector<int>{1, 2, 3});
  CHECK(canonical({{2, 4, 1, 3}}).sequence == std::vector<int>{1, 3, 2, 4});
}

TEST_CASE("touch points: simple configurations") {
  auto two = make({{0, 0, 0, 1}, {1, 5, 0, 1}});
  auto r = optimize_touch_points({{0, 1}}, two);
  CHECK(r.cost == doctest::Approx(10.0));
  CHECK(r.points[0].y == doctest::Approx(r.points[1].y));

  // middle segment straddles the line between its neighbours
  auto three = make({{0, 0, 0, 1}, {1, 2, 3, 4}, {2, 4, 6, 7}, {3, 2, -10, -9}});
  auto t = optimize_touch_points({{0, 1, 2, 3}}, three);
  const Point a = t.points[0], m = t.points[1], b = t.points[2];
  const double cross = (m.x - a.x) * (b.y - a.y) - (m.y - a.y) * (b.x - a.x);
  CHECK(std::abs(cross) < 1e-7);
  CHECK(t.converged);
}

TEST_CASE("touch points match golden-section minimisation") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    auto inst = generate(GeneratorKind::Uniform, 5, {}, seed);
    VisitOrder order{{0, 1, 2, 3, 4}};
    if (seed % 2) order.sequence = {0, 2, 4, 1, 3};
    auto r = optimize_touch_points(order, inst);
    CHECK(r.cost == doctest::Approx(golden_cd(order, inst)).epsilon(1e-6));
    CHECK(r.cost == doctest::Approx(tour_cost(bound_tour(order, r.points))));
  }
}

TEST_CASE("converged touch points obey the straight/pure/tip trichotomy") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto inst = perturb_snap(generate(GeneratorKind::Uniform, 6, {}, seed), 0.5);
    VisitOrder order{{0, 1, 2, 3, 4, 5}};
    auto r = optimize_touch_points(order, inst);
    auto tour = bound_tour(order, r.points);
    auto cls = classify_points(tour, inst);
    for (auto& c : cls) {
      REQUIRE(c);
      if (!c->at_tip) {
        const bool ok = c->kind == PointKind::Straight || (c->is_reflection() && c->pure);
        CHECK(ok);
      }
    }
  }
}

TEST_CASE("open path touch points") {
  auto one = make({{0, 2, 0, 1}});
  // (0,3) -> segment at x=2 -> (4,3): best touch is the top tip
  auto r = optimize_touch_path({0, 3}, {0}, {4, 3}, one);
  CHECK(r.points[0].y == doctest::Approx(1.0));
  CHECK(r.cost == doctest::Approx(2 * std::hypot(2.0, 2.0)));
  // mirror formula: (0,0.2) -> x=2 -> (1,0.8), reflection interior
  auto m = optimize_touch_path({0, 0.2}, {0}, {1, 0.8}, one);
  const double expect = std::hypot(2.0 + 1.0, 0.6);
  CHECK(m.cost == doctest::Approx(expect));
}

TEST_CASE("exact oracle small cases") {
  auto single = make({{4, 1, 0, 1}});
  CHECK(exact_oracle(single).cost == 0.0);
  auto two = make({{0, 0, 0, 1}, {1, 3, 0, 1}});
  CHECK(exact_oracle(two).cost == doctest::Approx(6.0));
  CHECK_THROWS_AS(exact_oracle(generate(GeneratorKind::Uniform, 10, {}, 1)), OracleError);
}

TEST_CASE("exact oracle vs discretized DP") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto inst = generate(GeneratorKind::Uniform, 6, {}, seed);
    const auto ex = exact_oracle(inst);
    CHECK(ex.cost == doctest::Approx(tour_cost(ex.tour)));
    CHECK(is_feasible(inst, ex.tour));
    const int k = 9;
    const double hk = held_karp_discretized(inst, k);
    CHECK(ex.cost <= hk + 1e-9);
    CHECK(hk - ex.cost <= 2 * 6 * (inst.lambda / (k - 1)) + 1e-9);
  }
}

TEST_CASE("exact oracle invariances") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto inst = generate(GeneratorKind::Uniform, 6, {}, 100 + seed);
    const double base = exact_oracle(inst).cost;
    auto relabeled = inst;
    for (auto& s : relabeled.segments) s.id = 50 - s.id;
    CHECK(exact_oracle(relabeled).cost == doctest::Approx(base).epsilon(1e-9));
    auto mirrored = inst;
    for (auto& s : mirrored.segments) s.x = -s.x;
    CHECK(exact_oracle(mirrored).cost == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("held-karp discretized") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto inst = generate(GeneratorKind::Uniform, 6, {}, seed);
    std::vector<Point> tips;
    for (auto& s : inst.segments) tips.push_back(s.bottom());
    CHECK(held_karp_discretized(inst, 1) == doctest::Approx(brute_point_tsp(tips)));
    double prev = held_karp_discretized(inst, 1);
    for (int k : {2, 3, 5, 9, 17, 33}) {  // nested sample sets
      const double c = held_karp_discretized(inst, k);
      CHECK(c <= prev + 1e-12);
      prev = c;
    }
  }
  CHECK_THROWS_AS(held_karp_discretized(generate(GeneratorKind::Uniform, 13, {}, 0), 2), OracleError);
  CHECK_THROWS_AS(held_karp_discretized(generate(GeneratorKind::Uniform, 3, {}, 0), 34), OracleError);
}
