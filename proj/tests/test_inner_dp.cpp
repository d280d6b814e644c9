#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "tspn/inner_dp.hpp"

using namespace tspn;

namespace {

Anchor portal_anchor(Point p, int id = -1) {
  Anchor a;
  a.kind = AnchorKind::Portal;
  a.pos = p;
  a.portal = id;
  return a;
}

Anchor tip_anchor(const Segment& s, bool top) {
  Anchor a;
  a.kind = AnchorKind::Tip;
  a.pos = top ? s.top() : s.bottom();
  a.segment = s.id;
  return a;
}

bool path_touches(const std::vector<TourPoint>& path, const Segment& s) {
  const double tol = 1e-7;
  if (path.size() == 1) return s.contains(path[0].position, tol);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Point a = path[i].position, b = path[i + 1].position;
    if (s.x < std::min(a.x, b.x) - tol || s.x > std::max(a.x, b.x) + tol) continue;
    if (std::abs(b.x - a.x) < tol) {
      if (std::max(a.y, b.y) >= s.y_bot - tol && std::min(a.y, b.y) <= s.y_top + tol) return true;
      continue;
    }
    const double y = a.y + (s.x - a.x) / (b.x - a.x) * (b.y - a.y);
    if (y >= s.y_bot - tol && y <= s.y_top + tol) return true;
  }
  return false;
}

double dp_cost(const LeafProblem& pb, const InnerCaps& caps) {
  const auto r = inner_dp_solve(pb, caps);
  return r.feasible ? r.cost : std::numeric_limits<double>::infinity();
}

}  // namespace

TEST_CASE("event_points") {
  LeafProblem pb;
  pb.square = {1, 1, 16};
  CHECK(event_points(pb).empty());

  pb.segments = {{0, 10, 3, 4}, {1, 4, 5, 6}, {2, 6, 2, 3}};
  const Portal p{7, {9, 1}};
  pb.pairs = {{p, p}};
  auto ev = event_points(pb);
  REQUIRE(ev.size() == 4);
  std::vector<double> xs;
  for (const auto& e : ev) xs.push_back(e.x);
  auto sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  CHECK(xs == sorted);
  CHECK(ev[2].kind == EventKind::Portal);
  CHECK(ev[2].id == 7);

  pb.segments.push_back({3, 10, 8, 9});
  CHECK_THROWS_AS(event_points(pb), InnerDpError);
}

TEST_CASE("realize_large_leg") {
  const Anchor a = portal_anchor({0, 0});
  const Anchor b = portal_anchor({0, 2});

  SUBCASE("straight") {
    auto leg = realize_large_leg(a, portal_anchor({3, 4}), {});
    REQUIRE(leg);
    CHECK(leg->length == doctest::Approx(5.0));
    CHECK(leg->realized.size() == 2);
  }
  SUBCASE("symmetric mirror at mid-height") {
    const Segment s{0, 2, 0.5, 1.5};
    auto leg = realize_large_leg(a, b, {s});
    REQUIRE(leg);
    REQUIRE(leg->realized.size() == 3);
    CHECK(leg->realized[1].x == 2.0);
    CHECK(leg->realized[1].y == doctest::Approx(1.0));
    // equal angles on both sides
    const Point r = leg->realized[1];
    CHECK(std::atan2(r.y - a.pos.y, r.x - a.pos.x) ==
          doctest::Approx(-std::atan2(r.y - b.pos.y, r.x - b.pos.x)));
    CHECK(leg->length == doctest::Approx(std::hypot(4.0, 2.0)));
  }
  SUBCASE("reflection outside the segment") {
    const Segment s{0, 2, 1.5, 3.0};
    CHECK_FALSE(realize_large_leg(a, b, {s}));
  }
  SUBCASE("mirror not met in order") {
    const Segment s{0, -2, 0.5, 1.5};
    CHECK_FALSE(realize_large_leg(a, portal_anchor({3, 1}), {s}));
  }
}

TEST_CASE("enumerate_large_legs") {
  LeafProblem pb;
  pb.square = {1, 1, 16};
  pb.segments = {{0, 4, 6, 8}, {1, 10, 6.5, 9}};
  InnerCaps caps;
  caps.reflect_cap = 0;
  auto legs = enumerate_large_legs(pb, caps);
  CHECK(legs.size() == 6);  // all tip pairs, straight
  for (const auto& l : legs) CHECK(l.reflect_segments.empty());

  caps.reflect_cap = 1;
  auto more = enumerate_large_legs(pb, caps);
  CHECK(more.size() > legs.size());
  const Segment& s0 = pb.segments[0];
  const Segment& s1 = pb.segments[1];
  // tip to tip of segment 0 bouncing off segment 1 at y = 7
  auto bounce = realize_large_leg(tip_anchor(s0, false), tip_anchor(s0, true), {s1});
  REQUIRE(bounce);
  CHECK(bounce->realized[1].y == doctest::Approx(7.0));
  // and the same from segment 1's tips off segment 0, at y = 7.75
  auto back = realize_large_leg(tip_anchor(s1, true), tip_anchor(s1, false), {s0});
  REQUIRE(back);
  CHECK(back->realized[1].y == doctest::Approx(7.75));
  // this bounce would land at y = 9.2, above segment 1
  CHECK_FALSE(realize_large_leg(tip_anchor(s0, true), portal_anchor({1, 11}), {s1}));
  for (const auto& l : more) {
    std::vector<Segment> refl;
    for (int id : l.reflect_segments) refl.push_back(id == 0 ? s0 : s1);
    auto again = realize_large_leg(l.start, l.end, refl);
    REQUIRE(again);
    CHECK(again->length == doctest::Approx(l.length));
    CHECK(again->realized.size() == l.realized.size());
  }
}

TEST_CASE("check_promising") {
  LeafProblem pb;
  pb.square = {1, 1, 16};
  pb.segments = {{0, 8, 5, 9}};
  pb.pairs = {{{300, {1, 3}}, {100, {17, 3}}}};
  const auto legs = enumerate_large_legs(pb, InnerCaps{});
  REQUIRE(legs.size() >= 2);

  Configuration empty;
  CHECK(check_promising(empty, legs, pb));

  Configuration one;
  one.legs = {0};
  one.mates = {1, 0};
  CHECK(check_promising(one, legs, pb));

  // both ends of the pair attached to the two ends of one leg, so the leg's
  // ends are already saturated and terminal 0 shows up twice
  Configuration bad;
  bad.legs = {0};
  bad.mates = {-2, -2};
  CHECK_FALSE(check_promising(bad, legs, pb));

  Configuration asym;
  asym.legs = {0, 1};
  asym.mates = {2, 1, -1, -1};
  CHECK_FALSE(check_promising(asym, legs, pb));
}

TEST_CASE("inner_dp_solve hand cases") {
  LeafProblem pb;
  pb.square = {1, 1, 16};
  const auto caps = InnerCaps::from_epsilon(0.5);
  CHECK(caps.shadow_cap == 16);
  CHECK(caps.reflect_cap == 4);

  SUBCASE("no segments, pair on one side") {
    pb.pairs = {{{1, {3, 1}}, {2, {11, 1}}}};
    auto r = inner_dp_solve(pb, caps);
    REQUIRE(r.feasible);
    CHECK(r.cost == doctest::Approx(8.0));
    REQUIRE(r.paths.size() == 1);
    CHECK(r.paths[0].front().position == Point{3, 1});
    CHECK(r.paths[0].back().position == Point{11, 1});
  }
  SUBCASE("bend at a tip") {
    pb.segments = {{0, 8, 5, 8}};
    pb.pairs = {{{301, {1, 3}}, {101, {17, 3}}}};
    auto r = inner_dp_solve(pb, caps);
    REQUIRE(r.feasible);
    CHECK(r.cost == doctest::Approx(std::hypot(7.0, 2.0) + std::hypot(9.0, 2.0)));
    CHECK(r.cost == doctest::Approx(brute_force_square(pb)));
  }
  SUBCASE("empty square without pairs") {
    auto r = inner_dp_solve(pb, caps);
    CHECK(r.feasible);
    CHECK(r.cost == 0.0);
  }
  SUBCASE("segments but no pairs") {
    pb.segments = {{0, 8, 5, 8}};
    CHECK_FALSE(inner_dp_solve(pb, caps).feasible);
  }
}

TEST_CASE("inner_dp_solve equals brute force on random squares") {
  const auto caps = InnerCaps::from_epsilon(0.5);
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    const auto pb = testing::random_leaf(seed, 4, 2, 2);
    const auto r = inner_dp_solve(pb, caps);
    const double bf = brute_force_square(pb);
    REQUIRE(r.feasible);
    CHECK(std::abs(r.cost - bf) <= 1e-6 * std::max(1.0, bf));

    // feasibility audit of the reconstructed collection
    REQUIRE(r.paths.size() == pb.pairs.size());
    double sum = 0.0;
    std::vector<Polyline> lines;
    for (std::size_t k = 0; k < r.paths.size(); ++k) {
      const auto& path = r.paths[k];
      CHECK(path.front().position == pb.pairs[k].p.pos);
      CHECK(path.back().position == pb.pairs[k].q.pos);
      Polyline pl;
      for (std::size_t i = 0; i < path.size(); ++i) {
        CHECK(pb.square.contains(path[i].position, 1e-9));
        pl.points.push_back(path[i].position);
        if (i + 1 < path.size()) sum += distance(path[i].position, path[i + 1].position);
      }
      lines.push_back(pl);
    }
    CHECK(sum == doctest::Approx(r.cost));
    for (const auto& s : pb.segments) {
      bool hit = false;
      for (const auto& path : r.paths) hit = hit || path_touches(path, s);
      CHECK(hit);
    }
    for (const auto& q : pb.required) {
      bool visited = false;
      for (const auto& path : r.paths)
        for (const auto& tp : path) visited = visited || distance(tp.position, q.pos) < 1e-9;
      CHECK(visited);
    }
    CHECK(shadow_max(lines) <= caps.shadow_cap);
    ++checked;
  }
  CHECK(checked == 120);
}

TEST_CASE("closed loops and shared portals") {
  const auto caps = InnerCaps::from_epsilon(0.5);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto pb = testing::random_leaf(seed + 1000, 4, 2, 1);
    if (seed % 2 == 0) pb.pairs[0].q = pb.pairs[0].p;
    else if (pb.pairs.size() == 2) pb.pairs[1].p = pb.pairs[0].q;
    const auto r = inner_dp_solve(pb, caps);
    REQUIRE(r.feasible);
    const double bf = brute_force_square(pb);
    CHECK(std::abs(r.cost - bf) <= 1e-6 * std::max(1.0, bf));
  }
}

TEST_CASE("larger caps never increase the cost") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto pb = testing::random_leaf(seed + 77, 4, 2, 1);
    double prev = std::numeric_limits<double>::infinity();
    for (int rc = 0; rc <= 4; ++rc) {
      for (int sc : {2, 4, 16}) {
        InnerCaps caps;
        caps.reflect_cap = rc;
        caps.shadow_cap = sc;
        const double c = dp_cost(pb, caps);
        InnerCaps wider = caps;
        wider.shadow_cap = sc + 2;
        CHECK(dp_cost(pb, wider) <= c + 1e-9);
        if (sc == 16) {
          CHECK(c <= prev + 1e-9);
          prev = c;
        }
      }
    }
  }
}

TEST_CASE("brute_force_square") {
  LeafProblem pb;
  pb.square = {1, 1, 16};
  pb.pairs = {{{1, {3, 1}}, {2, {3, 17}}}, {{3, {1, 5}}, {4, {17, 5}}}};
  CHECK(brute_force_square(pb) == doctest::Approx(16.0 + 16.0));

  // mirror detour: pair on the left side, one segment to bounce off
  LeafProblem m;
  m.square = {1, 1, 16};
  m.segments = {{0, 8, 2, 9}};
  m.pairs = {{{301, {1, 3}}, {303, {1, 7}}}};
  CHECK(brute_force_square(m) == doctest::Approx(std::hypot(14.0, 4.0)));

  // relabelling the segments does not matter
  auto pb2 = testing::random_leaf(5, 4, 2, 2);
  const double base = brute_force_square(pb2);
  auto relabelled = pb2;
  std::reverse(relabelled.segments.begin(), relabelled.segments.end());
  for (std::size_t i = 0; i < relabelled.segments.size(); ++i)
    relabelled.segments[i].id = static_cast<int>(10 + i);
  CHECK(brute_force_square(relabelled) == doctest::Approx(base));

  LeafProblem big;
  for (int i = 0; i < 6; ++i) big.segments.push_back({i, 2.0 * i + 2, 2, 3});
  CHECK_THROWS_AS(brute_force_square(big), InnerDpError);
}
