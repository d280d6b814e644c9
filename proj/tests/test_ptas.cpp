#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "tspn/baseline.hpp"
#include "tspn/oracle.hpp"
#include "tspn/ptas.hpp"
#include "tspn/rng.hpp"

using namespace tspn;

namespace {

Instance scaled_instance(std::vector<Segment> segs, double rho) {
  Instance in;
  in.segments = std::move(segs);
  in.stage = Stage::Scaled;
  in.rho = rho;
  const auto b = bounding_box(in);
  in.N = std::max(b.width(), b.height());
  return in;
}

Instance scaled_uniform(int n, std::uint64_t seed, double eps = 0.5) {
  GeneratorParams gp;
  gp.width = 10;
  gp.height = 10;
  return scale(perturb_snap(generate(GeneratorKind::Uniform, n, gp, seed), eps), eps);
}

// Hand-built tree: leaves of side 8 from (-1, -1), portal spacing 2.
QuadTree small_tree() {
  QuadTree qt;
  qt.a = -1;
  qt.b = -1;
  qt.base_side = 8;
  qt.depth = 2;
  qt.m = 4;
  qt.rho = 4;
  qt.h = 2;
  return qt;
}

bool on_horizontal_grid(const QuadTree& qt, const Segment& s) {
  for (long k = 0; k <= qt.leaves_per_side(); ++k) {
    const double y = qt.b + k * qt.base_side;
    if (y >= s.y_bot && y <= s.y_top) return true;
  }
  return false;
}

bool contains_point(const Tour& t, const TourPoint& p) {
  return std::find(t.points.begin(), t.points.end(), p) != t.points.end();
}

}  // namespace

TEST_CASE("build_quadtree geometry") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto sc = scaled_uniform(4 + static_cast<int>(seed % 5), seed);
    const auto qt = build_quadtree(sc, 0.5, seed);
    CHECK(std::fmod(std::abs(qt.a), 2.0) == 1.0);
    CHECK(std::fmod(std::abs(qt.b), 2.0) == 1.0);
    CHECK(qt.base_side >= 2 * *sc.rho);
    CHECK(qt.base_side < 2 * *sc.rho + 4);
    CHECK(std::fmod(qt.base_side, 4.0) == 0.0);
    const auto box = bounding_box(sc);
    CHECK(qt.a <= box.x_min);
    CHECK(qt.b <= box.y_min);
    CHECK(qt.a + qt.root_side() > box.x_max);
    CHECK(qt.b + qt.root_side() > box.y_max);
    for (const auto& s : sc.segments)
      for (int i = 0; i <= qt.leaves_per_side(); ++i) CHECK(s.x != qt.a + i * qt.base_side);
    CHECK((qt.m & (qt.m - 1)) == 0);
    const double dx = qt.portal_position(qt.portal_id(3, 1)).x - qt.portal_position(qt.portal_id(2, 1)).x;
    CHECK(dx == doctest::Approx(qt.base_side / qt.m));
  }
  const auto sc = scaled_uniform(6, 11);
  const auto q1 = build_quadtree(sc, 0.5, 42);
  const auto q2 = build_quadtree(sc, 0.5, 42);
  CHECK(q1.a == q2.a);
  CHECK(q1.b == q2.b);
  CHECK(q1.depth == q2.depth);
  std::set<double> shifts;
  for (std::uint64_t s = 0; s < 20; ++s) shifts.insert(build_quadtree(sc, 0.5, s).a);
  CHECK(shifts.size() > 1);
}

TEST_CASE("build_quadtree depth and portal count") {
  // Width 4 leaves; one extra leaf of room for the shift.
  const auto in = scaled_instance({{0, 0, 0, 4}, {1, 32, 28, 32}}, 4.0);
  const auto qt = build_quadtree(in, 0.5, 3);
  CHECK(qt.base_side == 8);
  CHECK(qt.depth == 3);
  // (4 / 0.5) * log2(1024 / 8) = 56 -> 64
  CHECK(default_portal_count(1024, 4, 0.5) == 64);
  CHECK(default_portal_count(8, 4, 0.5) == 2);
  CHECK(default_r(0.5) == 4);
  CHECK(default_r(0.3) == 8);
  CHECK_THROWS_AS(build_quadtree(in, 0.5, 0, 3), PtasError);
  CHECK(build_quadtree(in, 0.5, 0, 8).m == 8);
  Instance raw = in;
  raw.stage = Stage::Raw;
  CHECK_THROWS_AS(build_quadtree(raw, 0.5, 0), PtasError);
  const QuadTree t = small_tree();
  CHECK(t.leaf_of({7, 3}) == std::pair{0, 0});
  CHECK(t.leaf_of({7.5, 7}) == std::pair{1, 0});
  CHECK(t.is_corner(t.portal_id(4, 8)));
  CHECK_FALSE(t.is_corner(t.portal_id(3, 8)));
}

TEST_CASE("group_cover_lines") {
  const auto in = scaled_instance({{0, 0, 0, 4}, {1, 4, 16, 20}}, 4.0);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto qt = build_quadtree(in, 0.5, seed);
    const auto g = group_cover_lines(qt, in);
    CHECK(g.h == 2);
    REQUIRE(g.lines.size() == 5);
    std::vector<int> sizes(2, 0);
    for (const auto& l : g.lines) ++sizes[l.group];
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<int>{2, 3});
    for (const auto& l : g.lines) {
      const double k = (l.y - qt.b) / qt.base_side;
      if (k == std::floor(k)) CHECK(l.group == g.jstar);
    }
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sc = scaled_uniform(7, seed);
    const auto qt = build_quadtree(sc, 0.5, seed);
    const auto g = group_cover_lines(qt, sc);
    CHECK(g.spacing <= qt.rho);
    CHECK(g.assignment.size() == sc.size());
    for (const auto& [id, idx] : g.assignment) {
      const auto& s = sc.by_id(id);
      const double y = g.lines[static_cast<std::size_t>(idx)].y;
      CHECK(y >= s.y_bot);
      CHECK(y <= s.y_top);
      CHECK(y + g.spacing > s.y_top);
    }
  }
}

TEST_CASE("build_intervals") {
  const double rho = 4.0;
  CHECK(build_intervals({{0, 1, 0, 1}, {1, 3, 0, 1}, {2, 5, 0, 1}}, rho).size() == 1);
  const auto two = build_intervals({{0, 0, 0, 1}, {1, rho + 1, 0, 1}}, rho);
  REQUIRE(two.size() == 2);
  CHECK(two[1].lo == rho + 1);
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Segment> segs;
    for (int i = 0; i < 12; ++i) segs.push_back({i, 4.0 * static_cast<double>(rng.below(40)), 0, 1});
    const auto ivs = build_intervals(segs, rho);
    std::vector<int> hits(segs.size(), 0);
    for (std::size_t k = 0; k < ivs.size(); ++k) {
      CHECK(ivs[k].hi - ivs[k].lo == rho);
      if (k > 0) CHECK(ivs[k].lo > ivs[k - 1].hi);
      bool starts_at_segment = false;
      for (const auto& s : segs) starts_at_segment = starts_at_segment || s.x == ivs[k].lo;
      CHECK(starts_at_segment);
      for (int id : ivs[k].segments) {
        ++hits[static_cast<std::size_t>(id)];
        CHECK(segs[static_cast<std::size_t>(id)].x >= ivs[k].lo);
        CHECK(segs[static_cast<std::size_t>(id)].x <= ivs[k].hi);
      }
    }
    for (int h : hits) CHECK(h == 1);
  }
}

TEST_CASE("drop_and_require hand case") {
  const QuadTree qt = small_tree();
  const auto in = scaled_instance({{7, 4, 5, 9}, {8, 20, 10, 14}}, 4.0);
  const auto d = drop_and_require(in, qt, group_cover_lines(qt, in));
  CHECK(d.dropped == std::vector<int>{7});
  REQUIRE(d.reduced.size() == 1);
  CHECK(d.reduced.segments[0].id == 8);
  REQUIRE(d.ledger.size() == 1);
  // Interval [4, 8] on y = 7; lattice x = -1 + 2i, corners at i % 4 == 0.
  double best_x = 0, best_d = 1e9;
  for (long i = 0; i < qt.lattice_per_axis(); ++i) {
    if (i % qt.m == 0) continue;
    const double x = qt.a + i * qt.portal_spacing();
    const double dist = x < 4 ? 4 - x : (x > 8 ? x - 8 : 0);
    if (dist < best_d || (dist == best_d && std::abs(x - 6) < std::abs(best_x - 6))) best_d = dist, best_x = x;
  }
  const auto& det = d.ledger[0];
  CHECK(det.position.x == best_x);
  CHECK(det.position.y == 7);
  CHECK(det.portal == qt.portal_id(3, 4));
  CHECK(det.leaf_i == 0);
  CHECK(det.leaf_j == 0);
  CHECK(det.x_left == 4);
  CHECK(det.x_right == 8);
  CHECK(det.cost() <= 2 * (qt.rho + best_d));
}

TEST_CASE("drop_and_require audit") {
  int empty_cases = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto sc = scaled_uniform(3 + static_cast<int>(seed % 6), seed);
    const auto qt = build_quadtree(sc, 0.5, seed * 3 + 1);
    const auto d = drop_and_require(sc, qt, group_cover_lines(qt, sc));
    std::set<int> expect_dropped;
    for (const auto& s : sc.segments)
      if (on_horizontal_grid(qt, s)) expect_dropped.insert(s.id);
    CHECK(std::set<int>(d.dropped.begin(), d.dropped.end()) == expect_dropped);
    CHECK(d.reduced.size() + d.dropped.size() == sc.size());
    for (const auto& s : d.reduced.segments) CHECK_FALSE(on_horizontal_grid(qt, s));
    if (expect_dropped.empty()) {
      ++empty_cases;
      CHECK(d.ledger.empty());
      CHECK(d.reduced == sc);
    }
    std::set<int> covered;
    for (const auto& det : d.ledger) {
      CHECK_FALSE(qt.is_corner(det.portal));
      CHECK(det.left.lo <= det.right.lo);
      CHECK(det.x_left <= det.position.x);
      CHECK(det.x_right >= det.position.x);
      for (int id : det.segments) {
        const auto& s = sc.by_id(id);
        if (s.x >= det.x_left && s.x <= det.x_right && det.position.y >= s.y_bot && det.position.y <= s.y_top)
          covered.insert(id);
      }
    }
    CHECK(covered == expect_dropped);
  }
  CHECK(empty_cases > 0);
}

TEST_CASE("lift_solution") {
  const QuadTree qt = small_tree();
  const auto in = scaled_instance({{7, 4, 5, 9}, {8, 20, 10, 14}}, 4.0);
  const auto d = drop_and_require(in, qt, group_cover_lines(qt, in));
  const Point q = d.ledger[0].position;
  Tour t;
  t.points = {{q, PortalId{d.ledger[0].portal}}, {{20, 12}, SegmentId{8}}};
  const Tour lifted = lift_solution(t, d, in);
  CHECK(tour_cost(lifted) == doctest::Approx(tour_cost(t) + d.ledger[0].cost()));
  CHECK(is_feasible(in, lifted));
  for (const auto& p : t.points) CHECK(contains_point(lifted, p));

  DropResult none;
  none.reduced = in;
  CHECK(lift_solution(t, none, in) == t);

  Tour missing;
  missing.points = {{{20, 12}, SegmentId{8}}, {{20, 13}, Dummy{}}};
  CHECK_THROWS_AS(lift_solution(missing, d, in), PtasError);
  DropResult broken = d;
  broken.ledger.clear();
  CHECK_THROWS_AS(lift_solution(t, broken, in), PtasError);
}

TEST_CASE("patch on a constructed four-crossing tour") {
  const DissectingSegment seg{{0, 0}, {10, 0}};
  Tour t = make_tour(std::vector<Point>{{1, 1}, {2, -1}, {4, -1}, {5, 1}, {6, 1}, {7, -1}, {9, -1}, {9, 3}, {1, 3}});
  REQUIRE(crossing_count(t, seg) == 4);
  const Tour p = patch(t, seg);
  CHECK(crossing_count(p, seg) <= 2);
  for (const auto& pt : t.points) CHECK(contains_point(p, pt));

  Tour two = make_tour(std::vector<Point>{{1, 1}, {1, -1}, {4, -1}, {4, 1}});
  CHECK(crossing_count(two, seg) == 2);
  CHECK(patch(two, seg) == two);

  // Vertical segment: same tour rotated.
  Tour rot;
  for (const auto& pt : t.points) rot.points.push_back({{pt.position.y, pt.position.x}, pt.binding});
  const DissectingSegment vseg{{0, 0}, {0, 10}};
  CHECK(crossing_count(rot, vseg) == 4);
  CHECK(crossing_count(patch(rot, vseg), vseg) <= 2);
}

TEST_CASE("patch cost audit on random tours") {
  Rng rng(77);
  int cases = 0;
  while (cases < 100) {
    const int k = 2 * (2 + static_cast<int>(rng.below(4)));
    std::vector<Point> pts;
    for (int i = 0; i < k; ++i) {
      const double side = i % 2 == 0 ? 1 : -1;
      pts.push_back({rng.uniform(0, 10), side * rng.uniform(0.5, 3)});
      if (rng.below(2)) pts.push_back({rng.uniform(-5, 15), side * rng.uniform(0.5, 3)});
    }
    Tour t = make_tour(pts);
    const DissectingSegment seg{{-10, 0}, {20, 0}};
    const int before = crossing_count(t, seg);
    if (before <= 2) continue;
    ++cases;
    double lo = 1e9, hi = -1e9;
    for (std::size_t i = 0; i < t.leg_count(); ++i) {
      const auto [u, v] = t.leg(i);
      if ((u.y > 0) == (v.y > 0)) continue;
      const double x = u.x + (0 - u.y) / (v.y - u.y) * (v.x - u.x);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    const Tour p = patch(t, seg);
    CHECK(crossing_count(p, seg) <= 2);
    CHECK(tour_cost(p) - tour_cost(t) <= 6 * (hi - lo) + 1e-9);
    for (const auto& pt : t.points) CHECK(contains_point(p, pt));
  }
}

TEST_CASE("outer_dp contracts") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto sc = scaled_uniform(4 + static_cast<int>(seed % 8), seed);
    const auto qt = build_quadtree(sc, 0.5, seed);
    const auto d = drop_and_require(sc, qt, group_cover_lines(qt, sc));
    OuterDpConfig oc;
    oc.r = default_r(0.5);
    oc.caps = InnerCaps::from_epsilon(0.5);
    oc.seed = seed;
    const auto res = outer_dp(d.reduced, qt, d, oc);
    CHECK(is_feasible(d.reduced, res.tour));
    CHECK(res.cost == doctest::Approx(tour_cost(res.tour)));
    CHECK(res.max_side_crossings <= oc.r);
    CHECK(max_side_crossings(res.tour, qt) == res.max_side_crossings);
    for (const auto& det : d.ledger) {
      bool hit = false;
      for (const auto& p : res.tour.points) hit = hit || p.position == det.position;
      CHECK(hit);
    }
    const Tour lifted = lift_solution(res.tour, d, sc);
    CHECK(is_feasible(sc, lifted));
  }
  const auto one = scaled_instance({{0, 40, 8, 12}}, 4.0);
  const auto qt = build_quadtree(one, 0.5, 1);
  const auto d = drop_and_require(one, qt, group_cover_lines(qt, one));
  OuterDpConfig oc;
  const auto res = outer_dp(d.reduced, qt, d, oc);
  CHECK(res.cost >= 0.0);
  CHECK(is_feasible(one, lift_solution(res.tour, d, one)));
}

TEST_CASE("solve_ptas small cases") {
  Instance empty;
  const auto e = solve_ptas(empty);
  CHECK(e.cost == 0.0);
  CHECK(e.tour.points.empty());

  Instance one;
  one.segments = {{3, 1.5, 2, 3}};
  const auto r1 = solve_ptas(one);
  CHECK(r1.cost == 0.0);
  CHECK(r1.feasible);

  PtasConfig bad;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(solve_ptas(one, bad), PtasError);
}

TEST_CASE("solve_ptas against the oracle") {
  GeneratorParams gp;
  gp.epsilon = 0.5;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto inst = generate(GeneratorKind::FarApart, 5, gp, seed);
    const auto orc = exact_oracle(inst);
    PtasConfig pc;
    pc.seed = seed;
    const auto rep = solve_ptas(inst, pc);
    CHECK(rep.feasible);
    CHECK_FALSE(rep.fallback);
    CHECK(rep.cost <= 1.5 * orc.cost + 1e-9);
    CHECK(rep.cost <= tour_cost(nn_2opt(inst, {BaselineKind::NnTwoOpt, seed, 1000})) + 1e-9);
    CHECK(rep.cost <= tour_cost(coverline_stitch(inst)) + 1e-9);
    double sum = 0;
    for (const auto& s : rep.stages) sum += s.delta;
    CHECK(sum == doctest::Approx(rep.cost).epsilon(1e-12));
  }
}

TEST_CASE("solve_ptas determinism and report format") {
  GeneratorParams gp;
  const auto inst = generate(GeneratorKind::Uniform, 7, gp, 9);
  PtasConfig pc;
  pc.seed = 4;
  const auto a = solve_ptas(inst, pc).format();
  const auto b = solve_ptas(inst, pc).format();
  CHECK(a == b);
  pc.threads = 3;
  CHECK(solve_ptas(inst, pc).format() == a);
  CHECK(a.rfind("COST ", 0) == 0);
  CHECK(a.find("\nSTAGE dp ") != std::string::npos);
  CHECK(a.find("\nFEASIBLE yes\n") != std::string::npos);
  CHECK(a.find("\nFALLBACK no\n") != std::string::npos);
  CHECK(a.find("TSPN-TOUR 1\n") != std::string::npos);
}

TEST_CASE("solve_ptas_with_points") {
  GeneratorParams gp;
  const auto inst = generate(GeneratorKind::Uniform, 5, gp, 2);
  const std::vector<Point> extra{{3.25, 11.5}, {-2, 4}};
  const auto rep = solve_ptas_with_points(inst, extra);
  CHECK(rep.feasible);
  for (const auto& p : extra) {
    bool hit = false;
    for (std::size_t i = 0; i < rep.tour.leg_count(); ++i) {
      const auto [u, v] = rep.tour.leg(i);
      const double cross = (v.x - u.x) * (p.y - u.y) - (v.y - u.y) * (p.x - u.x);
      const bool within = std::min(u.x, v.x) - 1e-9 <= p.x && p.x <= std::max(u.x, v.x) + 1e-9 &&
                          std::min(u.y, v.y) - 1e-9 <= p.y && p.y <= std::max(u.y, v.y) + 1e-9;
      hit = hit || (std::abs(cross) <= 1e-7 && within);
    }
    CHECK(hit);
  }
}
