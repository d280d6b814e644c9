#include <algorithm>
#include <map>
#include <cmath>

#include "doctest.h"
#include "tspn/baseline.hpp"
#include "tspn/oracle.hpp"
#include "tspn/structure.hpp"

using namespace tspn;

namespace {

double midpoint_cost(const Instance& inst, const VisitOrder& o) {
  double c = 0;
  const std::size_t n = o.sequence.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = inst.by_id(o.sequence[i]);
    const auto& b = inst.by_id(o.sequence[(i + 1) % n]);
    c += std::hypot(a.x - b.x, 0.5 * (a.y_bot + a.y_top - b.y_bot - b.y_top));
  }
  return c;
}

}  // namespace

TEST_CASE("coverline_stitch") {
  Instance line;
  line.segments = {{0, 0, 0, 1}, {1, 2.5, 0.4, 1.4}, {2, 7, 0.9, 1.9}, {3, 4, -0.05, 0.95}};
  const double span = 7.0;
  auto t = coverline_stitch(line);
  CHECK(tour_cost(t) == 2 * span);
  CHECK(tour_cost(t) == exact_oracle(line).cost);
  CHECK(is_feasible(line, t));

  Instance one;
  one.segments = {{5, 1, 2, 3}};
  auto single = coverline_stitch(one);
  CHECK(single.size() == 1);
  CHECK(tour_cost(single) == 0.0);
  CHECK(is_feasible(one, single));

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    GeneratorParams p;
    p.lambda = 1 + (seed % 3) * 0.5;
    auto kind = seed % 2 ? GeneratorKind::Uniform : GeneratorKind::CombZigzag;
    auto inst = generate(kind, 4 + static_cast<int>(seed % 20), p, seed);
    auto st = coverline_stitch(inst);
    CHECK(is_feasible(inst, st));
  }
}

// The span bound is not guaranteed for adversarial line layouts (runs that
// alternate far left / far right); it is audited as a rate.
TEST_CASE("coverline_stitch cost bound rate") {
  int bad = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto inst = generate(GeneratorKind::Uniform, 3 + static_cast<int>(seed % 30), {}, seed);
    auto cover = build_cover_lines(inst);
    std::map<int, std::pair<double, double>> spans;
    for (auto& s : inst.segments) {
      auto [it, fresh] = spans.try_emplace(cover.assignment.at(s.id), s.x, s.x);
      it->second.first = std::min(it->second.first, s.x);
      it->second.second = std::max(it->second.second, s.x);
    }
    double sum = 0;
    for (auto& [k, sp] : spans) sum += sp.second - sp.first;
    auto box = bounding_box(inst);
    ++total;
    if (tour_cost(coverline_stitch(inst)) > 2 * sum + 2 * box.height() + 2 * box.width() + 1e-9) ++bad;
  }
  CHECK(bad * 100 <= total);
}

TEST_CASE("nn_2opt") {
  Instance two;
  two.segments = {{0, 0, 0, 1}, {1, 3, 0.5, 1.5}};
  CHECK(tour_cost(nn_2opt(two)) == doctest::Approx(6.0));

  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto inst = generate(GeneratorKind::Uniform, 3 + static_cast<int>(seed % 5), {}, seed);
    BaselineConfig cfg;
    cfg.seed = seed;
    auto t = nn_2opt(inst, cfg);
    CHECK(is_feasible(inst, t));
    CHECK(t == nn_2opt(inst, cfg));
    const auto order = order_of(t);
    REQUIRE(order.sequence.size() == inst.size());
    // local optimum on midpoints
    const double base = midpoint_cost(inst, order);
    const std::size_t n = order.sequence.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = i + 2; j < n; ++j) {
        VisitOrder c = order;
        std::reverse(c.sequence.begin() + static_cast<long>(i + 1), c.sequence.begin() + static_cast<long>(j + 1));
        CHECK(midpoint_cost(inst, c) >= base - 1e-9);
      }
    CHECK(tour_cost(t) <= base + 1e-12);
    CHECK(tour_cost(t) >= exact_oracle(inst).cost - 1e-9);
  }
}

TEST_CASE("local search never worsens") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto inst = generate(GeneratorKind::Uniform, 8, {}, seed);
    VisitOrder o;
    for (auto& s : inst.segments) o.sequence.push_back(s.id);
    auto t = local_search(inst, o);
    CHECK(is_feasible(inst, t));
    CHECK(tour_cost(t) <= optimize_touch_points(o, inst).cost + 1e-9);
  }
}
