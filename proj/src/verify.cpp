#include "tspn/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "tspn/axis.hpp"
#include "tspn/baseline.hpp"
#include "tspn/oracle.hpp"
#include "tspn/ptas.hpp"
#include "tspn/rng.hpp"
#include "tspn/structure.hpp"

namespace tspn {

LeafProblem random_leaf(std::uint64_t seed, int max_segments, int max_pairs, int max_required) {
  Rng rng(seed);
  LeafProblem pb;
  pb.square = {1.0, 1.0, 16.0};
  const int ns = std::min(8, static_cast<int>(rng.below(max_segments + 1)));
  std::vector<int> cols = {2, 4, 6, 8, 10, 12, 14, 16};
  for (int i = 0; i < ns; ++i) {
    const auto j = rng.below(cols.size() - i);
    std::swap(cols[i], cols[i + j]);
    const double len = rng.uniform(1.0, 6.0);
    const double yb = rng.uniform(pb.square.y0 + 0.5, pb.square.y1() - 0.5 - len);
    pb.segments.push_back({i, static_cast<double>(cols[i]), yb, yb + len});
  }
  auto portal = [&](int side, int k) -> Portal {
    const double d = 2.0 * k;
    const Square& sq = pb.square;
    Point p;
    switch (side) {
      case 0: p = {sq.x0 + d, sq.y0}; break;
      case 1: p = {sq.x1(), sq.y0 + d}; break;
      case 2: p = {sq.x0 + d, sq.y1()}; break;
      default: p = {sq.x0, sq.y0 + d}; break;
    }
    return {side * 100 + k, p};
  };
  std::vector<int> used;
  auto fresh = [&](bool horizontal_only) {
    for (;;) {
      const int side = horizontal_only ? 2 * static_cast<int>(rng.below(2)) : static_cast<int>(rng.below(4));
      const int k = 1 + static_cast<int>(rng.below(7));
      if (std::find(used.begin(), used.end(), side * 100 + k) != used.end()) continue;
      used.push_back(side * 100 + k);
      return portal(side, k);
    }
  };
  const int np = 1 + static_cast<int>(rng.below(max_pairs));
  for (int i = 0; i < np; ++i) pb.pairs.push_back({fresh(false), fresh(false)});
  const int nq = static_cast<int>(rng.below(max_required + 1));
  for (int i = 0; i < nq; ++i) pb.required.push_back(fresh(true));
  return pb;
}

std::string SuiteResult::format() const {
  std::string out = std::string(passed ? "PASS " : "FAIL ") + name + " cases=" + std::to_string(cases) +
                    " failures=" + std::to_string(failures);
  if (!detail.empty()) out += " " + detail;
  return out;
}

namespace {

struct Tally {
  SuiteResult& res;
  std::string first_failure;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    ++res.failures;
    if (first_failure.empty()) first_failure = what;
  }
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

Instance uniform_instance(int n, std::uint64_t seed) {
  GeneratorParams gp;
  gp.width = 10;
  gp.height = 10;
  return generate(GeneratorKind::Uniform, n, gp, seed);
}

// Instances reused by the structure suite.
Instance oracle_hk_instance(int i, std::uint64_t base) { return uniform_instance(3 + i % 5, base + 1000 + i); }

Instance shadow_h3_instance(int i, std::uint64_t base) {
  GeneratorParams gp;
  gp.width = 6;
  gp.height = 3;
  return generate(GeneratorKind::PackedBox, 2 + i % 6, gp, base + 2000 + i);
}

Instance single_line_instance(int i, std::uint64_t base) {
  Rng rng(base + 3000 + i);
  Instance in;
  const int n = 2 + i % 6;
  for (int k = 0; k < n; ++k) {
    const double yb = rng.uniform(0.0, 0.9);
    in.segments.push_back({k, rng.uniform(0.0, 10.0), yb, yb + 1.0});
  }
  return in;
}

Instance far_apart_instance(int i, std::uint64_t base) {
  GeneratorParams gp;
  gp.height = 4;
  gp.epsilon = 0.5;
  return generate(GeneratorKind::FarApart, 2 + i % 6, gp, base + 4000 + i);
}

void keep(SuiteContext* ctx, const Instance& in, const Tour& t) {
  if (ctx) ctx->oracle_tours.emplace_back(in, t);
}

void suite_oracle_vs_hk(SuiteResult& r, Tally& t, int seeds, std::uint64_t base, SuiteContext* ctx) {
  double worst = 0.0;
  for (int i = 0; i < seeds; ++i, ++r.cases) {
    const Instance in = oracle_hk_instance(i, base);
    const auto orc = exact_oracle(in);
    keep(ctx, in, orc.tour);
    const double hk = held_karp_discretized(in, 33);
    const double gap = hk - orc.cost, bound = 2.0 * in.size() * in.lambda / 33.0;
    worst = std::max(worst, gap / bound);
    t.check(orc.cost <= hk + 1e-9 && gap <= bound, "case " + std::to_string(i) + " gap " + fmt(gap));
  }
  r.detail = "max_gap_over_bound=" + fmt(worst);
}

void suite_shadow_h3(SuiteResult& r, Tally& t, int seeds, std::uint64_t base, SuiteContext* ctx) {
  int worst = 0;
  for (int i = 0; i < seeds; ++i, ++r.cases) {
    try {
      const Instance in = shadow_h3_instance(i, base);
      const auto orc = exact_oracle(in);
      keep(ctx, in, orc.tour);
      const std::vector<Polyline> pl{as_polyline(orc.tour)};
      const int sh = shadow_max(pl);
      worst = std::max(worst, sh);
      t.check(bounding_box(in).height() <= 3.0 && sh <= 2, "case " + std::to_string(i) + " shadow " + std::to_string(sh));
    } catch (const std::exception& e) {
      t.check(false, std::string("exception: ") + e.what());
    }
  }
  r.detail = "max_shadow=" + std::to_string(worst);
}

void suite_single_line(SuiteResult& r, Tally& t, int seeds, std::uint64_t base, SuiteContext* ctx) {
  for (int i = 0; i < seeds; ++i, ++r.cases) {
    const Instance in = single_line_instance(i, base);
    const auto box = bounding_box(in);
    const double closed = 2.0 * box.width();
    const auto orc = exact_oracle(in);
    keep(ctx, in, orc.tour);
    const double cs = tour_cost(coverline_stitch(in));
    t.check(single_cover_line(in) && std::abs(orc.cost - closed) <= 1e-9 && std::abs(cs - closed) <= 1e-9,
            "case " + std::to_string(i) + " oracle " + fmt(orc.cost, 12) + " stitch " + fmt(cs, 12) +
                " closed " + fmt(closed, 12));
  }
}

void suite_far_apart(SuiteResult& r, Tally& t, int seeds, std::uint64_t base, SuiteContext* ctx) {
  double worst = 0.0;
  for (int i = 0; i < seeds; ++i, ++r.cases) {
    const Instance in = far_apart_instance(i, base);
    const auto orc = exact_oracle(in);
    keep(ctx, in, orc.tour);
    std::vector<std::vector<Point>> tips;
    for (const auto& s : in.segments) tips.push_back({s.bottom()});
    const double pt = held_karp_candidates(tips).cost;
    worst = std::max(worst, pt / orc.cost);
    t.check(pt <= 1.5 * orc.cost + 1e-9, "case " + std::to_string(i) + " ratio " + fmt(pt / orc.cost));
  }
  r.detail = "max_ratio=" + fmt(worst);
}

void suite_interval_bound(SuiteResult& r, Tally& t, int seeds, std::uint64_t base, SuiteContext*) {
  double worst = 0.0;
  for (int i = 0; i < seeds; ++i, ++r.cases) {
    try {
      const Instance raw = uniform_instance(3 + i % 5, base + 5000 + i);
      const Instance scaled = scale(perturb_snap(raw, 0.5), 0.5);
      const double rho = *scaled.rho;
      const auto orc = exact_oracle(scaled);
      const auto sets = build_interval_sets(scaled, build_cover_lines(scaled), rho);
      std::size_t count = 0;
      for (const auto& [line, ivs] : sets) count += ivs.size();
      const double lhs = rho * static_cast<double>(count);
      worst = std::max(worst, lhs / (6.0 * orc.cost));
      t.check(lhs <= 6.0 * orc.cost * (1 + 1e-9),
              "case " + std::to_string(i) + " rho|B| " + fmt(lhs) + " 6opt " + fmt(6 * orc.cost));
    } catch (const std::exception& e) {
      t.check(false, std::string("exception: ") + e.what());
    }
  }
  r.detail = "max_lhs_over_rhs=" + fmt(worst);
}

void suite_inner_dp(SuiteResult& r, Tally& t, int seeds, std::uint64_t base, SuiteContext*) {
  const auto caps = InnerCaps::from_epsilon(0.5);
  for (int i = 0; i < seeds; ++i, ++r.cases) {
    try {
      const auto pb = random_leaf(base + 6000 + i, 4, 2, 2);
      const auto dp = inner_dp_solve(pb, caps);
      const double bf = brute_force_square(pb);
      t.check(dp.feasible && std::abs(dp.cost - bf) <= 1e-6 * std::max(1.0, bf),
              "case " + std::to_string(i) + " dp " + fmt(dp.cost, 10) + " brute " + fmt(bf, 10));
    } catch (const std::exception& e) {
      t.check(false, std::string("exception: ") + e.what());
    }
  }
}

void suite_ptas_ratio(SuiteResult& r, Tally& t, int seeds, std::uint64_t base, SuiteContext*) {
  int within = 0, fallbacks = 0;
  double worst = 0.0;
  for (int i = 0; i < seeds; ++i, ++r.cases) {
    const Instance in = uniform_instance(3 + i % 4, base + 7000 + i);
    PtasConfig cfg;
    cfg.epsilon = 0.5;
    cfg.shifts = 5;
    cfg.seed = base + i;
    const auto rep = solve_ptas(in, cfg);
    const double opt = exact_oracle(in).cost;
    const double nn = tour_cost(nn_2opt(in, {BaselineKind::NnTwoOpt, cfg.seed, 1000}));
    const double best_base = std::min(nn, tour_cost(coverline_stitch(in)));
    const double ratio = opt > 0 ? rep.cost / opt : 1.0;
    worst = std::max(worst, ratio);
    within += ratio <= 1.5 + 1e-9;
    fallbacks += rep.fallback;
    t.check(rep.feasible && is_feasible(in, rep.tour) && rep.cost <= best_base + 1e-9,
            "case " + std::to_string(i) + " infeasible or above baseline");
  }
  const bool ratio_ok = within >= std::ceil(0.95 * r.cases);
  if (!ratio_ok) ++r.failures;
  r.detail = "within=" + std::to_string(within) + "/" + std::to_string(r.cases) + " max_ratio=" + fmt(worst) +
             " fallbacks=" + std::to_string(fallbacks);
}

void suite_patch(SuiteResult& r, Tally& t, int seeds, std::uint64_t base, SuiteContext*) {
  Rng rng(base + 8000);
  double worst = 0.0;
  while (r.cases < seeds) {
    const int k = 2 * (2 + static_cast<int>(rng.below(4)));
    std::vector<Point> pts;
    for (int i = 0; i < k; ++i) {
      const double side = i % 2 == 0 ? 1 : -1;
      pts.push_back({rng.uniform(0, 10), side * rng.uniform(0.5, 3)});
      if (rng.below(2)) pts.push_back({rng.uniform(-5, 15), side * rng.uniform(0.5, 3)});
    }
    const Tour tour = make_tour(pts);
    const DissectingSegment seg{{-10, 0}, {20, 0}};
    if (crossing_count(tour, seg) <= 2) continue;
    ++r.cases;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < tour.leg_count(); ++i) {
      const auto [u, v] = tour.leg(i);
      if ((u.y > 0) == (v.y > 0)) continue;
      const double x = u.x + (0 - u.y) / (v.y - u.y) * (v.x - u.x);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    const Tour p = patch(tour, seg);
    const double delta = tour_cost(p) - tour_cost(tour), span = hi - lo;
    if (span > 0) worst = std::max(worst, delta / span);
    t.check(crossing_count(p, seg) <= 2 && delta <= 6 * span + 1e-9,
            "case " + std::to_string(r.cases) + " delta " + fmt(delta) + " span " + fmt(span));
  }
  r.detail = "max_delta_over_span=" + fmt(worst);
}

void suite_structure(SuiteResult& r, Tally& t, int seeds, std::uint64_t base, SuiteContext* ctx) {
  SuiteContext local;
  if (!ctx || ctx->oracle_tours.empty()) {
    for (int i = 0; i < seeds; ++i) {
      for (const Instance& in : {oracle_hk_instance(i, base), shadow_h3_instance(i, base),
                                 single_line_instance(i, base), far_apart_instance(i, base)})
        local.oracle_tours.emplace_back(in, exact_oracle(in).tour);
    }
    ctx = &local;
  }
  std::map<std::string, int> violations;
  for (const auto& [in, tour] : ctx->oracle_tours) {
    ++r.cases;
    try {
      const auto rep = check_optimal_structure(tour, in);
      for (const char* name : {"reflection_alternation", "reflection_exclusivity", "zigzag_sink_x_order"}) {
        const auto* c = rep.find(name);
        const bool ok = c && c->passed;
        if (!ok) ++violations[name];
        t.check(ok, std::string(name) + (c ? " " + c->detail : " missing"));
      }
    } catch (const std::exception& e) {
      t.check(false, std::string("exception: ") + e.what());
    }
  }
  r.detail = "tours=" + std::to_string(ctx->oracle_tours.size());
  for (const auto& [name, k] : violations) r.detail += " " + name + "=" + std::to_string(k);
}

void suite_axis(SuiteResult& r, Tally& t, int seeds, std::uint64_t base, SuiteContext*) {
  double worst = 0.0;
  int fallbacks = 0;
  for (int i = 0; i < seeds; ++i, ++r.cases) {
    const auto inst = generate_axis(1 + i % 3, 1 + (i / 3) % 3, 5, 5, base + 9000 + i);
    PtasConfig cfg;
    cfg.epsilon = 0.5;
    cfg.seed = base + i;
    const auto res = solve_axis_parallel(inst, cfg);
    const double orc = axis_discretized_oracle(inst, 9);
    worst = std::max(worst, res.cost / orc);
    fallbacks += res.fallback;
    t.check(is_feasible(inst, res.tour) && res.cost <= 2.5 * orc + 1e-9,
            "case " + std::to_string(i) + " ratio " + fmt(res.cost / orc));
  }
  r.detail = "max_ratio=" + fmt(worst) + " fallbacks=" + std::to_string(fallbacks);
}

void suite_determinism(SuiteResult& r, Tally& t, int seeds, std::uint64_t base, SuiteContext*) {
  for (int i = 0; i < seeds; ++i, ++r.cases) {
    const Instance a = uniform_instance(4 + i % 4, base + 10000 + i);
    const Instance b = uniform_instance(4 + i % 4, base + 10000 + i);
    PtasConfig cfg;
    cfg.seed = base + i;
    cfg.shifts = 3;
    const std::string ra = solve_ptas(a, cfg).format();
    cfg.threads = 3;
    const std::string rb = solve_ptas(b, cfg).format();
    t.check(format_instance(a) == format_instance(b) && ra == rb, "case " + std::to_string(i) + " reports differ");
  }
}

void suite_uncross(SuiteResult& r, Tally& t, int seeds, std::uint64_t base, SuiteContext*) {
  Rng rng(base + 11000);
  for (int i = 0; i < seeds; ++i, ++r.cases) {
    std::vector<Point> pts;
    const int n = 3 + static_cast<int>(rng.below(12));
    for (int k = 0; k < n; ++k) pts.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
    const Tour tour = make_tour(pts);
    const Tour u = uncross(tour).tour;
    t.check(tour_cost(u) <= tour_cost(tour) + 1e-9 * std::max(1.0, tour_cost(tour)),
            "case " + std::to_string(i) + " cost increased");
  }
}

void suite_shadow_dense(SuiteResult& r, Tally& t, int seeds, std::uint64_t base, SuiteContext*) {
  Rng rng(base + 12000);
  long samples = 0;
  for (int i = 0; i < seeds; ++i, ++r.cases) {
    std::vector<Polyline> paths(1 + rng.below(2));
    for (auto& p : paths) {
      p.closed = rng.below(2) == 0;
      const int n = 3 + static_cast<int>(rng.below(8));
      for (int k = 0; k < n; ++k) p.points.push_back({std::round(rng.uniform(0, 10) * 4) / 4, rng.uniform(0, 10)});
    }
    const auto prof = shadow_profile(paths);
    int bad = 0;
    for (int k = 0; k < 10000; ++k) {
      const double x = rng.uniform(-1, 11);
      if (std::binary_search(prof.breakpoints.begin(), prof.breakpoints.end(), x)) continue;
      ++samples;
      int naive = 0;
      for (const auto& p : paths) naive += stabbing_count(std::span<const Polyline>(&p, 1), x);
      bad += prof.at(x) != naive;
    }
    t.check(bad == 0, "case " + std::to_string(i) + " mismatches " + std::to_string(bad));
  }
  r.detail = "samples=" + std::to_string(samples);
}

using SuiteFn = void (*)(SuiteResult&, Tally&, int, std::uint64_t, SuiteContext*);

struct SuiteDef {
  std::string name;
  int default_seeds;
  SuiteFn fn;
};

const std::vector<SuiteDef>& defs() {
  static const std::vector<SuiteDef> d = {
      {"oracle-vs-hk", 100, suite_oracle_vs_hk},
      {"shadow-h3", 200, suite_shadow_h3},
      {"single-line", 50, suite_single_line},
      {"far-apart", 50, suite_far_apart},
      {"interval-bound", 100, suite_interval_bound},
      {"inner-dp", 50, suite_inner_dp},
      {"ptas-ratio", 50, suite_ptas_ratio},
      {"patch", 100, suite_patch},
      {"structure", 50, suite_structure},
      {"axis", 30, suite_axis},
      {"determinism", 10, suite_determinism},
      {"uncross-monotone", 1000, suite_uncross},
      {"shadow-dense", 20, suite_shadow_dense},
  };
  return d;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& d : defs()) n.push_back(d.name);
    return n;
  }();
  return names;
}

SuiteResult run_suite(std::string_view name, int seeds, std::uint64_t base_seed, SuiteContext* ctx) {
  const auto it = std::find_if(defs().begin(), defs().end(), [&](const SuiteDef& d) { return d.name == name; });
  if (it == defs().end()) throw std::invalid_argument("unknown suite '" + std::string(name) + "'");
  SuiteResult r;
  r.name = it->name;
  Tally t{r, {}};
  const auto start = std::chrono::steady_clock::now();
  it->fn(r, t, seeds > 0 ? seeds : it->default_seeds, base_seed, ctx);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.passed = r.failures == 0 && r.cases > 0;
  if (!t.first_failure.empty()) r.detail += (r.detail.empty() ? "" : " ") + std::string("first=\"") + t.first_failure + "\"";
  return r;
}

}  // namespace tspn
