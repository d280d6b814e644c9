#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <set>

#include "tspn/baseline.hpp"
#include "tspn/oracle.hpp"
#include "tspn/ptas.hpp"

namespace tspn {
namespace {

// Inserts a bound point wherever the tour touches a segment that has none.
std::optional<Tour> bind_points(const Tour& tour, const Instance& inst) {
  Tour out = tour;
  std::set<int> bound;
  for (const auto& tp : out.points)
    if (auto s = tp.segment()) bound.insert(*s);
  const auto box = bounding_box(inst);
  const double tol = kEpsGeom * std::max(1.0, std::hypot(box.width(), box.height()));
  for (const auto& s : inst.segments) {
    if (bound.count(s.id)) continue;
    bool done = false;
    for (std::size_t i = 0; i < out.points.size() && !done; ++i) {
      const Point a = out.points[i].position;
      if (s.contains(a, tol)) {
        out.points.insert(out.points.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                          {{s.x, std::clamp(a.y, s.y_bot, s.y_top)}, SegmentId{s.id}});
        done = true;
        break;
      }
      if (out.points.size() < 2) break;
      const Point b = out.points[(i + 1) % out.points.size()].position;
      if (std::max(a.x, b.x) < s.x - tol || std::min(a.x, b.x) > s.x + tol) continue;
      double y;
      if (std::abs(a.x - b.x) <= tol) {
        const double lo = std::max(std::min(a.y, b.y), s.y_bot), hi = std::min(std::max(a.y, b.y), s.y_top);
        if (lo > hi + tol) continue;
        y = std::clamp(a.y, s.y_bot, s.y_top);
      } else {
        const double t = std::clamp((s.x - a.x) / (b.x - a.x), 0.0, 1.0);
        y = a.y + t * (b.y - a.y);
        if (y < s.y_bot - tol || y > s.y_top + tol) continue;
      }
      out.points.insert(out.points.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                        {{s.x, std::clamp(y, s.y_bot, s.y_top)}, SegmentId{s.id}});
      done = true;
    }
    if (!done) return std::nullopt;
  }
  return out;
}

struct ShiftOutcome {
  bool ok = false;
  Tour tour;
  double cost = std::numeric_limits<double>::infinity();
  std::vector<StageDelta> stages;
};

ShiftOutcome run_shift(const Instance& target, const Instance& snapped, const Instance& scaled,
                       const PtasConfig& config, std::uint64_t seed) {
  ShiftOutcome out;
  const double rho = *scaled.rho;
  try {
    const QuadTree qt = build_quadtree(scaled, config.epsilon, seed, config.m);
    const CoverGroups groups = group_cover_lines(qt, scaled);
    const DropResult drop = drop_and_require(scaled, qt, groups);
    OuterDpConfig oc;
    oc.r = config.r.value_or(default_r(config.epsilon));
    oc.caps = InnerCaps::from_epsilon(config.epsilon);
    if (config.shadow_cap) oc.caps.shadow_cap = *config.shadow_cap;
    if (config.reflect_cap) oc.caps.reflect_cap = *config.reflect_cap;
    oc.beam = config.beam;
    oc.pool = config.pool;
    oc.seed = seed;
    const OuterDpResult dp = outer_dp(drop.reduced, qt, drop, oc);
    const Tour lifted = lift_solution(dp.tour, drop, scaled);
    const Tour unc = uncross(lifted).tour;
    auto bound = bind_points(unc, scaled);
    if (!bound) return out;

    Tour mapped;
    for (const auto& tp : bound->points) {
      auto s = tp.segment();
      if (!s) continue;
      const Segment& raw = target.by_id(*s);
      const Segment& sn = snapped.by_id(*s);
      Point p{tp.position.x / rho + (raw.x - sn.x), tp.position.y / rho + (raw.y_bot - sn.y_bot)};
      p.x = raw.x;
      p.y = std::clamp(p.y, raw.y_bot, raw.y_top);
      mapped.points.push_back({p, tp.binding});
    }
    Tour polished = local_search(target, order_of(mapped));
    polished = uncross(polished).tour;

    const double c_dp = dp.cost / rho, c_lift = tour_cost(lifted) / rho, c_unc = tour_cost(unc) / rho;
    const double c_map = tour_cost(mapped), c_pol = tour_cost(polished);
    out.stages = {{"dp", c_dp},
                  {"lift", c_lift - c_dp},
                  {"uncross", c_unc - c_lift},
                  {"map", c_map - c_unc},
                  {"polish", c_pol - c_map}};
    if (c_pol > c_map) {
      polished = mapped;
      out.stages.back().delta = 0.0;
    }
    out.tour = std::move(polished);
    out.cost = tour_cost(out.tour);
    out.ok = is_feasible(target, out.tour);
  } catch (const PtasError&) {
    out.ok = false;
  }
  return out;
}

}  // namespace

std::string SolveReport::format() const {
  std::string out = "COST " + format_double(cost) + "\n";
  for (const auto& s : stages) out += "STAGE " + s.name + " " + format_double(s.delta) + "\n";
  out += std::string("FEASIBLE ") + (feasible ? "yes" : "no") + "\n";
  out += std::string("FALLBACK ") + (fallback ? "yes" : "no") + "\n";
  out += format_tour(tour);
  return out;
}

SolveReport solve_ptas(const Instance& raw, const PtasConfig& config) {
  return solve_ptas_with_points(raw, {}, config);
}

SolveReport solve_ptas_with_points(const Instance& raw, const std::vector<Point>& points,
                                   const PtasConfig& config) {
  if (!(config.epsilon > 0.0 && config.epsilon <= 1.0)) throw PtasError("epsilon must lie in (0, 1]");
  if (config.shifts < 1) throw PtasError("shifts must be at least 1");
  if (raw.stage != Stage::Raw) throw PtasError("solve_ptas expects a raw instance");
  validate(raw);

  // Target: segments plus the extra points as zero-length segments.
  Instance target = raw;
  int next_id = 0;
  for (const auto& s : raw.segments) next_id = std::max(next_id, s.id + 1);
  for (const auto& p : points) target.segments.push_back({next_id++, p.x, p.y, p.y});

  SolveReport rep;
  if (target.segments.empty()) {
    rep.feasible = true;
    return rep;
  }
  if (target.size() == 1) {
    const auto& s = target.segments[0];
    rep.tour.points = {{s.bottom(), SegmentId{s.id}}};
    rep.feasible = true;
    rep.stages = {{"dp", 0.0}};
    return rep;
  }

  Tour baseline = nn_2opt(target, {BaselineKind::NnTwoOpt, config.seed, 1000});
  if (points.empty()) {
    Tour cs = coverline_stitch(target);
    if (tour_cost(cs) < tour_cost(baseline)) baseline = std::move(cs);
  }
  const double base_cost = tour_cost(baseline);

  // Small flat instances go to the exact solver.
  if (points.empty() && bounding_box(raw).height() <= 3.0 && raw.size() <= 9) {
    const auto orc = exact_oracle(raw);
    rep.tour = orc.tour;
    rep.cost = tour_cost(rep.tour);
    rep.stages = {{"oracle", rep.cost}};
    rep.feasible = is_feasible(target, rep.tour);
    return rep;
  }

  ShiftOutcome best;
  if (raw.size() > 0) {
    // Extra points ride along unsnapped; they also keep a single-column raw
    // instance from collapsing to B = 0.
    Instance snapped = perturb_snap(raw, config.epsilon);
    for (std::size_t k = raw.size(); k < target.size(); ++k) snapped.segments.push_back(target.segments[k]);
    Instance scaled;
    try {
      scaled = scale(snapped, config.epsilon);
    } catch (const InstanceError&) {
      scaled.segments.clear();
    }
    const double rho = scaled.rho.value_or(1.0);
    for (std::size_t k = raw.size(); k < scaled.size(); ++k) {
      const auto& s = target.segments[k];
      scaled.segments[k] = {s.id, rho * s.x, rho * s.y_bot, rho * s.y_bot};
    }
    if (!scaled.segments.empty()) {
      const auto box = bounding_box(scaled);
      scaled.N = std::max(box.width(), box.height());
    }

    const int threads = std::max(1, config.threads);
    std::vector<ShiftOutcome> outcomes(scaled.segments.empty() ? 0 : static_cast<std::size_t>(config.shifts));
    for (int start = 0; start < static_cast<int>(outcomes.size()); start += threads) {
      std::vector<std::future<ShiftOutcome>> jobs;
      for (int s = start; s < std::min(static_cast<int>(outcomes.size()), start + threads); ++s) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(s);
        jobs.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                  [&, seed] { return run_shift(target, snapped, scaled, config, seed); }));
      }
      for (std::size_t j = 0; j < jobs.size(); ++j) outcomes[start + j] = jobs[j].get();
    }
    for (auto& o : outcomes)
      if (o.ok && o.cost < best.cost) best = std::move(o);
  }

  if (!best.ok) {
    rep.tour = baseline;
    rep.cost = base_cost;
    rep.stages = {{"baseline", base_cost}};
    rep.fallback = true;
  } else {
    rep.tour = std::move(best.tour);
    rep.stages = std::move(best.stages);
    if (base_cost < best.cost) {
      rep.stages.push_back({"baseline_min", base_cost - best.cost});
      rep.tour = baseline;
    }
    rep.cost = tour_cost(rep.tour);
  }
  rep.feasible = is_feasible(target, rep.tour);
  return rep;
}

}  // namespace tspn
