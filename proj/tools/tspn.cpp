#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tspn/axis.hpp"
#include "tspn/baseline.hpp"
#include "tspn/oracle.hpp"
#include "tspn/ptas.hpp"
#include "tspn/structure.hpp"
#include "tspn/verify.hpp"

using namespace tspn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFallback = 2;

struct CliConfig {
  std::string instance;
  std::string tour;
  std::string out;
  double epsilon = 0.5;
  std::uint64_t seed = 0;
  int shifts = 5;
  std::string algo = "ptas";
  std::optional<int> r, m, shadow_cap, reflect_cap;
  int threads = 1;
  std::vector<std::string> layers;

  // generate
  std::string kind = "uniform";
  int n = 10;
  int n_vertical = -1;
  int n_horizontal = -1;
  double width = 10.0;
  double height = 10.0;
  double lambda = 1.0;

  // verify / bench
  std::string suite = "all";
  int seeds = 0;
  int count = 5;
  std::vector<std::string> algos = {"ptas", "coverline", "nn2opt"};
};

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f || !(f << text)) throw std::runtime_error("cannot write " + path);
}

bool is_axis_file(const std::string& text) { return text.rfind("TSPN-AXIS", 0) == 0; }

PtasConfig ptas_config(const CliConfig& c) {
  PtasConfig p;
  p.epsilon = c.epsilon;
  p.seed = c.seed;
  p.shifts = c.shifts;
  p.r = c.r;
  p.m = c.m;
  p.shadow_cap = c.shadow_cap;
  p.reflect_cap = c.reflect_cap;
  p.threads = c.threads;
  return p;
}

// ---- generate -------------------------------------------------------------

int cmd_generate(const CliConfig& c) {
  if (c.kind == "axis") {
    const int nv = c.n_vertical >= 0 ? c.n_vertical : (c.n + 1) / 2;
    const int nh = c.n_horizontal >= 0 ? c.n_horizontal : c.n / 2;
    emit(c.out, format_axis_instance(generate_axis(nv, nh, c.width, c.height, c.seed)));
    return kExitOk;
  }
  const auto kind = parse_generator_kind(c.kind);
  if (!kind) throw std::invalid_argument("unknown generator kind '" + c.kind + "'");
  GeneratorParams gp;
  gp.width = c.width;
  gp.height = c.height;
  gp.lambda = c.lambda;
  gp.epsilon = c.epsilon;
  emit(c.out, format_instance(generate(*kind, c.n, gp, c.seed)));
  return kExitOk;
}

// ---- solve ----------------------------------------------------------------

struct Solved {
  SolveReport report;
  double seconds = 0.0;
};

Solved solve_segments(const Instance& inst, const CliConfig& c, const std::string& algo) {
  const auto start = std::chrono::steady_clock::now();
  SolveReport rep;
  if (algo == "ptas") {
    rep = solve_ptas(inst, ptas_config(c));
  } else {
    if (algo == "oracle") {
      rep.tour = exact_oracle(inst).tour;
    } else if (algo == "coverline") {
      rep.tour = coverline_stitch(inst);
    } else if (algo == "nn2opt") {
      rep.tour = nn_2opt(inst, {BaselineKind::NnTwoOpt, c.seed, 1000});
    } else {
      throw std::invalid_argument("algo '" + algo + "' does not apply to segment instances");
    }
    rep.cost = tour_cost(rep.tour);
    rep.stages = {{algo, rep.cost}};
  }
  rep.feasible = is_feasible(inst, rep.tour);
  return {rep, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
}

Solved solve_axis(const AxisInstance& inst, const CliConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const auto res = solve_axis_parallel(inst, ptas_config(c));
  SolveReport rep;
  rep.tour = res.tour;
  rep.cost = res.cost;
  rep.stages = {{"axis", res.cost}};
  rep.fallback = res.fallback;
  rep.feasible = is_feasible(inst, rep.tour);
  return {rep, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
}

int cmd_solve(const CliConfig& c) {
  const std::string text = slurp(c.instance);
  Solved s;
  if (is_axis_file(text)) {
    if (c.algo != "axis") throw std::invalid_argument("axis-parallel instances need --algo axis");
    s = solve_axis(parse_axis_instance(text), c);
  } else {
    if (c.algo == "axis") throw std::invalid_argument("--algo axis needs a TSPN-AXIS instance");
    s = solve_segments(parse_instance(text), c, c.algo);
  }
  if (!s.report.feasible) throw std::runtime_error("solver produced an infeasible tour; nothing written");
  if (!c.out.empty()) emit(c.out, format_tour(s.report.tour));
  std::cout << s.report.format();
  if (s.report.fallback) std::cerr << "warning: fallback tour used\n";
  return s.report.fallback ? kExitFallback : kExitOk;
}

// ---- analyze --------------------------------------------------------------

std::string analyze_report(const Instance& inst, const Tour& tour) {
  std::ostringstream os;
  os << "COST " << format_double(tour_cost(tour)) << "\n";
  const std::vector<Polyline> lines{as_polyline(tour)};
  const auto prof = shadow_profile(lines);
  os << "SHADOW max " << shadow_max(lines) << " breakpoints " << prof.breakpoints.size() << "\n";

  std::map<std::string, int> kinds;
  int pure = 0, tips = 0, unbound = 0;
  const auto classes = classify_points(tour, inst);
  for (const auto& pc : classes) {
    if (!pc) {
      ++unbound;
      continue;
    }
    ++kinds[std::string(to_string(pc->kind))];
    pure += pc->pure;
    tips += pc->at_tip;
  }
  for (const char* k : {"straight", "break", "reflection-left", "reflection-right"})
    os << "CLASS " << k << " " << kinds[k] << "\n";
  os << "CLASS pure " << pure << " at_tip " << tips << " unbound " << unbound << "\n";

  const auto cover = build_cover_lines(inst);
  os << "COVERLINES " << cover.count << " spacing " << format_double(cover.spacing) << "\n";
  for (int k = 0; k + 1 < cover.count; ++k) {
    const auto paths = restrict_to_strip(tour, k, cover);
    std::map<std::string, int> pk;
    int zigzag = 0, sinks = 0;
    for (const auto& p : paths) {
      ++pk[std::string(to_string(p.kind))];
      const auto part = partition_zigzag_sink(p, classes, inst, cover, k);
      for (const auto& q : part.parts) {
        zigzag += q.zigzag.has_value();
        sinks += q.sink_before.has_value() + q.sink_after.has_value();
      }
    }
    os << "STRIP " << k << " paths " << paths.size() << " loop " << pk["loop"] << " ladder " << pk["ladder"]
       << " coverline_loop " << pk["cover-line-loop"] << " zigzag " << zigzag << " sink " << sinks << "\n";
  }
  os << check_optimal_structure(tour, inst).format();
  return os.str();
}

int cmd_analyze(const CliConfig& c) {
  const Instance inst = read_instance(c.instance);
  const Tour tour = read_tour(c.tour);
  const auto missed = missed_segments(inst, tour);
  if (!missed.empty()) {
    std::cerr << "error: tour misses segments";
    for (int id : missed) std::cerr << " " << id;
    std::cerr << "\n";
    return kExitError;
  }
  emit(c.out, analyze_report(inst, tour));
  return kExitOk;
}

// ---- verify ---------------------------------------------------------------

int cmd_verify(const CliConfig& c) {
  std::vector<std::string> names;
  if (c.suite == "all") {
    names = suite_names();
  } else {
    if (std::find(suite_names().begin(), suite_names().end(), c.suite) == suite_names().end()) {
      std::cerr << "error: unknown suite '" << c.suite << "'; known:";
      for (const auto& n : suite_names()) std::cerr << " " << n;
      std::cerr << " all\n";
      return kExitError;
    }
    names = {c.suite};
  }
  SuiteContext ctx;
  bool ok = true;
  for (const auto& n : names) {
    const auto r = run_suite(n, c.seeds, c.seed, &ctx);
    std::cout << r.format() << "\n" << std::flush;
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitError;
}

// ---- bench ----------------------------------------------------------------

int cmd_bench(const CliConfig& c) {
  std::vector<Instance> instances;
  if (!c.instance.empty()) {
    instances.push_back(read_instance(c.instance));
  } else {
    const auto kind = parse_generator_kind(c.kind);
    if (!kind) throw std::invalid_argument("unknown generator kind '" + c.kind + "'");
    GeneratorParams gp;
    gp.width = c.width;
    gp.height = c.height;
    gp.lambda = c.lambda;
    gp.epsilon = c.epsilon;
    for (int i = 0; i < c.count; ++i) instances.push_back(generate(*kind, c.n, gp, c.seed + i));
  }
  std::printf("%-6s %-10s %4s %14s %10s %8s %8s\n", "case", "algo", "n", "cost", "seconds", "feasible", "fallback");
  bool any_fallback = false;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (const auto& algo : c.algos) {
      if (algo == "oracle" && instances[i].size() > 9) continue;
      const auto s = solve_segments(instances[i], c, algo);
      any_fallback = any_fallback || s.report.fallback;
      std::printf("%-6zu %-10s %4zu %14.6f %10.4f %8s %8s\n", i, algo.c_str(), instances[i].size(), s.report.cost,
                  s.seconds, s.report.feasible ? "yes" : "no", s.report.fallback ? "yes" : "no");
    }
  }
  return any_fallback ? kExitFallback : kExitOk;
}

// ---- render ---------------------------------------------------------------

class Svg {
 public:
  Svg(double x0, double y0, double x1, double y1) : x0_(x0), y1_(y1) {
    const double w = std::max(x1 - x0, 1.0), h = std::max(y1 - y0, 1.0);
    scale_ = 800.0 / std::max(w, h);
    width_ = w * scale_ + 2 * kPad;
    height_ = h * scale_ + 2 * kPad;
  }

  double sx(double x) const { return kPad + (x - x0_) * scale_; }
  double sy(double y) const { return kPad + (y1_ - y) * scale_; }

  void line(Point a, Point b, const std::string& cls) {
    body_ << "<line class=\"" << cls << "\" x1=\"" << sx(a.x) << "\" y1=\"" << sy(a.y) << "\" x2=\"" << sx(b.x)
          << "\" y2=\"" << sy(b.y) << "\"/>\n";
  }

  void polygon(const std::vector<Point>& pts, bool closed) {
    body_ << "<" << (closed ? "polygon" : "polyline") << " class=\"tour\" points=\"";
    for (const auto& p : pts) body_ << sx(p.x) << "," << sy(p.y) << " ";
    body_ << "\"/>\n";
  }

  std::string str() const {
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width_ << "\" height=\""
       << height_ << "\">\n"
       << "<style>.segment{stroke:#000;stroke-width:2}.tour{fill:none;stroke:#c0392b;stroke-width:1.5}"
       << ".coverline{stroke:#2980b9;stroke-dasharray:4 3;stroke-width:0.8}"
       << ".dissection{stroke:#7f8c8d;stroke-width:0.6}</style>\n"
       << body_.str() << "</svg>\n";
    return os.str();
  }

 private:
  static constexpr double kPad = 20.0;
  double x0_, y1_, scale_ = 1.0, width_ = 0.0, height_ = 0.0;
  std::ostringstream body_;
};

int cmd_render(const CliConfig& c) {
  for (const auto& l : c.layers)
    if (l != "coverlines" && l != "dissection") throw std::invalid_argument("unknown layer '" + l + "'");
  auto has = [&](const char* l) { return std::find(c.layers.begin(), c.layers.end(), l) != c.layers.end(); };
  const std::string text = slurp(c.instance);
  std::optional<Tour> tour;
  if (!c.tour.empty()) tour = read_tour(c.tour);

  std::vector<std::pair<Point, Point>> segs;
  std::optional<Instance> inst;
  if (is_axis_file(text)) {
    if (!c.layers.empty()) throw std::invalid_argument("layers need a vertical-segment instance");
    for (const auto& s : parse_axis_instance(text).segments) segs.push_back({s.a, s.b});
  } else {
    inst = parse_instance(text);
    for (const auto& s : inst->segments) segs.push_back({s.bottom(), s.top()});
  }
  if (segs.empty()) throw std::invalid_argument("nothing to render");
  double x0 = segs[0].first.x, x1 = x0, y0 = segs[0].first.y, y1 = y0;
  auto grow = [&](Point p) {
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x), y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  };
  for (const auto& [a, b] : segs) grow(a), grow(b);
  if (tour)
    for (const auto& tp : tour->points) grow(tp.position);

  Svg svg(x0 - 0.5, y0 - 0.5, x1 + 0.5, y1 + 0.5);
  if (has("dissection")) {
    const Instance snapped = perturb_snap(*inst, c.epsilon);
    const Instance scaled = scale(snapped, c.epsilon);
    const QuadTree qt = build_quadtree(scaled, c.epsilon, c.seed, c.m);
    const double rho = *scaled.rho, side = qt.root_side();
    for (int k = 0; k <= qt.leaves_per_side(); ++k) {
      const double t = k * qt.base_side;
      svg.line({(qt.a + t) / rho, qt.b / rho}, {(qt.a + t) / rho, (qt.b + side) / rho}, "dissection");
      svg.line({qt.a / rho, (qt.b + t) / rho}, {(qt.a + side) / rho, (qt.b + t) / rho}, "dissection");
    }
  }
  if (has("coverlines")) {
    const auto cover = build_cover_lines(*inst);
    for (int k = 0; k < cover.count; ++k) svg.line({x0 - 0.5, cover.line_y(k)}, {x1 + 0.5, cover.line_y(k)}, "coverline");
  }
  for (const auto& [a, b] : segs) svg.line(a, b, "segment");
  if (tour) {
    std::vector<Point> pts;
    for (const auto& tp : tour->points) pts.push_back(tp.position);
    svg.polygon(pts, tour->closed);
  }
  emit(c.out, svg.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vertical-segment TSP with neighborhoods: generators, solvers and checks"};
  app.require_subcommand(1);
  CliConfig c;

  const std::vector<std::string> algos = {"ptas", "oracle", "coverline", "nn2opt", "axis"};
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "random seed")->envname("TSPN_SEED")->check(CLI::NonNegativeNumber);
  };
  auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--epsilon", c.epsilon, "accuracy parameter in (0, 1]")->check(CLI::Range(1e-9, 1.0));
    add_seed(sub);
    sub->add_option("--shifts", c.shifts, "random shifts tried")->check(CLI::PositiveNumber);
    sub->add_option("--r", c.r, "portal crossings per square side");
    sub->add_option("--m", c.m, "portal intervals per leaf side");
    sub->add_option("--shadow-cap", c.shadow_cap, "leaf DP shadow cap");
    sub->add_option("--reflect-cap", c.reflect_cap, "leaf DP reflection cap");
    sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  };
  auto add_generator = [&](CLI::App* sub) {
    sub->add_option("--kind", c.kind, "uniform, comb_zigzag, far_apart, packed_box or axis");
    sub->add_option("--n", c.n, "segment count")->check(CLI::PositiveNumber);
    sub->add_option("--width", c.width, "box width");
    sub->add_option("--height", c.height, "box height");
    sub->add_option("--lambda", c.lambda, "maximum segment length");
  };

  auto* gen = app.add_subcommand("generate", "write a random instance");
  add_generator(gen);
  gen->add_option("--n-vertical", c.n_vertical, "axis: vertical segment count");
  gen->add_option("--n-horizontal", c.n_horizontal, "axis: horizontal segment count");
  gen->add_option("--epsilon", c.epsilon, "far_apart gap parameter")->check(CLI::Range(1e-9, 1.0));
  add_seed(gen);
  gen->add_option("-o,--out", c.out, "output file (default stdout)");

  auto* solve = app.add_subcommand("solve", "solve an instance and print the report");
  solve->add_option("instance", c.instance, "instance file")->required()->check(CLI::ExistingFile);
  solve->add_option("--algo", c.algo, "solver")->check(CLI::IsMember(algos));
  add_solver(solve);
  solve->add_option("-o,--out", c.out, "tour output file");

  auto* analyze = app.add_subcommand("analyze", "structure report for a tour");
  analyze->add_option("instance", c.instance, "instance file")->required()->check(CLI::ExistingFile);
  analyze->add_option("tour", c.tour, "tour file")->required()->check(CLI::ExistingFile);
  analyze->add_option("-o,--out", c.out, "report file (default stdout)");

  auto* verify = app.add_subcommand("verify", "run property suites");
  verify->add_option("--suite", c.suite, "suite name or 'all'");
  verify->add_option("--seeds", c.seeds, "cases per suite (0: suite default)")->check(CLI::NonNegativeNumber);
  add_seed(verify);

  auto* bench = app.add_subcommand("bench", "compare solvers on generated or given instances");
  bench->add_option("--instance", c.instance, "instance file")->check(CLI::ExistingFile);
  add_generator(bench);
  bench->add_option("--count", c.count, "generated instances")->check(CLI::PositiveNumber);
  bench->add_option("--algos", c.algos, "solvers to run")->delimiter(',')->check(CLI::IsMember({"ptas", "oracle", "coverline", "nn2opt"}));
  add_solver(bench);

  auto* render = app.add_subcommand("render", "draw an instance (and tour) as SVG");
  render->add_option("instance", c.instance, "instance file")->required()->check(CLI::ExistingFile);
  render->add_option("--tour", c.tour, "tour file")->check(CLI::ExistingFile);
  render->add_option("--layers", c.layers, "extra layers: coverlines, dissection")->delimiter(',');
  render->add_option("--epsilon", c.epsilon, "dissection layer epsilon")->check(CLI::Range(1e-9, 1.0));
  render->add_option("--m", c.m, "dissection layer portal count");
  add_seed(render);
  render->add_option("-o,--out", c.out, "SVG file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*gen) return cmd_generate(c);
    if (*solve) return cmd_solve(c);
    if (*analyze) return cmd_analyze(c);
    if (*verify) return cmd_verify(c);
    if (*bench) return cmd_bench(c);
    if (*render) return cmd_render(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
