#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tspn/axis.hpp"
#include "tspn/baseline.hpp"
#include "tspn/oracle.hpp"
#include "tspn/ptas.hpp"
#include "tspn/verify.hpp"

namespace py = pybind11;
using namespace tspn;

namespace {

Instance make_instance(const std::vector<std::tuple<double, double, double>>& segs, double lambda) {
  Instance in;
  in.lambda = lambda;
  int id = 0;
  for (const auto& [x, yb, yt] : segs) in.segments.push_back({id++, x, yb, yt});
  validate(in);
  return in;
}

AxisInstance make_axis(const std::vector<std::tuple<double, double, double, double>>& segs) {
  AxisInstance in;
  int id = 0;
  for (const auto& [x1, y1, x2, y2] : segs) in.segments.push_back({id++, {x1, y1}, {x2, y2}});
  validate(in);
  return in;
}

PtasConfig config(double epsilon, std::uint64_t seed, int shifts, int threads) {
  PtasConfig c;
  c.epsilon = epsilon;
  c.seed = seed;
  c.shifts = shifts;
  c.threads = threads;
  return c;
}

}  // namespace

PYBIND11_MODULE(_tspn, m) {
  m.doc() = "Vertical-segment TSP with neighborhoods";

  py::register_exception<InstanceError>(m, "InstanceError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<AxisError>(m, "AxisError", PyExc_ValueError);
  py::register_exception<PtasError>(m, "PtasError", PyExc_RuntimeError);
  py::register_exception<OracleError>(m, "OracleError", PyExc_RuntimeError);

  py::class_<Point>(m, "Point")
      .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
      .def_readwrite("x", &Point::x)
      .def_readwrite("y", &Point::y)
      .def("__repr__", [](const Point& p) { return "Point(" + format_double(p.x) + ", " + format_double(p.y) + ")"; });

  py::class_<Segment>(m, "Segment")
      .def_readonly("id", &Segment::id)
      .def_readonly("x", &Segment::x)
      .def_readonly("y_bot", &Segment::y_bot)
      .def_readonly("y_top", &Segment::y_top);

  py::class_<Instance>(m, "Instance")
      .def(py::init(&make_instance), py::arg("segments"), py::arg("lambda_") = 1.0,
           "Segments as (x, y_bot, y_top) triples; ids follow list order.")
      .def_readonly("segments", &Instance::segments)
      .def_readonly("lambda_", &Instance::lambda)
      .def("__len__", &Instance::size)
      .def("format", [](const Instance& i) { return format_instance(i); });

  py::class_<Tour>(m, "Tour")
      .def_property_readonly("points",
                             [](const Tour& t) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& p : t.points) out.emplace_back(p.position.x, p.position.y);
                               return out;
                             })
      .def_property_readonly("segments",
                             [](const Tour& t) {
                               std::vector<std::optional<int>> out;
                               for (const auto& p : t.points) out.push_back(p.segment());
                               return out;
                             })
      .def_readonly("closed", &Tour::closed)
      .def("__len__", &Tour::size)
      .def("cost", &tour_cost)
      .def("format", [](const Tour& t) { return format_tour(t); });

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("tour", &SolveReport::tour)
      .def_readonly("cost", &SolveReport::cost)
      .def_readonly("feasible", &SolveReport::feasible)
      .def_readonly("fallback", &SolveReport::fallback)
      .def_property_readonly("stages",
                             [](const SolveReport& r) {
                               std::vector<std::pair<std::string, double>> out;
                               for (const auto& s : r.stages) out.emplace_back(s.name, s.delta);
                               return out;
                             })
      .def("format", &SolveReport::format);

  py::class_<AxisInstance>(m, "AxisInstance")
      .def(py::init(&make_axis), py::arg("segments"), "Segments as (x1, y1, x2, y2) tuples.")
      .def("__len__", [](const AxisInstance& a) { return a.segments.size(); })
      .def("format", [](const AxisInstance& a) { return format_axis_instance(a); });

  py::class_<AxisResult>(m, "AxisResult")
      .def_readonly("tour", &AxisResult::tour)
      .def_readonly("cost", &AxisResult::cost)
      .def_readonly("candidates", &AxisResult::candidates)
      .def_readonly("chosen", &AxisResult::chosen)
      .def_readonly("forced", &AxisResult::forced)
      .def_readonly("fallback", &AxisResult::fallback);

  py::class_<SuiteResult>(m, "SuiteResult")
      .def_readonly("name", &SuiteResult::name)
      .def_readonly("passed", &SuiteResult::passed)
      .def_readonly("cases", &SuiteResult::cases)
      .def_readonly("failures", &SuiteResult::failures)
      .def_readonly("detail", &SuiteResult::detail)
      .def("format", &SuiteResult::format);

  m.def(
      "generate",
      [](const std::string& kind, int n, std::uint64_t seed, double width, double height, double lambda,
         double epsilon) {
        const auto k = parse_generator_kind(kind);
        if (!k) throw InstanceError("unknown generator kind '" + kind + "'");
        return generate(*k, n, {width, height, lambda, epsilon}, seed);
      },
      py::arg("kind"), py::arg("n"), py::arg("seed") = 0, py::arg("width") = 10.0, py::arg("height") = 10.0,
      py::arg("lambda_") = 1.0, py::arg("epsilon") = 0.5);
  m.def("parse_instance", [](const std::string& s) { return parse_instance(s); });
  m.def("parse_tour", [](const std::string& s) { return parse_tour(s); });
  m.def("is_feasible", py::overload_cast<const Instance&, const Tour&>(&is_feasible));
  m.def("missed_segments", py::overload_cast<const Instance&, const Tour&>(&missed_segments));

  m.def(
      "solve_ptas",
      [](const Instance& in, double epsilon, std::uint64_t seed, int shifts, int threads) {
        py::gil_scoped_release release;
        return solve_ptas(in, config(epsilon, seed, shifts, threads));
      },
      py::arg("instance"), py::arg("epsilon") = 0.5, py::arg("seed") = 0, py::arg("shifts") = 5,
      py::arg("threads") = 1);
  m.def(
      "exact_oracle",
      [](const Instance& in) {
        py::gil_scoped_release release;
        return exact_oracle(in).tour;
      },
      py::arg("instance"));
  m.def("coverline_stitch", &coverline_stitch, py::arg("instance"));
  m.def(
      "nn_2opt", [](const Instance& in, std::uint64_t seed) { return nn_2opt(in, {BaselineKind::NnTwoOpt, seed, 1000}); },
      py::arg("instance"), py::arg("seed") = 0);
  m.def("held_karp_discretized", &held_karp_discretized, py::arg("instance"), py::arg("k"));
  m.def("shadow_max", [](const Tour& t) {
    const std::vector<Polyline> p{as_polyline(t)};
    return shadow_max(p);
  });

  m.def("generate_axis", &generate_axis, py::arg("n_vertical"), py::arg("n_horizontal"), py::arg("width") = 10.0,
        py::arg("height") = 10.0, py::arg("seed") = 0);
  m.def(
      "solve_axis_parallel",
      [](const AxisInstance& in, double epsilon, std::uint64_t seed, int shifts) {
        py::gil_scoped_release release;
        return solve_axis_parallel(in, config(epsilon, seed, shifts, 1));
      },
      py::arg("instance"), py::arg("epsilon") = 0.5, py::arg("seed") = 0, py::arg("shifts") = 5);
  m.def("is_axis_feasible", py::overload_cast<const AxisInstance&, const Tour&>(&is_feasible));

  m.def("suite_names", &suite_names);
  m.def(
      "run_suite", [](const std::string& name, int seeds, std::uint64_t seed) { return run_suite(name, seeds, seed); },
      py::arg("name"), py::arg("seeds") = 0, py::arg("seed") = 0);
}
