#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "anchoropt/channel.hpp"
#include "anchoropt/delayfim.hpp"
#include "anchoropt/dictionary.hpp"
#include "anchoropt/error.hpp"
#include "anchoropt/fisher.hpp"
#include "anchoropt/harness.hpp"
#include "anchoropt/polygon.hpp"
#include "anchoropt/scene.hpp"
#include "anchoropt/solver.hpp"

namespace py = pybind11;
using namespace anchoropt;

namespace {

using Point = std::tuple<double, double, double>;

Point to_tuple(const Vec3& v) { return {v.x, v.y, v.z}; }
Vec3 to_vec(const Point& p) { return {std::get<0>(p), std::get<1>(p), std::get<2>(p)}; }

std::vector<Point> to_tuples(const std::vector<Vec3>& vs) {
  std::vector<Point> out;
  for (const auto& v : vs) out.push_back(to_tuple(v));
  return out;
}

// N x M array view of a target-major dictionary table.
py::array_t<double> table(const Dictionary& d, const std::vector<double>& data) {
  py::array_t<double> a({d.num_targets(), d.num_candidates()});
  std::copy(data.begin(), data.end(), a.mutable_data());
  return a;
}

py::dict report_dict(const solver::SolveReport& r) {
  py::dict out;
  out["selection"] = r.selection;
  out["raw_value"] = r.raw_value;
  out["objective_value"] = r.objective_value;
  out["bound"] = r.bound;
  out["gap"] = r.gap;
  out["nodes"] = r.nodes_explored;
  out["status"] = std::string(solver::to_string(r.status));
  out["runtime_ms"] = r.runtime_ms;
  out["singular"] = r.singular;
  return out;
}

py::dict triple(const fisher::ObjectiveTriple& o) {
  py::dict d;
  d["phi_a"] = o.phi_a;
  d["phi_d"] = o.phi_d;
  d["phi_e"] = o.phi_e;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Anchor placement for through-wall localization";

  auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<SingularError>(m, "SingularError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<BudgetError>(m, "BudgetError", base.ptr());

  py::class_<Scene>(m, "Scene")
      .def_property_readonly("targets", [](const Scene& s) { return to_tuples(s.targets); })
      .def_property_readonly("spacing_m", [](const Scene& s) { return s.region.spacing_m; })
      .def("to_json", [](const Scene& s) { return scene_to_json(s).dump(); })
      .def("hash", [](const Scene& s) { return scene_hash(s); })
      .def("anchor_grid",
           [](const Scene& s, const Point& shift, std::optional<double> spacing_m) {
             AnchorRegion r = s.region;
             if (spacing_m) r.spacing_m = *spacing_m;
             return to_tuples(generate_anchor_grid(r, to_vec(shift)));
           },
           py::arg("shift") = Point{0, 0, 0}, py::arg("spacing_m") = py::none());

  m.def("load_scene", &load_scene, py::arg("config_json"),
        "Parses a scene document given as JSON text.");
  m.def("draw_shift", [](std::uint64_t seed, double d) { return to_tuple(draw_shift(seed, d)); },
        py::arg("seed"), py::arg("spacing_m"));

  py::class_<Dictionary>(m, "Dictionary")
      .def_property_readonly("num_candidates", &Dictionary::num_candidates)
      .def_property_readonly("num_targets", &Dictionary::num_targets)
      .def_property_readonly("candidates", [](const Dictionary& d) { return to_tuples(d.candidates()); })
      .def_property_readonly("targets", [](const Dictionary& d) { return to_tuples(d.targets()); })
      .def_property_readonly("lam", [](const Dictionary& d) { return table(d, d.lambda_data()); },
                             "Ranging weights, shape (targets, candidates).")
      .def_property_readonly("psi", [](const Dictionary& d) { return table(d, d.psi_data()); },
                             "Information angles in radians, shape (targets, candidates).")
      .def("save", [](const Dictionary& d, const std::string& p) { export_dictionary(d, p); })
      .def("__eq__", [](const Dictionary& a, const Dictionary& b) { return a == b; });

  m.def("build_dictionary",
        [](const Scene& s, const std::vector<Point>& cand) {
          std::vector<Vec3> c;
          for (const auto& p : cand) c.push_back(to_vec(p));
          return build_dictionary(s, c);
        },
        py::arg("scene"), py::arg("candidates"));
  m.def("load_dictionary", &import_dictionary, py::arg("path"));

  m.def("solve",
        [](const Dictionary& d, std::size_t K, const std::string& algo, std::uint64_t seed,
           double eps_gap, double time_limit_ms, std::size_t rand_trials) {
          harness::SolverSettings s;
          s.bnb.eps_gap = eps_gap;
          s.bnb.time_limit_ms = time_limit_ms;
          s.rand_trials = rand_trials;
          const auto a = harness::algo_from_string(algo);
          solver::SolveReport r;
          {
            py::gil_scoped_release release;
            r = harness::solve(d, K, a, seed, s);
          }
          return report_dict(r);
        },
        py::arg("dictionary"), py::arg("K"), py::arg("algo") = "dopt", py::arg("seed") = 0,
        py::arg("eps_gap") = 1e-3, py::arg("time_limit_ms") = 70000.0,
        py::arg("rand_trials") = 10000);

  m.def("worst_target_metrics",
        [](const Dictionary& d, const solver::Selection& sel, const std::string& criterion) {
          harness::Criterion c;
          if (criterion == "A") {
            c = harness::Criterion::kA;
          } else if (criterion == "D") {
            c = harness::Criterion::kD;
          } else if (criterion == "E") {
            c = harness::Criterion::kE;
          } else {
            throw ValidationError("criterion must be A, D or E");
          }
          const auto w = harness::worst_target_metrics(d, sel, c);
          py::dict out;
          out["index"] = w.index;
          out["peb_m"] = w.metrics.peb_m;
          out["cer_m"] = w.metrics.cer_m;
          out["mad_m"] = w.metrics.mad_m;
          out["singular"] = w.singular;
          return out;
        },
        py::arg("dictionary"), py::arg("selection"), py::arg("criterion") = "E");

  m.def("objectives",
        [](double S, double u, double v) {
          return triple(fisher::objectives({S, u, v, std::hypot(u, v)}));
        },
        py::arg("S"), py::arg("u"), py::arg("v"));

  m.def("closure_angles",
        [](const std::vector<double>& w) {
          const auto c = polygon::closure_angles(w);
          py::dict out;
          out["angles"] = c.angles;
          out["residual"] = c.residual;
          out["feasible"] = c.feasible;
          out["has_boundary_angle"] = c.has_boundary_angle;
          return out;
        },
        py::arg("weights"));
  m.def("closure_residual",
        [](const std::vector<double>& w, const std::vector<double>& a) {
          return polygon::closure_residual(w, a);
        },
        py::arg("weights"), py::arg("angles"));
  m.def("single_target_optimum",
        [](const std::vector<double>& w) { return triple(polygon::single_target_optimum(w)); },
        py::arg("weights"));

  m.def("snr_db",
        [](const Scene& s, const Point& anchor, const Point& target) {
          return channel::snr_db(s.system, to_vec(anchor), to_vec(target)).snr_db;
        },
        py::arg("scene"), py::arg("anchor"), py::arg("target"));
  m.def("ranging_weight", &channel::ranging_weight, py::arg("snr_linear"),
        py::arg("bandwidth_hz"));

  m.def("overlap_loss_curve",
        [](double B, const std::vector<double>& deltas, std::complex<double> g1,
           std::complex<double> g2) {
          delayfim::MultipathSpec s;
          s.gains = {g1, g2};
          s.delays_s = {0.0, 0.0};
          s.bandwidth_hz = B;
          std::vector<double> loss;
          for (const auto& p : delayfim::overlap_loss_curve(s, deltas)) loss.push_back(p.loss_fraction);
          return loss;
        },
        py::arg("bandwidth_hz"), py::arg("deltas_s"), py::arg("gain1") = 1.0,
        py::arg("gain2") = 1.0);
}
