#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spoofres/adversary.hpp"
#include "spoofres/config.hpp"
#include "spoofres/error.hpp"
#include "spoofres/export.hpp"
#include "spoofres/filter.hpp"
#include "spoofres/graph.hpp"
#include "spoofres/lti.hpp"
#include "spoofres/medag.hpp"
#include "spoofres/scenarios.hpp"
#include "spoofres/sim.hpp"

namespace py = pybind11;
using namespace spoofres;

namespace {

DirectedGraph graph_from_edges(int n, const std::vector<std::pair<NodeId, NodeId>>& edges) {
  DirectedGraph g(n);
  for (const auto& [a, b] : edges) g.add_edge(a, b);
  return g;
}

py::object optional_step(const std::optional<Step>& v) { return v ? py::cast(*v) : py::none(); }

py::dict summary_dict(const Summary& s) {
  py::list modes;
  for (const auto& m : s.modes) {
    py::dict d;
    d["mode"] = m.mode;
    d["final_max_error"] = m.final_max_error;
    d["settle_step"] = optional_step(m.settle_step);
    d["decay_slope"] = m.decay_slope ? py::cast(*m.decay_slope) : py::none();
    d["medag_termination"] = optional_step(m.medag_termination);
    d["medag_bound"] = optional_step(m.medag_bound);
    modes.append(d);
  }
  py::dict out;
  out["modes"] = modes;
  out["max_delay"] = s.max_delay;
  out["max_update_gap"] = s.max_update_gap;
  out["max_staleness"] = s.max_staleness;
  out["max_truth_residual"] = s.max_truth_residual;
  out["detections"] = s.detections;
  out["drops"] = s.drops;
  out["emissions"] = s.emissions;
  return out;
}

// Trace bundled with the config that produced it.
struct RunResult {
  RunConfig config;
  SimTrace trace;
};

py::array_t<double> estimates_array(const SimTrace& t) {
  const auto steps = static_cast<py::ssize_t>(t.estimates.size());
  const auto nodes = static_cast<py::ssize_t>(t.regular.size());
  const auto modes = static_cast<py::ssize_t>(t.modes);
  py::array_t<double> out({steps, nodes, modes});
  auto view = out.mutable_unchecked<3>();
  for (py::ssize_t k = 0; k < steps; ++k) {
    for (py::ssize_t r = 0; r < nodes; ++r) {
      for (py::ssize_t j = 0; j < modes; ++j) view(k, r, j) = t.estimates[k][r * modes + j];
    }
  }
  return out;
}

py::array_t<double> rows_array(const std::vector<Eigen::VectorXd>& rows, py::ssize_t width) {
  py::array_t<double> out({static_cast<py::ssize_t>(rows.size()), width});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (py::ssize_t j = 0; j < width; ++j) view(static_cast<py::ssize_t>(k), j) = rows[k][j];
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_spoofres, m) {
  m.doc() = "Resilient distributed estimation under identity spoofing.";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object type = error;
      py::object exc = type(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def(
      "diagonalize",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& x0, const std::optional<Eigen::MatrixXd>& psi) {
        const auto d = diagonalize({a, x0}, psi);
        py::dict out;
        out["eigenvalues"] = d.eigenvalues;
        out["psi"] = d.psi;
        out["psi_inv"] = d.psi_inv;
        out["z0"] = d.z0;
        out["unstable_modes"] = d.unstable_modes;
        return out;
      },
      py::arg("a"), py::arg("x0"), py::arg("psi") = py::none());

  m.def(
      "max_strong_robustness",
      [](int n, const std::vector<std::pair<NodeId, NodeId>>& edges, const NodeSet& sources) {
        return max_strong_robustness(graph_from_edges(n, edges), sources);
      },
      py::arg("n"), py::arg("edges"), py::arg("sources"));

  m.def(
      "strongly_robust",
      [](int n, const std::vector<std::pair<NodeId, NodeId>>& edges, const NodeSet& sources, int r) {
        return strongly_robust_peel(graph_from_edges(n, edges), sources, r).robust;
      },
      py::arg("n"), py::arg("edges"), py::arg("sources"), py::arg("r"));

  m.def(
      "filtered_update",
      [](const std::vector<double>& values, int f, int beta, double lam, double current,
         std::optional<int> trim) {
        std::vector<EstimateSlot> slots;
        NodeId id = 0;
        for (double v : values) slots.push_back({id++, v, 0, 0, 0, 0});
        return filtered_update({f, beta, lam, trim}, slots, current);
      },
      py::arg("values"), py::arg("f"), py::arg("beta"), py::arg("lam"), py::arg("current") = 0.0,
      py::arg("trim") = py::none());

  m.def("beta", &beta_from_capacity, py::arg("alpha"), py::arg("kbar"));
  m.def("parent_threshold", &parent_threshold, py::arg("f"), py::arg("beta"));
  m.def("kbar_bound", &kbar_bound, py::arg("layers"), py::arg("kbar"), py::arg("tau_bar"), py::arg("beta"));

  py::class_<RunConfig>(m, "Config")
      .def_readonly("name", &RunConfig::name)
      .def_readonly("node_count", &RunConfig::node_count)
      .def_property(
          "horizon", [](const RunConfig& c) { return c.params.horizon; },
          [](RunConfig& c, Step h) { c.params.horizon = h; })
      .def_property(
          "seed", [](const RunConfig& c) { return c.seed; }, [](RunConfig& c, std::uint64_t s) { c.seed = s; })
      .def("to_json", &serialize_config)
      .def("hash", &config_hash)
      .def("validate", &validate);

  m.def("load_config", &load_config, py::arg("path"));
  m.def("parse_config", &parse_config, py::arg("text"));
  m.def(
      "scenario",
      [](const std::string& name) {
        if (name == "s1") return scenario_s1();
        if (name == "s2") return scenario_s2();
        throw Error(ErrorCode::ConfigInvalid, "unknown scenario " + name);
      },
      py::arg("name"));
  m.def(
      "random_config", [](std::uint64_t seed) { return random_robust_config(seed); }, py::arg("seed"));

  m.def(
      "preflight",
      [](const RunConfig& c) {
        const auto report = preflight(c);
        py::list modes;
        for (const auto& v : report.modes) {
          py::dict d;
          d["mode"] = v.mode;
          d["sources"] = v.sources;
          d["r_star"] = v.r_star;
          d["construction_threshold"] = v.construction_threshold;
          d["full_threshold"] = v.full_threshold;
          d["meets_construction"] = v.meets_construction;
          d["meets_full"] = v.meets_full;
          modes.append(d);
        }
        py::dict out;
        out["beta"] = report.beta;
        out["modes"] = modes;
        out["warnings"] = report.warnings;
        return out;
      },
      py::arg("config"));

  py::class_<RunResult>(m, "Trace")
      .def_property_readonly("regular", [](const RunResult& r) { return r.trace.regular; })
      .def_property_readonly("eigenvalues", [](const RunResult& r) { return r.trace.eigenvalues; })
      .def_property_readonly("config_hash", [](const RunResult& r) { return r.trace.config_hash; })
      .def_property_readonly("z", [](const RunResult& r) { return rows_array(r.trace.z, r.trace.modes); })
      .def_property_readonly("estimates", [](const RunResult& r) { return estimates_array(r.trace); })
      .def_property_readonly("event_count", [](const RunResult& r) { return r.trace.events.size(); })
      .def("summary", [](const RunResult& r) { return summary_dict(snapshot_metrics(r.trace, r.config)); })
      .def(
          "medag_violations",
          [](const RunResult& r) {
            std::vector<std::string> out;
            for (const auto& rep : medag_reports(r.trace, r.config)) {
              out.insert(out.end(), rep.violations.begin(), rep.violations.end());
            }
            return out;
          })
      .def("export", [](const RunResult& r, const std::string& dir) { export_csv(r.trace, r.config, dir); },
           py::arg("dir"));

  m.def(
      "run",
      [](const RunConfig& c) {
        RunResult out{c, {}};
        {
          py::gil_scoped_release release;
          out.trace = run(c);
        }
        return out;
      },
      py::arg("config"));
}
