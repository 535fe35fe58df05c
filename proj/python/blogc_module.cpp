#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "blogc/analysis/analysis.hpp"
#include "blogc/codegen/codegen.hpp"
#include "blogc/frontend/printer.hpp"
#include "blogc/frontend/validate.hpp"
#include "blogc/interp/interp.hpp"

namespace py = pybind11;
using namespace blogc;

namespace {

cg::Algo algo_of(const std::string& s) {
  cg::Algo a;
  if (!cg::parse_algo(s, a)) throw py::value_error("unknown algorithm '" + s + "' (expected lw, pmh or gibbs)");
  return a;
}

cg::CodegenOptions options(const std::string& algo, bool db, bool rc, bool acu, const std::string& name) {
  cg::CodegenOptions opt;
  opt.algo = algo_of(algo);
  opt.db = db;
  opt.rc = rc;
  opt.acu = acu;
  opt.model_name = name;
  return opt;
}

}  // namespace

PYBIND11_MODULE(_blogc, m) {
  m.doc() = "BLOG-subset compiler: parsing, analysis, emission, interpreter and exact enumeration";

  py::class_<fe::TypedModel>(m, "Model")
      .def_static("from_source", &fe::load_model, py::arg("source"))
      .def_static("from_file", &fe::load_model_file, py::arg("path"))
      .def("source", [](const fe::TypedModel& tm) { return fe::print_model(tm.model); })
      .def("analysis_json", [](const fe::TypedModel& tm) { return an::analyze(tm).to_json(tm); })
      .def("gibbs_ineligible", [](const fe::TypedModel& tm) { return an::gibbs_ineligible(tm, an::analyze(tm)); });

  m.def(
      "emit",
      [](const fe::TypedModel& tm, const std::string& algo, bool db, bool rc, bool acu, const std::string& name) {
        return cg::emit_program(tm, an::analyze(tm), options(algo, db, rc, acu, name));
      },
      py::arg("model"), py::arg("algo") = "pmh", py::arg("db") = true, py::arg("rc") = true, py::arg("acu") = true,
      py::arg("name") = "model");

  m.def(
      "build",
      [](const std::string& source, const std::string& out_dir, const std::string& name) {
        py::gil_scoped_release nogil;
        return cg::build(source, out_dir, name).string();
      },
      py::arg("source"), py::arg("out_dir"), py::arg("name"));

  m.def(
      "interp_lw",
      [](const fe::TypedModel& tm, std::uint64_t n, std::uint64_t seed, bool eager) {
        py::gil_scoped_release nogil;
        return interp::interp_lw(tm, n, seed, eager).to_json();
      },
      py::arg("model"), py::arg("n"), py::arg("seed") = 1, py::arg("eager") = false);

  m.def(
      "interp_pmh",
      [](const fe::TypedModel& tm, std::uint64_t n, std::uint64_t seed) {
        py::gil_scoped_release nogil;
        return interp::interp_pmh_full(tm, n, seed).to_json();
      },
      py::arg("model"), py::arg("n"), py::arg("seed") = 1);

  m.def(
      "enumerate_exact",
      [](const fe::TypedModel& tm, std::uint64_t max_worlds) {
        interp::ExactResult r;
        {
          py::gil_scoped_release nogil;
          r = interp::enumerate_exact(tm, max_worlds);
        }
        py::dict out;
        py::list queries;
        for (std::size_t i = 0; i < r.dist.size(); ++i) {
          py::dict q;
          q["query"] = r.query_text[i];
          q["histogram"] = r.dist[i];
          queries.append(q);
        }
        out["queries"] = queries;
        out["evidence_prob"] = r.evidence_prob;
        out["worlds"] = r.worlds;
        return out;
      },
      py::arg("model"), py::arg("max_worlds") = 50000000);

  m.def(
      "check_replay",
      [](const fe::TypedModel& tm, const std::string& trace, std::uint64_t max_steps) {
        py::gil_scoped_release nogil;
        return interp::check_replay(tm, trace, max_steps).to_json();
      },
      py::arg("model"), py::arg("trace"), py::arg("max_steps") = 0);
}
