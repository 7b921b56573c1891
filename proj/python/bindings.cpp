#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "favard/errors.hpp"
#include "favard/experiments.hpp"
#include "favard/parallel.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw favard::InvalidInput(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_favard, m) {
  m.doc() = "Favard length, visibility and transversality estimators";

  static py::exception<favard::Error> error(m, "FavardError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const favard::Error& e) {
      PyErr_SetObject(error.ptr(), py::make_tuple(e.kind(), e.what()).ptr());
    }
  });

  m.def("experiment_ids", &favard::experiment_ids);
  m.def("experiment_target", &favard::experiment_target, py::arg("experiment"));

  m.def(
      "run_experiment_json",
      [](const std::string& config) {
        const json cfg = parse(config);
        favard::ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = favard::run_experiment(cfg);
        }
        return py::make_tuple(favard::to_csv(res.table), res.metadata.dump());
      },
      py::arg("config"));

  m.def(
      "generate_json",
      [](const std::string& set, int n) { return favard::to_json(favard::set_from_json(parse(set), n)).dump(); },
      py::arg("set"), py::arg("n"));

  m.def(
      "fit_decay",
      [](const std::vector<double>& xs, const std::vector<double>& ys, const std::string& model) {
        const auto fit = favard::fit_decay(xs, ys, favard::parse_fit_model(model));
        return py::dict(py::arg("slope") = fit.slope, py::arg("intercept") = fit.intercept, py::arg("r2") = fit.r2);
      },
      py::arg("xs"), py::arg("ys"), py::arg("model") = "log-log");

  m.def(
      "riesz_energy",
      [](const std::string& set, int n, double s, int quadrature_order) {
        const auto cells = favard::set_from_json(parse(set), n);
        return favard::riesz_energy(favard::equidistributed_measure(cells, quadrature_order), s);
      },
      py::arg("set"), py::arg("n"), py::arg("s") = 1.0, py::arg("quadrature_order") = 4);

  m.def(
      "favard_minkowski",
      [](const std::string& curve, const std::string& set, int n, double pitch) {
        const auto cells = favard::set_from_json(parse(set), n);
        return favard::to_json(favard::favard_minkowski(favard::curve_from_json(parse(curve)), cells, pitch)).dump();
      },
      py::arg("curve"), py::arg("set"), py::arg("n"), py::arg("pitch"));

  m.def("set_thread_count", &favard::parallel::set_thread_count, py::arg("count"));
  m.def("thread_count", &favard::parallel::thread_count);
}
