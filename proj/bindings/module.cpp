#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "semiord/core_model.hpp"
#include "semiord/evaluation.hpp"
#include "semiord/inference.hpp"
#include "semiord/optimizer.hpp"
#include "semiord/rotation.hpp"

namespace py = pybind11;
using namespace semiord;

PYBIND11_MODULE(_semiord, m) {
  m.doc() = "Penalized semi-parallel cumulative-logit regression";

  py::register_exception<InvalidRegion>(m, "InvalidRegionError");
  py::register_exception<StructuralError>(m, "StructuralErr");
  py::register_exception<ConfigError>(m, "ConfigErr");

  py::class_<CoefficientSet>(m, "CoefficientSet")
      .def(py::init([](Vector thresholds, Vector shared, Matrix specific) {
             CoefficientSet c;
             c.thresholds = std::move(thresholds);
             c.shared = std::move(shared);
             c.specific = std::move(specific);
             return c;
           }),
           py::arg("thresholds"), py::arg("shared"), py::arg("specific"))
      .def_readwrite("thresholds", &CoefficientSet::thresholds)
      .def_readwrite("shared", &CoefficientSet::shared)
      .def_readwrite("specific", &CoefficientSet::specific)
      .def("margin_coefficients", &CoefficientSet::margin_coefficients)
      .def_static("zeros", &CoefficientSet::zeros);

  py::class_<HyperParams>(m, "HyperParams")
      .def(py::init([](double lambda, double alpha, double rho) {
             return HyperParams{lambda, alpha, rho};
           }),
           py::arg("lam") = 1e-4, py::arg("alpha") = 0.5, py::arg("rho") = 1.0)
      .def_readwrite("lam", &HyperParams::lambda)
      .def_readwrite("alpha", &HyperParams::alpha)
      .def_readwrite("rho", &HyperParams::rho);

  py::enum_<Restriction>(m, "Restriction")
      .value("NONE", Restriction::None)
      .value("PARALLEL", Restriction::Parallel)
      .value("NONPARALLEL", Restriction::NonParallel);

  py::class_<ModelFit>(m, "ModelFit")
      .def_readonly("coefs", &ModelFit::coefs)
      .def_readonly("hyper", &ModelFit::hyper)
      .def_readonly("objective_trace", &ModelFit::objective_trace)
      .def_readonly("converged", &ModelFit::converged)
      .def_readonly("n_iterations", &ModelFit::n_iterations)
      .def_readonly("separation", &ModelFit::separation)
      .def_readonly("ridge_fallback", &ModelFit::ridge_fallback);

  m.def(
      "cumulative_probabilities",
      [](const Vector& eta) { return cumulative_probabilities(eta); },
      py::arg("eta"));

  m.def(
      "log_likelihood",
      [](const Matrix& design, const std::vector<int>& y, const Vector& w,
         const CoefficientSet& coefs) {
        return log_likelihood(design, y, w, coefs);
      },
      py::arg("design"), py::arg("y"), py::arg("weights"), py::arg("coefs"));

  m.def(
      "fit",
      [](const Matrix& design, const std::vector<int>& y, const Vector& w,
         int n_categories, const HyperParams& hyper, Restriction restriction) {
        if (restriction == Restriction::None)
          return fit(design, y, w, n_categories, hyper);
        return fit_restricted(design, y, w, n_categories, restriction, hyper);
      },
      py::arg("design"), py::arg("y"), py::arg("weights"),
      py::arg("n_categories"), py::arg("hyper") = HyperParams{},
      py::arg("restriction") = Restriction::None);

  m.def(
      "predict_probabilities",
      [](const ModelFit& fitted, const Matrix& design) {
        return predict(fitted, design).probs;
      },
      py::arg("fit"), py::arg("design"));

  m.def(
      "rps",
      [](const Matrix& probs, const std::vector<int>& outcomes) {
        ProbabilisticForecast f;
        f.probs = probs;
        return rps(f, outcomes);
      },
      py::arg("probs"), py::arg("outcomes"));

  m.def(
      "misclassification",
      [](const Matrix& probs, const std::vector<int>& outcomes) {
        ProbabilisticForecast f;
        f.probs = probs;
        return misclassification(f, outcomes);
      },
      py::arg("probs"), py::arg("outcomes"));

  m.def(
      "rotate",
      [](double b_neg, double b_zero) {
        const auto rot = to_positivity_neutrality({b_neg, b_zero, ""});
        return std::make_pair(rot.positivity, rot.neutrality);
      },
      py::arg("b_neg"), py::arg("b_zero"));

  m.def(
      "quadrant",
      [](double b_neg, double b_zero, double tolerance) {
        return quadrant_label(classify_quadrant({b_neg, b_zero, ""}, tolerance));
      },
      py::arg("b_neg"), py::arg("b_zero"), py::arg("tolerance") = 0.0);

  m.def("quantile_type7", &quantile_type7, py::arg("values"), py::arg("prob"));

  m.def(
      "pseudo_r2",
      [](const ModelFit& fitted, const Matrix& design) {
        return pseudo_r2(fitted, design);
      },
      py::arg("fit"), py::arg("design"));
}
