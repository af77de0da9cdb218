// Python bindings for the main diagnostics: condition verdicts, Fisher
// quantities, linear-surrogate fits, and the spec-file front end.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wellposed/conditions.hpp"
#include "wellposed/linearize.hpp"
#include "wellposed/oracle.hpp"
#include "wellposed/spec_io.hpp"

namespace py = pybind11;
using namespace wellposed;

namespace {

ValidatedSpec make_linear_spec(const Matrix& h, const Matrix& sigma, const Vector& mu,
                               const Matrix& gamma, std::optional<double> tau2,
                               double c) {
  InputModel input = tau2 ? InputModel::isotropic(mu, *tau2)
                          : InputModel::full(mu, gamma);
  ProblemSpec spec{std::move(input), NoiseModel::full(sigma), ForwardModel::linear(h)};
  spec.c = c;
  return validate_spec(std::move(spec));
}

ReportOptions options_from_args(const std::string& linearize,
                                std::optional<Vector> x0, double fd_step,
                                int opt_budget) {
  ReportOptions opts;
  opts.fd_step = fd_step;
  opts.opt_budget = opt_budget;
  opts.x0 = std::move(x0);
  if (linearize == "mu" || opts.x0) opts.linearize = ReportOptions::Linearize::at_point;
  if (linearize == "opt") opts.linearize = ReportOptions::Linearize::optimize;
  return opts;
}

}  // namespace

PYBIND11_MODULE(_wellposed, m) {
  m.doc() = "Well-posedness diagnostics for stochastic inversion problems";

  py::register_exception<Error>(m, "WellposedError", PyExc_ValueError);

  py::enum_<VerdictKind>(m, "VerdictKind")
      .value("exact", VerdictKind::exact)
      .value("sufficient", VerdictKind::sufficient)
      .value("necessary", VerdictKind::necessary);

  py::enum_<Overall>(m, "Overall")
      .value("well_posed", Overall::well_posed)
      .value("ill_posed", Overall::ill_posed)
      .value("inconclusive", Overall::inconclusive);

  py::class_<ConditionVerdict>(m, "ConditionVerdict")
      .def_readonly("name", &ConditionVerdict::name)
      .def_readonly("kind", &ConditionVerdict::kind)
      .def_readonly("lhs", &ConditionVerdict::lhs)
      .def_readonly("rhs", &ConditionVerdict::rhs)
      .def_readonly("margin", &ConditionVerdict::margin)
      .def_readonly("holds", &ConditionVerdict::holds)
      .def_readonly("strict", &ConditionVerdict::strict)
      .def_readonly("equation", &ConditionVerdict::equation)
      .def_readonly("note", &ConditionVerdict::note)
      .def("__repr__", [](const ConditionVerdict& v) {
        return "<ConditionVerdict " + v.name + (v.holds ? " holds" : " fails") +
               " margin=" + std::to_string(v.margin) + ">";
      });

  py::class_<IdentifiabilityVerdict>(m, "IdentifiabilityVerdict")
      .def_readonly("injective", &IdentifiabilityVerdict::injective)
      .def_readonly("count_ok", &IdentifiabilityVerdict::count_ok)
      .def_readonly("rank", &IdentifiabilityVerdict::rank);

  py::class_<WellPosednessReport>(m, "Report")
      .def_readonly("verdicts", &WellPosednessReport::verdicts)
      .def_readonly("overall", &WellPosednessReport::overall)
      .def_readonly("notes", &WellPosednessReport::notes)
      .def_readonly("identifiability", &WellPosednessReport::identifiability)
      .def_readonly("cond_number", &WellPosednessReport::cond_number)
      .def_readonly("sobol_x", &WellPosednessReport::sobol_x)
      .def_readonly("sobol_eps", &WellPosednessReport::sobol_eps)
      .def("__repr__", [](const WellPosednessReport& r) {
        return std::string("<Report overall=") + to_string(r.overall) + " with " +
               std::to_string(r.verdicts.size()) + " verdicts>";
      });

  py::class_<SobolScalarVerdict>(m, "SobolScalarVerdict")
      .def_readonly("verdict", &SobolScalarVerdict::verdict)
      .def_readonly("s_x", &SobolScalarVerdict::s_x)
      .def_readonly("s_eps", &SobolScalarVerdict::s_eps);

  py::class_<IsotropicVerdicts>(m, "IsotropicVerdicts")
      .def_readonly("spectrum_sum", &IsotropicVerdicts::spectrum_sum)
      .def_readonly("equal_spectrum", &IsotropicVerdicts::equal_spectrum);

  // Spectral quantities.
  m.def("psi_matrix", &psi_matrix, py::arg("h"), py::arg("sigma"));
  m.def("psi_eigenvalues", &psi_eigenvalues, py::arg("h"), py::arg("sigma"));
  m.def("fisher_signal_tau2", &fisher_signal_tau2, py::arg("q"), py::arg("tau2"));
  m.def("fisher_observed_tau2", &fisher_observed_tau2, py::arg("h"), py::arg("sigma"),
        py::arg("tau2"));
  m.def("entropy_gaussian", &entropy_gaussian, py::arg("gamma"));
  m.def("default_c", &default_c);

  // Individual conditions.
  m.def("sobol_wellposed_scalar", &sobol_wellposed_scalar, py::arg("a"),
        py::arg("gamma"), py::arg("sigma2"));
  m.def("entropy_wellposed_scalar", &entropy_wellposed_scalar, py::arg("a"),
        py::arg("gamma"), py::arg("sigma2"));
  m.def("fisher_condition_exact", &fisher_condition_exact, py::arg("h"),
        py::arg("sigma"), py::arg("tau2"), py::arg("c") = 4.0);
  m.def("fisher_condition_commuting", &fisher_condition_commuting, py::arg("h"),
        py::arg("sigma"), py::arg("tau2"), py::arg("c") = 4.0);
  m.def("fisher_condition_isotropic", &fisher_condition_isotropic, py::arg("h"),
        py::arg("sigma2"), py::arg("tau2"), py::arg("c") = 4.0);
  m.def("sufficient_condition", &sufficient_condition, py::arg("h"), py::arg("sigma"),
        py::arg("tau2"), py::arg("c") = 4.0);
  m.def("necessary_condition", &necessary_condition, py::arg("h"), py::arg("sigma"),
        py::arg("tau2"), py::arg("c") = 4.0);
  m.def("sufficient_condition_condnum", &sufficient_condition_condnum, py::arg("h"),
        py::arg("sigma"), py::arg("tau2"), py::arg("c") = 4.0);
  m.def("general_gamma_condition", &general_gamma_condition, py::arg("h"),
        py::arg("sigma"), py::arg("gamma"), py::arg("c") = 4.0);

  // Aggregated reports.
  m.def(
      "check_linear",
      [](const Matrix& h, const Matrix& sigma, std::optional<double> tau2,
         std::optional<Matrix> gamma, std::optional<Vector> mu, double c) {
        if (tau2.has_value() == gamma.has_value()) {
          throw py::value_error("pass exactly one of tau2 or gamma");
        }
        const int p = static_cast<int>(h.cols());
        const Vector mean = mu ? *mu : Vector::Zero(p);
        return full_report(make_linear_spec(h, sigma, mean,
                                            gamma ? *gamma : Matrix(), tau2, c));
      },
      py::arg("h"), py::arg("sigma"), py::arg("tau2") = std::nullopt,
      py::arg("gamma") = std::nullopt, py::arg("mu") = std::nullopt,
      py::arg("c") = 4.0,
      "Full well-posedness report for the linear model Y* = Hx + eps.");

  m.def(
      "check_file",
      [](const std::string& path, const std::string& linearize,
         std::optional<Vector> x0, double fd_step, int opt_budget) {
        const ValidatedSpec spec = validate_spec(load_spec_file(path));
        return full_report(spec,
                           options_from_args(linearize, std::move(x0), fd_step,
                                             opt_budget));
      },
      py::arg("path"), py::arg("linearize") = "", py::arg("x0") = std::nullopt,
      py::arg("fd_step") = 1e-5, py::arg("opt_budget") = 200,
      "Load a JSON problem spec and run the full report.");

  m.def(
      "report_json",
      [](const std::string& path, const std::string& linearize,
         std::optional<Vector> x0, double fd_step, int opt_budget) {
        const ValidatedSpec spec = validate_spec(load_spec_file(path));
        const auto report = full_report(
            spec, options_from_args(linearize, std::move(x0), fd_step, opt_budget));
        return report_to_json(report, file_digest(path)).dump(2);
      },
      py::arg("path"), py::arg("linearize") = "", py::arg("x0") = std::nullopt,
      py::arg("fd_step") = 1e-5, py::arg("opt_budget") = 200,
      "Same as check_file but returns the serialized JSON report.");

  // Linearization.
  m.def("jacobian_fd", &jacobian_fd, py::arg("g"), py::arg("x0"),
        py::arg("step") = 1e-5);
  m.def(
      "taylor_linearize",
      [](const Evaluator& g, const Vector& x0, double step) {
        const LinearizedModel lin = taylor_linearize(g, x0, step);
        return py::make_tuple(lin.h_x0, lin.offset);
      },
      py::arg("g"), py::arg("x0"), py::arg("step") = 1e-5,
      "Returns (H_x0, offset) of the first-order surrogate at x0.");
  m.def(
      "mse_linear_approx",
      [](const Evaluator& g, const Vector& mu, const Matrix& gamma, const Matrix& sigma,
         double tau2, double c, int n, std::uint64_t seed) {
        const MseFitResult fit =
            mse_linear_approx(g, mu, gamma, sigma, tau2, c, n, seed);
        return py::make_tuple(fit.h, fit.u, fit.quality.mse);
      },
      py::arg("g"), py::arg("mu"), py::arg("gamma"), py::arg("sigma"), py::arg("tau2"),
      py::arg("c") = 4.0, py::arg("n") = 100000, py::arg("seed") = 20240101,
      "Returns (H, u, mse) of the least-squares linear surrogate.");
  m.def(
      "kl_optimal_fit",
      [](const Evaluator& g, const Vector& mu, const Matrix& gamma, int q, int n,
         std::uint64_t seed) {
        const KlFitResult fit = kl_optimal_fit(g, mu, gamma, q, n, seed);
        return py::make_tuple(fit.h, fit.m2, fit.quality.kl_residual);
      },
      py::arg("g"), py::arg("mu"), py::arg("gamma"), py::arg("q"),
      py::arg("n") = 100000, py::arg("seed") = 20240101,
      "Returns (H, M2, residual) of the moment-matched surrogate.");

  // Oracles.
  m.def("fd_fisher_tau2", &fd_fisher_tau2, py::arg("h"), py::arg("sigma"),
        py::arg("tau2"), py::arg("step") = 0.0);
  m.def(
      "score_variance_fi",
      [](const Matrix& h, const Matrix& sigma, double tau2, int n, std::uint64_t seed) {
        const OracleResult r = score_variance_fi(h, sigma, tau2, n, seed);
        return py::make_tuple(r.estimate, r.std_error);
      },
      py::arg("h"), py::arg("sigma"), py::arg("tau2"), py::arg("n") = 100000,
      py::arg("seed") = 20240101, "Returns (estimate, std_error).");

  m.attr("__version__") = kToolVersion;
}
