#include "specstop/errors.hpp"
#include "specstop/estimator.hpp"
#include "specstop/experiment.hpp"
#include "specstop/noise_lab.hpp"
#include "specstop/operator_model.hpp"
#include "specstop/rate_theory.hpp"
#include "specstop/selfcheck.hpp"
#include "specstop/stopping_rules.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace specstop;

namespace {

void bind_types(py::module_& m) {
  py::class_<SpectralProblem>(m, "SpectralProblem")
      .def_readonly("sigma", &SpectralProblem::sigma)
      .def_readonly("xhat", &SpectralProblem::xhat)
      .def_readonly("yhat", &SpectralProblem::yhat)
      .def_readonly("decay_q", &SpectralProblem::decay_q)
      .def_property_readonly("m", &SpectralProblem::m)
      .def_property_readonly("has_factor", [](const SpectralProblem& p) { return static_cast<bool>(p.factor); })
      .def("__repr__", [](const SpectralProblem& p) { return "<SpectralProblem m=" + std::to_string(p.m()) + ">"; });

  py::class_<DenseOperator>(m, "DenseOperator")
      .def(py::init([](const Matrix& entries, double h) { return DenseOperator{entries, h}; }), py::arg("entries"),
           py::arg("h") = 0.0)
      .def_readonly("entries", &DenseOperator::entries)
      .def_readonly("h", &DenseOperator::h);

  py::class_<Deriv2>(m, "Deriv2")
      .def_readonly("a", &Deriv2::a)
      .def_readonly("x_true", &Deriv2::x_true)
      .def_readonly("b", &Deriv2::b);

  py::class_<SingularSystem>(m, "SingularSystem")
      .def_readonly("sigma", &SingularSystem::sigma)
      .def_readonly("u", &SingularSystem::u)
      .def_readonly("v", &SingularSystem::v);

  py::enum_<NoiseKind>(m, "NoiseKind")
      .value("gaussian_profile", NoiseKind::gaussian_profile)
      .value("rademacher_profile", NoiseKind::rademacher_profile)
      .value("gpd_rhs", NoiseKind::gpd_rhs);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def_static("gaussian", &NoiseModel::gaussian, py::arg("p"), py::arg("c") = 1.0)
      .def_static("rademacher", &NoiseModel::rademacher, py::arg("p"), py::arg("c") = 1.0)
      .def_static("gpd", &NoiseModel::gpd, py::arg("shape") = 0.2)
      .def_readwrite("kind", &NoiseModel::kind)
      .def_readwrite("p", &NoiseModel::p)
      .def_readwrite("c", &NoiseModel::c)
      .def_readwrite("gpd_shape", &NoiseModel::gpd_shape)
      .def_readwrite("gpd_scale", &NoiseModel::gpd_scale);

  py::class_<MeasurementBatch>(m, "MeasurementBatch")
      .def_readonly("coeffs", &MeasurementBatch::coeffs)
      .def_readonly("seed", &MeasurementBatch::seed)
      .def_property_readonly("n", &MeasurementBatch::n)
      .def_property_readonly("m", &MeasurementBatch::m);

  py::class_<BatchSummary>(m, "BatchSummary")
      .def_readonly("mean", &BatchSummary::mean)
      .def_readonly("s2", &BatchSummary::s2)
      .def_readonly("n", &BatchSummary::n);

  py::enum_<Rule>(m, "Rule")
      .value("plain", Rule::plain)
      .value("known_p", Rule::known_p)
      .value("algorithm1", Rule::algorithm1)
      .value("a_priori", Rule::a_priori)
      .value("oracle", Rule::oracle);

  py::enum_<WeightBranch>(m, "WeightBranch")
      .value("variance", WeightBranch::variance)
      .value("cap", WeightBranch::cap);

  py::class_<WeightSequence>(m, "WeightSequence")
      .def_readonly("d", &WeightSequence::d)
      .def_readonly("eps2", &WeightSequence::eps2)
      .def_readonly("branches", &WeightSequence::branches);

  py::class_<StoppingOutcome>(m, "StoppingOutcome")
      .def_readonly("k", &StoppingOutcome::k)
      .def_readonly("rule", &StoppingOutcome::rule)
      .def_readonly("delta_used", &StoppingOutcome::delta_used)
      .def_readonly("m_eff", &StoppingOutcome::m_eff)
      .def_readonly("residuals", &StoppingOutcome::residuals);

  py::class_<OracleChoice>(m, "OracleChoice")
      .def_readonly("k", &OracleChoice::k)
      .def_readonly("risk", &OracleChoice::risk);

  py::class_<RateParams>(m, "RateParams")
      .def(py::init([](double q, double p, double nu, double rho, double eps1, double eps2, double L) {
             return RateParams{q, p, nu, rho, eps1, eps2, L};
           }),
           py::arg("q") = 2.0, py::arg("p") = 2.0, py::arg("nu") = 1.0, py::arg("rho") = 1.0, py::arg("eps1") = 0.5,
           py::arg("eps2") = 0.1, py::arg("L") = 1.0)
      .def_readwrite("q", &RateParams::q)
      .def_readwrite("p", &RateParams::p)
      .def_readwrite("nu", &RateParams::nu)
      .def_readwrite("rho", &RateParams::rho)
      .def_readwrite("eps1", &RateParams::eps1)
      .def_readwrite("eps2", &RateParams::eps2)
      .def_readwrite("L", &RateParams::L);

  py::class_<SourceSpec>(m, "SourceSpec")
      .def_static("single", &SourceSpec::single, py::arg("nu"), py::arg("rho"), py::arg("j0"))
      .def_static("flat", &SourceSpec::flat, py::arg("nu"), py::arg("rho"), py::arg("J"))
      .def_static("geometric", &SourceSpec::geometric, py::arg("nu"), py::arg("rho"), py::arg("r"));

  py::class_<RiskRow>(m, "RiskRow")
      .def_readonly("rule", &RiskRow::rule)
      .def_readonly("n", &RiskRow::n)
      .def_readonly("R", &RiskRow::replications)
      .def_readonly("median_err", &RiskRow::median_err)
      .def_readonly("q25", &RiskRow::q25)
      .def_readonly("q75", &RiskRow::q75)
      .def_readonly("min", &RiskRow::min)
      .def_readonly("max", &RiskRow::max)
      .def_readonly("mean_k", &RiskRow::mean_k)
      .def_readonly("seed", &RiskRow::seed);

  py::class_<RawRow>(m, "RawRow")
      .def_readonly("rule", &RawRow::rule)
      .def_readonly("n", &RawRow::n)
      .def_readonly("rep", &RawRow::rep)
      .def_readonly("rel_err", &RawRow::rel_err)
      .def_readonly("k", &RawRow::k);

  py::class_<RiskTable>(m, "RiskTable")
      .def_readonly("rows", &RiskTable::rows)
      .def_readonly("raw", &RiskTable::raw)
      .def("to_csv", [](const RiskTable& t, const std::filesystem::path& path) { emit_csv(t, path); });
}

void bind_functions(py::module_& m) {
  m.def("make_diagonal_problem", &make_diagonal_problem, py::arg("m"), py::arg("q"), py::arg("scale"), py::arg("xhat"));
  m.def("make_deriv2", &make_deriv2, py::arg("m"), py::arg("case") = 1);
  m.def("make_deriv2_problem", &make_deriv2_problem, py::arg("m"), py::arg("case") = 1, py::arg("symmetrized") = true);
  m.def("svd", [](const Matrix& a) { return svd(a); }, py::arg("a"));
  m.def(
      "symmetrize",
      [](const Matrix& a, const Vector& x_true, const Vector& b) {
        return symmetrize(DenseOperator{a, 0.0}, x_true, b);
      },
      py::arg("a"), py::arg("x_true"), py::arg("b"));
  m.def("write_problem_csv", &write_problem_csv, py::arg("problem"), py::arg("path"));
  m.def("read_problem_csv", &read_problem_csv, py::arg("path"));

  m.def(
      "sample_gpd",
      [](double shape, double scale, Index count, std::uint64_t seed) {
        CounterRng rng(seed);
        return sample_gpd(shape, scale, count, rng);
      },
      py::arg("shape"), py::arg("scale"), py::arg("count"), py::arg("seed"));
  m.def("gpd_unit_scale", &gpd_unit_scale, py::arg("shape"));
  m.def("sample_batch", &sample_batch, py::arg("problem"), py::arg("model"), py::arg("n"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
  m.def("true_component_variances", &true_component_variances, py::arg("problem"), py::arg("model"));

  m.def("summarize", &summarize, py::arg("batch"));
  m.def("cutoff_estimate", &cutoff_estimate, py::arg("mean"), py::arg("sigma"), py::arg("k"));
  m.def("relative_error", &relative_error, py::arg("x_est"), py::arg("xhat"));
  m.def("noise_level_simple", &noise_level_simple, py::arg("n"));
  m.def("noise_level_sample", py::overload_cast<const MeasurementBatch&>(&noise_level_sample), py::arg("batch"));

  m.def("plain_discrepancy", &plain_discrepancy, py::arg("mean"), py::arg("delta"), py::arg("m_eff"),
        py::arg("tau") = 1.0);
  m.def("known_p_weights", &known_p_weights, py::arg("p"), py::arg("eps"), py::arg("m_eff"));
  m.def("algorithm1_weights", &algorithm1_weights, py::arg("s2"), py::arg("sigma"), py::arg("eps2"), py::arg("m_eff"));
  m.def("modified_noise_level", &modified_noise_level, py::arg("weights"), py::arg("s2"), py::arg("n"));
  m.def("algorithm1_stop", &algorithm1_stop, py::arg("weights"), py::arg("mean"), py::arg("delta_prime"),
        py::arg("m_eff"), py::arg("tau") = 1.0);
  m.def(
      "run_algorithm1",
      [](const MeasurementBatch& batch, const Vector& sigma, double eps1, double eps2, double tau) {
        return run_algorithm1(batch, sigma, eps1, eps2, tau);
      },
      py::arg("batch"), py::arg("sigma"), py::arg("eps1"), py::arg("eps2"), py::arg("tau") = 1.0);
  m.def("a_priori_k", &a_priori_k, py::arg("n"), py::arg("rho"), py::arg("nu"), py::arg("q"), py::arg("p"));
  m.def("oracle_k", &oracle_k, py::arg("problem"), py::arg("var"), py::arg("n"), py::arg("m_eff"));

  m.def("make_source_element", &make_source_element, py::arg("sigma"), py::arg("spec"));
  m.def("minimax_rate", &minimax_rate, py::arg("n"), py::arg("params"));
  m.def("theorem3_bound", &theorem3_bound, py::arg("n"), py::arg("params"));
  m.def("limit_weights", &limit_weights, py::arg("var"), py::arg("sigma"), py::arg("eps2"));
  m.def("exact_risk", &exact_risk, py::arg("problem"), py::arg("var"), py::arg("n"), py::arg("k"));

  m.def(
      "run_experiment",
      [](const std::string& config_text, unsigned threads) {
        std::istringstream in(config_text);
        const auto config = parse_config(in);
        py::gil_scoped_release release;
        return run_experiment(config, threads);
      },
      py::arg("config_text"), py::arg("threads") = 1,
      "Run a Monte Carlo experiment described by key = value config text.");

  m.def("selfcheck", [] {
    py::list out;
    for (const auto& r : run_selfcheck()) out.append(py::make_tuple(r.name, r.passed, r.detail));
    return out;
  });
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral cut-off with discrepancy-type stopping rules for repeated measurements";

  static py::exception<Error> base(m, "SpecstopError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ConfigurationError>(m, "ConfigurationError", base.ptr());
  py::register_exception<DegenerateOperator>(m, "DegenerateOperator", base.ptr());
  py::register_exception<DegenerateNoise>(m, "DegenerateNoise", base.ptr());
  py::register_exception<InsufficientSamples>(m, "InsufficientSamples", base.ptr());
  py::register_exception<UndefinedRelativeError>(m, "UndefinedRelativeError", base.ptr());
  py::register_exception<NumericalFailure>(m, "NumericalFailure", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  bind_types(m);
  bind_functions(m);
}
