#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wgtomo/analytic.hpp"
#include "wgtomo/commands.hpp"
#include "wgtomo/core_model.hpp"
#include "wgtomo/dynamics.hpp"
#include "wgtomo/errors.hpp"
#include "wgtomo/tomography.hpp"

namespace py = pybind11;
using namespace wgtomo;

namespace {

py::dict trajectory_arrays(const Trajectory& traj)
{
    const auto n = static_cast<py::ssize_t>(traj.samples.size());
    py::array_t<double> t(n);
    py::array_t<cplx> amp({n, py::ssize_t{3}});
    auto tv = t.mutable_unchecked<1>();
    auto av = amp.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < n; ++i) {
        const auto& s = traj.samples[static_cast<std::size_t>(i)];
        tv(i) = s.t_gamma;
        av(i, 0) = s.b1;
        av(i, 1) = s.b2;
        av(i, 2) = s.b3;
    }
    py::dict out;
    out["t_gamma"] = t;
    out["amplitudes"] = amp;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Waveguide-coupled three-qubit model and two-pulse tomography";
    m.attr("__version__") = "0.1.0";

    auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<AmplitudeCapExceeded>(m, "AmplitudeCapExceeded", config_error.ptr());
    auto numeric = py::register_exception<NumericGuard>(m, "NumericGuard", PyExc_RuntimeError);
    py::register_exception<StepTooLarge>(m, "StepTooLarge", numeric.ptr());
    py::register_exception<DegenerateSpectrum>(m, "DegenerateSpectrum", PyExc_ArithmeticError);

    m.attr("AMPLITUDE_HARD_CAP") = kAmplitudeHardCap;
    m.attr("AMPLITUDE_SOFT_CAP") = kAmplitudeSoftCap;
    m.def("wrap_phase", &wrap_phase);

    py::class_<SystemConfig>(m, "SystemConfig")
        .def(py::init([](double gamma, double kd, double dt_gamma) {
                 SystemConfig c{gamma, kd, dt_gamma};
                 c.validate();
                 return c;
             }),
             py::arg("gamma") = 1.0, py::arg("kd") = 2.0 * pi, py::arg("dt_gamma") = 1e-3)
        .def_readwrite("gamma", &SystemConfig::gamma)
        .def_readwrite("kd", &SystemConfig::kd)
        .def_readwrite("dt_gamma", &SystemConfig::dt_gamma)
        .def("validate", &SystemConfig::validate);

    py::class_<ThreeQubitAmplitudes>(m, "ThreeQubitAmplitudes")
        .def(py::init<cplx, cplx, cplx, double>(), py::arg("b1"), py::arg("b2"), py::arg("b3"),
             py::arg("t_gamma") = 0.0)
        .def_readwrite("b1", &ThreeQubitAmplitudes::b1)
        .def_readwrite("b2", &ThreeQubitAmplitudes::b2)
        .def_readwrite("b3", &ThreeQubitAmplitudes::b3)
        .def_readwrite("t_gamma", &ThreeQubitAmplitudes::t_gamma)
        .def("total_population", &ThreeQubitAmplitudes::total_population)
        .def("vector", &ThreeQubitAmplitudes::vector);

    py::class_<TwoQubitPreparation>(m, "TwoQubitPreparation")
        .def(py::init<double, double, double, double>(), py::arg("a1"), py::arg("a3"),
             py::arg("phi1") = 0.0, py::arg("phi3") = 0.0)
        .def_static("normalized", &TwoQubitPreparation::normalized, py::arg("a1"), py::arg("a3"),
                    py::arg("phi1") = 0.0, py::arg("phi3") = 0.0)
        .def_property_readonly("a1", &TwoQubitPreparation::a1)
        .def_property_readonly("a3", &TwoQubitPreparation::a3)
        .def_property_readonly("phi1", &TwoQubitPreparation::phi1)
        .def_property_readonly("phi3", &TwoQubitPreparation::phi3)
        .def("phase_difference", &TwoQubitPreparation::phase_difference)
        .def("initial_amplitudes", &TwoQubitPreparation::initial_amplitudes)
        .def("__repr__", [](const TwoQubitPreparation& p) {
            std::ostringstream os;
            os << "TwoQubitPreparation(a1=" << p.a1() << ", a3=" << p.a3() << ", phi1=" << p.phi1()
               << ", phi3=" << p.phi3() << ")";
            return os.str();
        });

    py::class_<ReducedDensityMatrix>(m, "ReducedDensityMatrix")
        .def_readonly("p11", &ReducedDensityMatrix::p11)
        .def_readonly("p33", &ReducedDensityMatrix::p33)
        .def_readonly("rho13", &ReducedDensityMatrix::rho13)
        .def("matrix", &ReducedDensityMatrix::matrix)
        .def("is_valid", &ReducedDensityMatrix::is_valid, py::arg("tol") = 1e-9);

    py::enum_<PulseShape>(m, "PulseShape")
        .value("none", PulseShape::none)
        .value("rectangular", PulseShape::rectangular)
        .value("piecewise_constant", PulseShape::piecewise_constant)
        .value("tabulated", PulseShape::tabulated);

    py::class_<ModulationPulse>(m, "ModulationPulse")
        .def(py::init<>())
        .def_static("none", &ModulationPulse::none)
        .def_static("rectangular", &ModulationPulse::rectangular, py::arg("amplitude_over_gamma"),
                    py::arg("t_start_gamma"), py::arg("t_end_gamma"))
        .def_static(
            "piecewise",
            [](const std::vector<std::tuple<double, double, double>>& segs) {
                std::vector<PulseSegment> out;
                for (const auto& [t0, t1, a] : segs) {
                    out.push_back({t0, t1, a});
                }
                return ModulationPulse::piecewise(out);
            },
            py::arg("segments"), "Segments as (t_start_gamma, t_end_gamma, amplitude_over_gamma).")
        .def_static(
            "tabulated",
            [](const std::vector<std::pair<double, double>>& samples) {
                std::vector<PulseSample> out;
                for (const auto& [t, f] : samples) {
                    out.push_back({t, f});
                }
                return ModulationPulse::tabulated(out);
            },
            py::arg("samples"), "Samples as (t_gamma, f_over_gamma).")
        .def_property_readonly("shape", &ModulationPulse::shape)
        .def_property_readonly("t_start_gamma", &ModulationPulse::t_start_gamma)
        .def_property_readonly("t_end_gamma", &ModulationPulse::t_end_gamma)
        .def("value", &ModulationPulse::value)
        .def("integral", &ModulationPulse::integral)
        .def("peak_amplitude", &ModulationPulse::peak_amplitude)
        .def("soft_cap_warning", &ModulationPulse::soft_cap_warning);

    m.def("pulse_integral", &pulse_integral, py::arg("pulse"), py::arg("t_gamma"));
    m.def("pulse_area_u", &pulse_area_u, py::arg("pulse"), py::arg("t_gamma"));
    m.def("pulse_lambda", &pulse_lambda, py::arg("pulse"), py::arg("t_gamma"));
    m.def("pulse_leak_exponent", &pulse_leak_exponent, py::arg("pulse"));
    m.def("design_pulse", &design_pulse, py::arg("u_target"), py::arg("t_start_gamma"),
          py::arg("duration_gamma"));
    m.def("coupling_from_decay", &coupling_from_decay, py::arg("gamma"), py::arg("v_g"),
          py::arg("length"));
    m.def("density_from_preparation", &density_from_preparation, py::arg("prep"));

    m.def(
        "propagate",
        [](const TwoQubitPreparation& prep, const ModulationPulse& pulse, const SystemConfig& cfg,
           double t_final_gamma, std::size_t sample_every) {
            Trajectory traj;
            {
                py::gil_scoped_release release;
                traj = propagate(prep, pulse, cfg, t_final_gamma, sample_every);
            }
            return trajectory_arrays(traj);
        },
        py::arg("prep"), py::arg("pulse") = ModulationPulse{}, py::arg("config") = SystemConfig{},
        py::arg("t_final_gamma") = 20.0, py::arg("sample_every") = 100,
        "Integrates the amplitude equations; returns {'t_gamma': (n,), 'amplitudes': (n, 3)}.");

    m.def("rhs", &rhs, py::arg("state"), py::arg("f_now"), py::arg("kd"), py::arg("gamma") = 1.0);

    m.def("free_evolution", &free_evolution, py::arg("prep"), py::arg("t_gamma"));
    m.def(
        "free_asymptotic_populations",
        [](const TwoQubitPreparation& p) {
            const auto r = free_asymptotic_populations(p);
            return py::make_tuple(r.p1, r.p2, r.p3);
        },
        py::arg("prep"));
    m.def(
        "magnus_m1",
        [](const ModulationPulse& pulse, double t, double kd) {
            return magnus_m1(pulse, t, kd).m;
        },
        py::arg("pulse"), py::arg("t_gamma"), py::arg("kd"));
    m.def(
        "sylvester_eigens",
        [](const ModulationPulse& pulse, double t, double kd) {
            const auto e = sylvester_eigens(magnus_m1(pulse, t, kd));
            return py::make_tuple(e.lambda1, e.lambda2, e.lambda3);
        },
        py::arg("pulse"), py::arg("t_gamma"), py::arg("kd"));
    m.def(
        "exp_m1",
        [](const ModulationPulse& pulse, double t, double kd) {
            return Eigen::Matrix3cd(exp_m1(magnus_m1(pulse, t, kd)));
        },
        py::arg("pulse"), py::arg("t_gamma"), py::arg("kd"),
        "Closed-form propagator e^{M1(t)} for the given pulse.");
    m.def(
        "asymptotic_observables",
        [](const TwoQubitPreparation& p, double u, double lambda) {
            const auto a = asymptotic_observables(p, u, lambda);
            py::dict d;
            d["d"] = a.d;
            d["S"] = a.S;
            d["p2"] = a.p2;
            return d;
        },
        py::arg("prep"), py::arg("u"), py::arg("lambda_") = 0.0);

    py::enum_<PulseKind>(m, "PulseKind")
        .value("none", PulseKind::none)
        .value("pi", PulseKind::pi)
        .value("half_pi", PulseKind::half_pi);

    py::class_<ProtocolParams>(m, "ProtocolParams")
        .def(py::init<>())
        .def_readwrite("kd", &ProtocolParams::kd)
        .def_readwrite("t_start_gamma", &ProtocolParams::t_start_gamma)
        .def_readwrite("duration_gamma", &ProtocolParams::duration_gamma)
        .def_readwrite("settle_gamma", &ProtocolParams::settle_gamma)
        .def_readwrite("dt_gamma", &ProtocolParams::dt_gamma)
        .def_readwrite("eps_prod", &ProtocolParams::eps_prod)
        .def_readwrite("lambda_correct", &ProtocolParams::lambda_correct)
        .def("t_readout_gamma", &ProtocolParams::t_readout_gamma);

    py::class_<MeasurementRecord>(m, "MeasurementRecord")
        .def(py::init<>())
        .def_readwrite("pulse_kind", &MeasurementRecord::pulse_kind)
        .def_readwrite("p1", &MeasurementRecord::p1)
        .def_readwrite("p2", &MeasurementRecord::p2)
        .def_readwrite("p3", &MeasurementRecord::p3)
        .def_readwrite("shots", &MeasurementRecord::shots)
        .def_readwrite("t_readout_gamma", &MeasurementRecord::t_readout_gamma)
        .def_readwrite("lambda_", &MeasurementRecord::lambda)
        .def_property_readonly("d", &MeasurementRecord::d)
        .def_property_readonly("S", &MeasurementRecord::S);

    py::class_<PhaseEstimate>(m, "PhaseEstimate")
        .def_readonly("sin_est", &PhaseEstimate::sin_est)
        .def_readonly("cos_est", &PhaseEstimate::cos_est)
        .def_readonly("phi_est", &PhaseEstimate::phi_est)
        .def_readonly("phase_indeterminate", &PhaseEstimate::phase_indeterminate)
        .def_readonly("trig_out_of_range", &PhaseEstimate::trig_out_of_range);

    py::class_<ReconstructionReport>(m, "ReconstructionReport")
        .def_readonly("a1_est", &ReconstructionReport::a1_est)
        .def_readonly("a3_est", &ReconstructionReport::a3_est)
        .def_readonly("phi_est", &ReconstructionReport::phi_est)
        .def_readonly("sin_est", &ReconstructionReport::sin_est)
        .def_readonly("cos_est", &ReconstructionReport::cos_est)
        .def_readonly("rho_est", &ReconstructionReport::rho_est)
        .def_readonly("phase_indeterminate", &ReconstructionReport::phase_indeterminate)
        .def_readonly("trig_out_of_range", &ReconstructionReport::trig_out_of_range)
        .def_readonly("rec_pi", &ReconstructionReport::rec_pi)
        .def_readonly("rec_half", &ReconstructionReport::rec_half);

    m.def(
        "measure",
        [](const TwoQubitPreparation& prep, PulseKind kind, const ProtocolParams& params,
           std::optional<std::uint64_t> shots, std::optional<std::uint64_t> seed) {
            py::gil_scoped_release release;
            return measure(prep, kind, params, shots, seed);
        },
        py::arg("prep"), py::arg("kind"), py::arg("params") = ProtocolParams{},
        py::arg("shots") = py::none(), py::arg("seed") = py::none());
    m.def(
        "estimate_populations",
        [](const MeasurementRecord& rec) {
            const auto p = estimate_populations(rec);
            return py::make_tuple(p.a1, p.a3);
        },
        py::arg("rec_pi"));
    m.def("estimate_phase", &estimate_phase, py::arg("rec_half"), py::arg("a1_est"),
          py::arg("a3_est"), py::arg("eps_prod") = 0.02, py::arg("lambda_correct") = false);
    m.def(
        "reconstruct",
        [](const TwoQubitPreparation& prep, const ProtocolParams& params,
           std::optional<std::uint64_t> shots, std::optional<std::uint64_t> seed) {
            py::gil_scoped_release release;
            return reconstruct(prep, params, shots, seed);
        },
        py::arg("prep"), py::arg("params") = ProtocolParams{}, py::arg("shots") = py::none(),
        py::arg("seed") = py::none());

    m.def(
        "run_command",
        [](const std::string& command, std::optional<std::string> preset,
           std::optional<std::string> config, std::optional<std::string> out,
           std::optional<std::uint64_t> shots, std::optional<std::uint64_t> seed, bool observables) {
            CommandOptions o;
            o.command = command;
            o.preset = std::move(preset);
            o.config_path = std::move(config);
            o.out = std::move(out);
            o.shots = shots;
            o.seed = seed;
            o.observables = observables;
            std::ostringstream log;
            std::ostringstream err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = run_command(o, log, err);
            }
            return py::make_tuple(code, log.str(), err.str());
        },
        py::arg("command"), py::arg("preset") = py::none(), py::arg("config") = py::none(),
        py::arg("out") = py::none(), py::arg("shots") = py::none(), py::arg("seed") = py::none(),
        py::arg("observables") = false,
        "Runs a CLI subcommand in-process; returns (exit_code, log, errors).");
}
