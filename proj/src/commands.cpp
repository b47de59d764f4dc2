#include "wgtomo/commands.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "wgtomo/analytic.hpp"
#include "wgtomo/errors.hpp"

namespace wgtomo {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

fs::path output_path(const CommandOptions& opts, const ScenarioConfig& cfg,
                     const std::string& fallback)
{
    fs::path p = opts.out ? fs::path(*opts.out)
                 : !cfg.output.path.empty() ? fs::path(cfg.output.path)
                                            : fs::path(fallback);
    if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) {
        p = fs::path(dir) / p.filename();
    }
    return p;
}

fs::path sibling(const fs::path& p, const std::string& suffix)
{
    fs::path out = p;
    out.replace_extension();
    out += suffix;
    return out;
}

std::ofstream open_output(const fs::path& p)
{
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    std::ofstream os(p, std::ios::binary);
    if (!os) {
        throw IoError("cannot write " + p.string());
    }
    return os;
}

void write_json_file(const fs::path& p, const json& j)
{
    auto os = open_output(p);
    os << j.dump(2) << "\n";
}

json amplitudes_json(const Observables& o)
{
    return {{"t_gamma", o.t_gamma}, {"p1", o.p1}, {"p2", o.p2}, {"p3", o.p3}, {"d", o.d},
            {"S", o.S}};
}

json rho_json(const ReducedDensityMatrix& rho)
{
    return {{"p11", rho.p11}, {"p33", rho.p33}, {"re_rho13", rho.rho13.real()},
            {"im_rho13", rho.rho13.imag()}};
}

json record_json(const MeasurementRecord& rec)
{
    return {{"pulse_kind", to_string(rec.pulse_kind)},
            {"p1", rec.p1},
            {"p2", rec.p2},
            {"p3", rec.p3},
            {"d", rec.d()},
            {"S", rec.S()},
            {"shots", rec.shots ? json(*rec.shots) : json(nullptr)},
            {"t_readout_gamma", rec.t_readout_gamma},
            {"lambda", rec.lambda}};
}

void write_config_comment(std::ostream& os, const json& config)
{
    os << "# config: " << config.dump() << "\n";
}

int cmd_simulate(const CommandOptions& opts, const ScenarioConfig& cfg, std::ostream& log)
{
    const Trajectory traj =
        propagate(cfg.preparation, cfg.pulse, cfg.system, cfg.t_final_gamma, cfg.sample_every);

    const bool as_json = cfg.output.format == "json";
    const fs::path csv = output_path(opts, cfg, as_json ? "simulate.json" : "simulate.csv");
    if (as_json) {
        write_json_file(csv, trajectory_to_json(traj, cfg.resolved));
    } else {
        auto os = open_output(csv);
        write_trajectory_csv(os, traj, cfg.resolved);
    }

    const Observables last = observe(traj.final_state());
    json summary;
    summary["config"] = cfg.resolved;
    summary["post_pulse"] = amplitudes_json(last);
    summary["post_pulse"]["after_pulse_end"] =
        cfg.pulse.is_zero() || cfg.t_final_gamma >= cfg.pulse.t_end_gamma();
    summary["pulse"] = {{"u", pulse_area_u(cfg.pulse, cfg.t_final_gamma)},
                        {"lambda", pulse_lambda(cfg.pulse, cfg.t_final_gamma)},
                        {"t_end_gamma", cfg.pulse.t_end_gamma()}};
    const auto n = kd_pi_multiple(cfg.system.kd);
    if (n && *n % 2 == 0) {
        if (cfg.pulse.is_zero()) {
            const Populations p = free_asymptotic_populations(cfg.preparation);
            summary["analytic"] = {{"p1", p.p1}, {"p2", p.p2}, {"p3", p.p3},
                                   {"d", p.p1 - p.p3}, {"S", p.p1 + p.p3}};
        } else {
            const auto a = asymptotic_observables(cfg.preparation,
                                                  pulse_area_u(cfg.pulse, cfg.t_final_gamma),
                                                  pulse_lambda(cfg.pulse, cfg.t_final_gamma));
            summary["analytic"] = {{"d", a.d}, {"S", a.S}, {"p2", a.p2}};
        }
    } else {
        summary["analytic"] = nullptr;
    }
    summary["samples"] = traj.samples.size();
    const fs::path js = sibling(csv, ".summary.json");
    write_json_file(js, summary);
    log << "wrote " << csv.string() << " and " << js.string() << "\n";
    return kExitOk;
}

int cmd_reconstruct(const CommandOptions& opts, const ScenarioConfig& cfg, std::ostream& log)
{
    const ReconstructionReport rep = reconstruct(cfg.preparation, cfg.protocol, cfg.shots, cfg.seed);
    json j;
    j["config"] = cfg.resolved;
    const json body = report_to_json(rep, cfg.preparation);
    for (const auto& [k, v] : body.items()) {
        j[k] = v;
    }
    const fs::path p = output_path(opts, cfg, "reconstruct.json");
    write_json_file(p, j);
    log << "wrote " << p.string() << "\n";
    return kExitOk;
}

void write_observable_surfaces(std::ostream& os, const json& config)
{
    write_config_comment(os, config);
    os << "# Lambda -> 0 limit; dphi = phi1 - phi3\n";
    os << "u_label,u,p3,a3,a1,dphi,d,S\n";
    for (PulseKind kind : {PulseKind::half_pi, PulseKind::pi}) {
        const double u = target_area(kind);
        for (int i = 0; i <= 20; ++i) {
            const double p3 = i / 20.0;
            const double a3 = std::sqrt(p3);
            const double a1 = std::sqrt(1.0 - p3);
            for (int k = 0; k <= 32; ++k) {
                const double dphi = -pi + k * pi / 16.0;
                const auto obs = asymptotic_observables(
                    TwoQubitPreparation::normalized(a1, a3, dphi, 0.0), u, 0.0);
                os << to_string(kind) << ',' << format_number(u) << ',' << format_number(p3)
                   << ',' << format_number(a3) << ',' << format_number(a1) << ','
                   << format_number(dphi) << ',' << format_number(obs.d) << ','
                   << format_number(obs.S) << '\n';
            }
        }
    }
}

int cmd_sweep(const CommandOptions& opts, const ScenarioConfig& cfg, std::ostream& log)
{
    const auto rows = run_sweep(cfg.sweep, cfg.protocol, cfg.shots, cfg.seed);
    const bool as_json = cfg.output.format == "json";
    const fs::path p = output_path(opts, cfg, as_json ? "sweep.json" : "sweep.csv");
    if (as_json) {
        json j;
        j["config"] = cfg.resolved;
        j["convention"] = "dphi = phi1 - phi3 (radians)";
        j["rows"] = json::array();
        for (const auto& r : rows) {
            j["rows"].push_back({{"a1_sq_true", r.a1_sq_true},
                                 {"dphi_true", r.dphi_true},
                                 {"a1_sq_est", r.a1_sq_est},
                                 {"dphi_est", r.dphi_est},
                                 {"err_pop", r.err_pop},
                                 {"err_phase", r.err_phase},
                                 {"phase_indeterminate", r.phase_indeterminate}});
        }
        write_json_file(p, j);
    } else {
        auto os = open_output(p);
        write_config_comment(os, cfg.resolved);
        os << "# dphi = phi1 - phi3 (radians)\n";
        os << "a1_sq_true,dphi_true,a1_sq_est,dphi_est,err_pop,err_phase\n";
        for (const auto& r : rows) {
            os << format_number(r.a1_sq_true) << ',' << format_number(r.dphi_true) << ','
               << format_number(r.a1_sq_est) << ',' << format_number(r.dphi_est) << ','
               << format_number(r.err_pop) << ',' << format_number(r.err_phase) << '\n';
        }
    }
    log << "wrote " << p.string() << " (" << rows.size() << " rows)\n";
    if (opts.observables) {
        const fs::path q = sibling(p, ".observables.csv");
        auto os = open_output(q);
        write_observable_surfaces(os, cfg.resolved);
        log << "wrote " << q.string() << "\n";
    }
    return kExitOk;
}

int cmd_validate(const CommandOptions& opts, const ScenarioConfig& cfg, std::ostream& log)
{
    const ValidationReport v = run_validation(cfg.protocol, cfg.system.dt_gamma);
    json j;
    j["config"] = cfg.resolved;
    j["sylvester_vs_ode"] = v.sylvester_vs_ode;
    j["covariant_completeness"] = v.covariant_completeness;
    j["covariant_orthogonality"] = v.covariant_orthogonality;
    j["covariant_idempotency"] = v.covariant_idempotency;
    j["asymptotic_agreement"] = v.asymptotic_agreement;
    j["tolerances"] = {{"sylvester_vs_ode", ValidationReport::kSylvesterTol},
                       {"covariants", ValidationReport::kCovariantTol},
                       {"asymptotic_agreement", ValidationReport::kAsymptoticTol}};
    j["passed"] = v.passed();
    const fs::path p = output_path(opts, cfg, "validate.json");
    write_json_file(p, j);
    log << "sylvester_vs_ode       " << v.sylvester_vs_ode << "\n"
        << "covariant_completeness " << v.covariant_completeness << "\n"
        << "covariant_orthogonality " << v.covariant_orthogonality << "\n"
        << "covariant_idempotency  " << v.covariant_idempotency << "\n"
        << "asymptotic_agreement   " << v.asymptotic_agreement << "\n"
        << (v.passed() ? "PASS" : "FAIL") << " (wrote " << p.string() << ")\n";
    return v.passed() ? kExitOk : kExitValidation;
}

} // namespace

std::string format_number(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

namespace {

std::array<double, 12> trajectory_row(const ThreeQubitAmplitudes& s)
{
    const Observables o = observe(s);
    return {o.t_gamma,     o.p1,        o.p2,        o.p3,        o.d,         o.S,
            s.b1.real(), s.b1.imag(), s.b2.real(), s.b2.imag(), s.b3.real(), s.b3.imag()};
}

} // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const json& config)
{
    write_config_comment(os, config);
    os << kTrajectoryHeader << "\n";
    for (const auto& s : traj.samples) {
        const auto cols = trajectory_row(s);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i > 0) {
                os << ',';
            }
            os << format_number(cols[i]);
        }
        os << '\n';
    }
}

json trajectory_to_json(const Trajectory& traj, const json& config)
{
    json cols = json::array();
    std::string header = kTrajectoryHeader;
    for (std::size_t pos = 0; pos != std::string::npos;) {
        const std::size_t next = header.find(',', pos);
        cols.push_back(header.substr(pos, next == std::string::npos ? next : next - pos));
        pos = next == std::string::npos ? next : next + 1;
    }
    json rows = json::array();
    for (const auto& s : traj.samples) {
        const auto r = trajectory_row(s);
        rows.push_back(json(std::vector<double>(r.begin(), r.end())));
    }
    json j;
    j["config"] = config;
    j["columns"] = std::move(cols);
    j["rows"] = std::move(rows);
    return j;
}

json report_to_json(const ReconstructionReport& rep, const TwoQubitPreparation& truth)
{
    const ReducedDensityMatrix rho_true = density_from_preparation(truth);
    const double err_a1 = std::abs(rep.a1_est * rep.a1_est - rho_true.p11);
    const double err_a3 = std::abs(rep.a3_est * rep.a3_est - rho_true.p33);
    json j;
    j["convention"] = {{"phi", "phi1 - phi3, radians in (-pi, pi]"},
                       {"sin_est", "estimate of sin(phi3 - phi1)"},
                       {"cos_est", "estimate of cos(phi1 - phi3)"}};
    j["true"] = {{"a1", truth.a1()},
                 {"a3", truth.a3()},
                 {"a1_sq", rho_true.p11},
                 {"phi", truth.phase_difference()},
                 {"rho", rho_json(rho_true)}};
    j["estimate"] = {{"a1", rep.a1_est},
                     {"a3", rep.a3_est},
                     {"a1_sq", rep.a1_est * rep.a1_est},
                     {"phi", rep.phi_est},
                     {"sin_est", rep.sin_est},
                     {"cos_est", rep.cos_est},
                     {"rho", rho_json(rep.rho_est)}};
    j["errors"] = {{"a1_sq", err_a1},
                   {"a3_sq", err_a3},
                   {"population", std::max(err_a1, err_a3)},
                   {"phase", rep.phase_indeterminate
                                 ? json(nullptr)
                                 : json(std::abs(wrap_phase(rep.phi_est - truth.phase_difference())))},
                   {"rho13", std::abs(rep.rho_est.rho13 - rho_true.rho13)}};
    j["phase_indeterminate"] = rep.phase_indeterminate;
    j["trig_out_of_range"] = rep.trig_out_of_range;
    j["measurements"] = {{"pi", record_json(rep.rec_pi)}, {"half_pi", record_json(rep.rec_half)}};
    return j;
}

std::vector<SweepRow> run_sweep(const SweepGrid& grid, const ProtocolParams& params,
                                std::optional<std::uint64_t> shots,
                                std::optional<std::uint64_t> seed, unsigned workers)
{
    const std::size_t n_phase = grid.dphi.size();
    const std::size_t total = grid.a1_sq.size() * n_phase;
    std::vector<SweepRow> rows(total);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto work = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            try {
                const double a1_sq = grid.a1_sq[i / n_phase];
                const double dphi = wrap_phase(grid.dphi[i % n_phase]);
                const auto truth = TwoQubitPreparation::normalized(
                    std::sqrt(a1_sq), std::sqrt(1.0 - a1_sq), dphi, 0.0);
                std::optional<std::uint64_t> point_seed;
                if (seed) {
                    point_seed = *seed + 2 * i;
                }
                const auto rep = reconstruct(truth, params, shots, point_seed);
                SweepRow& r = rows[i];
                r.a1_sq_true = a1_sq;
                r.dphi_true = truth.phase_difference();
                r.a1_sq_est = rep.a1_est * rep.a1_est;
                r.dphi_est = rep.phi_est;
                r.err_pop = std::abs(r.a1_sq_est - a1_sq);
                r.err_phase = std::abs(wrap_phase(r.dphi_est - r.dphi_true));
                r.phase_indeterminate = rep.phase_indeterminate;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = total;
            }
        }
    };

    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(total, 1)));
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < workers; ++w) {
            pool.emplace_back(work);
        }
        work();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return rows;
}

double sylvester_ode_deviation(double kd, double f_over_gamma, double t_gamma, double dt_gamma)
{
    const ModulationPulse pulse = f_over_gamma == 0.0
        ? ModulationPulse::none()
        : ModulationPulse::rectangular(f_over_gamma, 0.0, t_gamma);
    const Eigen::Matrix3cd closed = exp_m1(magnus_m1(pulse, t_gamma, kd));

    SystemConfig config;
    config.kd = kd;
    config.dt_gamma = dt_gamma;
    Eigen::Matrix3cd numeric;
    for (int j = 0; j < 3; ++j) {
        ThreeQubitAmplitudes e;
        e.b1 = j == 0 ? 1.0 : 0.0;
        e.b2 = j == 1 ? 1.0 : 0.0;
        e.b3 = j == 2 ? 1.0 : 0.0;
        const auto traj = propagate_amplitudes(e, pulse, config, t_gamma,
                                               std::numeric_limits<std::size_t>::max());
        numeric.col(j) = traj.final_state().vector();
    }
    return (closed - numeric).cwiseAbs().maxCoeff();
}

ValidationReport run_validation(const ProtocolParams& params, double dt_gamma)
{
    ValidationReport v;
    const double t_check = 20.0;
    for (double kd : {pi / 3.0, pi / 2.0, pi, 1.5 * pi, 2.0 * pi}) {
        for (double f : {0.0, 0.02, 0.05}) {
            v.sylvester_vs_ode =
                std::max(v.sylvester_vs_ode, sylvester_ode_deviation(kd, f, t_check, dt_gamma));

            const ModulationPulse pulse = f == 0.0 ? ModulationPulse::none()
                                                   : ModulationPulse::rectangular(f, 0.0, t_check);
            const MagnusMatrix m = magnus_m1(pulse, t_check, kd);
            SylvesterEigens eig{};
            try {
                eig = sylvester_eigens(m);
            } catch (const DegenerateSpectrum&) {
                continue;
            }
            const auto b = frobenius_covariants(m, eig);
            const Eigen::Matrix3cd id = Eigen::Matrix3cd::Identity();
            v.covariant_completeness = std::max(
                v.covariant_completeness, (b[0] + b[1] + b[2] - id).cwiseAbs().maxCoeff());
            for (int i = 0; i < 3; ++i) {
                v.covariant_idempotency = std::max(v.covariant_idempotency,
                                                   (b[i] * b[i] - b[i]).cwiseAbs().maxCoeff());
                for (int k = 0; k < 3; ++k) {
                    if (i != k) {
                        v.covariant_orthogonality = std::max(
                            v.covariant_orthogonality, (b[i] * b[k]).cwiseAbs().maxCoeff());
                    }
                }
            }
        }
    }

    ProtocolParams p = params;
    p.kd = 2.0 * pi;
    p.dt_gamma = dt_gamma;
    for (double a1_sq : {0.2, 0.5, 0.8}) {
        for (double dphi : {-0.75 * pi, -0.25 * pi, 0.25 * pi, 0.75 * pi}) {
            const auto prep = TwoQubitPreparation::normalized(std::sqrt(a1_sq),
                                                              std::sqrt(1.0 - a1_sq), dphi, 0.0);
            for (PulseKind kind : {PulseKind::half_pi, PulseKind::pi}) {
                const MeasurementRecord rec = measure(prep, kind, p);
                const ModulationPulse pulse =
                    design_pulse(target_area(kind), p.t_start_gamma, p.duration_gamma);
                const auto a = asymptotic_observables(prep, pulse_area_u(pulse, rec.t_readout_gamma),
                                                      pulse_lambda(pulse, rec.t_readout_gamma));
                v.asymptotic_agreement =
                    std::max({v.asymptotic_agreement, std::abs(rec.d() - a.d),
                              std::abs(rec.S() - a.S), std::abs(rec.p2 - a.p2)});
            }
        }
    }
    return v;
}

ScenarioConfig resolve_scenario(const CommandOptions& opts)
{
    json j = json::object();
    if (opts.preset) {
        j = preset_config(*opts.preset);
    }
    if (opts.config_path) {
        j.merge_patch(load_config_file(*opts.config_path));
    } else if (!opts.preset) {
        throw ConfigError("either --config or --preset is required");
    }
    if (opts.shots) {
        j["shots"] = *opts.shots;
    }
    if (opts.seed) {
        j["seed"] = *opts.seed;
    }
    if (opts.out) {
        j["output"]["path"] = *opts.out;
    }
    return parse_scenario(j);
}

int run_command(const CommandOptions& opts, std::ostream& log, std::ostream& err)
{
    try {
        const ScenarioConfig cfg = resolve_scenario(opts);
        if (auto w = cfg.pulse.soft_cap_warning()) {
            err << "warning: " << *w << "\n";
        }
        if (opts.command == "simulate") {
            return cmd_simulate(opts, cfg, log);
        }
        if (opts.command == "reconstruct") {
            return cmd_reconstruct(opts, cfg, log);
        }
        if (opts.command == "sweep") {
            return cmd_sweep(opts, cfg, log);
        }
        if (opts.command == "validate") {
            return cmd_validate(opts, cfg, log);
        }
        err << "error: unknown command '" << opts.command << "'\n";
        return kExitConfig;
    } catch (const NumericGuard& e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

} // namespace wgtomo
