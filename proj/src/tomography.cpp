#include "wgtomo/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "wgtomo/dynamics.hpp"
#include "wgtomo/errors.hpp"

namespace wgtomo {

const char* to_string(PulseKind kind)
{
    switch (kind) {
    case PulseKind::none: return "none";
    case PulseKind::pi: return "pi";
    case PulseKind::half_pi: return "half_pi";
    }
    return "unknown";
}

double target_area(PulseKind kind)
{
    switch (kind) {
    case PulseKind::none: return 0.0;
    case PulseKind::pi: return pi;
    case PulseKind::half_pi: return 0.5 * pi;
    }
    return 0.0;
}

MeasurementRecord measure(const TwoQubitPreparation& prep, PulseKind kind,
                          const ProtocolParams& params, std::optional<std::uint64_t> shots,
                          std::optional<std::uint64_t> rng_seed)
{
    if (shots && *shots == 0) {
        throw ConfigError("shots must be positive");
    }
    const ModulationPulse pulse = kind == PulseKind::none
        ? ModulationPulse::none()
        : design_pulse(target_area(kind), params.t_start_gamma, params.duration_gamma);

    SystemConfig config;
    config.kd = params.kd;
    config.dt_gamma = params.dt_gamma;
    const double t_readout = params.t_readout_gamma();
    const Trajectory traj = propagate(prep, pulse, config, t_readout,
                                      std::numeric_limits<std::size_t>::max());
    const ThreeQubitAmplitudes& end = traj.final_state();

    MeasurementRecord rec;
    rec.pulse_kind = kind;
    rec.p1 = std::norm(end.b1);
    rec.p2 = std::norm(end.b2);
    rec.p3 = std::norm(end.b3);
    rec.t_readout_gamma = t_readout;
    rec.lambda = pulse_leak_exponent(pulse);

    if (shots) {
        std::mt19937_64 rng(rng_seed ? *rng_seed : std::random_device{}());
        const auto sample = [&](double p) {
            std::binomial_distribution<std::uint64_t> dist(*shots, std::clamp(p, 0.0, 1.0));
            return static_cast<double>(dist(rng)) / static_cast<double>(*shots);
        };
        rec.p1 = sample(rec.p1);
        rec.p3 = sample(rec.p3);
        rec.p2 = sample(rec.p2);
        rec.shots = shots;
    }
    return rec;
}

PopulationEstimate estimate_populations(const MeasurementRecord& rec_pi)
{
    if (rec_pi.pulse_kind != PulseKind::pi) {
        throw ConfigError("population estimate needs a pi-pulse record");
    }
    const double d = rec_pi.d() * std::exp(rec_pi.lambda);
    return {std::sqrt(0.5 * std::clamp(1.0 - 3.0 * d, 0.0, 2.0)),
            std::sqrt(0.5 * std::clamp(1.0 + 3.0 * d, 0.0, 2.0))};
}

PhaseEstimate estimate_phase(const MeasurementRecord& rec_half, double a1_est, double a3_est,
                             double eps_prod, bool lambda_correct)
{
    if (rec_half.pulse_kind != PulseKind::half_pi) {
        throw ConfigError("phase estimate needs a half-pi-pulse record");
    }
    PhaseEstimate out{0.0, 0.0, 0.0, false, false};
    const double prod = a1_est * a3_est;
    if (prod < eps_prod) {
        out.phase_indeterminate = true;
        return out;
    }
    double d = rec_half.d();
    if (lambda_correct) {
        d *= std::exp(rec_half.lambda);
    }
    const double sin_raw = 1.5 * d / prod;
    const double cos_raw = -(rec_half.S() - 5.0 / 9.0) * 9.0 / (8.0 * prod);
    out.trig_out_of_range = std::abs(sin_raw) > 1.05 || std::abs(cos_raw) > 1.05;
    out.sin_est = std::clamp(sin_raw, -1.0, 1.0);
    out.cos_est = std::clamp(cos_raw, -1.0, 1.0);
    // sin_est measures sin(phi3 - phi1); report phi1 - phi3.
    out.phi_est = wrap_phase(std::atan2(-out.sin_est, out.cos_est));
    return out;
}

ReconstructionReport reconstruct(const TwoQubitPreparation& prep, const ProtocolParams& params,
                                 std::optional<std::uint64_t> shots,
                                 std::optional<std::uint64_t> rng_seed)
{
    ReconstructionReport rep;
    rep.rec_pi = measure(prep, PulseKind::pi, params, shots, rng_seed);
    const PopulationEstimate pops = estimate_populations(rep.rec_pi);

    std::optional<std::uint64_t> half_seed;
    if (rng_seed) {
        half_seed = *rng_seed + 1;
    }
    rep.rec_half = measure(prep, PulseKind::half_pi, params, shots, half_seed);
    const PhaseEstimate phase =
        estimate_phase(rep.rec_half, pops.a1, pops.a3, params.eps_prod, params.lambda_correct);

    rep.a1_est = pops.a1;
    rep.a3_est = pops.a3;
    rep.sin_est = phase.sin_est;
    rep.cos_est = phase.cos_est;
    rep.phi_est = phase.phi_est;
    rep.phase_indeterminate = phase.phase_indeterminate;
    rep.trig_out_of_range = phase.trig_out_of_range;

    const auto est = TwoQubitPreparation::normalized(pops.a1, pops.a3, phase.phi_est, 0.0);
    rep.rho_est = density_from_preparation(est);
    if (phase.phase_indeterminate) {
        rep.rho_est.rho13 = 0.0;
    }
    return rep;
}

} // namespace wgtomo
