#pragma once

#include <cstdint>
#include <optional>

#include "wgtomo/core_model.hpp"

namespace wgtomo {

enum class PulseKind { none, pi, half_pi };

const char* to_string(PulseKind kind);

/// Timing and numerics of the two-pulse protocol.
struct ProtocolParams {
    double kd = 2.0 * pi;
    double t_start_gamma = 10.0;
    double duration_gamma = 141.0;
    double settle_gamma = 5.0;   ///< readout delay after the pulse ends
    double dt_gamma = 1e-3;
    double eps_prod = 0.02;      ///< below this a1*a3 the phase is not recoverable
    bool lambda_correct = false; ///< deflate d by e^{+Lambda} before estimating the phase

    double t_readout_gamma() const { return t_start_gamma + duration_gamma + settle_gamma; }
};

/// Edge-qubit populations read after one protocol run.
struct MeasurementRecord {
    PulseKind pulse_kind = PulseKind::none;
    double p1 = 0.0;
    double p3 = 0.0;
    double p2 = 0.0;                   ///< central qubit, reported for diagnostics
    std::optional<std::uint64_t> shots; ///< nullopt for exact populations
    double t_readout_gamma = 0.0;
    double lambda = 0.0;               ///< leak exponent of the applied pulse

    double d() const { return p1 - p3; }
    double S() const { return p1 + p3; }
};

struct PopulationEstimate {
    double a1;
    double a3;
};

struct PhaseEstimate {
    double sin_est;  ///< raw estimate of sin(phi3 - phi1)
    double cos_est;  ///< raw estimate of cos(phi1 - phi3)
    double phi_est;  ///< phi1 - phi3 on (-pi, pi]
    bool phase_indeterminate;
    bool trig_out_of_range;
};

struct ReconstructionReport {
    double a1_est = 1.0;
    double a3_est = 0.0;
    double phi_est = 0.0;
    double sin_est = 0.0;
    double cos_est = 0.0;
    ReducedDensityMatrix rho_est;
    bool phase_indeterminate = false;
    bool trig_out_of_range = false;
    MeasurementRecord rec_pi;
    MeasurementRecord rec_half;
};

double target_area(PulseKind kind);

/// Runs the amplitude equations through the designated pulse and reads the
/// populations at params.t_readout_gamma(). With `shots`, each population is
/// replaced by a binomial sample mean (independent per qubit).
MeasurementRecord measure(const TwoQubitPreparation& prep, PulseKind kind,
                          const ProtocolParams& params,
                          std::optional<std::uint64_t> shots = std::nullopt,
                          std::optional<std::uint64_t> rng_seed = std::nullopt);

/// |beta1(0)|, |beta3(0)| from the population difference after a pi pulse.
/// d is first deflated by e^{+lambda} of the record, which undoes the leak
/// through the bright mode; a record with lambda = 0 gives the plain inversion.
PopulationEstimate estimate_populations(const MeasurementRecord& rec_pi);

PhaseEstimate estimate_phase(const MeasurementRecord& rec_half, double a1_est, double a3_est,
                             double eps_prod = 0.02, bool lambda_correct = false);

/// pi run, population estimate, pi/2 run, phase estimate, density matrix.
ReconstructionReport reconstruct(const TwoQubitPreparation& prep, const ProtocolParams& params,
                                 std::optional<std::uint64_t> shots = std::nullopt,
                                 std::optional<std::uint64_t> rng_seed = std::nullopt);

} // namespace wgtomo
