#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "wgtomo/core_model.hpp"

namespace wgtomo {

/// Sampled solution of the amplitude equations.
struct Trajectory {
    std::vector<ThreeQubitAmplitudes> samples;
    SystemConfig config;
    ModulationPulse pulse;

    const ThreeQubitAmplitudes& final_state() const { return samples.back(); }
};

/// Populations and the two measured combinations at one instant.
struct Observables {
    double t_gamma;
    double p1;
    double p2;
    double p3;
    double d;  ///< p1 - p3
    double S;  ///< p1 + p3
};

/// Time derivative of the amplitudes (physical units: f_now and gamma are rates).
///
///   b1' = -g/2 (b1 + b2 e^{ikd} + b3 e^{2ikd})
///   b2' = -i f b2 - g/2 (b1 e^{ikd} + b2 + b3 e^{ikd})
///   b3' = -g/2 (b1 e^{2ikd} + b2 e^{ikd} + b3)
Eigen::Vector3cd rhs(const Eigen::Vector3cd& state, double f_now, double kd, double gamma);

/// Fixed-step RK4 integration from an arbitrary initial vector (no normalization
/// requirement). Samples t = 0, every `sample_every` steps, and t_final.
///
/// Piecewise-constant pulses are applied as their exact average over each step,
/// so the accumulated pulse area is exact for any step grid. Tabulated pulses
/// are evaluated at the RK stage times.
///
/// Throws StepTooLarge if dt * max(1, |f|) > 0.05, ConfigError on invalid config.
Trajectory propagate_amplitudes(const ThreeQubitAmplitudes& initial, const ModulationPulse& pulse,
                                const SystemConfig& config, double t_final_gamma,
                                std::size_t sample_every);

Trajectory propagate(const TwoQubitPreparation& prep, const ModulationPulse& pulse,
                     const SystemConfig& config, double t_final_gamma, std::size_t sample_every);

Observables observe(const ThreeQubitAmplitudes& state);
std::vector<Observables> observables(const Trajectory& traj);

} // namespace wgtomo
