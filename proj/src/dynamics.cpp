#include "wgtomo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wgtomo/errors.hpp"

namespace wgtomo {

namespace {

// Coupling matrix of the rhs without the detuning term, in units of gamma.
Eigen::Matrix3cd coupling_matrix(double kd)
{
    const cplx e1 = waveguide_phase(kd);
    const cplx e2 = e1 * e1;
    Eigen::Matrix3cd c;
    c << 1.0, e1, e2,
         e1, 1.0, e1,
         e2, e1, 1.0;
    return -0.5 * c;
}

} // namespace

Eigen::Vector3cd rhs(const Eigen::Vector3cd& state, double f_now, double kd, double gamma)
{
    Eigen::Vector3cd out = gamma * (coupling_matrix(kd) * state);
    out(1) += cplx(0.0, -f_now) * state(1);
    return out;
}

Trajectory propagate_amplitudes(const ThreeQubitAmplitudes& initial, const ModulationPulse& pulse,
                                const SystemConfig& config, double t_final_gamma,
                                std::size_t sample_every)
{
    const double dt = config.dt_gamma;
    if (dt * std::max(1.0, pulse.peak_amplitude()) > 0.05) {
        std::ostringstream msg;
        msg << "integrator step " << dt << "/gamma too large for pulse amplitude "
            << pulse.peak_amplitude() << " gamma";
        throw StepTooLarge(msg.str());
    }
    config.validate();
    if (!(t_final_gamma > 0.0) || !std::isfinite(t_final_gamma)) {
        throw ConfigError("t_final_gamma must be positive");
    }
    if (sample_every == 0) {
        throw ConfigError("sample_every must be positive");
    }

    // Whole steps on the grid k*dt, plus one shorter step if t_final is off-grid.
    const double ratio = t_final_gamma / dt;
    std::size_t n_steps = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(n_steps)) > 1e-9 * std::max(1.0, ratio)) {
        n_steps = static_cast<std::size_t>(std::ceil(ratio));
    }

    const Eigen::Matrix3cd coupling = coupling_matrix(config.kd);
    const auto derivative = [&coupling](const Eigen::Vector3cd& y, double f) {
        Eigen::Vector3cd out = coupling * y;
        out(1) += cplx(0.0, -f) * y(1);
        return out;
    };

    Trajectory traj;
    traj.config = config;
    traj.pulse = pulse;
    traj.samples.reserve(n_steps / sample_every + 2);
    traj.samples.push_back({initial.b1, initial.b2, initial.b3, 0.0});

    Eigen::Vector3cd y = initial.vector();
    const bool piecewise = pulse.is_piecewise_constant();
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t0 = static_cast<double>(k) * dt;
        const double t1 = k + 1 == n_steps ? t_final_gamma : static_cast<double>(k + 1) * dt;
        const double h = t1 - t0;
        const double tm = t0 + 0.5 * h;

        double f0 = 0.0;
        double fm = 0.0;
        double f1 = 0.0;
        if (piecewise) {
            f0 = fm = f1 = pulse.average(t0, t1);
        } else if (!pulse.is_zero()) {
            f0 = pulse.value(t0);
            fm = pulse.value(tm);
            f1 = pulse.value(t1);
        }

        const Eigen::Vector3cd k1 = derivative(y, f0);
        const Eigen::Vector3cd k2 = derivative(y + 0.5 * h * k1, fm);
        const Eigen::Vector3cd k3 = derivative(y + 0.5 * h * k2, fm);
        const Eigen::Vector3cd k4 = derivative(y + h * k3, f1);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        if (!y.allFinite()) {
            throw NumericGuard("non-finite amplitude during integration");
        }
        if ((k + 1) % sample_every == 0 || k + 1 == n_steps) {
            traj.samples.push_back(ThreeQubitAmplitudes::from_vector(y, t1));
        }
    }
    return traj;
}

Trajectory propagate(const TwoQubitPreparation& prep, const ModulationPulse& pulse,
                     const SystemConfig& config, double t_final_gamma, std::size_t sample_every)
{
    return propagate_amplitudes(prep.initial_amplitudes(), pulse, config, t_final_gamma,
                                sample_every);
}

Observables observe(const ThreeQubitAmplitudes& state)
{
    const double p1 = std::norm(state.b1);
    const double p2 = std::norm(state.b2);
    const double p3 = std::norm(state.b3);
    return {state.t_gamma, p1, p2, p3, p1 - p3, p1 + p3};
}

std::vector<Observables> observables(const Trajectory& traj)
{
    std::vector<Observables> out;
    out.reserve(traj.samples.size());
    std::transform(traj.samples.begin(), traj.samples.end(), std::back_inserter(out), observe);
    return out;
}

} // namespace wgtomo
