#pragma once

#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace wgtomo {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Hard cap on |f|/Γ. Above it the weak-modulation regime no longer holds.
inline constexpr double kAmplitudeHardCap = 0.2;
/// Soft cap on |f|/Γ; pulses above it are accepted but flagged.
inline constexpr double kAmplitudeSoftCap = 0.05;

/// Maps an angle onto (-pi, pi].
double wrap_phase(double phi);

/// e^{i kd}; exactly +-1 when kd is a multiple of pi (to 1e-12), so kd = 2 pi
/// does not leak rounding noise into imaginary parts.
cplx waveguide_phase(double kd);

/// Physical parameters of the chain. All times in the library are measured in
/// units of 1/gamma, so gamma only matters when converting at the boundary.
struct SystemConfig {
    double gamma = 1.0;          ///< decay rate into the waveguide
    double kd = 2.0 * pi;        ///< phase accumulated between neighbouring qubits
    double dt_gamma = 1e-3;      ///< integrator step, units of 1/gamma

    /// Throws ConfigError on gamma <= 0 or dt_gamma outside (0, 0.01].
    void validate() const;
};

/// Rotating-frame amplitudes of the three single-excitation qubit states.
struct ThreeQubitAmplitudes {
    cplx b1{};
    cplx b2{};
    cplx b3{};
    double t_gamma = 0.0;

    double total_population() const { return std::norm(b1) + std::norm(b2) + std::norm(b3); }

    Eigen::Vector3cd vector() const { return {b1, b2, b3}; }

    static ThreeQubitAmplitudes from_vector(const Eigen::Vector3cd& v, double t_gamma)
    {
        return {v(0), v(1), v(2), t_gamma};
    }
};

/// Initial edge-qubit state a1 e^{i phi1}|1> + a3 e^{i phi3}|3>, central qubit empty.
class TwoQubitPreparation {
public:
    /// Throws ConfigError unless a1, a3 are in [0, 1] with a1^2 + a3^2 = 1 (1e-12).
    /// Phases are wrapped onto (-pi, pi].
    TwoQubitPreparation(double a1, double a3, double phi1, double phi3);

    /// Normalizes (a1, a3) before constructing; used for estimates that carry
    /// rounding noise.
    static TwoQubitPreparation normalized(double a1, double a3, double phi1, double phi3);

    double a1() const { return a1_; }
    double a3() const { return a3_; }
    double phi1() const { return phi1_; }
    double phi3() const { return phi3_; }

    /// phi1 - phi3 on (-pi, pi]; the phase convention used throughout the library.
    double phase_difference() const { return wrap_phase(phi1_ - phi3_); }

    cplx beta1() const { return std::polar(a1_, phi1_); }
    cplx beta3() const { return std::polar(a3_, phi3_); }

    ThreeQubitAmplitudes initial_amplitudes() const { return {beta1(), cplx{}, beta3(), 0.0}; }

private:
    double a1_;
    double a3_;
    double phi1_;
    double phi3_;
};

/// 2x2 density matrix of the edge pair in the single-excitation sector.
/// Only rho13 is stored; rho31 is its conjugate.
struct ReducedDensityMatrix {
    double p11 = 1.0;
    double p33 = 0.0;
    cplx rho13{};

    cplx rho31() const { return std::conj(rho13); }
    Eigen::Matrix2cd matrix() const;
    /// Trace, non-negativity and the positivity bound |rho13|^2 <= p11 p33.
    bool is_valid(double tol = 1e-9) const;
};

enum class PulseShape { none, rectangular, piecewise_constant, tabulated };

const char* to_string(PulseShape shape);

struct PulseSegment {
    double t_start_gamma;
    double t_end_gamma;
    double amplitude_over_gamma;
};

struct PulseSample {
    double t_gamma;
    double value_over_gamma;
};

/// Detuning f(t) of the central qubit, in units of gamma, as a function of
/// gamma*t. Zero outside [t_start_gamma, t_end_gamma].
///
/// Piecewise-constant shapes integrate exactly. Tabulated shapes are linearly
/// interpolated between samples, so their integral is the trapezoidal sum.
class ModulationPulse {
public:
    /// The absent pulse, f = 0 everywhere.
    ModulationPulse() = default;

    static ModulationPulse none() { return {}; }
    static ModulationPulse rectangular(double amplitude_over_gamma, double t_start_gamma,
                                       double t_end_gamma);
    /// Segments must be ordered, non-overlapping and non-empty.
    static ModulationPulse piecewise(std::vector<PulseSegment> segments);
    /// Samples must have strictly increasing times, at least two of them.
    static ModulationPulse tabulated(std::vector<PulseSample> samples);

    PulseShape shape() const { return shape_; }
    bool is_zero() const { return shape_ == PulseShape::none; }
    bool is_piecewise_constant() const
    {
        return shape_ == PulseShape::rectangular || shape_ == PulseShape::piecewise_constant;
    }

    double t_start_gamma() const { return t_start_; }
    double t_end_gamma() const { return t_end_; }

    const std::vector<PulseSegment>& segments() const { return segments_; }
    const std::vector<PulseSample>& samples() const { return samples_; }

    /// f(t)/gamma.
    double value(double t_gamma) const;
    /// Integral of f over [0, t], dimensionless.
    double integral(double t_gamma) const;
    /// Mean of f over [t0, t1]. Exact for piecewise-constant shapes.
    double average(double t0_gamma, double t1_gamma) const;
    double peak_amplitude() const;

    bool exceeds_soft_cap() const { return peak_amplitude() > kAmplitudeSoftCap; }
    std::optional<std::string> soft_cap_warning() const;

private:
    void check_caps() const;

    PulseShape shape_ = PulseShape::none;
    double t_start_ = 0.0;
    double t_end_ = 0.0;
    std::vector<PulseSegment> segments_;
    std::vector<PulseSample> samples_;
};

/// I(t) = integral of f over [0, t]; the Magnus quantity F(t) is -i I(t).
double pulse_integral(const ModulationPulse& pulse, double t_gamma);

/// u(t) = (2/3) I(t), the rotation angle accumulated by the dark state.
double pulse_area_u(const ModulationPulse& pulse, double t_gamma);

/// Lambda(t) = u(t)^2 / (3 gamma t); 0 at t = 0.
double pulse_lambda(const ModulationPulse& pulse, double t_gamma);

/// Leak exponent accumulated over the whole pulse, (4/27) * integral of f^2.
/// Equals Lambda = u^2 / (3 gamma t) at the end of a rectangular pulse switched
/// on at t = 0, and does not depend on when the pulse starts.
double pulse_leak_exponent(const ModulationPulse& pulse);

/// Rectangular pulse of the requested area u on [t_start, t_start + duration].
/// Throws AmplitudeCapExceeded when the amplitude would exceed kAmplitudeHardCap.
ModulationPulse design_pulse(double u_target, double t_start_gamma, double duration_gamma);

/// Waveguide coupling constant g = sqrt(v_g gamma / (2 L)).
double coupling_from_decay(double gamma, double v_g, double length);

ReducedDensityMatrix density_from_preparation(const TwoQubitPreparation& prep);

} // namespace wgtomo
