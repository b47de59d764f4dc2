#include "wgtomo/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wgtomo/errors.hpp"

namespace wgtomo {

double wrap_phase(double phi)
{
    double w = std::remainder(phi, 2.0 * pi);
    if (w <= -pi) {
        w += 2.0 * pi;
    }
    return w;
}

cplx waveguide_phase(double kd)
{
    const double n = std::round(kd / pi);
    if (std::abs(kd - n * pi) <= 1e-12 * std::max(1.0, std::abs(kd))) {
        return std::fmod(n, 2.0) == 0.0 ? cplx{1.0, 0.0} : cplx{-1.0, 0.0};
    }
    return std::polar(1.0, kd);
}

void SystemConfig::validate() const
{
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw ConfigError("gamma must be positive");
    }
    if (!std::isfinite(kd)) {
        throw ConfigError("kd must be finite");
    }
    if (!(dt_gamma > 0.0) || dt_gamma > 0.01) {
        throw ConfigError("dt_gamma must lie in (0, 0.01]");
    }
}

TwoQubitPreparation::TwoQubitPreparation(double a1, double a3, double phi1, double phi3)
    : a1_(a1), a3_(a3), phi1_(wrap_phase(phi1)), phi3_(wrap_phase(phi3))
{
    if (!(a1 >= 0.0 && a1 <= 1.0) || !(a3 >= 0.0 && a3 <= 1.0)) {
        throw ConfigError("preparation amplitudes must lie in [0, 1]");
    }
    if (std::abs(a1 * a1 + a3 * a3 - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "preparation not normalized: a1^2 + a3^2 = " << a1 * a1 + a3 * a3;
        throw ConfigError(msg.str());
    }
    if (!std::isfinite(phi1) || !std::isfinite(phi3)) {
        throw ConfigError("preparation phases must be finite");
    }
}

TwoQubitPreparation TwoQubitPreparation::normalized(double a1, double a3, double phi1, double phi3)
{
    const double n = std::hypot(a1, a3);
    if (!(n > 0.0)) {
        throw ConfigError("cannot normalize a zero preparation");
    }
    return {std::min(1.0, a1 / n), std::min(1.0, a3 / n), phi1, phi3};
}

Eigen::Matrix2cd ReducedDensityMatrix::matrix() const
{
    Eigen::Matrix2cd m;
    m << p11, rho13, rho31(), p33;
    return m;
}

bool ReducedDensityMatrix::is_valid(double tol) const
{
    return std::abs(p11 + p33 - 1.0) <= tol && p11 >= -tol && p33 >= -tol
           && std::norm(rho13) <= p11 * p33 + 1e-12;
}

const char* to_string(PulseShape shape)
{
    switch (shape) {
    case PulseShape::none: return "none";
    case PulseShape::rectangular: return "rectangular";
    case PulseShape::piecewise_constant: return "piecewise";
    case PulseShape::tabulated: return "tabulated";
    }
    return "unknown";
}

ModulationPulse ModulationPulse::rectangular(double amplitude_over_gamma, double t_start_gamma,
                                             double t_end_gamma)
{
    ModulationPulse p = piecewise({{t_start_gamma, t_end_gamma, amplitude_over_gamma}});
    p.shape_ = PulseShape::rectangular;
    return p;
}

ModulationPulse ModulationPulse::piecewise(std::vector<PulseSegment> segments)
{
    if (segments.empty()) {
        throw ConfigError("piecewise pulse needs at least one segment");
    }
    double prev_end = 0.0;
    for (const auto& s : segments) {
        if (!std::isfinite(s.t_start_gamma) || !std::isfinite(s.t_end_gamma)
            || !std::isfinite(s.amplitude_over_gamma)) {
            throw ConfigError("pulse segment has non-finite field");
        }
        if (s.t_start_gamma < prev_end) {
            throw ConfigError("pulse segments must be ordered, non-overlapping and start at t >= 0");
        }
        if (!(s.t_end_gamma > s.t_start_gamma)) {
            throw ConfigError("pulse segment must have t_end_gamma > t_start_gamma");
        }
        prev_end = s.t_end_gamma;
    }
    ModulationPulse p;
    p.shape_ = PulseShape::piecewise_constant;
    p.t_start_ = segments.front().t_start_gamma;
    p.t_end_ = segments.back().t_end_gamma;
    p.segments_ = std::move(segments);
    p.check_caps();
    return p;
}

ModulationPulse ModulationPulse::tabulated(std::vector<PulseSample> samples)
{
    if (samples.size() < 2) {
        throw ConfigError("tabulated pulse needs at least two samples");
    }
    if (!(samples.front().t_gamma >= 0.0)) {
        throw ConfigError("tabulated pulse must start at t >= 0");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].t_gamma) || !std::isfinite(samples[i].value_over_gamma)) {
            throw ConfigError("tabulated pulse has non-finite sample");
        }
        if (i > 0 && !(samples[i].t_gamma > samples[i - 1].t_gamma)) {
            throw ConfigError("tabulated pulse times must be strictly increasing");
        }
    }
    ModulationPulse p;
    p.shape_ = PulseShape::tabulated;
    p.t_start_ = samples.front().t_gamma;
    p.t_end_ = samples.back().t_gamma;
    p.samples_ = std::move(samples);
    p.check_caps();
    return p;
}

void ModulationPulse::check_caps() const
{
    if (peak_amplitude() > kAmplitudeHardCap) {
        std::ostringstream msg;
        msg << "pulse amplitude " << peak_amplitude() << " gamma exceeds the hard cap of "
            << kAmplitudeHardCap << " gamma";
        throw AmplitudeCapExceeded(msg.str());
    }
}

double ModulationPulse::value(double t_gamma) const
{
    switch (shape_) {
    case PulseShape::none: return 0.0;
    case PulseShape::rectangular:
    case PulseShape::piecewise_constant:
        for (const auto& s : segments_) {
            if (t_gamma >= s.t_start_gamma && t_gamma < s.t_end_gamma) {
                return s.amplitude_over_gamma;
            }
        }
        return 0.0;
    case PulseShape::tabulated: {
        if (t_gamma < t_start_ || t_gamma > t_end_) {
            return 0.0;
        }
        auto it = std::upper_bound(samples_.begin(), samples_.end(), t_gamma,
                                   [](double t, const PulseSample& s) { return t < s.t_gamma; });
        if (it == samples_.end()) {
            return samples_.back().value_over_gamma;
        }
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double w = (t_gamma - lo.t_gamma) / (hi.t_gamma - lo.t_gamma);
        return lo.value_over_gamma + w * (hi.value_over_gamma - lo.value_over_gamma);
    }
    }
    return 0.0;
}

double ModulationPulse::integral(double t_gamma) const
{
    double acc = 0.0;
    switch (shape_) {
    case PulseShape::none: break;
    case PulseShape::rectangular:
    case PulseShape::piecewise_constant:
        for (const auto& s : segments_) {
            if (t_gamma <= s.t_start_gamma) {
                break;
            }
            acc += s.amplitude_over_gamma * (std::min(t_gamma, s.t_end_gamma) - s.t_start_gamma);
        }
        break;
    case PulseShape::tabulated:
        for (std::size_t i = 1; i < samples_.size(); ++i) {
            const auto& lo = samples_[i - 1];
            const auto& hi = samples_[i];
            if (t_gamma <= lo.t_gamma) {
                break;
            }
            const double t_hi = std::min(t_gamma, hi.t_gamma);
            const double f_hi = t_hi == hi.t_gamma ? hi.value_over_gamma : value(t_hi);
            acc += 0.5 * (lo.value_over_gamma + f_hi) * (t_hi - lo.t_gamma);
        }
        break;
    }
    return acc;
}

double ModulationPulse::average(double t0_gamma, double t1_gamma) const
{
    const double h = t1_gamma - t0_gamma;
    if (!(h > 0.0)) {
        return value(t0_gamma);
    }
    if (shape_ == PulseShape::tabulated) {
        return (integral(t1_gamma) - integral(t0_gamma)) / h;
    }
    double acc = 0.0;
    for (const auto& s : segments_) {
        const double lo = std::max(t0_gamma, s.t_start_gamma);
        const double hi = std::min(t1_gamma, s.t_end_gamma);
        if (hi > lo) {
            if (hi - lo == h) {
                return s.amplitude_over_gamma;
            }
            acc += s.amplitude_over_gamma * (hi - lo);
        }
    }
    return acc / h;
}

double ModulationPulse::peak_amplitude() const
{
    double peak = 0.0;
    for (const auto& s : segments_) {
        peak = std::max(peak, std::abs(s.amplitude_over_gamma));
    }
    for (const auto& s : samples_) {
        peak = std::max(peak, std::abs(s.value_over_gamma));
    }
    return peak;
}

std::optional<std::string> ModulationPulse::soft_cap_warning() const
{
    if (!exceeds_soft_cap()) {
        return std::nullopt;
    }
    std::ostringstream msg;
    msg << "pulse amplitude " << peak_amplitude() << " gamma is above " << kAmplitudeSoftCap
        << " gamma; analytic formulas assume |f| << gamma";
    return msg.str();
}

double pulse_integral(const ModulationPulse& pulse, double t_gamma)
{
    if (!(t_gamma >= 0.0)) {
        throw ConfigError("pulse functionals need t >= 0");
    }
    return pulse.integral(t_gamma);
}

double pulse_area_u(const ModulationPulse& pulse, double t_gamma)
{
    return 2.0 / 3.0 * pulse_integral(pulse, t_gamma);
}

double pulse_lambda(const ModulationPulse& pulse, double t_gamma)
{
    const double u = pulse_area_u(pulse, t_gamma);
    if (t_gamma == 0.0) {
        return 0.0;
    }
    return u * u / (3.0 * t_gamma);
}

double pulse_leak_exponent(const ModulationPulse& pulse)
{
    double acc = 0.0;
    for (const auto& s : pulse.segments()) {
        acc += s.amplitude_over_gamma * s.amplitude_over_gamma * (s.t_end_gamma - s.t_start_gamma);
    }
    const auto& tab = pulse.samples();
    for (std::size_t i = 1; i < tab.size(); ++i) {
        // exact for the linear interpolant
        const double a = tab[i - 1].value_over_gamma;
        const double b = tab[i].value_over_gamma;
        acc += (a * a + a * b + b * b) / 3.0 * (tab[i].t_gamma - tab[i - 1].t_gamma);
    }
    return 4.0 / 27.0 * acc;
}

ModulationPulse design_pulse(double u_target, double t_start_gamma, double duration_gamma)
{
    if (u_target == 0.0 || !std::isfinite(u_target)) {
        throw ConfigError("design_pulse needs a nonzero finite target area");
    }
    if (!(duration_gamma > 0.0) || !(t_start_gamma >= 0.0)) {
        throw ConfigError("design_pulse needs t_start >= 0 and duration > 0");
    }
    const double amplitude = 1.5 * u_target / duration_gamma;
    if (std::abs(amplitude) > kAmplitudeHardCap) {
        std::ostringstream msg;
        msg << "pulse of area " << u_target << " over " << duration_gamma
            << "/gamma needs amplitude " << std::abs(amplitude) << " gamma, above the cap of "
            << kAmplitudeHardCap << " gamma";
        throw AmplitudeCapExceeded(msg.str());
    }
    return ModulationPulse::rectangular(amplitude, t_start_gamma, t_start_gamma + duration_gamma);
}

double coupling_from_decay(double gamma, double v_g, double length)
{
    if (!(gamma > 0.0) || !(v_g > 0.0) || !(length > 0.0)) {
        throw ConfigError("coupling_from_decay needs positive arguments");
    }
    return std::sqrt(v_g * gamma / (2.0 * length));
}

ReducedDensityMatrix density_from_preparation(const TwoQubitPreparation& prep)
{
    return {prep.a1() * prep.a1(), prep.a3() * prep.a3(),
            std::polar(prep.a1() * prep.a3(), prep.phi1() - prep.phi3())};
}

} // namespace wgtomo
