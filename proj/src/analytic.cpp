#include "wgtomo/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "wgtomo/errors.hpp"

namespace wgtomo {

namespace {

constexpr cplx I{0.0, 1.0};

Eigen::Matrix3cd covariant(const Eigen::Matrix3cd& m, cplx li, cplx lj, cplx lk)
{
    const Eigen::Matrix3cd id = Eigen::Matrix3cd::Identity();
    return (m - lj * id) * (m - lk * id) / ((li - lj) * (li - lk));
}

} // namespace

std::optional<long> kd_pi_multiple(double kd)
{
    const double n = std::round(kd / pi);
    if (std::abs(kd - n * pi) <= 1e-12 * std::max(1.0, std::abs(kd))) {
        return static_cast<long>(n);
    }
    return std::nullopt;
}

ThreeQubitAmplitudes free_evolution(const TwoQubitPreparation& prep, double t_gamma)
{
    if (!(t_gamma >= 0.0)) {
        throw ConfigError("free_evolution needs t >= 0");
    }
    const cplx b1 = prep.beta1();
    const cplx b3 = prep.beta3();
    const cplx bright = (b1 + b3) / 3.0 * std::exp(-1.5 * t_gamma);
    return {bright + 2.0 / 3.0 * b1 - b3 / 3.0,
            bright - b1 / 3.0 - b3 / 3.0,
            bright - b1 / 3.0 + 2.0 / 3.0 * b3,
            t_gamma};
}

Populations free_asymptotic_populations(const TwoQubitPreparation& prep)
{
    const double a1s = prep.a1() * prep.a1();
    const double a3s = prep.a3() * prep.a3();
    const double coh = prep.a1() * prep.a3() * std::cos(prep.phase_difference());
    return {(4.0 * a1s + a3s) / 9.0 - 4.0 / 9.0 * coh,
            (a1s + a3s) / 9.0 + 2.0 / 9.0 * coh,
            (4.0 * a3s + a1s) / 9.0 - 4.0 / 9.0 * coh};
}

MagnusMatrix magnus_m1(const ModulationPulse& pulse, double t_gamma, double kd)
{
    if (!(t_gamma >= 0.0)) {
        throw ConfigError("magnus_m1 needs t >= 0");
    }
    const cplx e1 = waveguide_phase(kd);
    const cplx e2 = e1 * e1;
    const cplx F = -I * pulse_integral(pulse, t_gamma);
    const double h = 0.5 * t_gamma;

    MagnusMatrix out;
    out.t_gamma = t_gamma;
    out.kd = kd;
    out.F = F;
    // -(gt/2) Omega = -(gt/2) + F
    out.m << -h, -h * e1, -h * e2,
             -h * e1, -h + F, -h * e1,
             -h * e2, -h * e1, -h;
    return out;
}

SylvesterEigens characteristic_roots(const MagnusMatrix& m)
{
    const double t = m.t_gamma;
    const cplx F = m.F;
    SylvesterEigens eig{};
    if (auto n = kd_pi_multiple(m.kd)) {
        const double sign = (*n % 2 == 0) ? 1.0 : -1.0;
        const cplx root = std::sqrt(9.0 * t * t + 4.0 * F * F + 4.0 * F * t);
        eig.lambda1 = -0.75 * t + 0.5 * F + sign * 0.25 * root;
        eig.lambda2 = -0.75 * t + 0.5 * F - sign * 0.25 * root;
        eig.lambda3 = 0.0;
    } else {
        const cplx e1 = waveguide_phase(m.kd);
        const cplx e2 = e1 * e1;
        const cplx root = std::sqrt((8.0 + e2) * t * t + 4.0 * F * F / e2 + 4.0 * F * t);
        const cplx centre = -0.5 * t * (1.0 + 0.5 * e2) + 0.5 * F;
        eig.lambda1 = centre + 0.25 * e1 * root;
        eig.lambda2 = centre - 0.25 * e1 * root;
        eig.lambda3 = 0.5 * t * (e2 - 1.0);
    }
    return eig;
}

SylvesterEigens sylvester_eigens(const MagnusMatrix& m)
{
    const SylvesterEigens eig = characteristic_roots(m);

    const double gap = std::min({std::abs(eig.lambda1 - eig.lambda2),
                                 std::abs(eig.lambda1 - eig.lambda3),
                                 std::abs(eig.lambda2 - eig.lambda3)});
    const double scale = std::max(1.0, m.m.norm());
    if (gap < 1e-10 * scale) {
        std::ostringstream msg;
        msg << "Magnus matrix has a degenerate spectrum (gap " << gap << ")";
        throw DegenerateSpectrum(msg.str());
    }
    return eig;
}

cplx characteristic_residual(const MagnusMatrix& m, cplx lambda)
{
    return (m.m - lambda * Eigen::Matrix3cd::Identity()).determinant();
}

std::array<Eigen::Matrix3cd, 3> frobenius_covariants(const MagnusMatrix& m,
                                                     const SylvesterEigens& eig)
{
    const cplx l1 = eig.lambda1;
    const cplx l2 = eig.lambda2;
    const cplx l3 = eig.lambda3;
    if (kd_pi_multiple(m.kd) && l3 == 0.0) {
        const Eigen::Matrix3cd m2 = m.m * m.m;
        return {(m2 - l2 * m.m) / ((l1 - l2) * l1),
                (m2 - l1 * m.m) / ((l2 - l1) * l2),
                (m2 - (l1 + l2) * m.m) / (l1 * l2) + Eigen::Matrix3cd::Identity()};
    }
    return {covariant(m.m, l1, l2, l3), covariant(m.m, l2, l1, l3), covariant(m.m, l3, l1, l2)};
}

Eigen::Matrix3cd exp_m1(const MagnusMatrix& m)
{
    try {
        const SylvesterEigens eig = sylvester_eigens(m);
        const auto b = frobenius_covariants(m, eig);
        return std::exp(eig.lambda1) * b[0] + std::exp(eig.lambda2) * b[1]
               + std::exp(eig.lambda3) * b[2];
    } catch (const DegenerateSpectrum&) {
        return m.m.exp();
    }
}

ThreeQubitAmplitudes magnus_propagate(const ThreeQubitAmplitudes& initial,
                                      const ModulationPulse& pulse, double t_gamma, double kd)
{
    const Eigen::Vector3cd out = exp_m1(magnus_m1(pulse, t_gamma, kd)) * initial.vector();
    return ThreeQubitAmplitudes::from_vector(out, t_gamma);
}

cplx lambda1_asymptotic(cplx F, double t_gamma)
{
    return 2.0 / 3.0 * F + 4.0 / 27.0 * F * F / t_gamma;
}

AsymptoticObservables asymptotic_observables(const TwoQubitPreparation& prep, double u,
                                             double lambda)
{
    if (!(lambda >= 0.0)) {
        throw ConfigError("asymptotic_observables needs lambda >= 0");
    }
    const double a1 = prep.a1();
    const double a3 = prep.a3();
    const double dphi = prep.phase_difference();  // phi1 - phi3
    const double decay = std::exp(-lambda);
    const double decay2 = decay * decay;
    const double coh = a1 * a3 * std::cos(dphi);

    AsymptoticObservables out{};
    out.d = decay / 3.0 * ((a1 * a1 - a3 * a3) * std::cos(u) - 2.0 * a1 * a3 * std::sin(dphi) * std::sin(u));
    out.S = (decay2 + 9.0) / 18.0 + coh * (decay2 - 9.0) / 9.0;
    out.p2 = decay2 / 9.0 * (1.0 + 2.0 * coh);
    return out;
}

} // namespace wgtomo
