#pragma once

#include <array>

#include <Eigen/Core>

#include "wgtomo/core_model.hpp"

namespace wgtomo {

/// First Magnus term of the amplitude equations,
///
///   M1(t) = -(gt/2) [[1, e, e^2], [e, Omega, e], [e^2, e, 1]],  e = e^{ikd},
///
/// with Omega = 1 - (2/gt) F and F = -i * integral of f over [0, t].
struct MagnusMatrix {
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
    double t_gamma = 0.0;
    double kd = 2.0 * pi;
    cplx F{};  ///< -i I(t)
};

struct SylvesterEigens {
    cplx lambda1;
    cplx lambda2;
    cplx lambda3;

    std::array<cplx, 3> as_array() const { return {lambda1, lambda2, lambda3}; }
};

/// Integer n when kd is n*pi (to 1e-12), for the lambda3 = 0 branch.
std::optional<long> kd_pi_multiple(double kd);

/// Closed-form free evolution at kd = 2 pi.
ThreeQubitAmplitudes free_evolution(const TwoQubitPreparation& prep, double t_gamma);

struct Populations {
    double p1;
    double p2;
    double p3;
};

/// Free-evolution populations once the bright component has decayed (kd = 2 pi).
Populations free_asymptotic_populations(const TwoQubitPreparation& prep);

MagnusMatrix magnus_m1(const ModulationPulse& pulse, double t_gamma, double kd);

/// Closed-form roots of det(M1 - lambda I) = 0. lambda1/lambda2 take the +/-
/// branch of the square root; lambda3 = (gt/2)(e^{2ikd} - 1), exactly 0 when kd
/// is a multiple of pi.
SylvesterEigens characteristic_roots(const MagnusMatrix& m);

/// characteristic_roots, checked for use in Sylvester's formula.
/// Throws DegenerateSpectrum when two roots are closer than 1e-10 max(1, |M1|).
SylvesterEigens sylvester_eigens(const MagnusMatrix& m);

/// Residual of the characteristic cubic of M1 at lambda.
cplx characteristic_residual(const MagnusMatrix& m, cplx lambda);

/// Frobenius covariants B_i = prod_{j != i} (M1 - lambda_j I) / (lambda_i - lambda_j).
/// Uses the lambda3 = 0 forms when kd is a multiple of pi.
std::array<Eigen::Matrix3cd, 3> frobenius_covariants(const MagnusMatrix& m,
                                                     const SylvesterEigens& eig);

/// e^{M1} via Sylvester's formula, or a scaling-and-squaring exponential when
/// the spectrum is degenerate.
Eigen::Matrix3cd exp_m1(const MagnusMatrix& m);

/// beta(t) = e^{M1(t)} beta(0).
ThreeQubitAmplitudes magnus_propagate(const ThreeQubitAmplitudes& initial,
                                      const ModulationPulse& pulse, double t_gamma, double kd);

/// Large-time expansion of lambda1 at kd = 2 pi: (2/3) F + (4/27) F^2 / gt.
cplx lambda1_asymptotic(cplx F, double t_gamma);

struct AsymptoticObservables {
    double d;
    double S;
    double p2;
};

/// Populations after a pulse of area u with leak exponent Lambda (kd = 2 pi, |f| << gamma):
///
///   d  = (1/3) e^{-L} [(a1^2 - a3^2) cos u + 2 a1 a3 sin(phi3 - phi1) sin u]
///   S  = (1/18)(e^{-2L} + 9) + (1/9) a1 a3 cos(phi1 - phi3) (e^{-2L} - 9)
///   p2 = (1/9) e^{-2L} (1 + 2 a1 a3 cos(phi1 - phi3))
AsymptoticObservables asymptotic_observables(const TwoQubitPreparation& prep, double u,
                                             double lambda);

} // namespace wgtomo
