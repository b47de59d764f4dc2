#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "wgtomo/analytic.hpp"
#include "wgtomo/errors.hpp"
#include "wgtomo/tomography.hpp"

using namespace wgtomo;
using doctest::Approx;

namespace {

const double kHalf = std::sqrt(0.5);

MeasurementRecord record(PulseKind kind, double p1, double p3)
{
    MeasurementRecord r;
    r.pulse_kind = kind;
    r.p1 = p1;
    r.p3 = p3;
    return r;
}

ProtocolParams fast_params()
{
    ProtocolParams p;
    p.dt_gamma = 0.005;
    return p;
}

} // namespace

TEST_CASE("pulse kinds")
{
    CHECK(target_area(PulseKind::pi) == pi);
    CHECK(target_area(PulseKind::half_pi) == pi / 2.0);
    CHECK(target_area(PulseKind::none) == 0.0);
    CHECK(std::string(to_string(PulseKind::half_pi)) == "half_pi");
    CHECK(ProtocolParams{}.t_readout_gamma() == Approx(156.0));
}

TEST_CASE("measure examples")
{
    const ProtocolParams params;
    const auto a = measure({1.0, 0.0, 0.0, 0.0}, PulseKind::pi, params);
    CHECK_FALSE(a.shots.has_value());
    CHECK(a.t_readout_gamma == Approx(156.0));
    CHECK(a.lambda == Approx(pi * pi / 423.0));
    // -1/3 up to the leak factor of the pulse
    CHECK(std::abs(a.d() + std::exp(-a.lambda) / 3.0) <= 2e-4);

    // d -> -1/3 once Lambda << 1
    ProtocolParams slow;
    slow.duration_gamma = 600.0;
    const auto a_slow = measure({1.0, 0.0, 0.0, 0.0}, PulseKind::pi, slow);
    CHECK(std::abs(a_slow.d() + 1.0 / 3.0) <= 2e-3);

    const auto b = measure({kHalf, kHalf, 0.0, 0.0}, PulseKind::pi, params);
    CHECK(std::abs(b.d()) <= 5e-3);

    const auto c = measure({kHalf, kHalf, 0.0, 0.4 * pi}, PulseKind::half_pi, params);
    CHECK(std::abs(c.d() - 0.315) <= 5e-3);
}

TEST_CASE("measure with shots is seeded and binomial")
{
    const TwoQubitPreparation p{0.6, 0.8, 0.2, 0.0};
    const auto params = fast_params();
    const auto x = measure(p, PulseKind::half_pi, params, 1000, 7);
    const auto y = measure(p, PulseKind::half_pi, params, 1000, 7);
    CHECK(x.p1 == y.p1);
    CHECK(x.p3 == y.p3);
    CHECK(x.p2 == y.p2);
    REQUIRE(x.shots.has_value());
    CHECK(*x.shots == 1000);
    // sample means are multiples of 1/shots
    CHECK(std::abs(x.p1 * 1000.0 - std::round(x.p1 * 1000.0)) < 1e-9);
    CHECK_THROWS_AS(measure(p, PulseKind::pi, params, 0, 1), ConfigError);
}

TEST_CASE("estimate_populations examples")
{
    auto a = estimate_populations(record(PulseKind::pi, 1.0 / 3.0, 2.0 / 3.0));
    CHECK(a.a1 == Approx(1.0));
    CHECK(a.a3 == Approx(0.0).epsilon(1e-7));
    a = estimate_populations(record(PulseKind::pi, 0.2, 0.2));
    CHECK(a.a1 == Approx(kHalf));
    CHECK(a.a3 == Approx(kHalf));
    a = estimate_populations(record(PulseKind::pi, 1.0 / 3.0, 0.0));
    CHECK(std::abs(a.a1) < 1e-7);
    CHECK(a.a3 == Approx(1.0));
    // out-of-range differences are clamped
    a = estimate_populations(record(PulseKind::pi, 0.5, 0.0));
    CHECK(a.a1 == 0.0);
    CHECK(a.a3 == 1.0);
    // the leak factor is undone before inverting
    auto leaky = record(PulseKind::pi, 0.1, 0.1 + 0.25 * std::exp(-0.05));
    leaky.lambda = 0.05;
    CHECK(estimate_populations(leaky).a1 * estimate_populations(leaky).a1 == Approx(0.875));
    CHECK_THROWS_AS(estimate_populations(record(PulseKind::half_pi, 0.1, 0.1)), ConfigError);
}

TEST_CASE("estimate_phase examples")
{
    const auto rec = measure({kHalf, kHalf, 0.0, 0.4 * pi}, PulseKind::half_pi, ProtocolParams{});
    const auto ph = estimate_phase(rec, kHalf, kHalf);
    CHECK(ph.sin_est == Approx(0.946).epsilon(0.02));
    CHECK(rec.S() == Approx(0.418).epsilon(0.01));
    CHECK(ph.cos_est == Approx(0.309).epsilon(0.05));
    CHECK(std::abs(std::abs(ph.phi_est) - 0.4 * pi) <= 0.01);
    CHECK_FALSE(ph.phase_indeterminate);

    const auto none = estimate_phase(rec, 1.0, 0.0);
    CHECK(none.phase_indeterminate);
    CHECK(none.phi_est == 0.0);

    const auto zero = measure({kHalf, kHalf, 0.5, 0.5}, PulseKind::half_pi, ProtocolParams{});
    const auto z = estimate_phase(zero, kHalf, kHalf);
    CHECK(std::abs(z.sin_est) < 1e-3);
    CHECK(z.cos_est == Approx(1.0).epsilon(0.02));
    CHECK(std::abs(z.phi_est) < 0.02);

    CHECK_THROWS_AS(estimate_phase(record(PulseKind::pi, 0.1, 0.1), kHalf, kHalf), ConfigError);
}

TEST_CASE("estimate_phase flags and clamps out-of-range trig values")
{
    auto r = record(PulseKind::half_pi, 0.6, 0.0);
    const auto ph = estimate_phase(r, kHalf, kHalf);
    CHECK(ph.trig_out_of_range);
    CHECK(ph.sin_est == 1.0);
    r = record(PulseKind::half_pi, 0.28, 0.28);
    CHECK_FALSE(estimate_phase(r, kHalf, kHalf).trig_out_of_range);
}

TEST_CASE("estimators invert the asymptotic formulas exactly")
{
    for (int i = 0; i < 300; ++i) {
        const double a1sq = oracle::uniform(0.05, 0.95);
        const double dphi = oracle::uniform(-pi, pi);
        const TwoQubitPreparation p{std::sqrt(a1sq), std::sqrt(1.0 - a1sq), dphi, 0.0};
        const auto api = asymptotic_observables(p, pi, 0.0);
        const auto ahalf = asymptotic_observables(p, pi / 2.0, 0.0);

        auto rpi = record(PulseKind::pi, (api.S + api.d) / 2.0, (api.S - api.d) / 2.0);
        const auto pop = estimate_populations(rpi);
        CHECK(pop.a1 == Approx(p.a1()).epsilon(1e-9));
        CHECK(pop.a3 == Approx(p.a3()).epsilon(1e-9));

        auto rhalf = record(PulseKind::half_pi, (ahalf.S + ahalf.d) / 2.0, (ahalf.S - ahalf.d) / 2.0);
        const auto ph = estimate_phase(rhalf, pop.a1, pop.a3);
        CHECK(std::abs(wrap_phase(ph.phi_est - dphi)) < 1e-6);
        CHECK(ph.sin_est == Approx(std::sin(-dphi)).epsilon(1e-7));
        CHECK(ph.cos_est == Approx(std::cos(dphi)).epsilon(1e-7));
    }
}

TEST_CASE("Lambda correction undoes the leak factor on d")
{
    auto r = record(PulseKind::half_pi, 0.3, 0.1);
    r.lambda = 0.1;
    const auto plain = estimate_phase(r, kHalf, kHalf);
    const auto corr = estimate_phase(r, kHalf, kHalf, 0.02, true);
    CHECK(corr.sin_est == Approx(plain.sin_est * std::exp(0.1)));
    CHECK(corr.cos_est == plain.cos_est);
}

TEST_CASE("reconstruct examples")
{
    const ProtocolParams params;
    const TwoQubitPreparation a{kHalf, kHalf, 0.0, 0.4 * pi};
    const auto ra = reconstruct(a, params);
    CHECK(std::abs(ra.a1_est - kHalf) <= 0.02);
    CHECK(std::abs(ra.a3_est - kHalf) <= 0.02);
    CHECK(std::abs(wrap_phase(ra.phi_est - a.phase_difference())) <= 0.05);
    CHECK(ra.rec_pi.pulse_kind == PulseKind::pi);
    CHECK(ra.rec_half.pulse_kind == PulseKind::half_pi);

    const TwoQubitPreparation b{0.6, 0.8, pi / 2.0, 0.0};
    const auto rb = reconstruct(b, params);
    CHECK(std::abs(rb.rho_est.rho13 - cplx{0.0, 0.48}) <= 0.03);
    CHECK(rb.rho_est.is_valid());

    const TwoQubitPreparation c{1.0, 0.0, 1.3, -0.2};
    const auto rc = reconstruct(c, params);
    CHECK(rc.phase_indeterminate);
    CHECK(rc.rho_est.p11 == Approx(1.0).epsilon(1e-3));
    CHECK(rc.rho_est.p33 == Approx(0.0).epsilon(1e-3));
    CHECK(rc.rho_est.rho13 == cplx{});
}

TEST_CASE("round trip over a coarse grid")
{
    const auto params = fast_params();
    for (double a1sq : {0.15, 0.5, 0.85}) {
        for (double dphi : {-2.5, -1.0, 0.3, 1.7, 3.0}) {
            const TwoQubitPreparation p{std::sqrt(a1sq), std::sqrt(1.0 - a1sq), dphi, 0.0};
            const auto r = reconstruct(p, params);
            CHECK(std::abs(r.a1_est * r.a1_est - a1sq) <= 0.02);
            CHECK(std::abs(wrap_phase(r.phi_est - dphi)) <= 0.05);
            CHECK(r.rho_est.is_valid(1e-6));
        }
    }
}

TEST_CASE("phi_est is monotone in the true phase at equal amplitudes")
{
    const auto params = fast_params();
    double prev = -10.0;
    for (int k = -7; k <= 7; ++k) {
        const double dphi = k * (pi / 2.0) / 8.0;
        const auto r = reconstruct({kHalf, kHalf, dphi, 0.0}, params);
        CHECK(r.phi_est > prev);
        prev = r.phi_est;
    }
}

TEST_CASE("shot noise shrinks like 1/sqrt(N)")
{
    const auto params = fast_params();
    const TwoQubitPreparation p{std::sqrt(0.3), std::sqrt(0.7), 1.0, 0.0};
    const auto exact = reconstruct(p, params);
    const auto noisy = reconstruct(p, params, 1000000, 99);
    // each population has sigma <= 5e-4 at 1e6 shots
    CHECK(std::abs(noisy.a1_est * noisy.a1_est - exact.a1_est * exact.a1_est) <= 5.0 * 1.5 * 1e-3);
    CHECK(std::abs(wrap_phase(noisy.phi_est - exact.phi_est)) <= 0.05);

    const auto again = reconstruct(p, params, 1000000, 99);
    CHECK(again.phi_est == noisy.phi_est);
    CHECK(again.a1_est == noisy.a1_est);
}

TEST_CASE("measured S and p2 respect probability conservation")
{
    const auto params = fast_params();
    for (int i = 0; i < 6; ++i) {
        const double a1sq = oracle::uniform(0.0, 1.0);
        const TwoQubitPreparation p{std::sqrt(a1sq), std::sqrt(1.0 - a1sq),
                                    oracle::uniform(-pi, pi), 0.0};
        for (auto kind : {PulseKind::none, PulseKind::pi, PulseKind::half_pi}) {
            const auto r = measure(p, kind, params);
            CHECK(r.S() + r.p2 <= 1.0 + 1e-6);
            CHECK(r.p1 >= 0.0);
            CHECK(r.p3 >= 0.0);
        }
    }
}
