// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "wgtomo/analytic.hpp"
#include "wgtomo/dynamics.hpp"
#include "wgtomo/errors.hpp"
#include "wgtomo/scenario.hpp"
#include "wgtomo/tomography.hpp"

using namespace wgtomo;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Criterion 9 watches every trajectory produced below.
struct DissipationWatch {
    std::size_t trajectories = 0;
    std::size_t steps = 0;
    double worst_increase = 0.0;
    double worst_norm = 0.0;

    void observe(const Trajectory& traj)
    {
        ++trajectories;
        double prev = traj.samples.front().total_population();
        for (const auto& s : traj.samples) {
            const double n = s.total_population();
            worst_increase = std::max(worst_increase, n - prev);
            worst_norm = std::max(worst_norm, n);
            prev = n;
            ++steps;
        }
    }
};

DissipationWatch watch;

Trajectory run(const TwoQubitPreparation& prep, const ModulationPulse& pulse,
               const SystemConfig& cfg, double t_final, std::size_t sample_every = 1)
{
    Trajectory traj = propagate(prep, pulse, cfg, t_final, sample_every);
    watch.observe(traj);
    return traj;
}

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body)
{
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2d %s: %s (%s)\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

ScenarioConfig preset(const char* name)
{
    return parse_scenario(preset_config(name));
}

double post_pulse_drift(const Trajectory& traj, double from, double span)
{
    const ThreeQubitAmplitudes* ref = nullptr;
    double worst = 0.0;
    for (const auto& s : traj.samples) {
        if (s.t_gamma < from - 1e-9 || s.t_gamma > from + span + 1e-9) {
            continue;
        }
        if (!ref) {
            ref = &s;
        }
        worst = std::max({worst, std::abs(std::norm(s.b1) - std::norm(ref->b1)),
                          std::abs(std::norm(s.b2) - std::norm(ref->b2)),
                          std::abs(std::norm(s.b3) - std::norm(ref->b3))});
    }
    return worst;
}

} // namespace

int main()
{
    // Trajectories shared by several criteria.
    Trajectory fig3_traj;
    Trajectory fig4_traj;

    report(1, "free-evolution asymptotics", [] {
        const auto cfg = preset("free");
        const auto t0 = Clock::now();
        const auto traj = run(cfg.preparation, cfg.pulse, cfg.system, 20.0);
        const double elapsed = seconds_since(t0);
        const auto& s = traj.final_state();
        const double err = std::max({std::abs(std::norm(s.b1) - 4.0 / 9.0),
                                     std::abs(std::norm(s.b2) - 1.0 / 9.0),
                                     std::abs(std::norm(s.b3) - 1.0 / 9.0)});
        return Outcome{err <= 2e-6 && elapsed < 1.0,
                       fmt("max |p - (4/9,1/9,1/9)| = %.2e, runtime %.3f s", err, elapsed)};
    });

    report(2, "phase-independent population difference", [] {
        const double a1 = std::sqrt(0.3);
        const double a3 = std::sqrt(0.7);
        std::vector<std::vector<double>> traces;
        for (double dphi : {0.0, pi / 4.0, pi / 2.0, pi}) {
            const auto traj = run({a1, a3, dphi, 0.0}, ModulationPulse::none(), {}, 20.0);
            std::vector<double> d;
            for (const auto& s : traj.samples) {
                d.push_back(std::norm(s.b1) - std::norm(s.b3));
            }
            traces.push_back(std::move(d));
        }
        double worst = 0.0;
        for (const auto& tr : traces) {
            for (std::size_t i = 0; i < tr.size(); ++i) {
                worst = std::max(worst, std::abs(tr[i] - traces[0][i]));
            }
        }
        return Outcome{worst <= 1e-10, fmt("max pointwise spread %.2e over %g samples", worst,
                                           static_cast<double>(traces[0].size()))};
    });

    report(3, "fig3 reproduction", [&] {
        const auto cfg = preset("fig3");
        const auto t0 = Clock::now();
        fig3_traj = run(cfg.preparation, cfg.pulse, cfg.system, cfg.t_final_gamma);
        const double elapsed = seconds_since(t0);
        const double d = observe(fig3_traj.final_state()).d;
        const double lambda = pulse_lambda(cfg.pulse, cfg.pulse.t_end_gamma());
        const double predicted = std::sin(0.4 * pi) / 3.0 * std::exp(-lambda);
        return Outcome{std::abs(d - 0.3154) <= 0.010 && elapsed < 5.0,
                       fmt("d = %.5f, analytic %.5f, runtime %.2f s", d, predicted, elapsed)};
    });

    report(4, "fig4 reproduction", [&] {
        const auto cfg = preset("fig4");
        fig4_traj = run(cfg.preparation, cfg.pulse, cfg.system, cfg.t_final_gamma);
        const auto o = observe(fig4_traj.final_state());
        const double lambda = pulse_lambda(cfg.pulse, cfg.pulse.t_end_gamma());
        const auto a = asymptotic_observables(cfg.preparation, pi, lambda);
        return Outcome{std::abs(o.d) <= 5e-3 && std::abs(o.p2 - a.p2) <= 1e-2,
                       fmt("|d| = %.2e, |b2|^2 = %.5f vs %.5f", std::abs(o.d), o.p2, a.p2)};
    });

    // Protocol grid shared by criteria 5 and 6. The two protocol runs per point
    // are repeated here at full sampling so criterion 9 covers them too.
    struct GridPoint {
        double a1_sq;
        double dphi;
        ReconstructionReport rep;
    };
    std::vector<GridPoint> grid;
    const ProtocolParams params;
    bool records_match = true;
    for (double a1_sq : default_sweep_a1_sq()) {
        for (double dphi : default_sweep_dphi()) {
            const auto prep = TwoQubitPreparation::normalized(std::sqrt(a1_sq),
                                                              std::sqrt(1.0 - a1_sq), dphi, 0.0);
            const auto rep = reconstruct(prep, params);
            SystemConfig sys;
            sys.kd = params.kd;
            sys.dt_gamma = params.dt_gamma;
            for (const auto& rec : {rep.rec_pi, rep.rec_half}) {
                const auto pulse =
                    design_pulse(target_area(rec.pulse_kind), params.t_start_gamma, params.duration_gamma);
                const auto traj = run(prep, pulse, sys, params.t_readout_gamma());
                records_match = records_match && std::norm(traj.final_state().b1) == rec.p1
                                && std::norm(traj.final_state().b3) == rec.p3;
            }
            grid.push_back({a1_sq, prep.phase_difference(), rep});
        }
    }

    report(5, "pi-pulse population estimation", [&] {
        double worst = 0.0;
        for (const auto& g : grid) {
            worst = std::max(worst, std::abs(g.rep.a1_est * g.rep.a1_est - g.a1_sq));
        }
        return Outcome{worst <= 0.02,
                       fmt("max |a1_est^2 - a1^2| = %.2e over %g points", worst,
                           static_cast<double>(grid.size()))};
    });

    report(6, "phase round trip and monotonicity", [&] {
        double worst = 0.0;
        int used = 0;
        for (const auto& g : grid) {
            if (std::sqrt(g.a1_sq * (1.0 - g.a1_sq)) < 0.15) {
                continue;
            }
            worst = std::max(worst, std::abs(wrap_phase(g.rep.phi_est - g.dphi)));
            ++used;
        }
        const double h = std::sqrt(0.5);
        double prev = -10.0;
        bool monotone = true;
        for (int k = -15; k <= 15; ++k) {
            const double dphi = k * (pi / 2.0) / 16.0;
            const double est = reconstruct({h, h, dphi, 0.0}, params).phi_est;
            monotone = monotone && est > prev;
            prev = est;
        }
        return Outcome{worst <= 0.05 && monotone,
                       fmt("max phase error %.4f rad over %g points, monotone=%g", worst,
                           static_cast<double>(used), monotone ? 1.0 : 0.0)};
    });

    report(7, "Sylvester/Magnus correctness", [] {
        double worst_ode = 0.0;
        double worst_cov = 0.0;
        int degenerate = 0;
        const Eigen::Matrix3cd id = Eigen::Matrix3cd::Identity();
        for (double kd : {pi / 3.0, pi / 2.0, pi, 2.0 * pi}) {
            for (double f : {0.0, 0.02, 0.05}) {
                const double t = 20.0;
                const auto pulse =
                    f == 0.0 ? ModulationPulse::none() : ModulationPulse::rectangular(f, 0.0, t);
                const auto m = magnus_m1(pulse, t, kd);
                const Eigen::Matrix3cd p = exp_m1(m);
                SystemConfig sys;
                sys.kd = kd;
                for (int col = 0; col < 3; ++col) {
                    Eigen::Vector3cd e = Eigen::Vector3cd::Zero();
                    e(col) = 1.0;
                    auto traj = propagate_amplitudes(ThreeQubitAmplitudes::from_vector(e, 0.0),
                                                     pulse, sys, t, 1);
                    watch.observe(traj);
                    worst_ode = std::max(worst_ode, oracle::max_abs(traj.final_state().vector() - p.col(col)));
                }
                try {
                    const auto eig = sylvester_eigens(m);
                    const auto b = frobenius_covariants(m, eig);
                    worst_cov = std::max(worst_cov, oracle::max_abs(b[0] + b[1] + b[2] - id));
                    for (int i = 0; i < 3; ++i) {
                        worst_cov = std::max(worst_cov, oracle::max_abs(b[i] * b[i] - b[i]));
                        for (int j = 0; j < 3; ++j) {
                            if (i != j) {
                                worst_cov = std::max(worst_cov, oracle::max_abs(b[i] * b[j]));
                            }
                        }
                    }
                } catch (const DegenerateSpectrum&) {
                    ++degenerate;  // no covariants exist; exp_m1 used the fallback
                }
            }
        }
        return Outcome{worst_ode <= 1e-8 && worst_cov <= 1e-10,
                       fmt("exp_m1 vs ODE %.2e, covariants %.2e, %g degenerate cases via fallback",
                           worst_ode, worst_cov, degenerate)};
    });

    report(8, "dark-state stationarity", [&] {
        // The bright mode excited during the pulse decays as e^{-3 gt / 2};
        // 10/gamma after the pulse it is below 1e-6 in amplitude.
        const double from = 151.0 + 10.0;
        double worst = 0.0;
        for (const char* name : {"fig3", "fig4"}) {
            const auto cfg = preset(name);
            const auto traj = run(cfg.preparation, cfg.pulse, cfg.system, from + 50.0);
            worst = std::max(worst, post_pulse_drift(traj, from, 50.0));
        }
        return Outcome{worst <= 1e-6, fmt("max population drift over 50/gamma: %.2e", worst)};
    });

    report(10, "integrator order", [] {
        const auto cfg = preset("fig3");
        std::vector<Trajectory> runs;
        for (double dt : {0.01, 0.005, 0.0025}) {
            SystemConfig sys = cfg.system;
            sys.dt_gamma = dt;
            runs.push_back(run(cfg.preparation, cfg.pulse, sys, cfg.t_final_gamma,
                               static_cast<std::size_t>(std::llround(0.1 / dt))));
        }
        double e[2] = {0.0, 0.0};
        for (int k = 0; k < 2; ++k) {
            for (std::size_t i = 0; i < runs[k].samples.size(); ++i) {
                e[k] = std::max(e[k], (runs[k].samples[i].vector() - runs[k + 1].samples[i].vector())
                                          .cwiseAbs()
                                          .maxCoeff());
            }
        }
        const double order = std::log2(e[0] / e[1]);
        return Outcome{std::abs(order - 4.0) <= 0.2,
                       fmt("observed order %.3f (max differences %.2e, %.2e)", order, e[0], e[1])};
    });

    report(9, "dissipativity and bound", [&] {
        const bool ok = watch.worst_increase <= 1e-9 && watch.worst_norm <= 1.0 + 1e-9 && records_match;
        return Outcome{ok, fmt("%g trajectories, %g samples, max step increase %.2e, max norm %.15f",
                               static_cast<double>(watch.trajectories),
                               static_cast<double>(watch.steps), watch.worst_increase,
                               watch.worst_norm)};
    });

    std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
