#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wgtomo/dynamics.hpp"
#include "wgtomo/scenario.hpp"
#include "wgtomo/tomography.hpp"

namespace wgtomo {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNumeric = 3,
    kExitValidation = 4,
};

/// Environment variable that redirects every output file into a directory.
inline constexpr const char* kOutputDirEnv = "WGTOMO_OUTPUT_DIR";

struct CommandOptions {
    std::string command;  ///< simulate | reconstruct | sweep | validate
    std::optional<std::string> config_path;
    std::optional<std::string> preset;
    std::optional<std::string> out;
    std::optional<std::uint64_t> shots;
    std::optional<std::uint64_t> seed;
    bool observables = false;
};

/// Merges preset, config file and command-line overrides, then validates.
ScenarioConfig resolve_scenario(const CommandOptions& opts);

/// Dispatches a subcommand and maps exceptions onto the exit-code contract.
int run_command(const CommandOptions& opts, std::ostream& log, std::ostream& err);

// Formatting helpers exposed for golden-file tests.

/// Decimal with 9 significant digits ("%.9g").
std::string format_number(double x);

inline constexpr const char* kTrajectoryHeader =
    "t_gamma,p1,p2,p3,d,S,re_b1,im_b1,re_b2,im_b2,re_b3,im_b3";

/// Trajectory CSV: "# config: <json>" line, header row, one row per sample.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const nlohmann::ordered_json& config);

/// Same content as the CSV: {"config", "columns", "rows"}.
nlohmann::ordered_json trajectory_to_json(const Trajectory& traj,
                                          const nlohmann::ordered_json& config);

nlohmann::ordered_json report_to_json(const ReconstructionReport& rep,
                                      const TwoQubitPreparation& truth);

struct SweepRow {
    double a1_sq_true;
    double dphi_true;
    double a1_sq_est;
    double dphi_est;
    double err_pop;
    double err_phase;
    bool phase_indeterminate;
};

/// Runs the protocol over the grid on a worker pool; rows come back in grid
/// order (a1_sq outer, dphi inner) regardless of scheduling.
std::vector<SweepRow> run_sweep(const SweepGrid& grid, const ProtocolParams& params,
                                std::optional<std::uint64_t> shots,
                                std::optional<std::uint64_t> seed, unsigned workers = 0);

/// Cross-checks of the closed-form propagator against the integrator.
struct ValidationReport {
    double sylvester_vs_ode = 0.0;
    double covariant_completeness = 0.0;
    double covariant_orthogonality = 0.0;
    double covariant_idempotency = 0.0;
    double asymptotic_agreement = 0.0;

    static constexpr double kSylvesterTol = 1e-8;
    static constexpr double kCovariantTol = 1e-10;
    static constexpr double kAsymptoticTol = 1e-2;

    bool passed() const
    {
        return sylvester_vs_ode <= kSylvesterTol && covariant_completeness <= kCovariantTol
               && covariant_orthogonality <= kCovariantTol
               && covariant_idempotency <= kCovariantTol && asymptotic_agreement <= kAsymptoticTol;
    }
};

ValidationReport run_validation(const ProtocolParams& params, double dt_gamma);

/// Maximum absolute difference between exp_m1 and the integrated propagator for
/// a constant detuning applied over [0, t].
double sylvester_ode_deviation(double kd, double f_over_gamma, double t_gamma, double dt_gamma);

} // namespace wgtomo
