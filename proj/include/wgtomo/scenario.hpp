#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wgtomo/core_model.hpp"
#include "wgtomo/tomography.hpp"

namespace wgtomo {

/// Rectangular pulse given by its target area instead of its amplitude.
struct DesignTriple {
    double u_target;
    double t_start_gamma;
    double duration_gamma;
};

struct OutputSpec {
    std::string path;
    std::string format = "csv";
};

struct SweepGrid {
    std::vector<double> a1_sq;
    std::vector<double> dphi;  ///< phi1 - phi3, radians
};

/// Fully validated scenario. `resolved` is the normalized JSON form that is
/// embedded in every output file.
struct ScenarioConfig {
    SystemConfig system;
    TwoQubitPreparation preparation{1.0, 0.0, 0.0, 0.0};
    ModulationPulse pulse;              ///< explicit or designed; none when absent
    std::optional<DesignTriple> design;
    double t_final_gamma = 200.0;
    std::size_t sample_every = 100;
    std::optional<std::uint64_t> shots;
    std::optional<std::uint64_t> seed;
    OutputSpec output;
    ProtocolParams protocol;
    SweepGrid sweep;
    nlohmann::ordered_json resolved;
};

/// Parses JSON text; syntax errors are reported as "<source>:<line>:<col>: ...".
nlohmann::ordered_json parse_config_text(std::string_view text, std::string_view source);

nlohmann::ordered_json load_config_file(const std::string& path);

/// Built-in scenarios: "fig3", "fig4", "free". Throws ConfigError otherwise.
nlohmann::ordered_json preset_config(std::string_view name);

/// Validates every field; errors name the offending key path ("pulse.t_end_gamma: ...").
ScenarioConfig parse_scenario(const nlohmann::ordered_json& j);

std::vector<double> default_sweep_a1_sq();
std::vector<double> default_sweep_dphi();

} // namespace wgtomo
