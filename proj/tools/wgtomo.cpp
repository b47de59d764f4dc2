#include <iostream>

#include <CLI11.hpp>

#include "wgtomo/commands.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Three-qubit waveguide dynamics and two-pulse phase tomography"};
    app.require_subcommand(1);

    wgtomo::CommandOptions opts;
    std::string config;
    std::string preset;
    std::string out;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "JSON scenario file")->check(CLI::ExistingFile);
        sub->add_option("--preset", preset, "built-in scenario")
            ->check(CLI::IsMember({"fig3", "fig4", "free"}));
        sub->add_option("--out", out, "output path (WGTOMO_OUTPUT_DIR overrides the directory)");
        sub->add_option("--shots", shots, "binomial readout shots per population")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "random seed for shot sampling");
        sub->add_flag("--observables", opts.observables,
                      "sweep: also write the difference/sum surfaces");
    };
    for (const char* name : {"simulate", "reconstruct", "sweep", "validate"}) {
        add_common(app.add_subcommand(name));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : wgtomo::kExitConfig;
    }

    CLI::App* sub = app.get_subcommands().front();
    opts.command = sub->get_name();
    if (sub->count("--config")) {
        opts.config_path = config;
    }
    if (sub->count("--preset")) {
        opts.preset = preset;
    }
    if (sub->count("--out")) {
        opts.out = out;
    }
    if (sub->count("--shots")) {
        opts.shots = shots;
    }
    if (sub->count("--seed")) {
        opts.seed = seed;
    }
    return wgtomo::run_command(opts, std::cout, std::cerr);
}
