// mmwave_mfg: solve / validate / tables for one scenario file.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "mmw/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Mean-field uplink power control for mmWave networks"};
    app.require_subcommand(1, 1);

    mmw::RunOptions opt;
    std::string config, out = ".";
    std::vector<std::string> overrides;
    std::uint64_t seed = 1;
    std::size_t samples = 100000;

    const std::map<std::string, mmw::Command> commands = {
        {"solve", mmw::Command::solve}, {"validate", mmw::Command::validate}, {"tables", mmw::Command::tables}};
    for (const auto& [name, cmd] : commands) {
        auto* sub = app.add_subcommand(name, name == "solve"      ? "MFE and baseline policies, utilities, mean field"
                                             : name == "validate" ? "Monte Carlo oracle checks"
                                                                  : "geometry, association and kernel tables");
        sub->add_option("--config", config, "scenario file (sections [network] [antenna] ...)");
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "master seed")->capture_default_str();
        sub->add_option("--override", overrides, "key=value or section.key=value, repeatable");
        if (name == "validate") sub->add_option("--samples", samples, "networks per check")->capture_default_str();
        sub->callback([&opt, cmd = cmd] { opt.command = cmd; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mmw::kExitConfig;
    }
    opt.config = config;
    opt.out_dir = out;
    opt.seed = seed;
    opt.overrides = overrides;
    opt.samples = samples;
    return mmw::run_experiment(opt, std::cout, std::cerr);
}
