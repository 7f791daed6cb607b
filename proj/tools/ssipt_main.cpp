#include "ssipt/cli.hpp"
#include "ssipt/error.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Detuned series-series IPT workbench"};
    std::string command;
    std::string configPath;
    std::string outDir;
    app.add_option("command", command, "analyze, simulate, sweep-k, sweep-misalign, coupler, design or calibrate")
        ->required();
    app.add_option("--config", configPath, "workbench config file")->required();
    app.add_option("--out", outDir, "output directory (overrides SSIPT_OUT and [output] directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n' << ssipt::cli::kUsage;
        return 2;
    }

    if (!ssipt::cli::is_command(command)) {
        std::cerr << "unknown command '" << command << "'\n" << ssipt::cli::kUsage;
        return 2;
    }

    ssipt::WorkbenchConfig config;
    try {
        config = ssipt::io::load_config(configPath);
    } catch (const ssipt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    const auto dir = ssipt::cli::output_directory(
        config, outDir.empty() ? std::nullopt : std::optional<std::string>(outDir));
    return ssipt::cli::dispatch(command, config, dir, std::cout, std::cerr);
}
