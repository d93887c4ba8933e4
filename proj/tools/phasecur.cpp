// phasecur run <config.json> [--out DIR] [--seed N] [--quiet]
//
// Exit status: 0 all verdicts pass, 1 a verdict failed (or a numerical
// failure), 2 configuration error, 3 I/O error.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "phasecur/scenario.hpp"

namespace {

int exit_code(phasecur::ErrorCode code) {
    using phasecur::ErrorCode;
    switch (code) {
        case ErrorCode::Io: return 3;
        case ErrorCode::Config:
        case ErrorCode::InvalidGrid:
        case ErrorCode::InvalidArgument:
        case ErrorCode::BoundaryLeakage:
        case ErrorCode::Resolution:
        case ErrorCode::UnknownKernel:
        case ErrorCode::MissingParameter:
        case ErrorCode::MemoryCap:
        case ErrorCode::DistributionValuedKernel:
        case ErrorCode::ThinSlice:
        case ErrorCode::NonUnitVector:
        case ErrorCode::IllPosedFit: return 2;
        default: return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase-space distributions and the probability currents they induce"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "Run the scenario described by a JSON config");
    run->add_option("config", config_path, "Scenario config (JSON)")->required();
    auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides output.directory)");
    auto* seed_opt = run->add_option("--seed", seed, "Seed for random directions and samples");
    run->add_flag("--quiet", quiet, "Print nothing on success");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        phasecur::ScenarioConfig config = phasecur::load_config(config_path);
        if (*out_opt) config.output_dir = out_dir;
        if (*seed_opt) config.seed = seed;
        const phasecur::ScenarioResult result = phasecur::run_scenario(config);
        if (!quiet) {
            for (const auto& v : result.verdicts) {
                std::printf("%s  %-60s value=%.6g tol=%.3g\n", v.pass ? "PASS" : "FAIL", v.name.c_str(), v.value, v.tol);
            }
            std::printf("%s: %s (%.2f s) -> %s\n", result.scenario.c_str(), result.all_pass() ? "all verdicts pass" : "verdict failure",
                        result.runtime_s, config.output_dir.string().c_str());
        }
        return result.all_pass() ? 0 : 1;
    } catch (const phasecur::Error& e) {
        std::cerr << "phasecur: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "phasecur: " << e.what() << '\n';
        return 1;
    }
}
