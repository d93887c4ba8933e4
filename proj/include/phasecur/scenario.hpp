#pragma once

// Scenario runner behind the command-line tool: strict JSON configuration,
// named experiments, CSV artifacts and a verdict summary.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phasecur/kernels.hpp"
#include "phasecur/states.hpp"

namespace phasecur {

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double tol = 0.0;
};

/// Coordinates (or "all") selecting indices along each axis of a grid.
struct AxisSelection {
    bool all = true;
    std::vector<double> coords;
};

struct NumericsConfig {
    std::optional<double> tol;  // overrides the scenario's main tolerance
    double dt = 1e-4;
    std::size_t memory_cap = std::size_t{1} << 22;
    double leak_tol = 1e-10;
    double norm_tol = 1e-10;
    double p_leak_tol = 1e-10;
    double eps_den = 1e-10;
    double admissibility_tol = 1e-6;
    double node_floor = 1e-13;
};

struct ScenarioConfig {
    std::string scenario;
    StateSpec state;
    double time = 0.0;
    std::optional<std::string> kernel_name;
    KernelParams kernel_params;
    Grid3 grid = Grid3::cubic(48, 20.0);
    std::optional<Grid3> p_grid;
    PhysicalConstants constants;
    NumericsConfig numerics;
    std::array<AxisSelection, 3> q_selection;
    std::array<AxisSelection, 3> p_selection;
    nlohmann::json params = nlohmann::json::object();
    std::map<std::string, bool> expect;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    bool binary = false;
    bool full_grid = false;
};

std::vector<std::string> scenario_names();

/// Strict parse: unknown keys anywhere raise ErrorCode::Config.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);

struct ScenarioResult {
    std::string scenario;
    std::vector<Verdict> verdicts;
    std::vector<std::filesystem::path> artifacts;
    nlohmann::json extracted = nlohmann::json::object();  // scenario-specific values
    double runtime_s = 0.0;

    bool all_pass() const;
};

/// Runs the scenario, writes its artifacts plus summary.json and timing.json
/// into config.output_dir.
ScenarioResult run_scenario(const ScenarioConfig& config);

nlohmann::json summary_json(const ScenarioResult& result);

}  // namespace phasecur
