#pragma once

#include "floatelast/optimize.hpp"

#include <string>

#include "json.hpp"

namespace floatelast {

enum class ScenarioKind { FreeFloat, CompressibleLocal, Submarine, Anchored, Reservoir, Ship };
const char* to_string(ScenarioKind k);

struct ConfigError : std::runtime_error {
    std::string pointer; // JSON pointer of the offending field
    ConfigError(std::string ptr, const std::string& what)
        : std::runtime_error(what + " (at " + ptr + ")"), pointer(std::move(ptr)) {}
};

/// Parsed and validated scenario configuration, schema "floatelast-config/1".
struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::FreeFloat;
    ReferenceMesh mesh;
    MaterialParams material;
    DensityModel density;
    FluidEnvironment fluid;
    AnchorSpec anchor;
    SolveOptions solver;

    // Scenario parameters.
    double tau = 0.7;              // mean-J floor for compressible_local
    double epsilon0 = 0.05;        // ship continuity-probe amplitude
    double eta_margin = 0;         // ship: required |D| margin over eta (warning only)
    double r_test = 0.01;          // perturbation-probe amplitude
    int n_probe = 16;              // perturbation-probe count
    int grid_res = 0;              // 0: dimension default (96 in 3D, 512 in 2D)
    unsigned seed = 12345;
    std::string initial_placement = "default"; // waterline_barycenter | submerged | identity
    double immersion_margin = 0.25;            // submerged placement: top at h - margin*height
    double perturb_amplitude = 0;              // random initial perturbation (x diameter)

    std::string out_dir = "out";
    bool deterministic = false;

    nlohmann::json raw; // canonicalized source document

    int effective_grid_res() const { return grid_res > 0 ? grid_res : (mesh.dim == 3 ? 96 : 512); }
};

ScenarioConfig parse_config(const nlohmann::json& doc, const std::string& base_dir);
ScenarioConfig load_config(const std::string& path);

// FNV-1a over the canonicalized (sorted-key) dump.
std::string config_hash(const nlohmann::json& doc);

} // namespace floatelast
