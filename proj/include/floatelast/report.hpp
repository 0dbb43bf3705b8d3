#pragma once

#include "floatelast/config.hpp"
#include "floatelast/verify.hpp"

#include <fstream>
#include <optional>
#include <string>

namespace floatelast {

struct RunManifest {
    std::string config_path;
    std::string config_hash;
    std::string out_dir;
    std::string tool_version;
    std::string started_at;  // ISO 8601 UTC
    std::string finished_at;
    bool deterministic = false;
};

struct ProbeReport {
    int n = 0;
    double amplitude = 0;
    double fraction_increased = 0;
};

struct ContinuityProbe {
    double epsilon = 0;
    double max_symmetric_difference = 0;
    double bound = 0; // epsilon^{1/2}
    bool within = false;
};

/// Everything a scenario run reports; serialized as report.json.
struct EquilibriumReport {
    RunManifest manifest;
    ScenarioKind scenario = ScenarioKind::FreeFloat;
    SolveStatus status = SolveStatus::MaxIters;
    FloatClass float_class = FloatClass::NotImmersed;
    EnergyBreakdown energy;
    ArchimedesResult archimedes;
    double submerged_volume = 0;
    double submerged_fraction = 0;
    double mean_J = 0;
    std::optional<double> cavity_volume;
    std::optional<double> water_level;
    std::optional<CiarletNecasReport> cn_check;
    int iterations = 0;
    double grad_norm = 0;
    double wall_time_sec = 0;
    bool line_search_failed = false;
    bool mean_j_floor_active = false;
    int inextensible_active_nodes = 0;

    // Scenario-specific extras.
    std::optional<double> rho_b;                  // submarine neutral trim
    std::optional<double> translation_derivative; // submarine
    std::optional<double> eta;                    // ship threshold
    std::optional<double> cavity_margin;          // |D| - eta
    std::optional<double> reservoir_residual;     // fluid-content conservation
    std::optional<double> reference_energy;       // translated-identity value
    std::optional<bool> reference_comparison_ok;  // E(y*) <= reference energy
    std::optional<ProbeReport> probe;
    std::vector<ContinuityProbe> continuity;
    std::optional<double> max_anchor_elongation;
    std::optional<bool> cable_taut;
    std::optional<std::string> note;

    nlohmann::ordered_json to_json() const;
};

void write_text_atomic(const std::string& path, const std::string& text);
void write_report(const EquilibriumReport& report, const std::string& path);

/// Per-iteration CSV: iter,total,elastic,hydro,gravity,anchor,penalty,grad_norm
class TraceWriter {
public:
    explicit TraceWriter(const std::string& path);
    void row(int iter, const EnergyBreakdown& b, double grad_norm);
    void close();

private:
    std::ofstream out_;
};

// Legacy ASCII unstructured-grid export of the deformed configuration with
// displacement vectors and per-cell jacobians.
void write_deformed_vtk(const ReferenceMesh& mesh, const DeformationField& y,
                        const std::string& path);

// Saved solver state: config + mesh + nodal positions + waterline, for the
// verify subcommand.
void write_state(const ScenarioConfig& cfg, const ReferenceMesh& mesh, const DeformationField& y,
                 double h, const std::string& path);
struct SavedState {
    ScenarioConfig config;
    DeformationField y;
    double h = 0;
};
SavedState load_state(const std::string& path);

std::string iso8601_now();

} // namespace floatelast
