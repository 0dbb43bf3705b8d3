#pragma once

#include "floatelast/report.hpp"

namespace floatelast {

struct ScenarioResult {
    EquilibriumReport report;
    DeformationField y;
    double h = 0; // final waterline
};

// Initial state per the configured placement policy (plus the optional seeded
// random perturbation). `fallback` applies when the config says "default".
DeformationField initial_state(const ScenarioConfig& cfg, const std::string& fallback);

ScenarioResult run_free_float(const ScenarioConfig& cfg, const TraceFn& trace = {});
ScenarioResult run_compressible_local(const ScenarioConfig& cfg, const TraceFn& trace = {});
ScenarioResult run_submarine(const ScenarioConfig& cfg, const TraceFn& trace = {});
ScenarioResult run_anchored(const ScenarioConfig& cfg, const TraceFn& trace = {});
ScenarioResult run_reservoir(const ScenarioConfig& cfg, const TraceFn& trace = {});
ScenarioResult run_ship(const ScenarioConfig& cfg, const TraceFn& trace = {});

ScenarioResult run_scenario(const ScenarioConfig& cfg, const TraceFn& trace = {});

// Energy response to n random L-inf bounded perturbations of the given
// amplitude; reports the fraction that increased the energy.
ProbeReport perturbation_probe(const EnergyModel& model, const DeformationField& y, int n,
                               double amplitude, unsigned seed);

// Writes report.json, trace.csv (caller-produced), deformed.vtk, state.json
// and cavity.vtk (ship) into cfg.out_dir.
void write_scenario_outputs(const ScenarioConfig& cfg, const ScenarioResult& result);

} // namespace floatelast
