#include "floatelast/scenarios.hpp"

#include "floatelast/rng.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

namespace floatelast {

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

double vertical_extent(const ReferenceMesh& mesh, const DeformationField& y, double* top = nullptr,
                       double* bottom = nullptr) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < y.n_nodes(); ++i) {
        lo = std::min(lo, y.vertical(i));
        hi = std::max(hi, y.vertical(i));
    }
    (void)mesh;
    if (top)
        *top = hi;
    if (bottom)
        *bottom = lo;
    return hi - lo;
}

void translate_vertical(DeformationField& y, double t) {
    for (int i = 0; i < y.n_nodes(); ++i)
        y.x[std::size_t(i) * y.dim + y.dim - 1] += t;
}

std::vector<double> effective_kappa_schedule(const ScenarioConfig& cfg) {
    if (!cfg.solver.kappa_schedule.empty()
        || cfg.material.mode != MaterialParams::Mode::IncompressiblePenalty)
        return cfg.solver.kappa_schedule;
    double k = cfg.material.kappa;
    return {1e-2 * k, 1e-1 * k, k};
}

void fill_common(EquilibriumReport& rep, EnergyModel& model, const DeformationField& y,
                 const SolveResult& sr, const ScenarioConfig& cfg, double cavity_volume = 0) {
    rep.scenario = cfg.scenario;
    rep.status = sr.status;
    rep.iterations = sr.iterations;
    rep.grad_norm = sr.grad_norm;
    rep.line_search_failed = sr.line_search_failed;
    rep.mean_j_floor_active = sr.mean_j_floor_active;
    rep.inextensible_active_nodes = sr.inextensible_active_nodes;
    rep.float_class = float_classify(model.mesh(), y, model.waterline());
    rep.energy = model.energy(y);
    rep.archimedes = archimedes_check(model.mesh(), y, model.density(), model.fluid(),
                                      model.waterline(), cavity_volume);
    rep.submerged_volume = rep.archimedes.submerged_volume;
    rep.submerged_fraction = rep.submerged_volume / model.mesh().total_volume;
    rep.mean_J = mean_jacobian(model.mesh(), y);
    try {
        rep.cn_check = ciarlet_necas_check(model.mesh(), y, cfg.effective_grid_res());
    } catch (const std::exception&) {
        rep.cn_check.reset(); // inverted elements: diagnostic unavailable
    }
}

} // namespace

DeformationField initial_state(const ScenarioConfig& cfg, const std::string& fallback) {
    DeformationField y = DeformationField::identity(cfg.mesh);
    std::string placement =
        cfg.initial_placement == "default" ? fallback : cfg.initial_placement;
    const double h = cfg.fluid.h;
    if (placement == "waterline_barycenter") {
        double b = barycenter(cfg.mesh, y)[cfg.mesh.dim - 1];
        translate_vertical(y, h - b);
    } else if (placement == "submerged") {
        double top;
        double height = vertical_extent(cfg.mesh, y, &top);
        translate_vertical(y, h - cfg.immersion_margin * height - top);
    } else if (placement != "identity") {
        throw ConfigError("/params/initial_placement",
                          "expected waterline_barycenter | submerged | identity");
    }
    if (cfg.perturb_amplitude > 0) {
        Rng rng(cfg.seed);
        double amp = cfg.perturb_amplitude * diameter(cfg.mesh, y);
        y.x += rng.field(y.x.size(), -amp, amp);
    }
    return y;
}

ProbeReport perturbation_probe(const EnergyModel& model, const DeformationField& y, int n,
                               double amplitude, unsigned seed) {
    ProbeReport rep;
    rep.n = n;
    rep.amplitude = amplitude;
    const double base = model.total_energy(y);
    Rng rng(seed);
    int increased = 0;
    for (int t = 0; t < n; ++t) {
        Eigen::VectorXd d = rng.field(y.x.size(), -1.0, 1.0);
        double linf = d.cwiseAbs().maxCoeff();
        d *= amplitude / std::max(linf, 1e-300);
        DeformationField yp = y;
        yp.x += d;
        double e = model.total_energy(yp); // +inf counts as an increase
        if (e > base)
            ++increased;
    }
    rep.fraction_increased = double(increased) / std::max(1, n);
    return rep;
}

ScenarioResult run_free_float(const ScenarioConfig& cfg, const TraceFn& trace) {
    Timer timer;
    EnergyModel model(Variant::Basic, cfg.mesh, cfg.material, cfg.density, cfg.fluid, cfg.anchor);
    DeformationField y0 = initial_state(cfg, "waterline_barycenter");
    SolveOptions opts = cfg.solver;
    opts.kappa_schedule = effective_kappa_schedule(cfg);
    Constraints constraints = Constraints::from_anchor(cfg.anchor, cfg.mesh, y0);
    SolveResult sr = minimize_scheduled(model, y0, opts, constraints, trace);

    ScenarioResult out;
    out.y = sr.y;
    out.h = model.waterline();
    fill_common(out.report, model, sr.y, sr, cfg);
    out.report.wall_time_sec = timer.seconds();
    return out;
}

ScenarioResult run_compressible_local(const ScenarioConfig& cfg, const TraceFn& trace) {
    Timer timer;
    EnergyModel model(Variant::SplitCompressible, cfg.mesh, cfg.material, cfg.density, cfg.fluid,
                      cfg.anchor);
    DeformationField y0 = initial_state(cfg, "waterline_barycenter");
    SolveOptions opts = cfg.solver;
    opts.mean_j_floor = cfg.tau;
    if (opts.kappa_schedule.empty())
        opts.kappa_schedule = {1.0, 1.0, 1.0}; // three floor-weight ramp stages
    Constraints constraints = Constraints::from_anchor(cfg.anchor, cfg.mesh, y0);
    SolveResult sr = minimize_scheduled(model, y0, opts, constraints, trace);

    ScenarioResult out;
    out.y = sr.y;
    out.h = model.waterline();
    fill_common(out.report, model, sr.y, sr, cfg);

    // Comparison against the translated-identity reference and the
    // perturbation probe act on the raw split energy (floor weight off).
    model.set_mean_jacobian_floor(cfg.tau, 0.0);
    auto ref = translated_identity_energy_check(cfg.mesh, cfg.material, cfg.density, cfg.fluid);
    out.report.reference_energy = ref.closed_form;
    out.report.reference_comparison_ok = model.total_energy(sr.y) <= ref.closed_form + 1e-12;
    out.report.probe =
        perturbation_probe(model, sr.y, cfg.n_probe, cfg.r_test, cfg.seed + 1);
    out.report.wall_time_sec = timer.seconds();
    return out;
}

ScenarioResult run_submarine(const ScenarioConfig& cfg, const TraceFn& trace) {
    (void)trace;
    Timer timer;
    const double vol_h = cfg.mesh.region_volume("hull");
    const double vol_b = cfg.mesh.region_volume("ballast");
    if (!(vol_b > 0))
        throw std::runtime_error("submarine: mesh has no 'ballast' region");

    DensityModel density = cfg.density;
    ScenarioResult out;
    if (density.rho_b < 0) { // "auto": neutral trim from the ballast balance
        density.rho_b =
            (cfg.fluid.rho_f * cfg.mesh.total_volume - density.rho_h * vol_h) / vol_b;
        out.report.rho_b = density.rho_b;
        if (density.rho_b < 0) {
            out.report.note = "infeasible neutral trim: hull alone outweighs the displaced fluid";
            out.report.scenario = cfg.scenario;
            out.report.status = SolveStatus::MaxIters;
            out.y = initial_state(cfg, "submerged");
            out.report.wall_time_sec = timer.seconds();
            return out;
        }
    } else {
        out.report.rho_b = density.rho_b;
    }

    EnergyModel model(Variant::Submarine, cfg.mesh, cfg.material, density, cfg.fluid);
    DeformationField y = initial_state(cfg, "submerged");

    // Neutral floating: the energy is insensitive to the immersion depth as
    // long as the solid stays fully immersed.
    double height = vertical_extent(cfg.mesh, y);
    double dt = 0.5 * cfg.immersion_margin * height;
    DeformationField y2 = y;
    translate_vertical(y2, -dt);
    double e1 = model.total_energy(y);
    double e2 = model.total_energy(y2);
    SolveResult sr;
    sr.y = y;
    sr.status = SolveStatus::Converged;
    sr.iterations = 0;
    Eigen::VectorXd g;
    model.gradient(y, g);
    sr.grad_norm = g.norm();

    out.y = y;
    out.h = model.waterline();
    fill_common(out.report, model, y, sr, cfg);
    out.report.translation_derivative = (e1 - e2) / dt;
    out.report.wall_time_sec = timer.seconds();
    return out;
}

ScenarioResult run_anchored(const ScenarioConfig& cfg, const TraceFn& trace) {
    Timer timer;
    EnergyModel model(Variant::Basic, cfg.mesh, cfg.material, cfg.density, cfg.fluid, cfg.anchor);
    DeformationField y0 = initial_state(cfg, "identity");
    SolveOptions opts = cfg.solver;
    opts.kappa_schedule = effective_kappa_schedule(cfg);
    Constraints constraints = Constraints::from_anchor(cfg.anchor, cfg.mesh, y0);
    SolveResult sr = minimize_scheduled(model, y0, opts, constraints, trace);

    ScenarioResult out;
    out.y = sr.y;
    out.h = model.waterline();
    fill_common(out.report, model, sr.y, sr, cfg);

    // Anchor elongation report.
    double max_elong = 0;
    auto elong_node = [&](int i) {
        Vec d = sr.y.node(i) - cfg.anchor.target(cfg.mesh.node_pos(i));
        max_elong = std::max(max_elong, d.norm());
    };
    if (cfg.anchor.kind == AnchorSpec::Kind::Clamped
        || cfg.anchor.kind == AnchorSpec::Kind::Inextensible) {
        for (int i : cfg.anchor.nodes)
            elong_node(i);
    } else if (cfg.anchor.active()) {
        for (int f : cfg.anchor.facets)
            for (int i : cfg.mesh.facet_nodes(f))
                elong_node(i);
    }
    out.report.max_anchor_elongation = max_elong;
    if (cfg.anchor.kind == AnchorSpec::Kind::SlackCable
        || cfg.anchor.kind == AnchorSpec::Kind::Inextensible)
        out.report.cable_taut = max_elong >= cfg.anchor.lambda * (1.0 - 1e-6);
    out.report.wall_time_sec = timer.seconds();
    return out;
}

ScenarioResult run_reservoir(const ScenarioConfig& cfg, const TraceFn& trace) {
    Timer timer;
    EnergyModel model(Variant::Reservoir, cfg.mesh, cfg.material, cfg.density, cfg.fluid,
                      cfg.anchor);
    const ReservoirSpec res = *cfg.fluid.reservoir;
    DeformationField y = initial_state(cfg, "waterline_barycenter");
    Constraints constraints = Constraints::from_anchor(cfg.anchor, cfg.mesh, y);

    const double height = vertical_extent(cfg.mesh, y);
    const double tol_h = 1e-8 * height;

    auto conservation = [&](const DeformationField& state, double h) {
        // M S + V_sub - (M + h) S, decreasing in h while the waterplane is
        // smaller than S.
        return submerged_volume(cfg.mesh, state, h) - h * res.S_area;
    };
    auto solve_level = [&](const DeformationField& state) {
        double lo = 0.0;
        double f_lo = conservation(state, lo);
        if (f_lo <= 0)
            return 0.0; // body (at most) touches the rest level from above
        double jac_vol = 0;
        for (int e = 0; e < cfg.mesh.n_elements(); ++e)
            jac_vol += cfg.mesh.elem_volume[e]
                       * det(deformation_gradient(cfg.mesh, state, e));
        double hi = jac_vol / res.S_area * 1.001 + 1e-12;
        if (conservation(state, hi) > 0)
            throw std::runtime_error("reservoir: failed to bracket the water level");
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            double f = conservation(state, mid);
            if (std::abs(f) <= 1e-9 * res.S_area || hi - lo <= 1e-15 * std::max(1.0, hi))
                return mid;
            (f > 0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };

    SolveOptions opts = cfg.solver;
    opts.kappa_schedule = effective_kappa_schedule(cfg);
    SolveResult sr;
    double h = std::max(0.0, cfg.fluid.h);
    bool first = true;
    for (int outer = 0; outer < 50; ++outer) {
        // Wall clearance precondition: the reservoir cross-section must
        // exceed the deformed body's horizontal extent.
        Vec lo = y.node(0), hi_ = y.node(0);
        for (int i = 1; i < y.n_nodes(); ++i) {
            lo = lo.cwiseMin(y.node(i));
            hi_ = hi_.cwiseMax(y.node(i));
        }
        double plan_area = 1;
        for (int k = 0; k < cfg.mesh.dim - 1; ++k)
            plan_area *= hi_[k] - lo[k];
        if (!(res.S_area > plan_area))
            throw std::runtime_error(
                "reservoir: cross-section S_area must exceed the body's horizontal extent");

        model.set_waterline(h);
        SolveOptions stage_opts = opts;
        if (!first)
            stage_opts.kappa_schedule = {opts.kappa_schedule.empty()
                                             ? model.incompressibility_weight()
                                             : opts.kappa_schedule.back()};
        sr = minimize_scheduled(model, y, stage_opts, constraints, first ? trace : TraceFn{});
        y = sr.y;
        first = false;
        if (sr.status == SolveStatus::UnboundedDescent)
            break;
        double h_new = solve_level(y);
        double dh = std::abs(h_new - h);
        h = h_new;
        if (dh <= tol_h && sr.status == SolveStatus::Converged)
            break;
    }
    model.set_waterline(h);

    ScenarioResult out;
    out.y = y;
    out.h = h;
    fill_common(out.report, model, y, sr, cfg);
    out.report.water_level = h;
    out.report.reservoir_residual = conservation(y, h);
    out.report.wall_time_sec = timer.seconds();
    return out;
}

ScenarioResult run_ship(const ScenarioConfig& cfg, const TraceFn& trace) {
    Timer timer;
    EnergyModel model(Variant::Ship, cfg.mesh, cfg.material, cfg.density, cfg.fluid, cfg.anchor);
    model.set_grid_res(cfg.effective_grid_res());
    const double omega = cfg.mesh.total_volume;
    const double eta =
        (cfg.density.rho_s - cfg.fluid.rho_f) / cfg.fluid.rho_f * omega;

    DeformationField y0 = initial_state(cfg, "waterline_barycenter");
    SolveOptions opts = cfg.solver;
    opts.kappa_schedule = effective_kappa_schedule(cfg);
    Constraints constraints = Constraints::from_anchor(cfg.anchor, cfg.mesh, y0);
    SolveResult sr = minimize_scheduled(model, y0, opts, constraints, trace);
    DeformationField y = sr.y;

    // Grid-limited vertical trim: bisect the net force along uniform vertical
    // translations to land within the cavity quantization of the balance.
    if (sr.status != SolveStatus::UnboundedDescent
        && float_classify(cfg.mesh, y, model.waterline()) == FloatClass::Floating) {
        model.refresh_ship_cache(y);
        double cell = model.ship_cache()->cavity.grid.cell;
        auto net_force = [&](double t) {
            DeformationField yt = y;
            translate_vertical(yt, t);
            CavitySet cav = cavity_set(cfg.mesh, yt, model.waterline(), cfg.effective_grid_res());
            return cfg.fluid.g * cfg.fluid.rho_f
                       * (submerged_volume(cfg.mesh, yt, model.waterline()) + cav.volume)
                   - model.solid_weight(yt);
        };
        double lo = -2 * cell, hi = 2 * cell;
        double f_lo = net_force(lo), f_hi = net_force(hi);
        int widen = 0;
        while (f_lo * f_hi > 0 && widen++ < 4) {
            lo *= 2;
            hi *= 2;
            f_lo = net_force(lo);
            f_hi = net_force(hi);
        }
        if (f_lo > 0 && f_hi < 0) { // force decreases with upward translation
            double best_t = 0, best_f = std::abs(net_force(0.0));
            for (int it = 0; it < 30; ++it) {
                double mid = 0.5 * (lo + hi);
                double f = net_force(mid);
                if (std::abs(f) < best_f) {
                    best_f = std::abs(f);
                    best_t = mid;
                }
                (f > 0 ? lo : hi) = mid;
            }
            DeformationField y_trim = y;
            translate_vertical(y_trim, best_t);
            model.refresh_ship_cache(y_trim);
            Eigen::VectorXd g;
            model.gradient(y_trim, g);
            if (g.norm() <= opts.grad_tol) {
                y = y_trim;
                sr.status = SolveStatus::Converged;
                sr.grad_norm = g.norm();
                sr.y = y;
            } else if (sr.status != SolveStatus::Converged) {
                y = y_trim; // better balance; unconverged status stays honest
                sr.grad_norm = g.norm();
                sr.y = y;
            }
        }
    }

    model.refresh_ship_cache(y);
    const CavitySet& cavity = model.ship_cache()->cavity;

    ScenarioResult out;
    out.y = y;
    out.h = model.waterline();
    fill_common(out.report, model, y, sr, cfg, cavity.volume);
    out.report.cavity_volume = cavity.volume;
    out.report.eta = eta;
    out.report.cavity_margin = cavity.volume - eta;

    // Continuity monitor: random vertical perturbations of size epsilon must
    // move the cavity by no more than sqrt(epsilon).
    if (sr.status == SolveStatus::Converged) {
        Rng rng(cfg.seed + 7);
        bool all_within = true;
        for (double eps : {cfg.epsilon0 / 4, cfg.epsilon0 / 2, cfg.epsilon0}) {
            ContinuityProbe probe;
            probe.epsilon = eps;
            probe.bound = std::sqrt(eps);
            for (int t = 0; t < 8; ++t) {
                DeformationField yp = y;
                Eigen::VectorXd d = Eigen::VectorXd::Zero(y.x.size());
                for (int i = 0; i < y.n_nodes(); ++i)
                    d[std::size_t(i) * y.dim + y.dim - 1] = rng.uniform(-1.0, 1.0);
                double linf = d.cwiseAbs().maxCoeff();
                yp.x += d * (eps / std::max(linf, 1e-300));
                CavitySet cav =
                    cavity_set_on_grid(cavity.grid, cfg.mesh, yp, model.waterline());
                probe.max_symmetric_difference = std::max(
                    probe.max_symmetric_difference, symmetric_difference_volume(cavity, cav));
            }
            probe.within = probe.max_symmetric_difference <= probe.bound;
            all_within = all_within && probe.within;
            out.report.continuity.push_back(probe);
        }
        if (!all_within)
            out.report.note =
                "equilibrium found, local minimality unverified - configuration near the "
                "barely-floating regime";
    }
    out.report.wall_time_sec = timer.seconds();
    return out;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const TraceFn& trace) {
    switch (cfg.scenario) {
    case ScenarioKind::FreeFloat: return run_free_float(cfg, trace);
    case ScenarioKind::CompressibleLocal: return run_compressible_local(cfg, trace);
    case ScenarioKind::Submarine: return run_submarine(cfg, trace);
    case ScenarioKind::Anchored: return run_anchored(cfg, trace);
    case ScenarioKind::Reservoir: return run_reservoir(cfg, trace);
    case ScenarioKind::Ship: return run_ship(cfg, trace);
    }
    throw std::logic_error("unknown scenario");
}

void write_scenario_outputs(const ScenarioConfig& cfg, const ScenarioResult& result) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    write_report(result.report, (fs::path(cfg.out_dir) / "report.json").string());
    write_deformed_vtk(cfg.mesh, result.y, (fs::path(cfg.out_dir) / "deformed.vtk").string());
    write_state(cfg, cfg.mesh, result.y, result.h,
                (fs::path(cfg.out_dir) / "state.json").string());
    if (cfg.scenario == ScenarioKind::Ship) {
        CavitySet cav = cavity_set(cfg.mesh, result.y, result.h, cfg.effective_grid_res());
        write_grid_vtk(cav.grid, (fs::path(cfg.out_dir) / "cavity.vtk").string());
    }
}

} // namespace floatelast
