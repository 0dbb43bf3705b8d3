#include "floatelast/config.hpp"

#include <filesystem>
#include <fstream>

namespace floatelast {

namespace {

using nlohmann::json;

const json* find(const json& doc, const std::string& pointer) {
    const json* cur = &doc;
    std::size_t pos = 1; // skip leading '/'
    if (pointer.empty() || pointer == "/")
        return cur;
    while (pos <= pointer.size()) {
        std::size_t next = pointer.find('/', pos);
        std::string key = pointer.substr(pos, next == std::string::npos ? next : next - pos);
        if (!cur->is_object() || !cur->contains(key))
            return nullptr;
        cur = &(*cur)[key];
        if (next == std::string::npos)
            break;
        pos = next + 1;
    }
    return cur;
}

double require_number(const json& doc, const std::string& ptr) {
    const json* v = find(doc, ptr);
    if (!v)
        throw ConfigError(ptr, "missing required field");
    if (!v->is_number())
        throw ConfigError(ptr, "expected a number");
    return v->get<double>();
}

double number_or(const json& doc, const std::string& ptr, double fallback) {
    const json* v = find(doc, ptr);
    if (!v)
        return fallback;
    if (!v->is_number())
        throw ConfigError(ptr, "expected a number");
    return v->get<double>();
}

int int_or(const json& doc, const std::string& ptr, int fallback) {
    const json* v = find(doc, ptr);
    if (!v)
        return fallback;
    if (!v->is_number_integer())
        throw ConfigError(ptr, "expected an integer");
    return v->get<int>();
}

std::string require_string(const json& doc, const std::string& ptr) {
    const json* v = find(doc, ptr);
    if (!v)
        throw ConfigError(ptr, "missing required field");
    if (!v->is_string())
        throw ConfigError(ptr, "expected a string");
    return v->get<std::string>();
}

std::string string_or(const json& doc, const std::string& ptr, const std::string& fallback) {
    const json* v = find(doc, ptr);
    if (!v)
        return fallback;
    if (!v->is_string())
        throw ConfigError(ptr, "expected a string");
    return v->get<std::string>();
}

Vec vec_at(const json& arr, int dim, const std::string& ptr) {
    if (!arr.is_array() || int(arr.size()) != dim)
        throw ConfigError(ptr, "expected an array of dim numbers");
    Vec v(dim);
    for (int k = 0; k < dim; ++k)
        v[k] = arr[k].get<double>();
    return v;
}

ReferenceMesh parse_mesh(const json& doc, const std::string& base_dir) {
    std::string kind = require_string(doc, "/mesh/kind");
    int dim = int_or(doc, "/mesh/dim", 3);
    if (kind == "file") {
        std::string path = require_string(doc, "/mesh/path");
        std::filesystem::path p(path);
        if (p.is_relative())
            p = std::filesystem::path(base_dir) / p;
        return load_mesh_json(p.string());
    }
    ReferenceMesh mesh;
    if (kind == "box") {
        const json* size = find(doc, "/mesh/size");
        if (!size)
            throw ConfigError("/mesh/size", "missing required field");
        std::vector<double> sz = size->get<std::vector<double>>();
        dim = int(sz.size());
        const json* res = find(doc, "/mesh/res");
        if (!res)
            throw ConfigError("/mesh/res", "missing required field");
        std::vector<int> rs;
        if (res->is_number_integer())
            rs.assign(dim, res->get<int>());
        else
            rs = res->get<std::vector<int>>();
        mesh = build_box(dim, sz, rs);
    } else if (kind == "ball") {
        mesh = build_ball(dim, require_number(doc, "/mesh/radius"),
                          int_or(doc, "/mesh/res", 4));
    } else if (kind == "open_shell") {
        mesh = build_open_shell(dim, require_number(doc, "/mesh/inner_radius"),
                                require_number(doc, "/mesh/thickness"),
                                int_or(doc, "/mesh/res", 6));
    } else {
        throw ConfigError("/mesh/kind", "unknown mesh kind '" + kind + "'");
    }
    // Optional translation of the reference configuration.
    if (const json* shift = find(doc, "/mesh/shift")) {
        Vec s = vec_at(*shift, mesh.dim, "/mesh/shift");
        for (int i = 0; i < mesh.n_nodes(); ++i)
            for (int k = 0; k < mesh.dim; ++k)
                mesh.nodes[std::size_t(i) * mesh.dim + k] += s[k];
        mesh.finalize();
    }
    if (const json* regions = find(doc, "/mesh/regions")) {
        if (!regions->is_array())
            throw ConfigError("/mesh/regions", "expected an array");
        for (std::size_t i = 0; i < regions->size(); ++i) {
            const json& r = (*regions)[i];
            std::string ptr = "/mesh/regions/" + std::to_string(i);
            if (!r.contains("tag") || !r.contains("box"))
                throw ConfigError(ptr, "region needs 'tag' and 'box' [[lo],[hi]]");
            Vec lo = vec_at(r["box"][0], mesh.dim, ptr + "/box/0");
            Vec hi = vec_at(r["box"][1], mesh.dim, ptr + "/box/1");
            tag_region_box(mesh, lo, hi, r["tag"].get<std::string>());
        }
    }
    return mesh;
}

MaterialParams parse_material(const json& doc, int dim) {
    MaterialParams m;
    m.a = number_or(doc, "/material/a", 100.0);
    m.p = number_or(doc, "/material/p", 4.0);
    m.c1 = number_or(doc, "/material/c1", 1000.0);
    m.s = number_or(doc, "/material/s", 2.0);
    m.b = number_or(doc, "/material/b", 500.0);
    std::string mode = string_or(doc, "/material/mode", "compressible");
    if (mode == "compressible")
        m.mode = MaterialParams::Mode::Compressible;
    else if (mode == "incompressible")
        m.mode = MaterialParams::Mode::IncompressiblePenalty;
    else
        throw ConfigError("/material/mode", "expected 'compressible' or 'incompressible'");
    m.kappa = number_or(doc, "/material/kappa", 1e5);
    if (const json* ts = find(doc, "/material/tau_shift"); ts && !ts->is_null())
        m.tau_shift = ts->get<double>();
    try {
        m.validate(dim);
    } catch (const std::exception& e) {
        throw ConfigError("/material", e.what());
    }
    return m;
}

DensityModel parse_density(const json& doc) {
    DensityModel d;
    std::string kind = string_or(doc, "/density/kind", "homogeneous");
    if (kind == "homogeneous") {
        d.kind = DensityModel::Kind::Homogeneous;
        d.rho_s = require_number(doc, "/density/rho_s");
    } else if (kind == "hull_ballast") {
        d.kind = DensityModel::Kind::HullBallast;
        d.rho_h = require_number(doc, "/density/rho_h");
        const json* rb = find(doc, "/density/rho_b");
        if (!rb)
            throw ConfigError("/density/rho_b", "missing required field (number or \"auto\")");
        d.rho_b = rb->is_string() ? -1.0 : rb->get<double>(); // -1: neutral trim, solved later
        if (rb->is_string() && rb->get<std::string>() != "auto")
            throw ConfigError("/density/rho_b", "expected a number or \"auto\"");
    } else if (kind == "wet_dry") {
        d.kind = DensityModel::Kind::WetDry;
        d.rho_w = require_number(doc, "/density/rho_w");
        d.rho_d = require_number(doc, "/density/rho_d");
    } else {
        throw ConfigError("/density/kind", "unknown density kind '" + kind + "'");
    }
    return d;
}

FluidEnvironment parse_fluid(const json& doc, ScenarioKind scenario) {
    FluidEnvironment f;
    f.rho_f = require_number(doc, "/fluid/rho_f");
    f.g = number_or(doc, "/fluid/g", 1.0);
    f.h = number_or(doc, "/fluid/h", 0.0);
    if (find(doc, "/fluid/reservoir")) {
        ReservoirSpec r;
        r.S_area = require_number(doc, "/fluid/reservoir/S_area");
        r.M = require_number(doc, "/fluid/reservoir/M");
        f.reservoir = r;
    } else if (scenario == ScenarioKind::Reservoir) {
        throw ConfigError("/fluid/reservoir", "reservoir scenario needs reservoir geometry");
    }
    try {
        f.validate();
    } catch (const std::exception& e) {
        throw ConfigError("/fluid", e.what());
    }
    return f;
}

AnchorSpec parse_anchor(const json& doc, const ReferenceMesh& mesh) {
    AnchorSpec a;
    a.A = Mat::Identity(mesh.dim, mesh.dim);
    a.b = Vec::Zero(mesh.dim);
    const json* node = find(doc, "/anchor");
    if (!node || node->is_null())
        return a;
    std::string kind = require_string(doc, "/anchor/kind");
    if (kind == "none")
        return a;
    if (kind == "clamped")
        a.kind = AnchorSpec::Kind::Clamped;
    else if (kind == "elastic_boundary")
        a.kind = AnchorSpec::Kind::ElasticBoundary;
    else if (kind == "slack_cable")
        a.kind = AnchorSpec::Kind::SlackCable;
    else if (kind == "inextensible")
        a.kind = AnchorSpec::Kind::Inextensible;
    else
        throw ConfigError("/anchor/kind", "unknown anchor kind '" + kind + "'");

    const json* region = find(doc, "/anchor/region");
    if (!region)
        throw ConfigError("/anchor/region", "missing selection box [[lo],[hi]]");
    Vec lo = vec_at((*region)[0], mesh.dim, "/anchor/region/0");
    Vec hi = vec_at((*region)[1], mesh.dim, "/anchor/region/1");
    if (a.kind == AnchorSpec::Kind::Clamped || a.kind == AnchorSpec::Kind::Inextensible)
        a.nodes = mesh.nodes_in_box(lo, hi);
    else
        a.facets = mesh.facets_in_box(lo, hi);

    if (const json* yd = find(doc, "/anchor/y_d"); yd && !yd->is_null()) {
        if (yd->contains("translate"))
            a.b = vec_at((*yd)["translate"], mesh.dim, "/anchor/y_d/translate");
        if (yd->contains("A")) {
            const json& A = (*yd)["A"];
            for (int r = 0; r < mesh.dim; ++r)
                for (int c = 0; c < mesh.dim; ++c)
                    a.A(r, c) = A[r][c].get<double>();
        }
    }
    a.c3 = number_or(doc, "/anchor/c3", 1.0);
    a.r = number_or(doc, "/anchor/r", 2.0);
    a.lambda = number_or(doc, "/anchor/lambda", 0.0);
    try {
        a.validate(mesh);
    } catch (const std::exception& e) {
        throw ConfigError("/anchor", e.what());
    }
    return a;
}

SolveOptions parse_solver(const json& doc) {
    SolveOptions s;
    s.max_iters = int_or(doc, "/solver/max_iters", s.max_iters);
    s.grad_tol = number_or(doc, "/solver/grad_tol", s.grad_tol);
    s.initial_step = number_or(doc, "/solver/initial_step", s.initial_step);
    s.backtrack = number_or(doc, "/solver/backtrack", s.backtrack);
    s.armijo = number_or(doc, "/solver/armijo", s.armijo);
    s.sink_depth_factor = number_or(doc, "/solver/sink_depth_factor", s.sink_depth_factor);
    s.descent_tol_scale = number_or(doc, "/solver/descent_tol_scale", s.descent_tol_scale);
    if (const json* ks = find(doc, "/solver/kappa_schedule")) {
        if (!ks->is_array())
            throw ConfigError("/solver/kappa_schedule", "expected an array of numbers");
        s.kappa_schedule = ks->get<std::vector<double>>();
    }
    std::string strategy = string_or(doc, "/solver/strategy", "lbfgs");
    if (strategy == "lbfgs")
        s.strategy = SolveOptions::Strategy::Lbfgs;
    else if (strategy == "gd")
        s.strategy = SolveOptions::Strategy::GradientDescent;
    else
        throw ConfigError("/solver/strategy", "expected 'lbfgs' or 'gd'");
    s.mean_j_weight = number_or(doc, "/solver/mean_j_weight", s.mean_j_weight);
    try {
        s.validate();
    } catch (const std::exception& e) {
        throw ConfigError("/solver", e.what());
    }
    return s;
}

} // namespace

const char* to_string(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::FreeFloat: return "free_float";
    case ScenarioKind::CompressibleLocal: return "compressible_local";
    case ScenarioKind::Submarine: return "submarine";
    case ScenarioKind::Anchored: return "anchored";
    case ScenarioKind::Reservoir: return "reservoir";
    case ScenarioKind::Ship: return "ship";
    }
    return "?";
}

ScenarioConfig parse_config(const nlohmann::json& doc, const std::string& base_dir) {
    ScenarioConfig cfg;
    std::string schema = require_string(doc, "/schema");
    if (schema != "floatelast-config/1")
        throw ConfigError("/schema", "unsupported schema '" + schema + "'");
    std::string scenario = require_string(doc, "/scenario");
    if (scenario == "free_float")
        cfg.scenario = ScenarioKind::FreeFloat;
    else if (scenario == "compressible_local")
        cfg.scenario = ScenarioKind::CompressibleLocal;
    else if (scenario == "submarine")
        cfg.scenario = ScenarioKind::Submarine;
    else if (scenario == "anchored")
        cfg.scenario = ScenarioKind::Anchored;
    else if (scenario == "reservoir")
        cfg.scenario = ScenarioKind::Reservoir;
    else if (scenario == "ship")
        cfg.scenario = ScenarioKind::Ship;
    else
        throw ConfigError("/scenario", "unknown scenario '" + scenario + "'");

    cfg.mesh = parse_mesh(doc, base_dir);
    cfg.material = parse_material(doc, cfg.mesh.dim);
    cfg.density = parse_density(doc);
    cfg.fluid = parse_fluid(doc, cfg.scenario);
    cfg.anchor = parse_anchor(doc, cfg.mesh);
    cfg.solver = parse_solver(doc);

    cfg.tau = number_or(doc, "/params/tau", cfg.tau);
    cfg.epsilon0 = number_or(doc, "/params/epsilon0", cfg.epsilon0);
    cfg.eta_margin = number_or(doc, "/params/eta_margin", cfg.eta_margin);
    cfg.r_test = number_or(doc, "/params/r_test", cfg.r_test);
    cfg.n_probe = int_or(doc, "/params/n_probe", cfg.n_probe);
    cfg.grid_res = int_or(doc, "/params/grid_res", cfg.grid_res);
    cfg.seed = unsigned(int_or(doc, "/params/seed", int(cfg.seed)));
    cfg.initial_placement = string_or(doc, "/params/initial_placement", cfg.initial_placement);
    cfg.immersion_margin = number_or(doc, "/params/immersion_margin", cfg.immersion_margin);
    cfg.perturb_amplitude = number_or(doc, "/params/perturb_amplitude", cfg.perturb_amplitude);
    cfg.out_dir = string_or(doc, "/output/dir", cfg.out_dir);

    // Scenario-specific requirements.
    if (cfg.scenario == ScenarioKind::FreeFloat || cfg.scenario == ScenarioKind::Ship) {
        if (cfg.material.mode != MaterialParams::Mode::IncompressiblePenalty)
            throw ConfigError("/material/mode", std::string(to_string(cfg.scenario))
                                                    + " scenario needs the incompressible material");
    }
    if (cfg.scenario == ScenarioKind::CompressibleLocal) {
        if (cfg.material.mode != MaterialParams::Mode::Compressible)
            throw ConfigError("/material/mode",
                              "compressible_local scenario needs the compressible material");
        if (cfg.density.kind != DensityModel::Kind::Homogeneous)
            throw ConfigError("/density/kind", "compressible_local needs a homogeneous density");
        double ratio = cfg.density.rho_s / cfg.fluid.rho_f;
        if (!(cfg.tau > ratio && cfg.tau < 1.0))
            throw ConfigError("/params/tau", "tau must lie in (rho_s/rho_f, 1)");
    }
    if (cfg.scenario == ScenarioKind::Submarine
        && cfg.density.kind != DensityModel::Kind::HullBallast)
        throw ConfigError("/density/kind", "submarine scenario needs hull_ballast density");
    if (cfg.scenario == ScenarioKind::Anchored && !cfg.anchor.active())
        throw ConfigError("/anchor/kind", "anchored scenario needs an anchor");

    cfg.raw = doc;
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("/", "cannot open config file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        throw ConfigError("/", std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc, std::filesystem::path(path).parent_path().string());
}

std::string config_hash(const nlohmann::json& doc) {
    std::string canonical = doc.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace floatelast
