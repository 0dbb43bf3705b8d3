#include "floatelast/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <stdexcept>

namespace floatelast {

namespace {

using nlohmann::ordered_json;

ordered_json energy_json(const EnergyBreakdown& b) {
    ordered_json j;
    j["elastic"] = b.elastic;
    j["hydrostatic"] = b.hydrostatic;
    j["gravity"] = b.gravity;
    j["anchor"] = b.anchor;
    j["penalty"] = b.penalty;
    j["total"] = b.total;
    return j;
}

} // namespace

std::string iso8601_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ordered_json EquilibriumReport::to_json() const {
    ordered_json j;
    ordered_json m;
    m["config_path"] = manifest.config_path;
    m["config_hash"] = manifest.config_hash;
    m["out_dir"] = manifest.out_dir;
    m["tool_version"] = manifest.tool_version;
    m["started_at"] = manifest.started_at;
    m["finished_at"] = manifest.finished_at;
    m["deterministic"] = manifest.deterministic;
    j["manifest"] = m;
    j["scenario"] = to_string(scenario);
    j["status"] = to_string(status);
    j["float_class"] = to_string(float_class);
    j["energy"] = energy_json(energy);
    ordered_json ar;
    ar["signed"] = archimedes.residual;
    ar["normalized"] = archimedes.normalized;
    j["archimedes_residual"] = ar;
    j["submerged_volume"] = submerged_volume;
    j["submerged_fraction"] = submerged_fraction;
    j["mean_J"] = mean_J;
    j["cavity_volume"] = cavity_volume ? ordered_json(*cavity_volume) : ordered_json(nullptr);
    j["water_level"] = water_level ? ordered_json(*water_level) : ordered_json(nullptr);
    if (cn_check) {
        ordered_json cn;
        cn["satisfied"] = cn_check->satisfied;
        cn["slack"] = cn_check->slack;
        cn["error_bound"] = cn_check->error_bound;
        j["cn_check"] = cn;
    } else {
        j["cn_check"] = nullptr;
    }
    ordered_json solver;
    solver["iterations"] = iterations;
    solver["grad_norm"] = grad_norm;
    solver["line_search_failed"] = line_search_failed;
    solver["mean_j_floor_active"] = mean_j_floor_active;
    solver["inextensible_active_nodes"] = inextensible_active_nodes;
    j["solver"] = solver;
    j["wall_time_sec"] = wall_time_sec;

    if (rho_b)
        j["rho_b"] = *rho_b;
    if (translation_derivative)
        j["translation_derivative"] = *translation_derivative;
    if (eta)
        j["eta"] = *eta;
    if (cavity_margin)
        j["cavity_margin"] = *cavity_margin;
    if (reservoir_residual)
        j["reservoir_residual"] = *reservoir_residual;
    if (reference_energy)
        j["reference_energy"] = *reference_energy;
    if (reference_comparison_ok)
        j["reference_comparison_ok"] = *reference_comparison_ok;
    if (probe) {
        ordered_json p;
        p["n"] = probe->n;
        p["amplitude"] = probe->amplitude;
        p["fraction_increased"] = probe->fraction_increased;
        j["probe"] = p;
    }
    if (!continuity.empty()) {
        ordered_json arr = ordered_json::array();
        for (const auto& c : continuity) {
            ordered_json e;
            e["epsilon"] = c.epsilon;
            e["max_symmetric_difference"] = c.max_symmetric_difference;
            e["bound"] = c.bound;
            e["within"] = c.within;
            arr.push_back(e);
        }
        j["continuity_probe"] = arr;
    }
    if (max_anchor_elongation)
        j["max_anchor_elongation"] = *max_anchor_elongation;
    if (cable_taut)
        j["cable_taut"] = *cable_taut;
    if (note)
        j["note"] = *note;
    j["verification"] = ordered_json::object();
    return j;
}

void write_text_atomic(const std::string& path, const std::string& text) {
    std::filesystem::path target(path);
    if (target.has_parent_path())
        std::filesystem::create_directories(target.parent_path());
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << text;
    }
    std::filesystem::rename(tmp, target);
}

void write_report(const EquilibriumReport& report, const std::string& path) {
    write_text_atomic(path, report.to_json().dump(2) + "\n");
}

TraceWriter::TraceWriter(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    out_.open(path);
    if (!out_)
        throw std::runtime_error("cannot write trace file: " + path);
    out_ << "iter,total,elastic,hydro,gravity,anchor,penalty,grad_norm\n";
}

void TraceWriter::row(int iter, const EnergyBreakdown& b, double grad_norm) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", iter, b.total,
                  b.elastic, b.hydrostatic, b.gravity, b.anchor, b.penalty, grad_norm);
    out_ << buf;
}

void TraceWriter::close() {
    out_.close();
}

void write_deformed_vtk(const ReferenceMesh& mesh, const DeformationField& y,
                        const std::string& path) {
    std::string text;
    text.reserve(1 << 20);
    char buf[256];
    auto add = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        text += buf;
    };
    const int dim = mesh.dim;
    text += "# vtk DataFile Version 3.0\ndeformed configuration\nASCII\n"
            "DATASET UNSTRUCTURED_GRID\n";
    add("POINTS %d double\n", mesh.n_nodes());
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        Vec p = y.node(i);
        add("%.17g %.17g %.17g\n", p[0], p[1], dim == 3 ? p[2] : 0.0);
    }
    const int nv = dim + 1;
    add("CELLS %d %d\n", mesh.n_elements(), mesh.n_elements() * (nv + 1));
    for (int e = 0; e < mesh.n_elements(); ++e) {
        auto en = mesh.element_nodes(e);
        text += std::to_string(nv);
        for (int id : en)
            text += " " + std::to_string(id);
        text += "\n";
    }
    add("CELL_TYPES %d\n", mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e)
        text += dim == 3 ? "10\n" : "5\n";
    add("POINT_DATA %d\nVECTORS displacement double\n", mesh.n_nodes());
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        Vec d = y.node(i) - mesh.node_pos(i);
        add("%.17g %.17g %.17g\n", d[0], d[1], dim == 3 ? d[2] : 0.0);
    }
    add("CELL_DATA %d\nSCALARS jacobian double 1\nLOOKUP_TABLE default\n", mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e)
        add("%.17g\n", det(deformation_gradient(mesh, y, e)));
    write_text_atomic(path, text);
}

void write_state(const ScenarioConfig& cfg, const ReferenceMesh& mesh, const DeformationField& y,
                 double h, const std::string& path) {
    nlohmann::ordered_json j;
    j["schema"] = "floatelast-state/1";
    j["config"] = cfg.raw;
    j["mesh"] = nlohmann::json::parse(mesh_to_json_string(mesh));
    j["h"] = h;
    std::vector<double> flat(y.x.data(), y.x.data() + y.x.size());
    j["y"] = flat;
    write_text_atomic(path, j.dump() + "\n");
}

SavedState load_state(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open state file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (!j.contains("schema") || j["schema"] != "floatelast-state/1")
        throw std::runtime_error("state file: unsupported schema");
    SavedState st;
    st.config = parse_config(j["config"],
                             std::filesystem::path(path).parent_path().string());
    st.config.mesh = mesh_from_json_string(j["mesh"].dump());
    st.h = j.value("h", 0.0);
    auto flat = j["y"].get<std::vector<double>>();
    st.y.dim = st.config.mesh.dim;
    st.y.x = Eigen::Map<const Eigen::VectorXd>(flat.data(), Eigen::Index(flat.size()));
    st.y.validate(st.config.mesh);
    return st;
}

} // namespace floatelast
