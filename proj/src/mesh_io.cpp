#include "floatelast/mesh.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace floatelast {

// Mesh file schema, zero-based indices:
// { "dim": 2|3, "nodes": [[x,...]], "elements": [[i,...]],
//   "boundary": [[i,...]], "regions": ["tag", ...] }

ReferenceMesh mesh_from_json_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ReferenceMesh mesh;
    if (!j.contains("dim") || !j["dim"].is_number_integer())
        throw std::runtime_error("mesh json: missing integer field /dim");
    mesh.dim = j["dim"].get<int>();
    if (mesh.dim != 2 && mesh.dim != 3)
        throw std::runtime_error("mesh json: /dim must be 2 or 3");
    for (const char* key : {"nodes", "elements", "boundary"})
        if (!j.contains(key) || !j[key].is_array())
            throw std::runtime_error(std::string("mesh json: missing array field /") + key);
    for (auto& row : j["nodes"]) {
        if (!row.is_array() || int(row.size()) != mesh.dim)
            throw std::runtime_error("mesh json: each node needs dim coordinates");
        for (auto& v : row)
            mesh.nodes.push_back(v.get<double>());
    }
    for (auto& row : j["elements"]) {
        if (!row.is_array() || int(row.size()) != mesh.dim + 1)
            throw std::runtime_error("mesh json: each element needs dim+1 node ids");
        for (auto& v : row)
            mesh.elements.push_back(v.get<int>());
    }
    for (auto& row : j["boundary"]) {
        if (!row.is_array() || int(row.size()) != mesh.dim)
            throw std::runtime_error("mesh json: each boundary facet needs dim node ids");
        for (auto& v : row)
            mesh.boundary.push_back(v.get<int>());
    }
    if (j.contains("regions"))
        mesh.region_tags = j["regions"].get<std::vector<std::string>>();
    mesh.finalize();
    return mesh;
}

std::string mesh_to_json_string(const ReferenceMesh& mesh) {
    nlohmann::ordered_json j;
    j["dim"] = mesh.dim;
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < mesh.dim; ++k)
            row.push_back(mesh.nodes[std::size_t(i) * mesh.dim + k]);
        nodes.push_back(row);
    }
    auto& elems = j["elements"] = nlohmann::json::array();
    for (int e = 0; e < mesh.n_elements(); ++e)
        elems.push_back(std::vector<int>(mesh.element_nodes(e).begin(),
                                         mesh.element_nodes(e).end()));
    auto& bnd = j["boundary"] = nlohmann::json::array();
    for (int f = 0; f < mesh.n_facets(); ++f)
        bnd.push_back(std::vector<int>(mesh.facet_nodes(f).begin(),
                                       mesh.facet_nodes(f).end()));
    j["regions"] = mesh.region_tags;
    return j.dump();
}

ReferenceMesh load_mesh_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open mesh file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return mesh_from_json_string(text);
}

void save_mesh_json(const ReferenceMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write mesh file: " + path);
    out << mesh_to_json_string(mesh) << "\n";
}

} // namespace floatelast
