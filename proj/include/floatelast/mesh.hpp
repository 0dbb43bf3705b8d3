#pragma once

#include "floatelast/core.hpp"

#include <span>
#include <string>
#include <vector>

namespace floatelast {

/// Simplicial reference configuration: nodes, positively oriented elements,
/// outward-oriented boundary facets and per-element region tags. Immutable
/// value data once finalize() has run.
struct ReferenceMesh {
    int dim = 3;
    std::vector<double> nodes;             // flat, dim doubles per node
    std::vector<int> elements;             // flat, dim+1 ids per element
    std::vector<int> boundary;             // flat, dim ids per facet
    std::vector<std::string> region_tags;  // one per element, default "body"

    // Derived quantities, filled by finalize().
    std::vector<double> elem_volume;
    std::vector<double> basis_grads;       // per element, dim x (dim+1), column-major per node
    std::vector<int> boundary_owner;       // owning element per facet
    std::vector<double> facet_area;        // reference measure per facet
    std::vector<double> facet_normal;      // flat, unit outward reference normal
    std::vector<double> lumped_volume;     // per node
    double total_volume = 0;

    int n_nodes() const { return int(nodes.size()) / dim; }
    int n_elements() const { return int(elements.size()) / (dim + 1); }
    int n_facets() const { return int(boundary.size()) / dim; }

    Vec node_pos(int i) const {
        return Eigen::Map<const Eigen::VectorXd>(nodes.data() + std::size_t(i) * dim, dim);
    }
    std::span<const int> element_nodes(int e) const {
        return {elements.data() + std::size_t(e) * (dim + 1), std::size_t(dim + 1)};
    }
    std::span<const int> facet_nodes(int f) const {
        return {boundary.data() + std::size_t(f) * dim, std::size_t(dim)};
    }
    // Gradient of P1 basis function k of element e.
    Vec basis_grad(int e, int k) const {
        return Eigen::Map<const Eigen::VectorXd>(
            basis_grads.data() + (std::size_t(e) * (dim + 1) + k) * dim, dim);
    }
    Vec facet_unit_normal(int f) const {
        return Eigen::Map<const Eigen::VectorXd>(facet_normal.data() + std::size_t(f) * dim, dim);
    }

    double region_volume(const std::string& tag) const;
    std::vector<int> elements_in_box(const Vec& lo, const Vec& hi) const; // by centroid
    std::vector<int> nodes_in_box(const Vec& lo, const Vec& hi) const;
    std::vector<int> facets_in_box(const Vec& lo, const Vec& hi) const;   // by centroid

    // Computes derived data and validates all structural invariants
    // (positive volumes, exact boundary coverage, outward orientation).
    // Throws std::runtime_error with a description on violation.
    void finalize();
};

/// Nodal positions of the deformed configuration, stored node-major.
struct DeformationField {
    int dim = 3;
    Eigen::VectorXd x;

    int n_nodes() const { return int(x.size()) / dim; }
    Vec node(int i) const { return x.segment(std::size_t(i) * dim, dim); }
    void set_node(int i, const Vec& p) { x.segment(std::size_t(i) * dim, dim) = p; }
    double vertical(int i) const { return x[std::size_t(i) * dim + dim - 1]; }

    static DeformationField identity(const ReferenceMesh& mesh);
    void validate(const ReferenceMesh& mesh) const; // size + finiteness
};

struct ElementKinematics {
    Mat F;
    double J = 0;
    Mat cof;
};

enum class FloatClass { Floating, BarelyFloating, FullyImmersed, NotImmersed };
const char* to_string(FloatClass c);

ElementKinematics element_kinematics(const ReferenceMesh& mesh, const DeformationField& y, int e);
Mat deformation_gradient(const ReferenceMesh& mesh, const DeformationField& y, int e);

Vec barycenter(const ReferenceMesh& mesh, const DeformationField& y);
double diameter(const ReferenceMesh& mesh, const DeformationField& y);
double mean_jacobian(const ReferenceMesh& mesh, const DeformationField& y);
FloatClass float_classify(const ReferenceMesh& mesh, const DeformationField& y, double h);

// Primitive generators. Box cells and mapped grid cells are split into
// simplices with the Kuhn pattern, which is face-compatible across cells.
ReferenceMesh build_box(int dim, const std::vector<double>& size, const std::vector<int>& res);
ReferenceMesh build_ball(int dim, double radius, int res);
// Half-shell bowl between inner_radius and inner_radius + thickness, rim in
// the plane {x_v = 0}, opening upward.
ReferenceMesh build_open_shell(int dim, double inner_radius, double thickness, int res);

void tag_region_box(ReferenceMesh& mesh, const Vec& lo, const Vec& hi, const std::string& tag);

ReferenceMesh load_mesh_json(const std::string& path);
void save_mesh_json(const ReferenceMesh& mesh, const std::string& path);
std::string mesh_to_json_string(const ReferenceMesh& mesh);
ReferenceMesh mesh_from_json_string(const std::string& text);

} // namespace floatelast
