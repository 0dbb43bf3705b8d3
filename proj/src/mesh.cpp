#include "floatelast/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace floatelast {

namespace {

double simplex_volume(int dim, const Mat& edges) {
    double d = det(edges);
    double fact = (dim == 2) ? 2.0 : 6.0;
    if (dim == 1)
        fact = 1.0;
    return d / fact;
}

} // namespace

const char* to_string(FloatClass c) {
    switch (c) {
    case FloatClass::Floating: return "floating";
    case FloatClass::BarelyFloating: return "barely_floating";
    case FloatClass::FullyImmersed: return "fully_immersed";
    case FloatClass::NotImmersed: return "not_immersed";
    }
    return "?";
}

void ReferenceMesh::finalize() {
    if (dim != 2 && dim != 3)
        throw std::runtime_error("mesh: dim must be 2 or 3");
    const int nv = dim + 1;
    if (nodes.empty() || nodes.size() % dim != 0)
        throw std::runtime_error("mesh: node array size not a multiple of dim");
    if (elements.empty() || elements.size() % nv != 0)
        throw std::runtime_error("mesh: element array size not a multiple of dim+1");
    if (boundary.size() % dim != 0)
        throw std::runtime_error("mesh: boundary array size not a multiple of dim");
    const int nn = n_nodes(), ne = n_elements(), nf = n_facets();
    for (int id : elements)
        if (id < 0 || id >= nn)
            throw std::runtime_error("mesh: element node id out of range");
    for (int id : boundary)
        if (id < 0 || id >= nn)
            throw std::runtime_error("mesh: boundary node id out of range");
    if (region_tags.empty())
        region_tags.assign(ne, "body");
    if (int(region_tags.size()) != ne)
        throw std::runtime_error("mesh: region tag count does not match element count");

    elem_volume.assign(ne, 0.0);
    basis_grads.assign(std::size_t(ne) * nv * dim, 0.0);
    lumped_volume.assign(nn, 0.0);
    total_volume = 0;

    for (int e = 0; e < ne; ++e) {
        auto en = element_nodes(e);
        Mat edges(dim, dim);
        Vec x0 = node_pos(en[0]);
        for (int k = 1; k < nv; ++k)
            edges.col(k - 1) = node_pos(en[k]) - x0;
        double vol = simplex_volume(dim, edges);
        if (!(vol > 0))
            throw std::runtime_error("mesh: element " + std::to_string(e)
                                     + " has non-positive reference volume");
        elem_volume[e] = vol;
        total_volume += vol;
        for (int k = 0; k < nv; ++k)
            lumped_volume[en[k]] += vol / nv;

        // P1 basis gradients: rows of edges^{-1} give grad phi_k, k >= 1.
        Mat inv = edges.inverse();
        Vec g0 = Vec::Zero(dim);
        for (int k = 1; k < nv; ++k) {
            Vec gk = inv.row(k - 1).transpose();
            g0 -= gk;
            Eigen::Map<Eigen::VectorXd>(
                basis_grads.data() + (std::size_t(e) * nv + k) * dim, dim) = gk;
        }
        Eigen::Map<Eigen::VectorXd>(basis_grads.data() + std::size_t(e) * nv * dim, dim) = g0;
    }
    if (!(total_volume > 0))
        throw std::runtime_error("mesh: total volume must be positive");

    // Boundary facets must exactly cover the topological boundary.
    auto facet_key = [&](std::span<const int> f) {
        std::vector<int> k(f.begin(), f.end());
        std::sort(k.begin(), k.end());
        return k;
    };
    std::map<std::vector<int>, std::pair<int, int>> facet_count; // key -> (count, owner)
    for (int e = 0; e < ne; ++e) {
        auto en = element_nodes(e);
        for (int skip = 0; skip < nv; ++skip) {
            std::vector<int> f;
            for (int k = 0; k < nv; ++k)
                if (k != skip)
                    f.push_back(en[k]);
            std::sort(f.begin(), f.end());
            auto& entry = facet_count[f];
            entry.first += 1;
            entry.second = e;
        }
    }
    std::map<std::vector<int>, int> expected; // boundary facet -> owner
    for (auto& [key, cnt] : facet_count) {
        if (cnt.first == 1)
            expected[key] = cnt.second;
        else if (cnt.first > 2)
            throw std::runtime_error("mesh: facet shared by more than two elements");
    }
    if (int(expected.size()) != nf)
        throw std::runtime_error("mesh: boundary facet list does not cover the topological boundary ("
                                 + std::to_string(expected.size()) + " expected, "
                                 + std::to_string(nf) + " given)");

    boundary_owner.assign(nf, -1);
    facet_area.assign(nf, 0.0);
    facet_normal.assign(std::size_t(nf) * dim, 0.0);
    std::map<std::vector<int>, int> seen;
    for (int f = 0; f < nf; ++f) {
        auto fk = facet_key(facet_nodes(f));
        auto it = expected.find(fk);
        if (it == expected.end())
            throw std::runtime_error("mesh: listed boundary facet " + std::to_string(f)
                                     + " is not on the topological boundary");
        if (seen.count(fk))
            throw std::runtime_error("mesh: duplicate boundary facet " + std::to_string(f));
        seen[fk] = f;
        int owner = it->second;
        boundary_owner[f] = owner;

        auto fn = facet_nodes(f);
        Vec n(dim);
        double area = 0;
        if (dim == 2) {
            Vec t = node_pos(fn[1]) - node_pos(fn[0]);
            area = t.norm();
            n << t[1], -t[0];
        } else {
            Vec a = node_pos(fn[1]) - node_pos(fn[0]);
            Vec b = node_pos(fn[2]) - node_pos(fn[0]);
            n.resize(3);
            n << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0];
            area = 0.5 * n.norm();
        }
        if (!(area > 0))
            throw std::runtime_error("mesh: degenerate boundary facet " + std::to_string(f));
        n.normalize();

        // Outward orientation: the opposite node of the owner lies behind.
        auto en = element_nodes(owner);
        int opp = -1;
        for (int k = 0; k < nv; ++k) {
            bool in_facet = false;
            for (int j = 0; j < dim; ++j)
                if (en[k] == fn[j])
                    in_facet = true;
            if (!in_facet)
                opp = en[k];
        }
        if (n.dot(node_pos(opp) - node_pos(fn[0])) >= 0)
            throw std::runtime_error("mesh: boundary facet " + std::to_string(f)
                                     + " is not oriented outward");
        facet_area[f] = area;
        Eigen::Map<Eigen::VectorXd>(facet_normal.data() + std::size_t(f) * dim, dim) = n;
    }
}

double ReferenceMesh::region_volume(const std::string& tag) const {
    double v = 0;
    for (int e = 0; e < n_elements(); ++e)
        if (region_tags[e] == tag)
            v += elem_volume[e];
    return v;
}

std::vector<int> ReferenceMesh::elements_in_box(const Vec& lo, const Vec& hi) const {
    std::vector<int> out;
    for (int e = 0; e < n_elements(); ++e) {
        Vec c = Vec::Zero(dim);
        for (int id : element_nodes(e))
            c += node_pos(id);
        c /= double(dim + 1);
        bool in = true;
        for (int k = 0; k < dim; ++k)
            in = in && c[k] >= lo[k] && c[k] <= hi[k];
        if (in)
            out.push_back(e);
    }
    return out;
}

std::vector<int> ReferenceMesh::nodes_in_box(const Vec& lo, const Vec& hi) const {
    std::vector<int> out;
    for (int i = 0; i < n_nodes(); ++i) {
        Vec p = node_pos(i);
        bool in = true;
        for (int k = 0; k < dim; ++k)
            in = in && p[k] >= lo[k] && p[k] <= hi[k];
        if (in)
            out.push_back(i);
    }
    return out;
}

std::vector<int> ReferenceMesh::facets_in_box(const Vec& lo, const Vec& hi) const {
    std::vector<int> out;
    for (int f = 0; f < n_facets(); ++f) {
        Vec c = Vec::Zero(dim);
        for (int id : facet_nodes(f))
            c += node_pos(id);
        c /= double(dim);
        bool in = true;
        for (int k = 0; k < dim; ++k)
            in = in && c[k] >= lo[k] && c[k] <= hi[k];
        if (in)
            out.push_back(f);
    }
    return out;
}

DeformationField DeformationField::identity(const ReferenceMesh& mesh) {
    DeformationField y;
    y.dim = mesh.dim;
    y.x = Eigen::Map<const Eigen::VectorXd>(mesh.nodes.data(), mesh.nodes.size());
    return y;
}

void DeformationField::validate(const ReferenceMesh& mesh) const {
    if (dim != mesh.dim || x.size() != Eigen::Index(mesh.nodes.size()))
        throw std::runtime_error("deformation field does not match mesh");
    if (!x.allFinite())
        throw std::runtime_error("deformation field has non-finite coordinates");
}

Mat deformation_gradient(const ReferenceMesh& mesh, const DeformationField& y, int e) {
    const int dim = mesh.dim;
    Mat F = Mat::Zero(dim, dim);
    auto en = mesh.element_nodes(e);
    for (int k = 0; k <= dim; ++k)
        F += y.node(en[k]) * mesh.basis_grad(e, k).transpose();
    return F;
}

ElementKinematics element_kinematics(const ReferenceMesh& mesh, const DeformationField& y, int e) {
    if (e < 0 || e >= mesh.n_elements())
        throw std::invalid_argument("element_kinematics: element id out of range");
    ElementKinematics k;
    k.F = deformation_gradient(mesh, y, e);
    k.J = det(k.F);
    k.cof = cofactor(k.F);
    return k;
}

Vec barycenter(const ReferenceMesh& mesh, const DeformationField& y) {
    Vec b = Vec::Zero(mesh.dim);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        Vec c = Vec::Zero(mesh.dim);
        for (int id : mesh.element_nodes(e))
            c += y.node(id);
        b += mesh.elem_volume[e] / double(mesh.dim + 1) * c;
    }
    return b / mesh.total_volume;
}

double diameter(const ReferenceMesh& mesh, const DeformationField& y) {
    const int nn = mesh.n_nodes();
    double d2 = 0;
    for (int i = 0; i < nn; ++i)
        for (int j = i + 1; j < nn; ++j)
            d2 = std::max(d2, (y.node(i) - y.node(j)).squaredNorm());
    return std::sqrt(d2);
}

double mean_jacobian(const ReferenceMesh& mesh, const DeformationField& y) {
    double jv = 0;
    for (int e = 0; e < mesh.n_elements(); ++e)
        jv += mesh.elem_volume[e] * element_kinematics(mesh, y, e).J;
    return jv / mesh.total_volume;
}

FloatClass float_classify(const ReferenceMesh& mesh, const DeformationField& y, double h) {
    double vmax = -std::numeric_limits<double>::infinity();
    double vmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < y.n_nodes(); ++i) {
        vmax = std::max(vmax, y.vertical(i));
        vmin = std::min(vmin, y.vertical(i));
    }
    const double tol = 1e-9 * diameter(mesh, y);
    if (vmin >= h)
        return FloatClass::NotImmersed;
    if (std::abs(vmax - h) <= tol)
        return FloatClass::BarelyFloating;
    if (vmax <= h - tol)
        return FloatClass::FullyImmersed;
    return FloatClass::Floating;
}

} // namespace floatelast
