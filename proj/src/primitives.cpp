#include "floatelast/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace floatelast {

namespace {

double signed_volume(int dim, const std::vector<double>& nodes, const int* ids) {
    Mat edges(dim, dim);
    Eigen::Map<const Eigen::VectorXd> x0(nodes.data() + std::size_t(ids[0]) * dim, dim);
    for (int k = 1; k <= dim; ++k) {
        Eigen::Map<const Eigen::VectorXd> xk(nodes.data() + std::size_t(ids[k]) * dim, dim);
        edges.col(k - 1) = xk - x0;
    }
    return det(edges) / (dim == 2 ? 2.0 : 6.0);
}

// Appends positively oriented simplices for one (possibly degenerate) cell,
// given its 2^dim corner node ids in (a[,b[,c]]) bit order.
void emit_kuhn_cell(int dim, const std::vector<double>& nodes, const int* corner,
                    std::vector<int>& elements, double degenerate_tol) {
    static const int perms3[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                     {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    static const int perms2[2][2] = {{0, 1}, {1, 0}};
    const int nperm = dim == 3 ? 6 : 2;
    for (int p = 0; p < nperm; ++p) {
        int ids[4];
        int mask = 0;
        ids[0] = corner[0];
        for (int step = 0; step < dim; ++step) {
            mask |= 1 << (dim == 3 ? perms3[p][step] : perms2[p][step]);
            ids[step + 1] = corner[mask];
        }
        bool repeated = false;
        for (int i = 0; i <= dim && !repeated; ++i)
            for (int j = i + 1; j <= dim; ++j)
                if (ids[i] == ids[j])
                    repeated = true;
        if (repeated)
            continue;
        double vol = signed_volume(dim, nodes, ids);
        if (std::abs(vol) <= degenerate_tol)
            continue;
        if (vol < 0)
            std::swap(ids[dim - 1], ids[dim]);
        for (int k = 0; k <= dim; ++k)
            elements.push_back(ids[k]);
    }
}

// Boundary facets from facet incidence counts, node order flipped outward.
void build_boundary(ReferenceMesh& mesh) {
    const int dim = mesh.dim, nv = dim + 1;
    std::map<std::vector<int>, std::pair<int, int>> count;
    const int ne = int(mesh.elements.size()) / nv;
    for (int e = 0; e < ne; ++e) {
        for (int skip = 0; skip < nv; ++skip) {
            std::vector<int> f;
            for (int k = 0; k < nv; ++k)
                if (k != skip)
                    f.push_back(mesh.elements[std::size_t(e) * nv + k]);
            std::sort(f.begin(), f.end());
            auto& c = count[f];
            c.first++;
            c.second = e;
        }
    }
    mesh.boundary.clear();
    for (auto& [key, c] : count) {
        if (c.first != 1)
            continue;
        std::vector<int> f = key;
        // Orient outward relative to the owner's opposite node.
        int owner = c.second;
        int opp = -1;
        for (int k = 0; k < nv; ++k) {
            int id = mesh.elements[std::size_t(owner) * nv + k];
            if (std::find(f.begin(), f.end(), id) == f.end())
                opp = id;
        }
        auto pos = [&](int i) {
            return Eigen::Map<const Eigen::VectorXd>(mesh.nodes.data() + std::size_t(i) * dim, dim);
        };
        Vec n(dim);
        if (dim == 2) {
            Vec t = pos(f[1]) - pos(f[0]);
            n << t[1], -t[0];
        } else {
            Vec a = pos(f[1]) - pos(f[0]);
            Vec b = pos(f[2]) - pos(f[0]);
            n.resize(3);
            n << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0];
        }
        if (n.dot(pos(opp) - pos(f[0])) > 0)
            std::swap(f[dim - 2], f[dim - 1]);
        for (int id : f)
            mesh.boundary.push_back(id);
    }
}

} // namespace

ReferenceMesh build_box(int dim, const std::vector<double>& size, const std::vector<int>& res) {
    if (dim != 2 && dim != 3)
        throw std::invalid_argument("build_box: dim must be 2 or 3");
    if (int(size.size()) != dim || int(res.size()) != dim)
        throw std::invalid_argument("build_box: size/res must have dim entries");
    for (double s : size)
        if (!(s > 0))
            throw std::invalid_argument("build_box: degenerate size");
    for (int r : res)
        if (r < 1)
            throw std::invalid_argument("build_box: resolution must be >= 1");

    ReferenceMesh mesh;
    mesh.dim = dim;
    int nx = res[0] + 1, ny = res[1] + 1, nz = dim == 3 ? res[2] + 1 : 1;
    auto node_id = [&](int i, int j, int k) { return (k * ny + j) * nx + i; };
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                mesh.nodes.push_back(size[0] * i / res[0]);
                mesh.nodes.push_back(size[1] * j / res[1]);
                if (dim == 3)
                    mesh.nodes.push_back(size[2] * k / res[2]);
            }
    const int kmax = dim == 3 ? res[2] : 1;
    for (int k = 0; k < kmax; ++k)
        for (int j = 0; j < res[1]; ++j)
            for (int i = 0; i < res[0]; ++i) {
                int corner[8];
                for (int m = 0; m < (1 << dim); ++m) {
                    int a = m & 1, b = (m >> 1) & 1, c = (m >> 2) & 1;
                    corner[m] = node_id(i + a, j + b, dim == 3 ? k + c : 0);
                }
                emit_kuhn_cell(dim, mesh.nodes, corner, mesh.elements, 0.0);
            }
    build_boundary(mesh);
    mesh.finalize();
    return mesh;
}

ReferenceMesh build_ball(int dim, double radius, int res) {
    if (!(radius > 0) || res < 1)
        throw std::invalid_argument("build_ball: degenerate size or resolution 0");
    std::vector<double> size(dim, 2.0);
    std::vector<int> r(dim, 2 * res); // even cell count so the center is a node
    ReferenceMesh mesh = build_box(dim, size, r);
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        Vec p = mesh.node_pos(i);
        for (int k = 0; k < dim; ++k)
            p[k] -= 1.0;
        double linf = p.lpNorm<Eigen::Infinity>();
        double l2 = p.norm();
        Vec q = l2 > 0 ? Vec(p * (linf / l2) * radius) : Vec(Vec::Zero(dim));
        for (int k = 0; k < dim; ++k)
            mesh.nodes[std::size_t(i) * dim + k] = q[k];
    }
    // The radial map can flip sliver cells near the cube corners; restore
    // positive orientation element-wise (the vertex sets are unchanged).
    const int nv = dim + 1;
    for (std::size_t e = 0; e < mesh.elements.size() / nv; ++e) {
        int* ids = mesh.elements.data() + e * nv;
        if (signed_volume(dim, mesh.nodes, ids) < 0)
            std::swap(ids[dim - 1], ids[dim]);
    }
    build_boundary(mesh);
    mesh.finalize();
    return mesh;
}

ReferenceMesh build_open_shell(int dim, double inner_radius, double thickness, int res) {
    if (!(inner_radius > 0) || !(thickness > 0) || res < 2)
        throw std::invalid_argument("build_open_shell: degenerate size or resolution");
    const double r0 = inner_radius, r1 = inner_radius + thickness;
    ReferenceMesh mesh;
    mesh.dim = dim;

    if (dim == 2) {
        // Lower half annulus, rim ends on {y = 0}.
        int na = 4 * res, nr = std::max(1, res / 3);
        auto node_id = [&](int i, int k) { return k * (na + 1) + i; };
        for (int k = 0; k <= nr; ++k)
            for (int i = 0; i <= na; ++i) {
                double th = std::numbers::pi * (1.0 + double(i) / na);
                double r = r0 + (r1 - r0) * k / nr;
                mesh.nodes.push_back(r * std::cos(th));
                mesh.nodes.push_back(r * std::sin(th));
            }
        for (int k = 0; k < nr; ++k)
            for (int i = 0; i < na; ++i) {
                int corner[4] = {node_id(i, k), node_id(i + 1, k), node_id(i, k + 1),
                                 node_id(i + 1, k + 1)};
                emit_kuhn_cell(dim, mesh.nodes, corner, mesh.elements, 0.0);
            }
        build_boundary(mesh);
        mesh.finalize();
        return mesh;
    }

    // 3D: structured (azimuth, polar, radius) grid. The polar axis points
    // down; j = 0 collapses to one pole node per radial layer, handled by the
    // Kuhn split degenerating to wedges.
    int nth = 4 * res, nph = res, nr = std::max(1, res / 3);
    std::vector<int> ids((nth) * (nph + 1) * (nr + 1), -1);
    auto slot = [&](int i, int j, int k) { return (k * (nph + 1) + j) * nth + (i % nth); };
    int next = 0;
    for (int k = 0; k <= nr; ++k) {
        double r = r0 + (r1 - r0) * k / nr;
        for (int j = 0; j <= nph; ++j) {
            double phi = 0.5 * std::numbers::pi * j / nph;
            for (int i = 0; i < nth; ++i) {
                if (j == 0 && i > 0) {
                    ids[slot(i, j, k)] = ids[slot(0, 0, k)];
                    continue;
                }
                double th = 2.0 * std::numbers::pi * i / nth;
                ids[slot(i, j, k)] = next++;
                mesh.nodes.push_back(r * std::sin(phi) * std::cos(th));
                mesh.nodes.push_back(r * std::sin(phi) * std::sin(th));
                mesh.nodes.push_back(-r * std::cos(phi));
            }
        }
    }
    double cell_scale = std::pow(r0 * 0.5 * std::numbers::pi / nph, 3);
    for (int k = 0; k < nr; ++k)
        for (int j = 0; j < nph; ++j)
            for (int i = 0; i < nth; ++i) {
                int corner[8];
                for (int m = 0; m < 8; ++m) {
                    int a = m & 1, b = (m >> 1) & 1, c = (m >> 2) & 1;
                    corner[m] = ids[slot(i + a, j + b, k + c)];
                }
                emit_kuhn_cell(dim, mesh.nodes, corner, mesh.elements, 1e-14 * cell_scale);
            }
    build_boundary(mesh);
    mesh.finalize();
    return mesh;
}

void tag_region_box(ReferenceMesh& mesh, const Vec& lo, const Vec& hi, const std::string& tag) {
    for (int e : mesh.elements_in_box(lo, hi))
        mesh.region_tags[e] = tag;
}

} // namespace floatelast
