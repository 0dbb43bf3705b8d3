#include "floatelast/hydro.hpp"

#include "floatelast/clip.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <stdexcept>

namespace floatelast {

namespace {

double deformed_piece_volume(int dim, const Vec* verts, const ClipPieces& pieces, int p) {
    // Volume of a sub-simplex from its physical vertex coordinates.
    Vec q[4];
    for (int v = 0; v <= dim; ++v) {
        q[v] = Vec::Zero(dim);
        for (int k = 0; k <= dim; ++k)
            q[v] += pieces.w[p][v][k] * verts[k];
    }
    Mat edges(dim, dim);
    for (int k = 1; k <= dim; ++k)
        edges.col(k - 1) = q[k] - q[0];
    return std::abs(det(edges)) / (dim == 2 ? 2.0 : 6.0);
}

} // namespace

void FluidEnvironment::validate() const {
    if (!(rho_f > 0))
        throw std::runtime_error("fluid: rho_f must be > 0");
    if (!(g > 0))
        throw std::runtime_error("fluid: g must be > 0");
    if (!std::isfinite(h))
        throw std::runtime_error("fluid: waterline must be finite");
    if (reservoir) {
        if (!(reservoir->S_area > 0) || !(reservoir->M > 0))
            throw std::runtime_error("fluid: reservoir needs S_area > 0 and M > 0");
    }
}

double submerged_volume(const ReferenceMesh& mesh, const DeformationField& y, double h) {
    const int dim = mesh.dim;
    double vol = 0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        auto en = mesh.element_nodes(e);
        Vec verts[4];
        double s[4];
        for (int k = 0; k <= dim; ++k) {
            verts[k] = y.node(en[k]);
            s[k] = verts[k][dim - 1] - h;
        }
        Mat edges(dim, dim);
        for (int k = 1; k <= dim; ++k)
            edges.col(k - 1) = verts[k] - verts[0];
        if (det(edges) <= 0)
            throw std::runtime_error("submerged_volume: inverted element "
                                     + std::to_string(e));
        auto pieces = clip_simplex_below(dim, s);
        for (int p = 0; p < pieces.count; ++p)
            vol += deformed_piece_volume(dim, verts, pieces, p);
    }
    return vol;
}

double hydrostatic_integral(const ReferenceMesh& mesh, const DeformationField& y,
                            const FluidEnvironment& fluid, double h) {
    const int dim = mesh.dim;
    double acc = 0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        auto en = mesh.element_nodes(e);
        Vec verts[4];
        double s[4];
        for (int k = 0; k <= dim; ++k) {
            verts[k] = y.node(en[k]);
            s[k] = verts[k][dim - 1] - h;
        }
        Mat edges(dim, dim);
        for (int k = 1; k <= dim; ++k)
            edges.col(k - 1) = verts[k] - verts[0];
        if (det(edges) <= 0)
            throw std::runtime_error("hydrostatic_integral: inverted element "
                                     + std::to_string(e));
        auto pieces = clip_simplex_below(dim, s);
        for (int p = 0; p < pieces.count; ++p) {
            double volp = deformed_piece_volume(dim, verts, pieces, p);
            double depth = 0; // mean of (h - x_v) over the piece
            for (int v = 0; v <= dim; ++v)
                depth -= piece_vertex_value(pieces, p, v, s);
            acc += volp * depth / double(dim + 1);
        }
    }
    return fluid.g * fluid.rho_f * acc;
}

double hydrostatic_integral_lagrangian(const ReferenceMesh& mesh, const DeformationField& y,
                                       const FluidEnvironment& fluid, double h) {
    const int dim = mesh.dim;
    double acc = 0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        auto en = mesh.element_nodes(e);
        double s[4];
        for (int k = 0; k <= dim; ++k)
            s[k] = y.vertical(en[k]) - h;
        double J = det(deformation_gradient(mesh, y, e));
        if (J <= 0)
            throw std::runtime_error("hydrostatic_integral: inverted element "
                                     + std::to_string(e));
        auto pieces = clip_simplex_below(dim, s);
        for (int p = 0; p < pieces.count; ++p) {
            double frac = piece_measure_fraction(pieces, p);
            double depth = 0;
            for (int v = 0; v <= dim; ++v)
                depth -= piece_vertex_value(pieces, p, v, s);
            acc += mesh.elem_volume[e] * frac * J * depth / double(dim + 1);
        }
    }
    return fluid.g * fluid.rho_f * acc;
}

Vec VoxelGrid::center(int i, int j, int k) const {
    Vec c(dim);
    c[0] = origin[0] + (i + 0.5) * cell;
    c[1] = origin[1] + (j + 0.5) * cell;
    if (dim == 3)
        c[2] = origin[2] + (k + 0.5) * cell;
    return c;
}

bool VoxelGrid::same_geometry(const VoxelGrid& other) const {
    return dim == other.dim && n == other.n && cell == other.cell
        && std::abs(origin[0] - other.origin[0]) < 1e-12 * std::max(1.0, cell)
        && std::abs(origin[1] - other.origin[1]) < 1e-12 * std::max(1.0, cell)
        && std::abs(origin[2] - other.origin[2]) < 1e-12 * std::max(1.0, cell);
}

VoxelGrid make_grid(const ReferenceMesh& mesh, const DeformationField& y, int res) {
    if (res < 2)
        throw std::invalid_argument("voxel grid: resolution must be >= 2");
    const int dim = mesh.dim;
    Vec lo = y.node(0), hi = y.node(0);
    for (int i = 1; i < y.n_nodes(); ++i) {
        lo = lo.cwiseMin(y.node(i));
        hi = hi.cwiseMax(y.node(i));
    }
    Vec extent = hi - lo;
    double emax = extent.maxCoeff();
    if (!(emax > 0))
        throw std::runtime_error("voxel grid: degenerate deformed body");
    // 10% inflation plus one guard cell on each side.
    double cell = 1.1 * emax / res;
    VoxelGrid grid;
    grid.dim = dim;
    grid.cell = cell;
    for (int k = 0; k < dim; ++k) {
        double pad = 0.05 * emax + cell;
        int cells = int(std::ceil((extent[k] + 2 * pad) / cell));
        grid.origin[k] = lo[k] - pad;
        grid.n[k] = cells;
    }
    if (dim == 2)
        grid.n[2] = 1;
    grid.label.assign(grid.cell_count(), std::uint8_t(Occupancy::Unknown));
    grid.inside.assign(grid.cell_count(), 0);
    grid.blocked.assign(grid.cell_count(), 0);
    return grid;
}

namespace {

// Point-in-simplex via barycentric coordinates of the deformed element.
bool point_in_simplex(int dim, const Vec* verts, const Vec& x) {
    Mat edges(dim, dim);
    for (int k = 1; k <= dim; ++k)
        edges.col(k - 1) = verts[k] - verts[0];
    Vec lam = edges.partialPivLu().solve(x - verts[0]);
    double sum = 0;
    for (int k = 0; k < dim; ++k) {
        if (lam[k] < -1e-12)
            return false;
        sum += lam[k];
    }
    return sum <= 1.0 + 1e-12;
}

void cell_range(const VoxelGrid& g, const Vec& lo, const Vec& hi, int* c0, int* c1) {
    for (int k = 0; k < g.dim; ++k) {
        c0[k] = std::max(0, int(std::floor((lo[k] - g.origin[k]) / g.cell)));
        c1[k] = std::min(g.n[k] - 1, int(std::floor((hi[k] - g.origin[k]) / g.cell)));
    }
    if (g.dim == 2) {
        c0[2] = 0;
        c1[2] = 0;
    }
}

void mark_point(VoxelGrid& g, const Vec& x, std::vector<std::uint8_t>& mask) {
    int idx[3] = {0, 0, 0};
    for (int k = 0; k < g.dim; ++k) {
        idx[k] = int(std::floor((x[k] - g.origin[k]) / g.cell));
        if (idx[k] < 0 || idx[k] >= g.n[k])
            return;
    }
    mask[g.index(idx[0], idx[1], idx[2])] = 1;
}

} // namespace

void rasterize_body(VoxelGrid& grid, const ReferenceMesh& mesh, const DeformationField& y) {
    const int dim = mesh.dim;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        auto en = mesh.element_nodes(e);
        Vec verts[4];
        for (int k = 0; k <= dim; ++k)
            verts[k] = y.node(en[k]);
        Vec lo = verts[0], hi = verts[0];
        for (int k = 1; k <= dim; ++k) {
            lo = lo.cwiseMin(verts[k]);
            hi = hi.cwiseMax(verts[k]);
        }
        int c0[3], c1[3];
        cell_range(grid, lo, hi, c0, c1);
        for (int k = c0[2]; k <= c1[2]; ++k)
            for (int j = c0[1]; j <= c1[1]; ++j)
                for (int i = c0[0]; i <= c1[0]; ++i) {
                    if (point_in_simplex(dim, verts, grid.center(i, j, k))) {
                        auto id = grid.index(i, j, k);
                        grid.inside[id] = 1;
                        grid.blocked[id] = 1;
                    }
                }
    }
    // Sample boundary facets densely (spacing < cell/2) so walls block the
    // flood fill even where cell centers fall outside the body.
    for (int f = 0; f < mesh.n_facets(); ++f) {
        auto fn = mesh.facet_nodes(f);
        Vec a = y.node(fn[0]);
        Vec b = y.node(fn[1]);
        if (dim == 2) {
            double len = (b - a).norm();
            int nseg = std::max(1, int(std::ceil(len / (0.4 * grid.cell))));
            for (int t = 0; t <= nseg; ++t)
                mark_point(grid, Vec(a + (b - a) * (double(t) / nseg)), grid.blocked);
        } else {
            Vec c = y.node(fn[2]);
            double len = std::max({(b - a).norm(), (c - a).norm(), (c - b).norm()});
            int nseg = std::max(1, int(std::ceil(len / (0.4 * grid.cell))));
            for (int u = 0; u <= nseg; ++u)
                for (int v = 0; v <= nseg - u; ++v) {
                    double lu = double(u) / nseg, lv = double(v) / nseg;
                    mark_point(grid, Vec(a + lu * (b - a) + lv * (c - a)), grid.blocked);
                }
        }
    }
}

ImageVolume image_volume(const ReferenceMesh& mesh, const DeformationField& y, int res) {
    VoxelGrid grid = make_grid(mesh, y, res);
    rasterize_body(grid, mesh, y);
    std::size_t count = 0;
    for (auto v : grid.inside)
        count += v;
    double area = 0;
    for (int f = 0; f < mesh.n_facets(); ++f) {
        auto fn = mesh.facet_nodes(f);
        if (mesh.dim == 2) {
            area += (y.node(fn[1]) - y.node(fn[0])).norm();
        } else {
            Eigen::Vector3d a = (y.node(fn[1]) - y.node(fn[0])).head(3);
            Eigen::Vector3d b = (y.node(fn[2]) - y.node(fn[0])).head(3);
            area += 0.5 * a.cross(b).norm();
        }
    }
    ImageVolume out;
    out.volume = double(count) * grid.cell_volume();
    out.error_bound = area * grid.cell * std::sqrt(double(mesh.dim));
    return out;
}

CiarletNecasReport ciarlet_necas_check(const ReferenceMesh& mesh, const DeformationField& y,
                                       int res) {
    double jac_volume = 0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        double J = det(deformation_gradient(mesh, y, e));
        if (J <= 0)
            throw std::runtime_error("ciarlet_necas_check: inverted element");
        jac_volume += mesh.elem_volume[e] * J;
    }
    ImageVolume img = image_volume(mesh, y, res);
    CiarletNecasReport rep;
    rep.slack = img.volume - jac_volume;
    rep.error_bound = img.error_bound;
    rep.satisfied = rep.slack >= -img.error_bound;
    return rep;
}

CavitySet cavity_set_on_grid(VoxelGrid grid, const ReferenceMesh& mesh,
                             const DeformationField& y, double h) {
    grid.label.assign(grid.cell_count(), std::uint8_t(Occupancy::Unknown));
    grid.inside.assign(grid.cell_count(), 0);
    grid.blocked.assign(grid.cell_count(), 0);
    rasterize_body(grid, mesh, y);
    const int nz = grid.dim == 3 ? grid.n[2] : 1;
    auto is_below = [&](int i, int j, int k) {
        return grid.center(i, j, k)[grid.dim - 1] <= h;
    };

    // Flood fill fluid from the domain boundary, below the waterline, through
    // unblocked cells.
    std::vector<std::uint8_t> reached(grid.cell_count(), 0);
    std::deque<std::array<int, 3>> queue;
    auto try_seed = [&](int i, int j, int k) {
        auto id = grid.index(i, j, k);
        if (!grid.blocked[id] && !reached[id] && is_below(i, j, k)) {
            reached[id] = 1;
            queue.push_back({i, j, k});
        }
    };
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int i = 0; i < grid.n[0]; ++i)
                if (i == 0 || j == 0 || k == 0 || i == grid.n[0] - 1 || j == grid.n[1] - 1
                    || (grid.dim == 3 && k == nz - 1))
                    try_seed(i, j, k);
    const int steps = grid.dim == 3 ? 6 : 4;
    const int di[6] = {1, -1, 0, 0, 0, 0};
    const int dj[6] = {0, 0, 1, -1, 0, 0};
    const int dk[6] = {0, 0, 0, 0, 1, -1};
    while (!queue.empty()) {
        auto [i, j, k] = queue.front();
        queue.pop_front();
        for (int d = 0; d < steps; ++d) {
            int ii = i + di[d], jj = j + dj[d], kk = k + dk[d];
            if (ii < 0 || jj < 0 || kk < 0 || ii >= grid.n[0] || jj >= grid.n[1] || kk >= nz)
                continue;
            try_seed(ii, jj, kk);
        }
    }
    // Let fluid claim the wall-skin cells it touches (blocked but with center
    // outside the body); these are not traversed above but belong to the
    // exterior. The pass cannot cross a wall: interior wall cells have
    // inside = 1 and stay off limits.
    std::deque<std::array<int, 3>> skin;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int i = 0; i < grid.n[0]; ++i)
                if (reached[grid.index(i, j, k)])
                    skin.push_back({i, j, k});
    while (!skin.empty()) {
        auto [i, j, k] = skin.front();
        skin.pop_front();
        for (int d = 0; d < steps; ++d) {
            int ii = i + di[d], jj = j + dj[d], kk = k + dk[d];
            if (ii < 0 || jj < 0 || kk < 0 || ii >= grid.n[0] || jj >= grid.n[1] || kk >= nz)
                continue;
            auto id = grid.index(ii, jj, kk);
            if (reached[id] || grid.inside[id] || !grid.blocked[id] || !is_below(ii, jj, kk))
                continue;
            reached[id] = 1;
            skin.push_back({ii, jj, kk});
        }
    }

    CavitySet out;
    out.waterline = h;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int i = 0; i < grid.n[0]; ++i) {
                auto id = grid.index(i, j, k);
                if (grid.inside[id]) {
                    grid.label[id] = std::uint8_t(Occupancy::Body);
                } else if (!is_below(i, j, k)) {
                    grid.label[id] = std::uint8_t(Occupancy::Air);
                } else if (reached[id]) {
                    grid.label[id] = std::uint8_t(Occupancy::Fluid);
                } else {
                    grid.label[id] = std::uint8_t(Occupancy::Cavity);
                    out.cells.push_back(id);
                    double depth = h - grid.center(i, j, k)[grid.dim - 1];
                    out.volume += grid.cell_volume();
                    out.depth_integral += grid.cell_volume() * std::max(0.0, depth);
                }
            }

    // Resolution guard: if the rasterized body is much larger than the actual
    // body volume, walls are thinner than the grid can represent.
    double raster_volume = 0;
    for (auto v : grid.blocked)
        raster_volume += v;
    raster_volume *= grid.cell_volume();
    double body_volume = 0;
    for (int e = 0; e < mesh.n_elements(); ++e)
        body_volume += mesh.elem_volume[e] * det(deformation_gradient(mesh, y, e));
    if (raster_volume > 3.0 * body_volume)
        throw std::runtime_error(
            "cavity_set: grid resolution too coarse for the body shell "
            "(rasterized volume exceeds three times the actual volume); "
            "increase grid_res so walls span at least two cells");

    out.grid = std::move(grid);
    return out;
}

CavitySet cavity_set(const ReferenceMesh& mesh, const DeformationField& y, double h, int res) {
    return cavity_set_on_grid(make_grid(mesh, y, res), mesh, y, h);
}

double symmetric_difference_volume(const CavitySet& a, const CavitySet& b) {
    if (!a.grid.same_geometry(b.grid))
        throw std::runtime_error("symmetric_difference_volume: grids do not match");
    std::size_t diff = 0;
    for (std::size_t id = 0; id < a.grid.cell_count(); ++id) {
        bool ca = a.grid.label[id] == std::uint8_t(Occupancy::Cavity);
        bool cb = b.grid.label[id] == std::uint8_t(Occupancy::Cavity);
        diff += (ca != cb);
    }
    return double(diff) * a.grid.cell_volume();
}

void write_grid_vtk(const VoxelGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write vtk file: " + path);
    const int nz = grid.dim == 3 ? grid.n[2] : 1;
    out << "# vtk DataFile Version 3.0\n"
        << "occupancy grid\nASCII\nDATASET STRUCTURED_POINTS\n"
        << "DIMENSIONS " << grid.n[0] + 1 << " " << grid.n[1] + 1 << " " << nz + 1 << "\n"
        << "ORIGIN " << grid.origin[0] << " " << grid.origin[1] << " "
        << (grid.dim == 3 ? grid.origin[2] : 0.0) << "\n"
        << "SPACING " << grid.cell << " " << grid.cell << " " << grid.cell << "\n"
        << "CELL_DATA " << grid.cell_count() << "\n"
        << "SCALARS occupancy int 1\nLOOKUP_TABLE default\n";
    for (std::size_t id = 0; id < grid.cell_count(); ++id)
        out << int(grid.label[id]) << "\n";
}

} // namespace floatelast
