#pragma once

#include "floatelast/mesh.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace floatelast {

struct ReservoirSpec {
    double S_area = 0; // cross-section measure of the reservoir
    double M = 0;      // depth of the reservoir below the rest level
};

struct FluidEnvironment {
    double rho_f = 1;
    double g = 1;
    double h = 0; // waterline height
    std::optional<ReservoirSpec> reservoir;

    void validate() const;
};

// Volume of the deformed body below the waterline, by exact half-space
// clipping of each deformed simplex. Throws on inverted elements.
double submerged_volume(const ReferenceMesh& mesh, const DeformationField& y, double h);

// integral over the deformed body of g rho_f (x_v - h)^-, exact (the
// integrand is affine on each clipped piece).
double hydrostatic_integral(const ReferenceMesh& mesh, const DeformationField& y,
                            const FluidEnvironment& fluid, double h);

// Same quantity assembled in reference coordinates as the pullback
// integral of g rho_f (y_v - h)^- det F; agrees with the Eulerian form to
// round-off for orientation-preserving states.
double hydrostatic_integral_lagrangian(const ReferenceMesh& mesh, const DeformationField& y,
                                       const FluidEnvironment& fluid, double h);

enum class Occupancy : std::uint8_t { Unknown = 0, Body, Fluid, Cavity, Air };

struct VoxelGrid {
    int dim = 3;
    std::array<double, 3> origin{};
    std::array<int, 3> n{1, 1, 1};
    double cell = 0;
    std::vector<std::uint8_t> label;  // Occupancy per cell
    std::vector<std::uint8_t> inside; // cell center inside a deformed element
    std::vector<std::uint8_t> blocked; // inside or crossed by the boundary surface

    std::size_t cell_count() const {
        return std::size_t(n[0]) * n[1] * (dim == 3 ? n[2] : 1);
    }
    std::size_t index(int i, int j, int k) const {
        return (std::size_t(k) * n[1] + j) * n[0] + i;
    }
    Vec center(int i, int j, int k) const;
    double cell_volume() const { return dim == 3 ? cell * cell * cell : cell * cell; }
    bool same_geometry(const VoxelGrid& other) const;
};

// Grid covering the deformed body, inflated by 10% plus one cell.
VoxelGrid make_grid(const ReferenceMesh& mesh, const DeformationField& y, int res);

// Fills `inside` and `blocked`; `blocked` additionally covers cells hit by
// boundary-facet surface samples so a flood fill cannot leak through walls.
void rasterize_body(VoxelGrid& grid, const ReferenceMesh& mesh, const DeformationField& y);

// Voxel estimate of the image measure of the deformed body, with an error
// bound proportional to surface area times cell size.
struct ImageVolume {
    double volume = 0;
    double error_bound = 0;
};
ImageVolume image_volume(const ReferenceMesh& mesh, const DeformationField& y, int res);

struct CiarletNecasReport {
    bool satisfied = true;
    double slack = 0;       // image volume - integral of det F
    double error_bound = 0; // voxel error bound used as tolerance
};
// Diagnostic for the injectivity inequality int det F <= |image|.
CiarletNecasReport ciarlet_necas_check(const ReferenceMesh& mesh, const DeformationField& y,
                                       int res);

struct CavitySet {
    VoxelGrid grid; // labeled grid (shared geometry for comparisons)
    std::vector<std::size_t> cells;
    double volume = 0;
    double depth_integral = 0; // sum of (h - center_v)^+ * cell volume
    double waterline = 0;
};

// Labels the grid and extracts the trapped below-waterline region: body cells
// from rasterization, fluid from a boundary flood fill below the waterline,
// the unreached remainder is the cavity. Throws if the rasterized body is
// grossly thicker than the actual body (resolution too coarse for the shell).
CavitySet cavity_set(const ReferenceMesh& mesh, const DeformationField& y, double h, int res);
CavitySet cavity_set_on_grid(VoxelGrid grid, const ReferenceMesh& mesh,
                             const DeformationField& y, double h);

// Volume of the symmetric difference of two cavity sets on the same grid.
double symmetric_difference_volume(const CavitySet& a, const CavitySet& b);

// Legacy ASCII structured-points export of the occupancy labels.
void write_grid_vtk(const VoxelGrid& grid, const std::string& path);

} // namespace floatelast
