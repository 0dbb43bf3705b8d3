#pragma once

#include "floatelast/hydro.hpp"
#include "floatelast/material.hpp"

#include <memory>
#include <optional>

namespace floatelast {

/// Anchoring of the solid: prescribed positions, an elastic boundary term
/// c3 int_Gamma |y - y_D|^r, a slack-cable variant that engages beyond
/// elongation lambda, or a hard inextensible tether |y - y_D| <= lambda.
struct AnchorSpec {
    enum class Kind { None, Clamped, ElasticBoundary, SlackCable, Inextensible };
    Kind kind = Kind::None;

    std::vector<int> nodes;  // clamped / inextensible node set
    std::vector<int> facets; // boundary facet set for the elastic variants

    // Target map y_D(X) = A X + b.
    Mat A;
    Vec b;
    double c3 = 0;
    double r = 2;
    double lambda = 0;

    Vec target(const Vec& X) const { return A * X + b; }
    bool active() const { return kind != Kind::None; }
    void validate(const ReferenceMesh& mesh) const;
};

struct EnergyBreakdown {
    double elastic = 0;
    double hydrostatic = 0;
    double gravity = 0;
    double anchor = 0;
    double penalty = 0; // incompressibility, mean-J floor and (for the split
                        // variant) the compression barrier
    double total = 0;
};

enum class Variant { Basic, SplitCompressible, Submarine, Reservoir, Ship };
const char* to_string(Variant v);

// Stand-alone assembly routines (exact for P1 fields).
double elastic_energy(const ReferenceMesh& mesh, const MaterialParams& mat,
                      const DeformationField& y);
double gravity_energy(const ReferenceMesh& mesh, const DensityModel& density,
                      const DeformationField& y, double g, double h = 0);
double anchor_energy(const AnchorSpec& anchor, const ReferenceMesh& mesh,
                     const DeformationField& y);

// Gradient of the hydrostatic term assembled as boundary tractions
// g rho_f (y_v - h)^- cof(F) N, facet-wise with exact clipped quadrature (the
// force on the body is the negative). Equals the volumetric hydrostatic
// gradient by the per-element divergence identity; `facet_mask` restricts
// assembly (ship wet surfaces).
Eigen::VectorXd hydrostatic_traction_forces(const ReferenceMesh& mesh, const DeformationField& y,
                                            const FluidEnvironment& fluid, double h,
                                            const std::vector<std::uint8_t>* facet_mask = nullptr);

// Gradient of the hydrostatic term assembled element-wise from the Lagrangian
// pullback integral of g rho_f (y_v - h)^- det F. Agrees with the traction
// route above to round-off.
Eigen::VectorXd hydrostatic_volume_gradient(const ReferenceMesh& mesh, const DeformationField& y,
                                            const FluidEnvironment& fluid, double h);

struct ShipCache {
    CavitySet cavity;
    std::vector<std::uint8_t> facet_wet; // per boundary facet
    double cavity_energy = 0;            // g rho_f * cavity depth integral
};

/// Assembles each total-energy variant and its analytic nodal gradient.
/// Evaluation is read-only; the ship cavity cache is refreshed explicitly.
class EnergyModel {
public:
    EnergyModel(Variant variant, const ReferenceMesh& mesh, MaterialParams material,
                DensityModel density, FluidEnvironment fluid, AnchorSpec anchor = {});

    Variant variant() const { return variant_; }
    const ReferenceMesh& mesh() const { return *mesh_; }
    const MaterialParams& material() const { return material_; }
    const DensityModel& density() const { return density_; }
    const FluidEnvironment& fluid() const { return fluid_; }
    const AnchorSpec& anchor() const { return anchor_; }

    double waterline() const { return h_; }
    void set_waterline(double h) { h_ = h; }

    void set_incompressibility_weight(double kappa) { kappa_ = kappa; }
    double incompressibility_weight() const { return kappa_; }
    // Quadratic floor penalty weight * max(0, tau - mean J)^2.
    void set_mean_jacobian_floor(double tau, double weight) {
        meanJ_tau_ = tau;
        meanJ_weight_ = weight;
    }
    double mean_jacobian_floor_tau() const { return meanJ_tau_; }
    void set_grid_res(int res) { grid_res_ = res; }
    int grid_res() const { return grid_res_; }

    EnergyBreakdown energy(const DeformationField& y) const;
    double total_energy(const DeformationField& y) const { return energy(y).total; }
    void gradient(const DeformationField& y, Eigen::VectorXd& out) const;

    // Recomputes the cavity set and the wet/dry facet classification used by
    // the ship gradient. Classification stays frozen until the next call.
    void refresh_ship_cache(const DeformationField& y);
    const ShipCache* ship_cache() const { return ship_.get(); }

    // Effective weight per unit reference volume: translation derivative of
    // the gravity term (state-dependent only for the wet/dry density).
    double solid_weight(const DeformationField& y) const;
    // Signed derivative of the total energy along a uniform downward
    // translation; negative means sinking lowers the energy.
    double descent_derivative(const DeformationField& y) const;

private:
    Variant variant_;
    const ReferenceMesh* mesh_;
    MaterialParams material_;
    DensityModel density_;
    FluidEnvironment fluid_;
    AnchorSpec anchor_;
    double h_ = 0;
    double kappa_ = 0;
    double meanJ_tau_ = -1;
    double meanJ_weight_ = 0;
    int grid_res_ = 96;
    std::vector<std::uint8_t> elastic_elem_; // submarine: hull only
    std::shared_ptr<ShipCache> ship_;

    double cavity_energy_fresh(const DeformationField& y) const;
};

} // namespace floatelast
