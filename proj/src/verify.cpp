#include "floatelast/verify.hpp"

#include "floatelast/clip.hpp"
#include "floatelast/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace floatelast {

std::vector<BoundaryTraction> boundary_tractions(const ReferenceMesh& mesh,
                                                 const DeformationField& y,
                                                 const FluidEnvironment& fluid, double h) {
    const int dim = mesh.dim;
    std::vector<BoundaryTraction> out;
    out.reserve(mesh.n_facets());
    for (int f = 0; f < mesh.n_facets(); ++f) {
        auto fn = mesh.facet_nodes(f);
        double depth = 0; // (y_v - h)^- at the centroid
        for (int k = 0; k < dim; ++k)
            depth += y.vertical(fn[k]);
        depth = std::max(0.0, h - depth / dim);
        Mat cof = cofactor(deformation_gradient(mesh, y, mesh.boundary_owner[f]));
        BoundaryTraction t;
        t.facet = f;
        t.force = -fluid.g * fluid.rho_f * depth * mesh.facet_area[f]
                  * (cof * mesh.facet_unit_normal(f));
        out.push_back(std::move(t));
    }
    return out;
}

namespace {

// Translation derivative of the gravity term. For the wet/dry density the
// reference measure of the wet part weighs rho_w, the rest rho_d.
double effective_weight(const ReferenceMesh& mesh, const DeformationField& y,
                        const DensityModel& density, const FluidEnvironment& fluid, double h) {
    const int dim = mesh.dim;
    double acc = 0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const double vol = mesh.elem_volume[e];
        if (!density.is_porous()) {
            acc += density.element_density(mesh.region_tags[e]) * vol;
            continue;
        }
        auto en = mesh.element_nodes(e);
        double s[4];
        for (int k = 0; k <= dim; ++k)
            s[k] = y.vertical(en[k]) - h;
        auto pieces = clip_simplex_below(dim, s);
        double below = 0;
        for (int p = 0; p < pieces.count; ++p)
            below += vol * piece_measure_fraction(pieces, p);
        acc += density.rho_w * below + density.rho_d * (vol - below);
    }
    return fluid.g * acc;
}

} // namespace

ArchimedesResult archimedes_check(const ReferenceMesh& mesh, const DeformationField& y,
                                  const DensityModel& density, const FluidEnvironment& fluid,
                                  double h, double cavity_volume) {
    ArchimedesResult res;
    res.submerged_volume = submerged_volume(mesh, y, h);
    double displaced = fluid.g * fluid.rho_f * (res.submerged_volume + cavity_volume);
    res.residual = displaced - effective_weight(mesh, y, density, fluid, h);
    res.normalized = res.residual / (fluid.g * fluid.rho_f * mesh.total_volume);
    return res;
}

BuoyancyResult buoyancy_condition(const ReferenceMesh& mesh, const DeformationField& y,
                                  const DensityModel& density, const FluidEnvironment& fluid) {
    BuoyancyResult res;
    double rho_eff = effective_weight(mesh, y, density, fluid, fluid.h)
                     / (fluid.g * mesh.total_volume);
    res.value = fluid.rho_f * mean_jacobian(mesh, y) - rho_eff;
    res.sign = res.value > 0 ? 1 : (res.value < 0 ? -1 : 0);
    return res;
}

EquilibriumResidual equilibrium_residual(const EnergyModel& model, const DeformationField& y,
                                         const std::vector<int>& clamped_nodes) {
    const auto& mesh = model.mesh();
    const int dim = mesh.dim;
    EquilibriumResidual out;

    Eigen::VectorXd g;
    model.gradient(y, g);
    for (int i : clamped_nodes)
        g.segment(std::size_t(i) * dim, dim).setZero();
    out.interior = g.norm();

    // Second route for the hydrostatic part: swap the volumetric assembly for
    // the boundary-traction assembly and measure the disagreement on the
    // boundary nodes. At equilibrium both are bounded by the gradient norm.
    Eigen::VectorXd g_vol = hydrostatic_volume_gradient(mesh, y, model.fluid(), model.waterline());
    Eigen::VectorXd g_trac =
        hydrostatic_traction_forces(mesh, y, model.fluid(), model.waterline());
    Eigen::VectorXd mismatch = g - g_vol + g_trac;
    for (int i : clamped_nodes)
        mismatch.segment(std::size_t(i) * dim, dim).setZero();
    std::vector<std::uint8_t> is_boundary(mesh.n_nodes(), 0);
    for (int f = 0; f < mesh.n_facets(); ++f)
        for (int id : mesh.facet_nodes(f))
            is_boundary[id] = 1;
    double acc = 0;
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (is_boundary[i])
            acc += mismatch.segment(std::size_t(i) * dim, dim).squaredNorm();
    out.traction_mismatch = std::sqrt(acc);
    return out;
}

double fd_gradient_check(const EnergyModel& model, const DeformationField& y, int n_directions,
                         unsigned seed, double step_scale) {
    const double step = step_scale * diameter(model.mesh(), y);
    Eigen::VectorXd g;
    model.gradient(y, g);
    Rng rng(seed);
    double worst = 0;
    for (int t = 0; t < n_directions; ++t) {
        Eigen::VectorXd dir = rng.field(y.x.size(), -1.0, 1.0);
        dir.normalize();
        DeformationField yp = y, ym = y;
        yp.x += step * dir;
        ym.x -= step * dir;
        double fp = model.total_energy(yp);
        double fm = model.total_energy(ym);
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("fd_gradient_check: state too close to inadmissibility");
        double fd = (fp - fm) / (2 * step);
        double an = g.dot(dir);
        double denom = std::max({std::abs(fd), std::abs(an), 1e-12});
        worst = std::max(worst, std::abs(fd - an) / denom);
    }
    return worst;
}

TranslatedIdentityCheck translated_identity_energy_check(const ReferenceMesh& mesh,
                                                         const MaterialParams& material,
                                                         const DensityModel& density,
                                                         const FluidEnvironment& fluid) {
    if (material.mode != MaterialParams::Mode::Compressible)
        throw std::runtime_error("translated identity check needs the compressible material");
    if (density.kind != DensityModel::Kind::Homogeneous)
        throw std::runtime_error("translated identity check needs a homogeneous density");
    const int dim = mesh.dim;

    EnergyModel model(Variant::SplitCompressible, mesh, material, density, fluid);
    const double h = model.waterline();

    DeformationField y = DeformationField::identity(mesh);
    double top = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < y.n_nodes(); ++i)
        top = std::max(top, y.vertical(i));
    const double alpha = h - top;
    for (int i = 0; i < y.n_nodes(); ++i)
        y.x[std::size_t(i) * dim + dim - 1] += alpha;

    Vec xbar = barycenter(mesh, DeformationField::identity(mesh));
    // Volumetric value at the identity vanishes for the normalized barrier.
    Mat I = Mat::Identity(dim, dim);
    double vol_at_identity = energy_density_split(material, I).barrier;

    TranslatedIdentityCheck out;
    out.evaluated = model.total_energy(y);
    out.closed_form = vol_at_identity * mesh.total_volume
                      + fluid.g * (density.rho_s - fluid.rho_f) * (xbar[dim - 1] + alpha)
                            * mesh.total_volume;
    double denom = std::max(std::abs(out.closed_form), 1e-12);
    out.rel_error = std::abs(out.evaluated - out.closed_form) / denom;
    out.pass = out.rel_error <= 1e-10;
    return out;
}

} // namespace floatelast
