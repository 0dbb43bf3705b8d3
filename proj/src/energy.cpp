#include "floatelast/energy.hpp"

#include "floatelast/clip.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace floatelast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pow_r(double x, double r) { return std::pow(x, r); }

} // namespace

const char* to_string(Variant v) {
    switch (v) {
    case Variant::Basic: return "basic";
    case Variant::SplitCompressible: return "split_compressible";
    case Variant::Submarine: return "submarine";
    case Variant::Reservoir: return "reservoir";
    case Variant::Ship: return "ship";
    }
    return "?";
}

void AnchorSpec::validate(const ReferenceMesh& mesh) const {
    switch (kind) {
    case Kind::None:
        return;
    case Kind::Clamped:
    case Kind::Inextensible:
        if (nodes.empty())
            throw std::runtime_error("anchor: node set must be nonempty");
        for (int i : nodes)
            if (i < 0 || i >= mesh.n_nodes())
                throw std::runtime_error("anchor: node id out of range");
        if (kind == Kind::Inextensible && !(lambda > 0))
            throw std::runtime_error("anchor: inextensible length must be > 0");
        break;
    case Kind::ElasticBoundary:
    case Kind::SlackCable: {
        if (facets.empty())
            throw std::runtime_error("anchor: facet set must be nonempty");
        double area = 0;
        for (int f : facets) {
            if (f < 0 || f >= mesh.n_facets())
                throw std::runtime_error("anchor: facet id out of range");
            area += mesh.facet_area[f];
        }
        if (!(area > 0))
            throw std::runtime_error("anchor: facet set has zero measure");
        if (!(c3 >= 0))
            throw std::runtime_error("anchor: c3 must be >= 0");
        if (!(r > 1))
            throw std::runtime_error("anchor: exponent r must exceed 1");
        if (kind == Kind::SlackCable && !(lambda >= 0))
            throw std::runtime_error("anchor: cable length must be >= 0");
        break;
    }
    }
}

double elastic_energy(const ReferenceMesh& mesh, const MaterialParams& mat,
                      const DeformationField& y) {
    double acc = 0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        double w = energy_density(mat, deformation_gradient(mesh, y, e));
        if (!std::isfinite(w))
            return kInf;
        acc += mesh.elem_volume[e] * w;
    }
    return acc;
}

double gravity_energy(const ReferenceMesh& mesh, const DensityModel& density,
                      const DeformationField& y, double g, double h) {
    const int dim = mesh.dim;
    double acc = 0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        auto en = mesh.element_nodes(e);
        double mean_v = 0;
        for (int k = 0; k <= dim; ++k)
            mean_v += y.vertical(en[k]);
        mean_v /= double(dim + 1);
        if (!density.is_porous()) {
            acc += density.element_density(mesh.region_tags[e]) * mesh.elem_volume[e] * mean_v;
            continue;
        }
        // Wet/dry: -rho_w y_v^- + rho_d y_v^+ split at the waterline, exact
        // clipped integration of the piecewise-affine integrand.
        double s[4];
        for (int k = 0; k <= dim; ++k)
            s[k] = y.vertical(en[k]) - h;
        auto pieces = clip_simplex_below(dim, s);
        double below_int = 0, below_vol = 0; // integral of y_v and measure below
        for (int p = 0; p < pieces.count; ++p) {
            double frac = piece_measure_fraction(pieces, p);
            double mean = 0;
            for (int v = 0; v <= dim; ++v)
                mean += piece_vertex_value(pieces, p, v, s) + h;
            mean /= double(dim + 1);
            below_int += mesh.elem_volume[e] * frac * mean;
            below_vol += mesh.elem_volume[e] * frac;
        }
        double total_int = mesh.elem_volume[e] * mean_v;
        acc += density.rho_w * below_int + density.rho_d * (total_int - below_int);
    }
    return g * acc;
}

double anchor_energy(const AnchorSpec& anchor, const ReferenceMesh& mesh,
                     const DeformationField& y) {
    if (anchor.kind != AnchorSpec::Kind::ElasticBoundary
        && anchor.kind != AnchorSpec::Kind::SlackCable)
        return 0; // clamped / inextensible act as constraints
    const int dim = mesh.dim;
    const double lam_r = pow_r(anchor.lambda, anchor.r);
    double acc = 0;
    for (int f : anchor.facets) {
        auto fn = mesh.facet_nodes(f);
        double quad = 0; // vertex rule
        for (int k = 0; k < dim; ++k) {
            Vec d = y.node(fn[k]) - anchor.target(mesh.node_pos(fn[k]));
            double v = pow_r(d.norm(), anchor.r);
            if (anchor.kind == AnchorSpec::Kind::SlackCable)
                v = std::max(0.0, v - lam_r);
            quad += v;
        }
        acc += mesh.facet_area[f] * quad / double(dim);
    }
    return anchor.c3 * acc;
}

Eigen::VectorXd hydrostatic_traction_forces(const ReferenceMesh& mesh, const DeformationField& y,
                                            const FluidEnvironment& fluid, double h,
                                            const std::vector<std::uint8_t>* facet_mask) {
    const int dim = mesh.dim;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(y.x.size());
    const double grf = fluid.g * fluid.rho_f;
    for (int f = 0; f < mesh.n_facets(); ++f) {
        if (facet_mask && !(*facet_mask)[f])
            continue;
        auto fn = mesh.facet_nodes(f);
        double s[3];
        bool any_below = false;
        for (int k = 0; k < dim; ++k) {
            s[k] = y.vertical(fn[k]) - h;
            any_below = any_below || s[k] < 0;
        }
        if (!any_below)
            continue;
        const int owner = mesh.boundary_owner[f];
        Mat cof = cofactor(deformation_gradient(mesh, y, owner));
        Vec cofN = cof * mesh.facet_unit_normal(f);
        auto pieces = clip_simplex_below(dim - 1, s);
        for (int p = 0; p < pieces.count; ++p) {
            double measure = mesh.facet_area[f] * piece_measure_fraction(pieces, p);
            double depth[3], phi[3];
            for (int v = 0; v < dim; ++v)
                depth[v] = -piece_vertex_value(pieces, p, v, s);
            for (int k = 0; k < dim; ++k) {
                // Basis function of facet node k at the piece vertices.
                for (int v = 0; v < dim; ++v)
                    phi[v] = pieces.w[p][v][k];
                double mean = affine_product_mean(dim - 1, depth, phi);
                // Gradient contribution of the hydrostatic energy; the force
                // on the body is the negative of this.
                out.segment(std::size_t(fn[k]) * dim, dim) += grf * measure * mean * cofN;
            }
        }
    }
    return out;
}

Eigen::VectorXd hydrostatic_volume_gradient(const ReferenceMesh& mesh, const DeformationField& y,
                                            const FluidEnvironment& fluid, double h) {
    const int dim = mesh.dim;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(y.x.size());
    const double grf = fluid.g * fluid.rho_f;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        auto en = mesh.element_nodes(e);
        double s[4];
        bool any_below = false;
        for (int k = 0; k <= dim; ++k) {
            s[k] = y.vertical(en[k]) - h;
            any_below = any_below || s[k] < 0;
        }
        if (!any_below)
            continue;
        Mat F = deformation_gradient(mesh, y, e);
        double J = det(F);
        if (J <= 0)
            throw std::runtime_error("hydrostatic gradient: inverted element "
                                     + std::to_string(e));
        Mat cof = cofactor(F);
        const double vol = mesh.elem_volume[e];
        auto pieces = clip_simplex_below(dim, s);
        double phi_int[4] = {0, 0, 0, 0};
        double depth_int = 0;
        for (int p = 0; p < pieces.count; ++p) {
            double frac = piece_measure_fraction(pieces, p);
            double mean_depth = 0;
            for (int v = 0; v <= dim; ++v)
                mean_depth -= piece_vertex_value(pieces, p, v, s);
            depth_int += vol * frac * mean_depth / double(dim + 1);
            for (int k = 0; k <= dim; ++k) {
                double mean_phi = 0;
                for (int v = 0; v <= dim; ++v)
                    mean_phi += pieces.w[p][v][k];
                phi_int[k] += vol * frac * mean_phi / double(dim + 1);
            }
        }
        for (int k = 0; k <= dim; ++k) {
            Vec contrib = grf * depth_int * (cof * mesh.basis_grad(e, k));
            contrib[dim - 1] -= grf * J * phi_int[k];
            out.segment(std::size_t(en[k]) * dim, dim) += contrib;
        }
    }
    return out;
}

EnergyModel::EnergyModel(Variant variant, const ReferenceMesh& mesh, MaterialParams material,
                         DensityModel density, FluidEnvironment fluid, AnchorSpec anchor)
    : variant_(variant), mesh_(&mesh), material_(std::move(material)),
      density_(std::move(density)), fluid_(std::move(fluid)), anchor_(std::move(anchor)) {
    material_.validate(mesh.dim);
    density_.validate();
    fluid_.validate();
    anchor_.validate(mesh);
    h_ = fluid_.h;
    if (material_.mode == MaterialParams::Mode::IncompressiblePenalty)
        kappa_ = material_.kappa;
    elastic_elem_.assign(mesh.n_elements(), 1);
    if (variant_ == Variant::Submarine) {
        if (density_.kind != DensityModel::Kind::HullBallast)
            throw std::runtime_error("submarine variant needs a hull_ballast density model");
        for (int e = 0; e < mesh.n_elements(); ++e)
            elastic_elem_[e] = mesh.region_tags[e] == "hull";
    }
    if (variant_ == Variant::Reservoir && !fluid_.reservoir)
        throw std::runtime_error("reservoir variant needs reservoir geometry");
}

EnergyBreakdown EnergyModel::energy(const DeformationField& y) const {
    const auto& mesh = *mesh_;
    const int dim = mesh.dim;
    EnergyBreakdown out;

    double mean_J = 0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        Mat F = deformation_gradient(mesh, y, e);
        double J = det(F);
        mean_J += mesh.elem_volume[e] * J;
        if (elastic_elem_[e]) {
            EnergySplit w = energy_density_split(material_, F);
            if (!std::isfinite(w.total())) {
                out.elastic = kInf;
                out.total = kInf;
                return out;
            }
            if (variant_ == Variant::SplitCompressible) {
                out.elastic += mesh.elem_volume[e] * w.core;
                out.penalty += mesh.elem_volume[e] * w.barrier;
            } else {
                out.elastic += mesh.elem_volume[e] * w.total();
            }
        }
        if (kappa_ > 0)
            out.penalty += mesh.elem_volume[e] * kappa_ * (J - 1.0) * (J - 1.0);
    }
    mean_J /= mesh.total_volume;
    if (meanJ_weight_ > 0 && mean_J < meanJ_tau_) {
        double gap = meanJ_tau_ - mean_J;
        out.penalty += meanJ_weight_ * gap * gap;
    }

    out.hydrostatic = hydrostatic_integral_lagrangian(mesh, y, fluid_, h_);
    if (variant_ == Variant::Ship)
        out.hydrostatic += cavity_energy_fresh(y);
    out.gravity = gravity_energy(mesh, density_, y, fluid_.g, h_);
    out.anchor = anchor_energy(anchor_, mesh, y);
    out.total = out.elastic + out.hydrostatic + out.gravity + out.anchor + out.penalty;
    return out;
}

double EnergyModel::cavity_energy_fresh(const DeformationField& y) const {
    CavitySet cav = cavity_set(*mesh_, y, h_, grid_res_);
    return fluid_.g * fluid_.rho_f * cav.depth_integral;
}

void EnergyModel::gradient(const DeformationField& y, Eigen::VectorXd& out) const {
    const auto& mesh = *mesh_;
    const int dim = mesh.dim;
    out.setZero(y.x.size());

    double mean_J = 0;
    if (meanJ_weight_ > 0)
        for (int e = 0; e < mesh.n_elements(); ++e)
            mean_J += mesh.elem_volume[e] * det(deformation_gradient(mesh, y, e));
    mean_J /= mesh.total_volume;
    const double meanJ_coef = (meanJ_weight_ > 0 && mean_J < meanJ_tau_)
                                  ? -2.0 * meanJ_weight_ * (meanJ_tau_ - mean_J) / mesh.total_volume
                                  : 0.0;

    for (int e = 0; e < mesh.n_elements(); ++e) {
        auto en = mesh.element_nodes(e);
        Mat F = deformation_gradient(mesh, y, e);
        double J = det(F);
        if (J <= 0)
            throw std::runtime_error("gradient: inverted element " + std::to_string(e));
        Mat cof = cofactor(F);
        const double vol = mesh.elem_volume[e];

        Mat P = Mat::Zero(dim, dim);
        if (elastic_elem_[e])
            P = stress(material_, F);
        const double dJ_coef = vol * (2.0 * kappa_ * (J - 1.0) + meanJ_coef);

        // Gravity (linear in nodal heights for the non-porous models).
        double grav_node[4];
        if (!density_.is_porous()) {
            double rho = density_.element_density(mesh.region_tags[e]);
            for (int k = 0; k <= dim; ++k)
                grav_node[k] = fluid_.g * rho * vol / double(dim + 1);
        } else {
            double s[4];
            for (int k = 0; k <= dim; ++k)
                s[k] = y.vertical(en[k]) - h_;
            auto pieces = clip_simplex_below(dim, s);
            double below_phi[4] = {0, 0, 0, 0};
            for (int p = 0; p < pieces.count; ++p) {
                double frac = piece_measure_fraction(pieces, p);
                for (int k = 0; k <= dim; ++k) {
                    double mean = 0;
                    for (int v = 0; v <= dim; ++v)
                        mean += pieces.w[p][v][k];
                    below_phi[k] += vol * frac * mean / double(dim + 1);
                }
            }
            for (int k = 0; k <= dim; ++k) {
                double total_phi = vol / double(dim + 1);
                grav_node[k] = fluid_.g * (density_.rho_w * below_phi[k]
                                           + density_.rho_d * (total_phi - below_phi[k]));
            }
        }

        for (int k = 0; k <= dim; ++k) {
            Vec g = mesh.basis_grad(e, k);
            Vec contrib = Vec::Zero(dim);
            if (elastic_elem_[e])
                contrib += vol * (P * g);
            if (dJ_coef != 0)
                contrib += dJ_coef * (cof * g);
            contrib[dim - 1] += grav_node[k];
            out.segment(std::size_t(en[k]) * dim, dim) += contrib;
        }
    }

    if (variant_ != Variant::Ship) {
        out += hydrostatic_volume_gradient(mesh, y, fluid_, h_);
    } else {
        if (!ship_)
            throw std::runtime_error("ship gradient: refresh_ship_cache has not run");
        out += hydrostatic_traction_forces(mesh, y, fluid_, h_, &ship_->facet_wet);
    }

    // Anchor terms (elastic boundary / slack cable).
    if (anchor_.kind == AnchorSpec::Kind::ElasticBoundary
        || anchor_.kind == AnchorSpec::Kind::SlackCable) {
        const double lam_r = pow_r(anchor_.lambda, anchor_.r);
        for (int f : anchor_.facets) {
            auto fn = mesh.facet_nodes(f);
            for (int k = 0; k < dim; ++k) {
                Vec d = y.node(fn[k]) - anchor_.target(mesh.node_pos(fn[k]));
                double nd = d.norm();
                if (nd == 0)
                    continue;
                if (anchor_.kind == AnchorSpec::Kind::SlackCable && pow_r(nd, anchor_.r) <= lam_r)
                    continue;
                double coef = anchor_.c3 * mesh.facet_area[f] / double(dim) * anchor_.r
                              * pow_r(nd, anchor_.r - 2.0);
                out.segment(std::size_t(fn[k]) * dim, dim) += coef * d;
            }
        }
    }
}

void EnergyModel::refresh_ship_cache(const DeformationField& y) {
    if (variant_ != Variant::Ship)
        return;
    auto cache = std::make_shared<ShipCache>();
    cache->cavity = cavity_set(*mesh_, y, h_, grid_res_);
    cache->cavity_energy = fluid_.g * fluid_.rho_f * cache->cavity.depth_integral;

    const auto& grid = cache->cavity.grid;
    const int dim = mesh_->dim;
    cache->facet_wet.assign(mesh_->n_facets(), 0);
    for (int f = 0; f < mesh_->n_facets(); ++f) {
        auto fn = mesh_->facet_nodes(f);
        Vec c = Vec::Zero(dim);
        for (int k = 0; k < dim; ++k)
            c += y.node(fn[k]);
        c /= double(dim);
        if (c[dim - 1] > h_ + grid.cell) {
            cache->facet_wet[f] = 1; // above water; traction vanishes anyway
            continue;
        }
        Mat cof = cofactor(deformation_gradient(*mesh_, y, mesh_->boundary_owner[f]));
        Vec n = cof * mesh_->facet_unit_normal(f);
        double nn = n.norm();
        if (nn == 0) {
            cache->facet_wet[f] = 1;
            continue;
        }
        n /= nn;
        // Probe outward past the rasterized wall skin.
        Occupancy seen = Occupancy::Unknown;
        for (double step : {1.5, 3.0, 5.0}) {
            Vec probe = c + step * grid.cell * n;
            int idx[3] = {0, 0, 0};
            bool in = true;
            for (int k = 0; k < dim; ++k) {
                idx[k] = int(std::floor((probe[k] - grid.origin[k]) / grid.cell));
                in = in && idx[k] >= 0 && idx[k] < grid.n[k];
            }
            if (!in) {
                seen = Occupancy::Fluid; // outside the grid counts as open water
                break;
            }
            auto lab = Occupancy(grid.label[grid.index(idx[0], idx[1], idx[2])]);
            if (lab != Occupancy::Body) {
                seen = lab;
                break;
            }
        }
        cache->facet_wet[f] = seen != Occupancy::Cavity;
    }
    ship_ = std::move(cache);
}

double EnergyModel::solid_weight(const DeformationField& y) const {
    const auto& mesh = *mesh_;
    const int dim = mesh.dim;
    double acc = 0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!density_.is_porous()) {
            acc += density_.element_density(mesh.region_tags[e]) * mesh.elem_volume[e];
            continue;
        }
        double s[4];
        auto en = mesh.element_nodes(e);
        for (int k = 0; k <= dim; ++k)
            s[k] = y.vertical(en[k]) - h_;
        auto pieces = clip_simplex_below(dim, s);
        double below = 0;
        for (int p = 0; p < pieces.count; ++p)
            below += mesh.elem_volume[e] * piece_measure_fraction(pieces, p);
        acc += density_.rho_w * below + density_.rho_d * (mesh.elem_volume[e] - below);
    }
    return fluid_.g * acc;
}

double EnergyModel::descent_derivative(const DeformationField& y) const {
    double displaced = submerged_volume(*mesh_, y, h_);
    if (variant_ == Variant::Ship && ship_)
        displaced += ship_->cavity.volume;
    return fluid_.g * fluid_.rho_f * displaced - solid_weight(y);
}

} // namespace floatelast
