#pragma once

#include "floatelast/core.hpp"

#include <optional>
#include <string>

namespace floatelast {

/// Stored-energy density
///
///   W(F) = a (|F|^p - d^{p/2} - p d^{(p-2)/2} (J - 1))
///        + c1 ((J - t)^{-s} - (1 - t)^{-s} + s (1 - t)^{-s-1} (J - 1))
///        + b (J - 1)^2,      J = det F,  t = tau_shift (0 by default).
///
/// Each summand is a convex function of (F, det F) and vanishes at F = I with
/// zero slope, so W >= 0 on GL+, W(I) = 0 and DW(I) = 0. The linear J term in
/// the first group cancels the |F|^p slope at the identity; without it the
/// reference configuration carries spurious stress. W depends on F only
/// through |F| and det F, hence is frame indifferent and isotropic. W = +inf
/// for J <= tau_shift.
struct MaterialParams {
    double a = 1;     // elastic scale
    double p = 4;     // growth exponent, > dim
    double c1 = 1;    // compression barrier scale, >= 0
    double s = 2;     // compression exponent, > 0
    double b = 0;     // volumetric stiffness, >= 0
    enum class Mode { Compressible, IncompressiblePenalty } mode = Mode::Compressible;
    double kappa = 0; // incompressibility penalty weight
    std::optional<double> tau_shift; // barrier at J = tau instead of J = 0

    void validate(int dim) const; // throws on violated parameter bounds
};

struct EnergySplit {
    double core = 0;    // a- and b-groups
    double barrier = 0; // c1-group
    double total() const { return core + barrier; }
};

double energy_density(const MaterialParams& m, const Mat& F);
EnergySplit energy_density_split(const MaterialParams& m, const Mat& F);

/// First Piola-Kirchhoff stress P = DW(F). Throws for det F <= tau_shift.
Mat stress(const MaterialParams& m, const Mat& F);

double incompressibility_penalty(const MaterialParams& m, double J);
double incompressibility_penalty_dJ(const MaterialParams& m, double J);

/// The density implied by the polyconvex decomposition W(F) = WW(|F| part, J):
/// same formula with det F replaced by the given J. Used by convexity tests.
double polyconvex_density(const MaterialParams& m, int dim, const Mat& F, double J);

/// Explicit constant C with W(F) >= a |F|^p + c1 J^{-s} - C on GL+, valid in
/// the regime c1 s >= a p d^{(p-2)/2} (or b > 0); throws otherwise.
double coercivity_floor_constant(const MaterialParams& m, int dim);

/// Solid density models: homogeneous, hull/ballast by region tag, or porous
/// wet/dry split at the waterline.
struct DensityModel {
    enum class Kind { Homogeneous, HullBallast, WetDry } kind = Kind::Homogeneous;
    double rho_s = 1;                // homogeneous
    double rho_h = 1, rho_b = 1;     // hull_ballast (rho_b >= 0, air allowed)
    double rho_w = 1, rho_d = 1;     // wet_dry

    void validate() const;
    // Per-element density for the non-porous kinds.
    double element_density(const std::string& region_tag) const;
    bool is_porous() const { return kind == Kind::WetDry; }
};

} // namespace floatelast
