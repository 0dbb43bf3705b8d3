#include "floatelast/material.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace floatelast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BarrierCoeffs {
    double tau;     // barrier location
    double off;     // -(1-tau)^{-s}
    double lin;     // s (1-tau)^{-s-1}
};

BarrierCoeffs barrier_coeffs(const MaterialParams& m) {
    double tau = m.tau_shift.value_or(0.0);
    double w = 1.0 - tau;
    return {tau, -std::pow(w, -m.s), m.s * std::pow(w, -m.s - 1.0)};
}

} // namespace

void MaterialParams::validate(int dim) const {
    if (!(a > 0))
        throw std::runtime_error("material: a must be > 0");
    if (!(c1 >= 0))
        throw std::runtime_error("material: c1 must be >= 0");
    if (!(s > 0))
        throw std::runtime_error("material: s must be > 0");
    if (!(b >= 0))
        throw std::runtime_error("material: b must be >= 0");
    if (!(p > dim))
        throw std::runtime_error("material: p must exceed the spatial dimension");
    if (mode == Mode::IncompressiblePenalty && !(kappa >= 0))
        throw std::runtime_error("material: kappa must be >= 0");
    if (tau_shift && !(*tau_shift >= 0 && *tau_shift < 1))
        throw std::runtime_error("material: tau_shift must lie in [0, 1)");
    // Normalization check: the implemented family vanishes at the identity.
    Mat I = Mat::Identity(dim, dim);
    if (std::abs(energy_density(*this, I)) > 1e-12 * (a + c1 + b))
        throw std::runtime_error("material: W(I) != 0");
}

EnergySplit energy_density_split(const MaterialParams& m, const Mat& F) {
    if (!F.allFinite())
        throw std::runtime_error("energy_density: non-finite deformation gradient");
    const int d = int(F.rows());
    const double J = det(F);
    const auto bc = barrier_coeffs(m);
    EnergySplit out;
    if (J <= bc.tau) {
        out.core = kInf;
        out.barrier = kInf;
        return out;
    }
    const double frob2 = F.squaredNorm();
    const double dph = std::pow(double(d), 0.5 * m.p);        // d^{p/2}
    const double k = m.p * std::pow(double(d), 0.5 * (m.p - 2)); // p d^{(p-2)/2}
    out.core = m.a * (std::pow(frob2, 0.5 * m.p) - dph - k * (J - 1.0))
             + m.b * (J - 1.0) * (J - 1.0);
    out.barrier = m.c1 * (std::pow(J - bc.tau, -m.s) + bc.off + bc.lin * (J - 1.0));
    return out;
}

double energy_density(const MaterialParams& m, const Mat& F) {
    return energy_density_split(m, F).total();
}

Mat stress(const MaterialParams& m, const Mat& F) {
    const int d = int(F.rows());
    const double J = det(F);
    const auto bc = barrier_coeffs(m);
    if (J <= bc.tau)
        throw std::runtime_error("stress: det F out of the admissible range");
    const double frob2 = F.squaredNorm();
    const double k = m.p * std::pow(double(d), 0.5 * (m.p - 2));
    // dW/dJ collects the barrier, the volumetric term and the compensation.
    double dWdJ = -m.a * k + 2.0 * m.b * (J - 1.0)
                + m.c1 * (bc.lin - m.s * std::pow(J - bc.tau, -m.s - 1.0));
    return m.a * m.p * std::pow(frob2, 0.5 * m.p - 1.0) * F + dWdJ * cofactor(F);
}

double incompressibility_penalty(const MaterialParams& m, double J) {
    return m.kappa * (J - 1.0) * (J - 1.0);
}

double incompressibility_penalty_dJ(const MaterialParams& m, double J) {
    return 2.0 * m.kappa * (J - 1.0);
}

double polyconvex_density(const MaterialParams& m, int dim, const Mat& F, double J) {
    const auto bc = barrier_coeffs(m);
    if (J <= bc.tau)
        return kInf;
    const double frob2 = F.squaredNorm();
    const double dph = std::pow(double(dim), 0.5 * m.p);
    const double k = m.p * std::pow(double(dim), 0.5 * (m.p - 2));
    return m.a * (std::pow(frob2, 0.5 * m.p) - dph - k * (J - 1.0))
         + m.b * (J - 1.0) * (J - 1.0)
         + m.c1 * (std::pow(J - bc.tau, -m.s) + bc.off + bc.lin * (J - 1.0));
}

double coercivity_floor_constant(const MaterialParams& m, int dim) {
    if (m.tau_shift && *m.tau_shift != 0.0)
        throw std::runtime_error("coercivity floor: defined for the unshifted barrier only");
    const double k = m.p * std::pow(double(dim), 0.5 * (m.p - 2));
    const double base = m.a * std::pow(double(dim), 0.5 * m.p) + m.c1 * (m.s + 1.0);
    const double slope = m.c1 * m.s - m.a * k; // linear-in-J remainder
    if (slope >= 0)
        return base;
    if (m.b > 0)
        return base + slope * slope / (4.0 * m.b);
    throw std::runtime_error("coercivity floor: needs c1 s >= a p d^{(p-2)/2} or b > 0");
}

void DensityModel::validate() const {
    switch (kind) {
    case Kind::Homogeneous:
        if (!(rho_s > 0))
            throw std::runtime_error("density: rho_s must be > 0");
        break;
    case Kind::HullBallast:
        if (!(rho_h > 0) || !(rho_b >= 0))
            throw std::runtime_error("density: rho_h must be > 0 and rho_b >= 0");
        break;
    case Kind::WetDry:
        if (!(rho_w > 0) || !(rho_d > 0))
            throw std::runtime_error("density: wet/dry densities must be > 0");
        break;
    }
}

double DensityModel::element_density(const std::string& tag) const {
    switch (kind) {
    case Kind::Homogeneous:
        return rho_s;
    case Kind::HullBallast:
        if (tag == "hull")
            return rho_h;
        if (tag == "ballast")
            return rho_b;
        throw std::runtime_error("density: hull_ballast mesh has untagged region '" + tag + "'");
    case Kind::WetDry:
        throw std::runtime_error("density: wet_dry has no per-element density");
    }
    return 0;
}

} // namespace floatelast
