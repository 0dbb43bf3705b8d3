#include "floatelast/clip.hpp"

#include <cmath>
#include <stdexcept>

namespace floatelast {

namespace {

std::array<double, 4> unit_bary(int k) {
    std::array<double, 4> w{};
    w[k] = 1.0;
    return w;
}

// Intersection point on the edge between vertex below (s_b <= 0) and vertex
// above (s_a > 0), in parent barycentric coordinates.
std::array<double, 4> edge_cut(int below, int above, const double* s) {
    const double t = s[below] / (s[below] - s[above]); // in [0, 1)
    std::array<double, 4> w{};
    w[below] = 1.0 - t;
    w[above] = t;
    return w;
}

} // namespace

ClipPieces clip_simplex_below(int dim, const double* s) {
    ClipPieces out;
    out.dim = dim;
    const int nv = dim + 1;

    int below[4], above[4];
    int nb = 0, na = 0;
    for (int k = 0; k < nv; ++k) {
        if (s[k] <= 0.0)
            below[nb++] = k;
        else
            above[na++] = k;
    }

    if (nb == 0)
        return out;
    if (na == 0) {
        out.count = 1;
        for (int k = 0; k < nv; ++k)
            out.w[0][k] = unit_bary(k);
        return out;
    }

    auto emit = [&](std::array<std::array<double, 4>, 4> verts) {
        out.w[out.count++] = verts;
    };

    if (dim == 1) {
        // nb == 1: segment from the submerged vertex to the cut.
        emit({unit_bary(below[0]), edge_cut(below[0], above[0], s)});
        return out;
    }

    if (dim == 2) {
        if (nb == 1) {
            emit({unit_bary(below[0]), edge_cut(below[0], above[0], s),
                  edge_cut(below[0], above[1], s)});
        } else { // nb == 2, quad split along one diagonal
            auto i0 = edge_cut(below[0], above[0], s);
            auto i1 = edge_cut(below[1], above[0], s);
            emit({unit_bary(below[0]), unit_bary(below[1]), i1});
            emit({unit_bary(below[0]), i1, i0});
        }
        return out;
    }

    if (dim == 3) {
        if (nb == 1) {
            emit({unit_bary(below[0]), edge_cut(below[0], above[0], s),
                  edge_cut(below[0], above[1], s), edge_cut(below[0], above[2], s)});
            return out;
        }
        // Remaining cases are wedges: two triangles with matched vertices.
        std::array<std::array<double, 4>, 3> t0, t1;
        if (nb == 2) {
            t0 = {unit_bary(below[0]), edge_cut(below[0], above[0], s),
                  edge_cut(below[0], above[1], s)};
            t1 = {unit_bary(below[1]), edge_cut(below[1], above[0], s),
                  edge_cut(below[1], above[1], s)};
        } else { // nb == 3
            t0 = {unit_bary(below[0]), unit_bary(below[1]), unit_bary(below[2])};
            t1 = {edge_cut(below[0], above[0], s), edge_cut(below[1], above[0], s),
                  edge_cut(below[2], above[0], s)};
        }
        emit({t0[0], t0[1], t0[2], t1[0]});
        emit({t0[1], t0[2], t1[0], t1[1]});
        emit({t0[2], t1[0], t1[1], t1[2]});
        return out;
    }

    throw std::invalid_argument("clip_simplex_below: dim must be 1, 2 or 3");
}

double piece_measure_fraction(const ClipPieces& p, int piece) {
    const int d = p.dim;
    const auto& v = p.w[piece];
    // Barycentric edge vectors, components 1..d (component 0 is dependent).
    double m[3][3];
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            m[j][k] = v[j + 1][k + 1] - v[0][k + 1];
    double dt = 0;
    if (d == 1)
        dt = m[0][0];
    else if (d == 2)
        dt = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    else
        dt = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
           - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
           + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    return std::abs(dt);
}

double piece_vertex_value(const ClipPieces& p, int piece, int vertex,
                          const double* parent_values) {
    double v = 0;
    for (int k = 0; k <= p.dim; ++k)
        v += p.w[piece][vertex][k] * parent_values[k];
    return v;
}

double affine_product_mean(int dim, const double* f, const double* g) {
    const int n = dim + 1;
    double sum_fg = 0, sum_f = 0, sum_g = 0;
    for (int i = 0; i < n; ++i) {
        sum_fg += f[i] * g[i];
        sum_f += f[i];
        sum_g += g[i];
    }
    // From int_T phi_i phi_j = |T| (1 + delta_ij) / ((d+1)(d+2)).
    return (sum_fg + sum_f * sum_g) / double(n * (n + 1));
}

} // namespace floatelast
