#pragma once

#include <array>

namespace floatelast {

// Half-space clipping of a d-simplex (d = 1, 2, 3) against {s <= 0}, where s
// is the affine function with the given vertex values. The clipped region is
// returned as at most three sub-simplices, each vertex expressed in
// barycentric coordinates of the parent. Quad faces produced by the cut are
// planar, so the decomposition is exact.
struct ClipPieces {
    int dim = 0;
    int count = 0;
    // piece, vertex, parent-vertex weight
    std::array<std::array<std::array<double, 4>, 4>, 3> w{};
};

ClipPieces clip_simplex_below(int dim, const double* vertex_values);

// |det| of the barycentric edge matrix: sub-simplex measure as a fraction of
// the parent measure.
double piece_measure_fraction(const ClipPieces& pieces, int piece);

// Value of the affine interpolant with the given parent-vertex values at a
// piece vertex.
double piece_vertex_value(const ClipPieces& pieces, int piece, int vertex,
                          const double* parent_values);

// Exact integral over a piece of the product of two affine functions, given
// their values at the piece vertices, as a multiple of the piece measure.
double affine_product_mean(int dim, const double* f, const double* g);

} // namespace floatelast
