#pragma once

#include <span>
#include <vector>

#include "dmfem/geometry.hpp"
#include "dmfem/mesh.hpp"

namespace dmfem {

/// Linear polynomial value + gradient . (x - anchor).
struct LinearPiece {
    Point2 anchor;
    double value = 0.0;
    Point2 gradient;

    double operator()(Point2 x) const { return value + dot(gradient, x - anchor); }
};

/// One linear polynomial per cell. Not necessarily continuous across facets,
/// so it can hold post-processed solutions.
class PiecewiseLinearField {
public:
    PiecewiseLinearField() = default;
    explicit PiecewiseLinearField(std::vector<LinearPiece> pieces) : pieces_(std::move(pieces)) {}

    /// The continuous P1 interpolant of nodal values on the full vertex set.
    static PiecewiseLinearField from_nodal(const Mesh& mesh, std::span<const double> nodal);

    std::size_t size() const noexcept { return pieces_.size(); }
    const LinearPiece& piece(Index cell) const { return pieces_[cell]; }
    LinearPiece& piece(Index cell) { return pieces_[cell]; }

    double value(Index cell, Point2 x) const { return pieces_[cell](x); }
    Point2 gradient(Index cell) const { return pieces_[cell].gradient; }

private:
    std::vector<LinearPiece> pieces_;
};

/// Linear polynomial through the nodal values of one cell.
LinearPiece cell_polynomial(const Mesh& mesh, Index cell, std::span<const double> nodal);

}  // namespace dmfem
