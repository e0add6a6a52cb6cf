#include "dmfem/field.hpp"

#include "dmfem/assembly.hpp"
#include "dmfem/errors.hpp"

namespace dmfem {

LinearPiece cell_polynomial(const Mesh& mesh, Index cell, std::span<const double> nodal) {
    const auto p = mesh.cell_points(cell);
    const auto g = basis_gradients(p);
    const auto& v = mesh.cells()[cell].v;
    LinearPiece piece;
    piece.anchor = {(p[0].x + p[1].x + p[2].x) / 3.0, (p[0].y + p[1].y + p[2].y) / 3.0};
    piece.value = (nodal[v[0]] + nodal[v[1]] + nodal[v[2]]) / 3.0;
    for (int k = 0; k < 3; ++k) piece.gradient = piece.gradient + nodal[v[k]] * g[k];
    return piece;
}

PiecewiseLinearField PiecewiseLinearField::from_nodal(const Mesh& mesh, std::span<const double> nodal) {
    if (nodal.size() != mesh.num_vertices()) throw InvalidArgument("nodal vector has wrong size");
    std::vector<LinearPiece> pieces;
    pieces.reserve(mesh.num_cells());
    for (Index c = 0; c < mesh.num_cells(); ++c) pieces.push_back(cell_polynomial(mesh, c, nodal));
    return PiecewiseLinearField(std::move(pieces));
}

}  // namespace dmfem
