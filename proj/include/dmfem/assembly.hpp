#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "dmfem/mesh.hpp"
#include "dmfem/quadrature.hpp"
#include "dmfem/sparse.hpp"

namespace dmfem {

using LocalMatrix = std::array<std::array<double, 3>, 3>;

/// Constant gradients of the three P1 basis functions of a triangle.
std::array<Point2, 3> basis_gradients(const std::array<Point2, 3>& p);

/// area * G^T G in closed form; exact for any cell shape.
LocalMatrix local_stiffness(const std::array<Point2, 3>& p);
LocalMatrix local_stiffness(const Mesh& mesh, Index cell);

/// (area / 12) [[2,1,1],[1,2,1],[1,1,2]]
LocalMatrix local_mass(const std::array<Point2, 3>& p);
LocalMatrix local_mass(const Mesh& mesh, Index cell);

using CellFilter = std::function<bool(Index)>;
using CellScale = std::function<double(Index)>;

/// Sum of scaled local stiffness matrices over the accepted cells, on the
/// full vertex numbering. An empty filter accepts every cell; an empty scale
/// means 1. Cells are visited in index order so the result is exactly
/// symmetric.
CsrMatrix assemble_stiffness(const Mesh& mesh, const CellFilter& filter = {}, const CellScale& scale = {});

CsrMatrix assemble_mass(const Mesh& mesh, const CellFilter& filter = {}, const CellScale& scale = {});

/// b_i = sum_K int_K f phi_i. Requires a rule of degree >= 4.
DenseVector assemble_load(const Mesh& mesh, const ScalarField& f,
                          const QuadratureRule& rule = quadrature_rule(kLoadQuadratureDegree));

/// Interior (non-boundary) vertices numbered consecutively.
struct DofMap {
    std::vector<Index> interior_of_full;  // reduced index -> vertex
    std::vector<Index> full_to_reduced;   // vertex -> reduced index, kNoCell on the boundary

    std::size_t num_reduced() const noexcept { return interior_of_full.size(); }
    std::size_t num_full() const noexcept { return full_to_reduced.size(); }

    DenseVector restrict_vector(std::span<const double> full) const;
    /// Zero on boundary vertices.
    DenseVector extend_vector(std::span<const double> reduced) const;
};

DofMap make_dof_map(const Mesh& mesh);

/// Rows and columns of the interior dofs.
CsrMatrix restrict_matrix(const CsrMatrix& a, const DofMap& dofs);

struct ReducedSystem {
    CsrMatrix matrix;
    DenseVector rhs;
    DofMap dofs;
};

/// Homogeneous Dirichlet data by elimination of the boundary vertices.
ReducedSystem apply_dirichlet(const CsrMatrix& a, std::span<const double> b, const Mesh& mesh);

}  // namespace dmfem
