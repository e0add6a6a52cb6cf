#pragma once

#include <array>
#include <span>
#include <vector>

#include "dmfem/field.hpp"
#include "dmfem/mesh.hpp"
#include "dmfem/sparse.hpp"

namespace dmfem {

/// Nodal form of the patch extension on P1 functions: the identity except on
/// patch apex rows, which hold the barycentric coordinates of the apex with
/// respect to the regular cell (an extrapolation, so one weight is negative).
struct ExtensionOperator {
    CsrMatrix matrix;
    std::vector<Index> modified_rows;  // apex vertices, one per patch

    DenseVector apply(std::span<const double> nodal) const { return matrix * nodal; }
};

/// Throws InvalidPatchError when a regular cell is flat or patches share
/// apex / regular-cell vertices (the operator would not be a projection).
ExtensionOperator extension_operator(const Mesh& mesh, std::span<const Patch> patches);

/// 2 n^2 / ((n + 1)(n + 2)) for space dimension n.
double kappa_n(int dim);

struct PatchCoefficients {
    double deg_area = 0.0;
    double nd_area = 0.0;
    double area_ratio = 0.0;     // |P| / |K_nd|
    double facet_length = 0.0;   // |F|
    double sliver_height = 0.0;  // distance from the apex to the facet line
    double penalty_coef = 0.0;   // kappa_2 |K_deg|^3 / (h_P^2 |F|^2)
};

PatchCoefficients patch_coefficients(const Mesh& mesh, const Patch& patch);

/// Gradient-jump penalty on the facet of one patch, over the dofs
/// (facet_v0, facet_v1, apex, opposite).
struct JumpPenalty {
    std::array<Index, 4> dofs{};
    std::array<std::array<double, 4>, 4> matrix{};
};

JumpPenalty jump_penalty_local(const Mesh& mesh, const Patch& patch);

/// The three matrices the operator form is built from, on full vertex numbering.
struct StabilizedPieces {
    CsrMatrix outside_stiffness;  // cells outside every patch
    CsrMatrix patch_stiffness;    // both cells of every patch
    CsrMatrix patch_mass;         // patch mass, scaled by 1 / h_P^2 per patch
};

StabilizedPieces stabilized_pieces(const Mesh& mesh, std::span<const Patch> patches);

/// A_out + E^T A_P E + (I - E)^T M_P (I - E).
CsrMatrix assemble_stabilized_operator_form(const StabilizedPieces& pieces, const ExtensionOperator& extension);
CsrMatrix assemble_stabilized_operator_form(const Mesh& mesh, std::span<const Patch> patches);

/// A_out + sum |P|/|K_nd| A_{K_nd} + sum of facet jump penalties.
CsrMatrix assemble_stabilized_jump_form(const Mesh& mesh, std::span<const Patch> patches);

/// The discrete solution on regular cells, and on both cells of each patch
/// the polynomial of the regular cell extended over the patch.
PiecewiseLinearField postprocess_extend(const Mesh& mesh, std::span<const double> nodal,
                                        std::span<const Patch> patches);

/// sqrt(v^T A_h v); throws AssemblyError if the form is negative beyond -1e-12.
double triple_norm(std::span<const double> v, const CsrMatrix& a_h);

}  // namespace dmfem
