#include "dmfem/stabilized.hpp"

#include <cmath>
#include <sstream>

#include "dmfem/assembly.hpp"
#include "dmfem/errors.hpp"

namespace dmfem {

namespace {

// patch index per cell, patches.size() for cells outside every patch
std::vector<std::size_t> patch_of_cell(const Mesh& mesh, std::span<const Patch> patches) {
    std::vector<std::size_t> owner(mesh.num_cells(), patches.size());
    for (std::size_t k = 0; k < patches.size(); ++k) {
        for (Index c : patches[k].cells()) {
            if (c >= mesh.num_cells()) throw InvalidPatchError("patch cell out of range");
            if (owner[c] != patches.size()) throw InvalidPatchError("cell belongs to two patches");
            owner[c] = k;
        }
    }
    return owner;
}

// Local position of a vertex inside a cell, -1 if absent.
int local_index(const Cell& cell, Index v) {
    for (int k = 0; k < 3; ++k) {
        if (cell.v[k] == v) return k;
    }
    return -1;
}

}  // namespace

ExtensionOperator extension_operator(const Mesh& mesh, std::span<const Patch> patches) {
    const std::size_t nv = mesh.num_vertices();
    std::vector<std::uint8_t> role(nv, 0);  // 1: apex, 2: regular-cell vertex
    for (const auto& p : patches) {
        if (p.apex_vertex >= nv || role[p.apex_vertex] != 0) {
            throw InvalidPatchError("apex vertex shared between patches");
        }
        role[p.apex_vertex] = 1;
    }
    for (const auto& p : patches) {
        for (Index v : mesh.cells()[p.nd_cell].v) {
            if (role[v] == 1) throw InvalidPatchError("regular cell of a patch touches an apex vertex");
            role[v] = 2;
        }
    }

    std::vector<Triplet> triplets;
    triplets.reserve(nv + 3 * patches.size());
    std::vector<std::uint8_t> modified(nv, 0);
    for (const auto& p : patches) modified[p.apex_vertex] = 1;
    for (Index v = 0; v < nv; ++v) {
        if (!modified[v]) triplets.push_back({v, v, 1.0});
    }
    ExtensionOperator e;
    for (const auto& p : patches) {
        const auto q = mesh.cell_points(p.nd_cell);
        const double area = signed_area(q[0], q[1], q[2]);
        const double scale = std::max({distance(q[0], q[1]), distance(q[1], q[2]), distance(q[2], q[0])});
        if (!(area > 1e-14 * scale * scale)) {
            throw InvalidPatchError("regular cell of a patch is flat; extension undefined");
        }
        const auto bary = barycentric(mesh.vertex(p.apex_vertex), q[0], q[1], q[2]);
        const auto& nv3 = mesh.cells()[p.nd_cell].v;
        for (int k = 0; k < 3; ++k) triplets.push_back({p.apex_vertex, nv3[k], bary[k]});
        e.modified_rows.push_back(p.apex_vertex);
    }
    e.matrix = CsrMatrix::from_triplets(nv, nv, std::move(triplets));
    return e;
}

double kappa_n(int dim) {
    if (dim < 1) throw InvalidArgument("dimension must be positive");
    const double n = dim;
    return 2.0 * n * n / ((n + 1.0) * (n + 2.0));
}

PatchCoefficients patch_coefficients(const Mesh& mesh, const Patch& patch) {
    PatchCoefficients c;
    c.deg_area = mesh.cell_area(patch.deg_cell);
    c.nd_area = mesh.cell_area(patch.nd_cell);
    c.area_ratio = (c.deg_area + c.nd_area) / c.nd_area;
    const Point2 a = mesh.vertex(patch.facet_vertices[0]);
    const Point2 b = mesh.vertex(patch.facet_vertices[1]);
    c.facet_length = distance(a, b);
    c.sliver_height = distance_to_line(mesh.vertex(patch.apex_vertex), a, b);
    const double h_p = patch.diameter;
    c.penalty_coef = kappa_n(2) * c.deg_area * c.deg_area * c.deg_area /
                     (h_p * h_p * c.facet_length * c.facet_length);
    return c;
}

JumpPenalty jump_penalty_local(const Mesh& mesh, const Patch& patch) {
    JumpPenalty out;
    out.dofs = patch.vertices();
    const Cell& deg = mesh.cells()[patch.deg_cell];
    const Cell& nd = mesh.cells()[patch.nd_cell];
    const auto g_deg = basis_gradients(mesh.cell_points(patch.deg_cell));
    const auto g_nd = basis_gradients(mesh.cell_points(patch.nd_cell));

    // Column j: jump of grad phi_j from the regular to the degenerated cell.
    std::array<Point2, 4> jump{};
    for (int j = 0; j < 4; ++j) {
        const int kd = local_index(deg, out.dofs[j]);
        const int kn = local_index(nd, out.dofs[j]);
        const Point2 gd = kd >= 0 ? g_deg[kd] : Point2{};
        const Point2 gn = kn >= 0 ? g_nd[kn] : Point2{};
        jump[j] = gd - gn;
    }
    const double coef = patch_coefficients(mesh, patch).penalty_coef;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) out.matrix[a][b] = coef * dot(jump[a], jump[b]);
    }
    return out;
}

StabilizedPieces stabilized_pieces(const Mesh& mesh, std::span<const Patch> patches) {
    const auto owner = patch_of_cell(mesh, patches);
    const std::size_t none = patches.size();
    StabilizedPieces p;
    p.outside_stiffness = assemble_stiffness(mesh, [&](Index c) { return owner[c] == none; });
    p.patch_stiffness = assemble_stiffness(mesh, [&](Index c) { return owner[c] != none; });
    p.patch_mass = assemble_mass(
        mesh, [&](Index c) { return owner[c] != none; },
        [&](Index c) {
            const double h_p = patches[owner[c]].diameter;
            return 1.0 / (h_p * h_p);
        });
    return p;
}

CsrMatrix assemble_stabilized_operator_form(const StabilizedPieces& pieces, const ExtensionOperator& extension) {
    const CsrMatrix& e = extension.matrix;
    const CsrMatrix et = e.transpose();
    const CsrMatrix defect = add(CsrMatrix::identity(e.rows()), e, 1.0, -1.0);  // I - E
    const CsrMatrix extended = multiply(et, multiply(pieces.patch_stiffness, e));
    const CsrMatrix penalty = multiply(defect.transpose(), multiply(pieces.patch_mass, defect));
    const CsrMatrix sum = add(add(pieces.outside_stiffness, extended), penalty);
    // The triple products are symmetric only up to rounding.
    return add(sum, sum.transpose(), 0.5, 0.5);
}

CsrMatrix assemble_stabilized_operator_form(const Mesh& mesh, std::span<const Patch> patches) {
    return assemble_stabilized_operator_form(stabilized_pieces(mesh, patches), extension_operator(mesh, patches));
}

CsrMatrix assemble_stabilized_jump_form(const Mesh& mesh, std::span<const Patch> patches) {
    const auto owner = patch_of_cell(mesh, patches);
    const std::size_t none = patches.size();
    std::vector<std::uint8_t> is_deg(mesh.num_cells(), 0);
    std::vector<double> ratio(mesh.num_cells(), 1.0);
    for (const auto& p : patches) {
        is_deg[p.deg_cell] = 1;
        ratio[p.nd_cell] = patch_coefficients(mesh, p).area_ratio;
    }
    const CsrMatrix bulk = assemble_stiffness(
        mesh, [&](Index c) { return owner[c] == none || !is_deg[c]; }, [&](Index c) { return ratio[c]; });

    std::vector<Triplet> triplets;
    triplets.reserve(16 * patches.size());
    for (const auto& p : patches) {
        const JumpPenalty j = jump_penalty_local(mesh, p);
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) triplets.push_back({j.dofs[a], j.dofs[b], j.matrix[a][b]});
        }
    }
    const CsrMatrix penalty = CsrMatrix::from_triplets(mesh.num_vertices(), mesh.num_vertices(), std::move(triplets));
    return add(bulk, penalty);
}

PiecewiseLinearField postprocess_extend(const Mesh& mesh, std::span<const double> nodal,
                                        std::span<const Patch> patches) {
    PiecewiseLinearField field = PiecewiseLinearField::from_nodal(mesh, nodal);
    for (const auto& p : patches) field.piece(p.deg_cell) = field.piece(p.nd_cell);
    return field;
}

double triple_norm(std::span<const double> v, const CsrMatrix& a_h) {
    const double q = a_h.quadratic_form(v);
    if (q < -1e-12) {
        std::ostringstream msg;
        msg << "stabilized form is negative (" << q << "); assembly is corrupt";
        throw AssemblyError(msg.str());
    }
    return std::sqrt(std::max(q, 0.0));
}

}  // namespace dmfem
