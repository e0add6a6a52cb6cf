#include "dmfem/assembly.hpp"

#include <cmath>

#include "dmfem/errors.hpp"

namespace dmfem {

namespace {

constexpr double kMinArea = 1e-300;

double checked_area(const std::array<Point2, 3>& p) {
    const double area = signed_area(p[0], p[1], p[2]);
    if (!(area > kMinArea)) throw GeometryError("degenerate or inverted cell in assembly");
    return area;
}

// Edge opposite vertex k, e_k = p[k+2] - p[k+1]; grad phi_k = rot(e_k) / (2 area).
std::array<Point2, 3> opposite_edges(const std::array<Point2, 3>& p) {
    return {p[2] - p[1], p[0] - p[2], p[1] - p[0]};
}

CsrMatrix assemble_local(const Mesh& mesh, const CellFilter& filter, const CellScale& scale,
                         LocalMatrix (*local)(const std::array<Point2, 3>&)) {
    std::vector<Triplet> triplets;
    triplets.reserve(9 * mesh.num_cells());
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        if (filter && !filter(c)) continue;
        const double s = scale ? scale(c) : 1.0;
        const LocalMatrix m = local(mesh.cell_points(c));
        const auto& v = mesh.cells()[c].v;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) triplets.push_back({v[a], v[b], s * m[a][b]});
        }
    }
    return CsrMatrix::from_triplets(mesh.num_vertices(), mesh.num_vertices(), std::move(triplets));
}

}  // namespace

std::array<Point2, 3> basis_gradients(const std::array<Point2, 3>& p) {
    const double two_area = 2.0 * checked_area(p);
    const auto e = opposite_edges(p);
    std::array<Point2, 3> g;
    for (int k = 0; k < 3; ++k) g[k] = {-e[k].y / two_area, e[k].x / two_area};
    return g;
}

LocalMatrix local_stiffness(const std::array<Point2, 3>& p) {
    const double four_area = 4.0 * checked_area(p);
    const auto e = opposite_edges(p);
    LocalMatrix k{};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) k[a][b] = dot(e[a], e[b]) / four_area;
    }
    return k;
}

LocalMatrix local_stiffness(const Mesh& mesh, Index cell) { return local_stiffness(mesh.cell_points(cell)); }

LocalMatrix local_mass(const std::array<Point2, 3>& p) {
    const double area = checked_area(p);
    const double diag = area / 6.0;
    const double off = area / 12.0;
    return {{{diag, off, off}, {off, diag, off}, {off, off, diag}}};
}

LocalMatrix local_mass(const Mesh& mesh, Index cell) { return local_mass(mesh.cell_points(cell)); }

CsrMatrix assemble_stiffness(const Mesh& mesh, const CellFilter& filter, const CellScale& scale) {
    return assemble_local(mesh, filter, scale, &local_stiffness);
}

CsrMatrix assemble_mass(const Mesh& mesh, const CellFilter& filter, const CellScale& scale) {
    return assemble_local(mesh, filter, scale, &local_mass);
}

DenseVector assemble_load(const Mesh& mesh, const ScalarField& f, const QuadratureRule& rule) {
    if (rule.degree < kLoadQuadratureDegree) {
        throw InvalidArgument("load vector needs a quadrature rule of degree >= 4");
    }
    DenseVector b(mesh.num_vertices(), 0.0);
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const auto p = mesh.cell_points(c);
        const double area = checked_area(p);
        const auto& v = mesh.cells()[c].v;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto& bary = rule.points[q];
            const double fw = rule.weights[q] * area * f(push_forward(p, bary));
            for (int a = 0; a < 3; ++a) b[v[a]] += fw * bary[a];
        }
    }
    return b;
}

DenseVector DofMap::restrict_vector(std::span<const double> full) const {
    if (full.size() != num_full()) throw InvalidArgument("full vector has wrong size");
    DenseVector out(num_reduced());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = full[interior_of_full[k]];
    return out;
}

DenseVector DofMap::extend_vector(std::span<const double> reduced) const {
    if (reduced.size() != num_reduced()) throw InvalidArgument("reduced vector has wrong size");
    DenseVector out(num_full(), 0.0);
    for (std::size_t k = 0; k < reduced.size(); ++k) out[interior_of_full[k]] = reduced[k];
    return out;
}

DofMap make_dof_map(const Mesh& mesh) {
    DofMap d;
    d.full_to_reduced.assign(mesh.num_vertices(), kNoCell);
    for (Index v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.is_boundary_vertex(v)) {
            d.full_to_reduced[v] = d.interior_of_full.size();
            d.interior_of_full.push_back(v);
        }
    }
    return d;
}

CsrMatrix restrict_matrix(const CsrMatrix& a, const DofMap& dofs) {
    if (a.rows() != dofs.num_full() || a.cols() != dofs.num_full()) {
        throw InvalidArgument("matrix does not match the dof map");
    }
    std::vector<Index> offsets(dofs.num_reduced() + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    for (std::size_t r = 0; r < dofs.num_reduced(); ++r) {
        const Index full_row = dofs.interior_of_full[r];
        const auto cs = a.row_cols(full_row);
        const auto vs = a.row_values(full_row);
        for (std::size_t k = 0; k < cs.size(); ++k) {
            const Index c = dofs.full_to_reduced[cs[k]];
            if (c == kNoCell) continue;
            cols.push_back(c);  // stays sorted: the renumbering is monotone
            vals.push_back(vs[k]);
        }
        offsets[r + 1] = cols.size();
    }
    return CsrMatrix(dofs.num_reduced(), dofs.num_reduced(), std::move(offsets), std::move(cols), std::move(vals));
}

ReducedSystem apply_dirichlet(const CsrMatrix& a, std::span<const double> b, const Mesh& mesh) {
    ReducedSystem sys;
    sys.dofs = make_dof_map(mesh);
    sys.matrix = restrict_matrix(a, sys.dofs);
    sys.rhs = sys.dofs.restrict_vector(b);
    return sys;
}

}  // namespace dmfem
