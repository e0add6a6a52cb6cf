#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "dmfem/assembly.hpp"
#include "dmfem/errors.hpp"
#include "dmfem/solver.hpp"
#include "dmfem/sparse.hpp"

using namespace dmfem;

namespace {

const std::array<Point2, 3> kUnit{Point2{0, 0}, Point2{1, 0}, Point2{0, 1}};

std::array<Point2, 3> rigid(const std::array<Point2, 3>& p, double angle, Point2 shift) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    std::array<Point2, 3> out;
    for (int k = 0; k < 3; ++k) out[k] = Point2{c * p[k].x - s * p[k].y, s * p[k].x + c * p[k].y} + shift;
    return out;
}

}  // namespace

TEST(Sparse, TripletsSumAndSort) {
    const CsrMatrix a = CsrMatrix::from_triplets(2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 2, 0.5}, {0, 0, -1.0}, {1, 0, 0.0}});
    EXPECT_EQ(a.nnz(), 3u);
    EXPECT_DOUBLE_EQ(a.at(1, 2), 1.5);
    EXPECT_DOUBLE_EQ(a.at(0, 1), 2.0);
    EXPECT_DOUBLE_EQ(a.at(1, 0), 0.0);
    const auto cols = a.row_cols(0);
    EXPECT_EQ(cols[0], 0u);
    EXPECT_EQ(cols[1], 1u);
}

TEST(Sparse, ProductTransposeAdd) {
    const CsrMatrix a = CsrMatrix::from_triplets(2, 2, {{0, 0, 1}, {0, 1, 2}, {1, 1, 3}});
    const CsrMatrix at = a.transpose();
    EXPECT_DOUBLE_EQ(at.at(1, 0), 2.0);
    const CsrMatrix p = multiply(a, at);  // [[5, 6], [6, 9]]
    EXPECT_DOUBLE_EQ(p.at(0, 0), 5.0);
    EXPECT_DOUBLE_EQ(p.at(0, 1), 6.0);
    EXPECT_DOUBLE_EQ(p.at(1, 1), 9.0);
    EXPECT_TRUE(p.is_symmetric());
    const CsrMatrix d = add(p, CsrMatrix::identity(2), 1.0, -5.0);
    EXPECT_DOUBLE_EQ(d.at(0, 0), 0.0);
    EXPECT_EQ(d.nnz(), 3u);  // exact cancellation is dropped
    const std::vector<double> x{1.0, -1.0};
    EXPECT_DOUBLE_EQ(p.quadratic_form(x), 5.0 - 12.0 + 9.0);
    EXPECT_DOUBLE_EQ(max_abs_difference(p, p.scaled(2.0)), 9.0);
}

TEST(Sparse, CoordinateExport) {
    const CsrMatrix a = CsrMatrix::from_triplets(2, 2, {{0, 0, 0.5}, {1, 0, -2.0}});
    std::ostringstream s;
    write_coordinate(s, a);
    EXPECT_EQ(s.str(), "0 0 0.5\n1 0 -2\n");
}

TEST(LocalStiffness, UnitRightTriangle) {
    const LocalMatrix k = local_stiffness(kUnit);
    const double expected[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) EXPECT_NEAR(k[a][b], expected[a][b], 1e-15);
    }
}

TEST(LocalStiffness, RowSumsAndRigidInvariance) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        std::array<Point2, 3> p{Point2{u(rng), u(rng)}, Point2{u(rng), u(rng)}, Point2{u(rng), u(rng)}};
        if (signed_area(p[0], p[1], p[2]) < 0) std::swap(p[1], p[2]);
        if (signed_area(p[0], p[1], p[2]) < 1e-3) continue;
        const LocalMatrix k = local_stiffness(p);
        const LocalMatrix kr = local_stiffness(rigid(p, 6.0 * u(rng), {u(rng), u(rng)}));
        for (int a = 0; a < 3; ++a) {
            EXPECT_NEAR(k[a][0] + k[a][1] + k[a][2], 0.0, 1e-12 * std::abs(k[a][a]));
            for (int b = 0; b < 3; ++b) {
                EXPECT_EQ(k[a][b], k[b][a]);
                EXPECT_NEAR(kr[a][b], k[a][b], 1e-12 * std::max(1.0, std::abs(k[a][b])));
            }
        }
    }
}

TEST(LocalStiffness, SliverStaysExact) {
    // height 1e-8 triangle: gradient of the apex hat is 1e8
    const std::array<Point2, 3> p{Point2{0, 0}, Point2{1, 0}, Point2{0.5, 1e-8}};
    const LocalMatrix k = local_stiffness(p);
    EXPECT_NEAR(k[2][2], 0.5 * 1e-8 * 1e16, 1e-6 * 0.5e8);
    EXPECT_THROW(local_stiffness({Point2{0, 0}, Point2{1, 0}, Point2{2, 0}}), GeometryError);
}

TEST(LocalMass, UnitRightTriangle) {
    const LocalMatrix m = local_mass(kUnit);
    double total = 0.0;
    for (int a = 0; a < 3; ++a) {
        double row = 0.0;
        for (int b = 0; b < 3; ++b) {
            EXPECT_NEAR(m[a][b], a == b ? 1.0 / 12 : 1.0 / 24, 1e-16);
            row += m[a][b];
        }
        EXPECT_NEAR(row, 0.5 / 3, 1e-16);
        total += row;
    }
    EXPECT_NEAR(total, 0.5, 1e-16);
}

TEST(GlobalStiffness, KernelAndSymmetry) {
    const Mesh m = build_uniform_unit_square_mesh(2);
    const CsrMatrix a = assemble_stiffness(m);
    EXPECT_TRUE(a.is_symmetric());
    const DenseVector ones(m.num_vertices(), 1.0);
    const DenseVector r = a * ones;
    for (double v : r) EXPECT_LE(std::abs(v), 1e-10 * a.max_abs());
}

TEST(GlobalStiffness, EmptyFilterGivesZero) {
    const Mesh m = build_uniform_unit_square_mesh(4);
    const CsrMatrix a = assemble_stiffness(m, [](Index) { return false; });
    EXPECT_EQ(a.nnz(), 0u);
    EXPECT_EQ(a.rows(), m.num_vertices());
}

TEST(GlobalStiffness, FivePointPattern) {
    const Mesh m = build_uniform_unit_square_mesh(16);
    const CsrMatrix a = assemble_stiffness(m);
    for (Index v = 0; v < m.num_vertices(); ++v) {
        if (m.is_boundary_vertex(v)) continue;
        EXPECT_NEAR(a.at(v, v), 4.0, 1e-14);
        EXPECT_EQ(a.row_cols(v).size(), 5u);  // diagonal couplings cancel exactly
    }
    const Index c = m.grid_vertex(5, 5);
    EXPECT_NEAR(a.at(c, m.grid_vertex(6, 5)), -1.0, 1e-15);
    EXPECT_EQ(a.at(c, m.grid_vertex(6, 6)), 0.0);
}

TEST(GlobalStiffness, ScaleMultiplies) {
    const Mesh m = build_uniform_unit_square_mesh(4);
    const CsrMatrix a = assemble_stiffness(m);
    const CsrMatrix b = assemble_stiffness(m, {}, [](Index) { return 2.5; });
    EXPECT_LE(max_abs_difference(a.scaled(2.5), b), 1e-14);
}

TEST(Load, SumsAndZero) {
    using std::numbers::pi;
    const Mesh m = build_uniform_unit_square_mesh(16);
    double s = 0.0;
    for (double v : assemble_load(m, [](Point2) { return 1.0; })) s += v;
    EXPECT_NEAR(s, 1.0, 1e-13);
    s = 0.0;
    for (double v : assemble_load(m, [](Point2 x) { return 2 * pi * pi * std::sin(pi * x.x) * std::sin(pi * x.y); })) {
        s += v;
    }
    EXPECT_NEAR(s, 8.0, 1e-6);
    for (double v : assemble_load(m, [](Point2) { return 0.0; })) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(assemble_load(m, [](Point2) { return 1.0; }, quadrature_rule(2)), InvalidArgument);
}

TEST(Dirichlet, SingleInteriorNode) {
    const Mesh m = build_uniform_unit_square_mesh(2);
    const DenseVector b = assemble_load(m, [](Point2) { return 1.0; });
    const ReducedSystem sys = apply_dirichlet(assemble_stiffness(m), b, m);
    ASSERT_EQ(sys.matrix.rows(), 1u);
    EXPECT_NEAR(sys.matrix.at(0, 0), 4.0, 1e-15);
    // the centre hat lives on six cells of area 1/8: volume 6 / 8 / 3
    EXPECT_NEAR(sys.rhs[0], 0.25, 1e-15);
    EXPECT_EQ(sys.dofs.interior_of_full[0], m.grid_vertex(1, 1));
    const SolveResult r = cholesky_solve(sys.matrix, sys.rhs);
    EXPECT_NEAR(r.x[0], sys.rhs[0] / 4, 1e-15);
}

TEST(Dirichlet, ReducedDimensionAndDefiniteness) {
    for (std::size_t n : {3u, 8u, 16u}) {
        const Mesh m = build_uniform_unit_square_mesh(n);
        const ReducedSystem sys = apply_dirichlet(assemble_stiffness(m), DenseVector(m.num_vertices(), 0.0), m);
        EXPECT_EQ(sys.matrix.rows(), (n - 1) * (n - 1));
        EXPECT_EQ(sys.dofs.num_full(), m.num_vertices());
        const DenseVector ones(sys.matrix.rows(), 1.0);
        EXPECT_GT(norm2(sys.matrix * ones), 0.0);
        for (std::size_t r = 0; r < sys.dofs.num_reduced(); ++r) {
            EXPECT_EQ(sys.dofs.full_to_reduced[sys.dofs.interior_of_full[r]], r);
        }
    }
}

TEST(Dirichlet, RestrictExtendRoundTrip) {
    const Mesh m = build_uniform_unit_square_mesh(5);
    const DofMap d = make_dof_map(m);
    DenseVector red(d.num_reduced());
    for (std::size_t k = 0; k < red.size(); ++k) red[k] = 1.0 + static_cast<double>(k);
    const DenseVector full = d.extend_vector(red);
    for (Index v = 0; v < m.num_vertices(); ++v) {
        if (m.is_boundary_vertex(v)) EXPECT_EQ(full[v], 0.0);
    }
    EXPECT_EQ(d.restrict_vector(full), red);
}

TEST(PatchTest, AffineReproduction) {
    // Solve A u = 0 on interior rows with affine Dirichlet data moved to the right-hand side.
    const Mesh m = build_uniform_unit_square_mesh(8);
    const CsrMatrix a = assemble_stiffness(m);
    auto g = [](Point2 x) { return 0.3 + 2.0 * x.x - 1.5 * x.y; };
    DenseVector boundary(m.num_vertices(), 0.0);
    for (Index v = 0; v < m.num_vertices(); ++v) {
        if (m.is_boundary_vertex(v)) boundary[v] = g(m.vertex(v));
    }
    DenseVector rhs = a * boundary;
    for (double& v : rhs) v = -v;
    const ReducedSystem sys = apply_dirichlet(a, rhs, m);
    const SolveResult r = cholesky_solve(sys.matrix, sys.rhs);
    for (std::size_t k = 0; k < r.x.size(); ++k) {
        EXPECT_NEAR(r.x[k], g(m.vertex(sys.dofs.interior_of_full[k])), 1e-12);
    }
}
