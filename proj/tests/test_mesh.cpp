#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "dmfem/errors.hpp"
#include "dmfem/mesh.hpp"
#include "dmfem/mesh_io.hpp"

using namespace dmfem;

namespace {

double total_area(const Mesh& m) {
    double s = 0.0;
    for (Index c = 0; c < m.num_cells(); ++c) s += m.cell_area(c);
    return s;
}

void expect_conforming(const Mesh& m) {
    for (Index c = 0; c < m.num_cells(); ++c) {
        const auto p = m.cell_points(c);
        EXPECT_GT(signed_area(p[0], p[1], p[2]), 0.0) << "cell " << c;
    }
    for (const auto& f : m.facets()) {
        const Point2 a = m.vertex(f.v[0]);
        const Point2 b = m.vertex(f.v[1]);
        const bool on_boundary = (a.x == 0 && b.x == 0) || (a.x == 1 && b.x == 1) || (a.y == 0 && b.y == 0) ||
                                 (a.y == 1 && b.y == 1);
        EXPECT_EQ(f.is_boundary(), on_boundary);
    }
}

// Chebyshev distance between grid squares
std::size_t cheb(GridSquare a, GridSquare b) {
    auto d = [](std::size_t x, std::size_t y) { return x > y ? x - y : y - x; };
    return std::max(d(a.i, b.i), d(a.j, b.j));
}

}  // namespace

TEST(UniformMesh, CountsForN2) {
    const Mesh m = build_uniform_unit_square_mesh(2);
    EXPECT_EQ(m.num_vertices(), 9u);
    EXPECT_EQ(m.num_cells(), 8u);
    EXPECT_NEAR(total_area(m), 1.0, 1e-12);
    EXPECT_EQ(m.num_boundary_vertices(), 8u);
}

TEST(UniformMesh, StepForN16) {
    const Mesh m = build_uniform_unit_square_mesh(16);
    EXPECT_DOUBLE_EQ(m.h(), 0.0625);
    EXPECT_EQ(m.num_vertices(), 17u * 17u);
    EXPECT_EQ(m.num_cells(), 2u * 256u);
}

TEST(UniformMesh, FacetsOfN3) {
    const Mesh m = build_uniform_unit_square_mesh(3);
    // 3 edge families of n(n+1) + n(n+1) + n^2 edges
    EXPECT_EQ(m.facets().size(), 33u);
    std::size_t boundary = 0;
    for (const auto& f : m.facets()) {
        if (f.is_boundary()) {
            ++boundary;
            EXPECT_EQ(f.cells[1], kNoCell);
        } else {
            EXPECT_NE(f.cells[0], kNoCell);
            EXPECT_NE(f.cells[1], kNoCell);
        }
    }
    EXPECT_EQ(boundary, 12u);
    expect_conforming(m);
}

TEST(UniformMesh, RejectsTinyN) {
    EXPECT_THROW(build_uniform_unit_square_mesh(1), InvalidArgument);
    EXPECT_THROW(build_uniform_unit_square_mesh(0), InvalidArgument);
}

TEST(UniformMesh, VertexLayout) {
    const Mesh m = build_uniform_unit_square_mesh(4);
    const Point2 p = m.vertex(m.grid_vertex(3, 2));
    EXPECT_DOUBLE_EQ(p.x, 0.75);
    EXPECT_DOUBLE_EQ(p.y, 0.5);
    const auto& lower = m.cells()[m.lower_cell({1, 2})].v;
    EXPECT_EQ(lower[0], m.grid_vertex(1, 2));
    EXPECT_EQ(lower[1], m.grid_vertex(2, 2));
    EXPECT_EQ(lower[2], m.grid_vertex(2, 3));
}

TEST(UniformMesh, CellsOfVertexAndFindFacet) {
    const Mesh m = build_uniform_unit_square_mesh(4);
    EXPECT_EQ(m.cells_of_vertex(m.grid_vertex(2, 2)).size(), 6u);
    EXPECT_EQ(m.cells_of_vertex(m.grid_vertex(0, 0)).size(), 2u);
    EXPECT_EQ(m.cells_of_vertex(m.grid_vertex(4, 0)).size(), 1u);
    EXPECT_TRUE(m.find_facet(m.grid_vertex(1, 1), m.grid_vertex(2, 2)).has_value());
    EXPECT_FALSE(m.find_facet(m.grid_vertex(2, 1), m.grid_vertex(1, 2)).has_value());
}

TEST(MeshConstruction, RejectsBadInput) {
    std::vector<Point2> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    // clockwise cell
    EXPECT_THROW(Mesh(v, {Cell{{0, 2, 1}}, Cell{{0, 3, 2}}}, 1.0), GeometryError);
    // does not cover the square
    EXPECT_THROW(Mesh(v, {Cell{{0, 1, 2}}}, 1.0), GeometryError);
    EXPECT_THROW(Mesh(v, {Cell{{0, 1, 1}}, Cell{{0, 2, 3}}}, 1.0), InvalidArgument);
    EXPECT_THROW(Mesh(v, {Cell{{0, 1, 9}}, Cell{{0, 2, 3}}}, 1.0), InvalidArgument);
    EXPECT_NO_THROW(Mesh(v, {Cell{{0, 1, 2}}, Cell{{0, 2, 3}}}, 1.0));
}

TEST(CellQuality, UnitRightTriangle) {
    const CellQuality q = triangle_quality({0, 0}, {1, 0}, {0, 1});
    EXPECT_DOUBLE_EQ(q.area, 0.5);
    EXPECT_NEAR(q.h_K, std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(q.rho_K, 1.0 / (2.0 + std::sqrt(2.0)), 1e-15);
    EXPECT_NEAR(q.rho_K, 0.29289, 1e-5);
    EXPECT_NEAR(q.alpha_min, std::numbers::pi / 4, 1e-14);
    EXPECT_NEAR(q.beta_max, std::numbers::pi / 2, 1e-14);
}

TEST(CellQuality, Equilateral) {
    const CellQuality q = triangle_quality({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2});
    EXPECT_NEAR(q.rho_K, std::sqrt(3.0) / 6, 1e-15);
    EXPECT_NEAR(q.quality, 2 * std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(q.alpha_min, std::numbers::pi / 3, 1e-12);
}

TEST(CellQuality, ZeroAreaThrows) {
    EXPECT_THROW(triangle_quality({0, 0}, {1, 0}, {2, 0}), GeometryError);
}

TEST(CellQuality, IdentityAndAngleSumOnDamagedMesh) {
    const Mesh base = build_uniform_unit_square_mesh(16);
    const auto dm = degenerate_squares(base, select_degenerate_squares(16, 10, 1), 1.0 / 256);
    for (Index c = 0; c < dm.mesh.num_cells(); ++c) {
        const auto p = dm.mesh.cell_points(c);
        const CellQuality q = cell_quality(dm.mesh, c);
        const double perimeter = distance(p[0], p[1]) + distance(p[1], p[2]) + distance(p[2], p[0]);
        EXPECT_NEAR(q.rho_K * perimeter, 2 * q.area, 1e-15);
        EXPECT_GE(q.quality, 2 * std::sqrt(3.0) - 1e-12);
        // the three angles: two extremes plus the middle one
        const double a = std::acos(dot(p[1] - p[0], p[2] - p[0]) / (norm(p[1] - p[0]) * norm(p[2] - p[0])));
        const double b = std::acos(dot(p[0] - p[1], p[2] - p[1]) / (norm(p[0] - p[1]) * norm(p[2] - p[1])));
        const double g = std::acos(dot(p[0] - p[2], p[1] - p[2]) / (norm(p[0] - p[2]) * norm(p[1] - p[2])));
        EXPECT_NEAR(a + b + g, std::numbers::pi, 1e-10);
        EXPECT_NEAR(std::min({a, b, g}), q.alpha_min, 1e-7);
        EXPECT_NEAR(std::max({a, b, g}), q.beta_max, 1e-7);
    }
}

TEST(Degenerate, SliverGeometryAtN16) {
    const Mesh base = build_uniform_unit_square_mesh(16);
    const double eps = 1.0 / 256;
    const auto dm = degenerate_square(base, {5, 7}, eps);
    ASSERT_EQ(dm.patches.size(), 1u);
    const Patch& p = dm.patches[0];
    EXPECT_EQ(p.deg_cell, base.lower_cell({5, 7}));
    EXPECT_EQ(p.nd_cell, base.upper_cell({5, 7}));
    EXPECT_EQ(p.apex_vertex, base.grid_vertex(6, 7));
    EXPECT_EQ(p.opposite_vertex, base.grid_vertex(5, 8));

    const CellQuality q = cell_quality(dm.mesh, p.deg_cell);
    EXPECT_NEAR(q.h_K, std::sqrt(2.0) / 16, 1e-15);
    EXPECT_NEAR(q.area, (std::sqrt(2.0) / 16) * eps / 2, 1e-15);
    EXPECT_GT(q.quality, 40.0);
    EXPECT_NEAR(q.quality, 2 * std::sqrt(2.0) * 16, 0.1);

    const Point2 a = dm.mesh.vertex(p.facet_vertices[0]);
    const Point2 b = dm.mesh.vertex(p.facet_vertices[1]);
    EXPECT_NEAR(distance_to_line(dm.mesh.vertex(p.apex_vertex), a, b), eps, 1e-12);
    EXPECT_NEAR(distance(a, b), q.h_K, 0.0);
    EXPECT_NEAR(total_area(dm.mesh), 1.0, 1e-12);
    expect_conforming(dm.mesh);
}

TEST(Degenerate, FullHeightIsIdentity) {
    const Mesh base = build_uniform_unit_square_mesh(8);
    const auto dm = degenerate_square(base, {3, 3}, (1.0 / 8) / std::sqrt(2.0));
    for (Index v = 0; v < base.num_vertices(); ++v) {
        EXPECT_NEAR(dm.mesh.vertex(v).x, base.vertex(v).x, 1e-15);
        EXPECT_NEAR(dm.mesh.vertex(v).y, base.vertex(v).y, 1e-15);
    }
}

TEST(Degenerate, RejectsBoundarySquareAndBadEpsilon) {
    const Mesh base = build_uniform_unit_square_mesh(8);
    EXPECT_THROW(degenerate_square(base, {0, 3}, 1e-3), InvalidArgument);
    EXPECT_THROW(degenerate_square(base, {3, 7}, 1e-3), InvalidArgument);
    EXPECT_THROW(degenerate_square(base, {7, 3}, 1e-3), InvalidArgument);
    EXPECT_THROW(degenerate_square(base, {3, 3}, 0.0), InvalidArgument);
    EXPECT_THROW(degenerate_square(base, {3, 3}, 1.0), InvalidArgument);
}

TEST(Degenerate, ExtendedPatchIsTheVertexStar) {
    const Mesh base = build_uniform_unit_square_mesh(10);
    const auto dm = degenerate_square(base, {4, 4}, 0.01);
    const Patch& p = dm.patches[0];
    std::set<Index> star;
    for (Index v : p.vertices()) {
        for (Index c : dm.mesh.cells_of_vertex(v)) star.insert(c);
    }
    EXPECT_EQ(std::vector<Index>(star.begin(), star.end()), p.extended_cells);
    EXPECT_EQ(p.extended_cells.size(), kDefaultMaxExtendedCells);
    EXPECT_TRUE(std::binary_search(p.extended_cells.begin(), p.extended_cells.end(), p.deg_cell));
    EXPECT_TRUE(std::binary_search(p.extended_cells.begin(), p.extended_cells.end(), p.nd_cell));
}

TEST(SelectSquares, SeparatedAndDeterministic) {
    const auto s = select_degenerate_squares(16, 10, 1);
    ASSERT_EQ(s.size(), 10u);
    for (std::size_t a = 0; a < s.size(); ++a) {
        EXPECT_GE(s[a].i, 1u);
        EXPECT_LE(s[a].i, 14u);
        EXPECT_GE(s[a].j, 1u);
        EXPECT_LE(s[a].j, 14u);
        for (std::size_t b = a + 1; b < s.size(); ++b) EXPECT_GE(cheb(s[a], s[b]), 3u);
    }
    EXPECT_EQ(select_degenerate_squares(16, 2, 7), select_degenerate_squares(16, 2, 7));
    EXPECT_NE(select_degenerate_squares(40, 10, 1), select_degenerate_squares(40, 10, 2));
}

TEST(SelectSquares, CapacityError) {
    try {
        select_degenerate_squares(4, 10, 1);
        FAIL() << "expected CapacityError";
    } catch (const CapacityError& e) {
        EXPECT_EQ(e.max_feasible(), 1u);
        EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
    }
}

TEST(SelectSquares, FullCapacityIsReachable) {
    for (std::size_t n : {9u, 16u, 20u}) {
        const std::size_t cap = max_separated_squares(n);
        const auto s = select_degenerate_squares(n, cap, 3);
        EXPECT_EQ(s.size(), cap);
        for (std::size_t a = 0; a < s.size(); ++a) {
            for (std::size_t b = a + 1; b < s.size(); ++b) EXPECT_GE(cheb(s[a], s[b]), 3u);
        }
        EXPECT_THROW(select_degenerate_squares(n, cap + 1, 3), CapacityError);
    }
}

TEST(DensePattern, FractionAndValidation) {
    for (std::size_t n : {9u, 18u, 36u}) {
        const auto s = dense_degenerate_pattern(n);
        EXPECT_LE(static_cast<double>(s.size()) / (2.0 * n * n), 1.0 / 18 + 1e-15);
        EXPECT_NEAR(static_cast<double>(s.size()) / (2.0 * n * n), 1.0 / 18, 1e-15);
    }
    const Mesh base = build_uniform_unit_square_mesh(18);
    const auto dm = degenerate_squares(base, dense_degenerate_pattern(18), 1.0 / (18.0 * 18.0));
    const auto report = validate_assumptions(dm.mesh, dm.patches);
    EXPECT_TRUE(report.passed) << report.summary();
    for (const auto& pc : report.patches) EXPECT_TRUE(pc.overlaps.empty());
}

TEST(DensePattern, RejectsNonMultiple) {
    EXPECT_THROW(dense_degenerate_pattern(10), InvalidArgument);
    EXPECT_THROW(dense_degenerate_pattern(6), InvalidArgument);
}

TEST(Detect, PristineMeshHasNoDegenerateCells) {
    EXPECT_TRUE(detect_degenerate_cells(build_uniform_unit_square_mesh(16), 5.0).empty());
}

TEST(Detect, FindsExactlyTheSlivers) {
    for (std::size_t n : {16u, 27u, 44u}) {
        const Mesh base = build_uniform_unit_square_mesh(n);
        const double h = 1.0 / static_cast<double>(n);
        const auto dm = degenerate_squares(base, select_degenerate_squares(n, 10, 1), h * h);
        std::vector<Index> expected;
        for (const auto& p : dm.patches) expected.push_back(p.deg_cell);
        std::sort(expected.begin(), expected.end());
        EXPECT_EQ(detect_degenerate_cells(dm.mesh), expected);
    }
}

TEST(Detect, StretchedNeighboursExceedFive) {
    // Why the default threshold sits above 5: the two cells sharing the moved
    // vertex with the sliver are themselves stretched.
    const Mesh base = build_uniform_unit_square_mesh(16);
    const auto dm = degenerate_square(base, {5, 5}, 1.0 / 256);
    EXPECT_EQ(detect_degenerate_cells(dm.mesh, 5.0).size(), 3u);
    EXPECT_EQ(detect_degenerate_cells(dm.mesh).size(), 1u);
}

TEST(Detect, RejectsThresholdBelowOptimum) {
    EXPECT_THROW(detect_degenerate_cells(build_uniform_unit_square_mesh(4), 1.0), InvalidArgument);
}

TEST(Validate, GeneratedPatchesPass) {
    const Mesh base = build_uniform_unit_square_mesh(16);
    const auto dm = degenerate_squares(base, select_degenerate_squares(16, 10, 1), 1.0 / 256);
    const auto report = validate_assumptions(dm.mesh, dm.patches);
    EXPECT_TRUE(report.passed) << report.summary();
    ASSERT_EQ(report.patches.size(), 10u);
    for (const auto& pc : report.patches) {
        EXPECT_TRUE(pc.passed());
        EXPECT_EQ(pc.extended_size, 16u);
        EXPECT_FALSE(pc.touches_boundary);
        EXPECT_LE(pc.nd_quality, kDefaultC0);
    }
    EXPECT_TRUE(report.uncovered_degenerate_cells.empty());
}

TEST(Validate, AdjacentSquaresOverlap) {
    const Mesh base = build_uniform_unit_square_mesh(10);
    const std::vector<GridSquare> squares{{3, 3}, {5, 3}};
    const auto dm = degenerate_squares(base, squares, 0.01);
    const auto report = validate_assumptions(dm.mesh, dm.patches);
    EXPECT_FALSE(report.passed);
    EXPECT_FALSE(report.patches[0].overlaps.empty());
    EXPECT_EQ(report.patches[1].overlaps, std::vector<std::size_t>{0});
}

TEST(Validate, EmptyPatchListOnPristineMeshPasses) {
    const auto report = validate_assumptions(build_uniform_unit_square_mesh(8), {});
    EXPECT_TRUE(report.passed);
    EXPECT_TRUE(report.patches.empty());
}

TEST(Validate, SmallBoundAndUncoveredSliverFail) {
    const Mesh base = build_uniform_unit_square_mesh(16);
    const auto dm = degenerate_square(base, {5, 5}, 1.0 / 256);
    EXPECT_FALSE(validate_assumptions(dm.mesh, dm.patches, kDefaultC0, 14).passed);
    const auto missing = validate_assumptions(dm.mesh, {});
    EXPECT_FALSE(missing.passed);
    EXPECT_EQ(missing.uncovered_degenerate_cells, std::vector<Index>{dm.patches[0].deg_cell});
}

TEST(MeshIo, RoundTripIsExact) {
    const Mesh base = build_uniform_unit_square_mesh(12);
    const auto dm = degenerate_squares(base, select_degenerate_squares(12, 4, 9), 1.0 / 144);
    std::stringstream s;
    write_mesh(s, dm.mesh, dm.patches);
    const DegeneratedMesh back = read_mesh(s);
    ASSERT_EQ(back.mesh.num_vertices(), dm.mesh.num_vertices());
    for (Index v = 0; v < dm.mesh.num_vertices(); ++v) {
        EXPECT_EQ(back.mesh.vertex(v), dm.mesh.vertex(v));
        EXPECT_EQ(back.mesh.is_boundary_vertex(v), dm.mesh.is_boundary_vertex(v));
    }
    ASSERT_EQ(back.mesh.num_cells(), dm.mesh.num_cells());
    for (Index c = 0; c < dm.mesh.num_cells(); ++c) EXPECT_EQ(back.mesh.cells()[c].v, dm.mesh.cells()[c].v);
    EXPECT_EQ(back.mesh.grid_size(), 12u);
    EXPECT_DOUBLE_EQ(back.mesh.h(), dm.mesh.h());
    ASSERT_EQ(back.patches.size(), dm.patches.size());
    for (std::size_t k = 0; k < dm.patches.size(); ++k) {
        EXPECT_EQ(back.patches[k].deg_cell, dm.patches[k].deg_cell);
        EXPECT_EQ(back.patches[k].nd_cell, dm.patches[k].nd_cell);
        EXPECT_EQ(back.patches[k].apex_vertex, dm.patches[k].apex_vertex);
        EXPECT_EQ(back.patches[k].extended_cells, dm.patches[k].extended_cells);
        EXPECT_EQ(back.patches[k].diameter, dm.patches[k].diameter);
    }
}

TEST(MeshIo, MalformedInput) {
    std::stringstream bad_header("not-a-mesh\n");
    EXPECT_THROW(read_mesh(bad_header), IoError);
    std::stringstream truncated("dmfem-mesh v1\nvertices 3\n0 0 1\n");
    EXPECT_THROW(read_mesh(truncated), IoError);
    EXPECT_THROW(read_mesh("/nonexistent/dir/mesh.txt"), IoError);
}
