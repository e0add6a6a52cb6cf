#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmfem/geometry.hpp"

namespace dmfem {

using Index = std::size_t;

inline constexpr Index kNoCell = std::numeric_limits<Index>::max();

/// Cells with h_K / rho_K above this are treated as degenerated.
inline constexpr double kDefaultC0 = 16.0;

/// Bound on the number of cells in an extended patch.
inline constexpr std::size_t kDefaultMaxExtendedCells = 16;

struct Cell {
    std::array<Index, 3> v{};  // counterclockwise
};

struct Facet {
    std::array<Index, 2> v{};                  // sorted
    std::array<Index, 2> cells{kNoCell, kNoCell};  // cells[1] == kNoCell on the boundary

    bool is_boundary() const noexcept { return cells[1] == kNoCell; }
};

/// Grid square (i, j) of a uniform mesh: the square [i h, (i+1) h] x [j h, (j+1) h].
struct GridSquare {
    std::size_t i = 0;
    std::size_t j = 0;

    friend bool operator==(const GridSquare&, const GridSquare&) = default;
};

/// Immutable conforming triangulation of the unit square.
///
/// The constructor derives facets, boundary flags and vertex-to-cell
/// adjacency, and rejects inverted cells, edges shared by more than two
/// cells, boundary facets off the square boundary and area defects.
class Mesh {
public:
    /// `h` is the nominal step. `grid_size` is n for meshes produced by the
    /// uniform generator (possibly with moved vertices) and 0 otherwise.
    Mesh(std::vector<Point2> vertices, std::vector<Cell> cells, double h, std::size_t grid_size = 0);

    const std::vector<Point2>& vertices() const noexcept { return vertices_; }
    const std::vector<Cell>& cells() const noexcept { return cells_; }
    const std::vector<Facet>& facets() const noexcept { return facets_; }

    std::size_t num_vertices() const noexcept { return vertices_.size(); }
    std::size_t num_cells() const noexcept { return cells_.size(); }

    Point2 vertex(Index v) const { return vertices_[v]; }
    std::array<Point2, 3> cell_points(Index c) const;
    double cell_area(Index c) const;

    bool is_boundary_vertex(Index v) const { return boundary_[v] != 0; }
    std::size_t num_boundary_vertices() const;

    double h() const noexcept { return h_; }
    std::size_t grid_size() const noexcept { return grid_size_; }

    std::span<const Index> cells_of_vertex(Index v) const;
    std::optional<Index> find_facet(Index a, Index b) const;

    // Index helpers for uniform meshes; valid only when grid_size() > 0.
    Index grid_vertex(std::size_t i, std::size_t j) const { return j * (grid_size_ + 1) + i; }
    Index lower_cell(GridSquare s) const { return 2 * (s.j * grid_size_ + s.i); }
    Index upper_cell(GridSquare s) const { return lower_cell(s) + 1; }

    /// Same topology, new coordinates. Revalidates geometry.
    Mesh with_vertices(std::vector<Point2> vertices) const;

private:
    void build_topology();
    void validate() const;

    std::vector<Point2> vertices_;
    std::vector<Cell> cells_;
    std::vector<Facet> facets_;
    std::vector<std::uint8_t> boundary_;
    std::vector<Index> vertex_cell_offsets_;
    std::vector<Index> vertex_cells_;
    double h_ = 0.0;
    std::size_t grid_size_ = 0;
};

struct CellQuality {
    double area = 0.0;
    double h_K = 0.0;        // longest edge
    double rho_K = 0.0;      // inradius, 2 * area / perimeter
    double quality = 0.0;    // h_K / rho_K
    double alpha_min = 0.0;  // smallest interior angle [rad]
    double beta_max = 0.0;   // largest interior angle [rad]
};

/// A degenerated cell paired with the regular cell across its long facet.
struct Patch {
    Index deg_cell = kNoCell;
    Index nd_cell = kNoCell;
    Index facet = kNoCell;
    std::array<Index, 2> facet_vertices{};
    Index apex_vertex = kNoCell;      // vertex of deg_cell off the facet
    Index opposite_vertex = kNoCell;  // vertex of nd_cell off the facet
    std::vector<Index> extended_cells;  // sorted; every cell sharing a vertex with the patch
    double diameter = 0.0;              // h_P, max distance between the four patch vertices

    std::array<Index, 2> cells() const { return {deg_cell, nd_cell}; }
    std::array<Index, 4> vertices() const {
        return {facet_vertices[0], facet_vertices[1], apex_vertex, opposite_vertex};
    }
};

struct DegeneratedMesh {
    Mesh mesh;
    std::vector<Patch> patches;
};

/// Uniform mesh of the unit square with step 1/n; every grid square is cut
/// along its lower-left to upper-right diagonal.
Mesh build_uniform_unit_square_mesh(std::size_t n);

/// Builds the patch {deg_cell, nd_cell}. Throws InvalidPatchError unless the
/// two cells share exactly one facet.
Patch make_patch(const Mesh& mesh, Index deg_cell, Index nd_cell);

/// Moves the lower-right corner of `square` perpendicularly toward the
/// square's diagonal until it sits at distance `epsilon` from it. The lower
/// triangle becomes the sliver, the upper triangle its regular companion.
DegeneratedMesh degenerate_square(const Mesh& mesh, GridSquare square, double epsilon);

/// Degenerates several squares at once. Patches come back in input order.
DegeneratedMesh degenerate_squares(const Mesh& mesh, std::span<const GridSquare> squares, double epsilon);

/// Largest number of squares with pairwise Chebyshev distance >= 3 inside
/// the admissible range 1 <= i, j <= n - 2.
std::size_t max_separated_squares(std::size_t n);

/// Seeded choice of `count` admissible squares, pairwise Chebyshev distance
/// >= 3. Deterministic for a given (n, count, seed) on every platform.
/// Throws CapacityError when count exceeds max_separated_squares(n).
std::vector<GridSquare> select_degenerate_squares(std::size_t n, std::size_t count, std::uint64_t seed);

/// One square at the centre of each 3x3 block of grid squares.
std::vector<GridSquare> dense_degenerate_pattern(std::size_t n);

CellQuality triangle_quality(Point2 a, Point2 b, Point2 c);
CellQuality cell_quality(const Mesh& mesh, Index cell);

std::vector<Index> detect_degenerate_cells(const Mesh& mesh, double c0 = kDefaultC0);

struct PatchCheck {
    std::size_t patch = 0;
    bool well_formed = false;       // the 2-cell (nd, deg) shape the schemes support
    std::vector<std::size_t> overlaps;  // other patches sharing an extended cell
    std::size_t extended_size = 0;
    bool within_bound = false;      // extended_size <= M
    double nd_quality = 0.0;
    bool nd_regular = false;        // nd_quality <= c0
    bool touches_boundary = false;  // a patch vertex lies on the square boundary

    bool passed() const {
        return well_formed && overlaps.empty() && within_bound && nd_regular && !touches_boundary;
    }
};

struct ValidationReport {
    std::vector<PatchCheck> patches;
    std::vector<Index> uncovered_degenerate_cells;  // quality > c0 but not a patch sliver
    bool passed = false;

    std::string summary() const;
};

ValidationReport validate_assumptions(const Mesh& mesh, std::span<const Patch> patches,
                                      double c0 = kDefaultC0,
                                      std::size_t max_extended_cells = kDefaultMaxExtendedCells);

}  // namespace dmfem
