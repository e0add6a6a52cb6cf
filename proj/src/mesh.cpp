#include "dmfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <tuple>
#include <utility>

#include "dmfem/errors.hpp"

namespace dmfem {

namespace {

constexpr double kBoundaryTol = 1e-14;
constexpr double kAreaSumTol = 1e-12;

bool on_square_boundary(Point2 p) {
    return std::abs(p.x) <= kBoundaryTol || std::abs(p.x - 1.0) <= kBoundaryTol ||
           std::abs(p.y) <= kBoundaryTol || std::abs(p.y - 1.0) <= kBoundaryTol;
}

// Both endpoints on the same side of the unit square.
bool on_one_side(Point2 a, Point2 b) {
    auto near = [](double u, double target) { return std::abs(u - target) <= kBoundaryTol; };
    return (near(a.x, 0.0) && near(b.x, 0.0)) || (near(a.x, 1.0) && near(b.x, 1.0)) ||
           (near(a.y, 0.0) && near(b.y, 0.0)) || (near(a.y, 1.0) && near(b.y, 1.0));
}

std::size_t chebyshev(GridSquare a, GridSquare b) {
    const auto di = a.i > b.i ? a.i - b.i : b.i - a.i;
    const auto dj = a.j > b.j ? a.j - b.j : b.j - a.j;
    return std::max(di, dj);
}

bool is_admissible(std::size_t n, GridSquare s) {
    return n >= 3 && s.i >= 1 && s.j >= 1 && s.i + 2 <= n && s.j + 2 <= n;
}

// Fisher-Yates driven by raw mt19937_64 output; std::shuffle and the
// standard distributions are implementation-defined, this is not.
void seeded_shuffle(std::vector<GridSquare>& v, std::mt19937_64& rng) {
    for (std::size_t k = v.size(); k > 1; --k) {
        const auto r = static_cast<std::size_t>(rng() % k);
        std::swap(v[k - 1], v[r]);
    }
}

}  // namespace

Mesh::Mesh(std::vector<Point2> vertices, std::vector<Cell> cells, double h, std::size_t grid_size)
    : vertices_(std::move(vertices)), cells_(std::move(cells)), h_(h), grid_size_(grid_size) {
    if (!(h_ > 0.0) || !std::isfinite(h_)) {
        throw InvalidArgument("mesh step must be positive and finite");
    }
    for (const auto& c : cells_) {
        for (Index v : c.v) {
            if (v >= vertices_.size()) {
                throw InvalidArgument("cell references a vertex out of range");
            }
        }
        if (c.v[0] == c.v[1] || c.v[1] == c.v[2] || c.v[0] == c.v[2]) {
            throw InvalidArgument("cell with repeated vertex");
        }
    }
    build_topology();
    validate();
}

void Mesh::build_topology() {
    struct EdgeRef {
        Index a, b, cell;
    };
    std::vector<EdgeRef> edges;
    edges.reserve(3 * cells_.size());
    for (Index c = 0; c < cells_.size(); ++c) {
        const auto& v = cells_[c].v;
        for (int k = 0; k < 3; ++k) {
            Index a = v[k];
            Index b = v[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            edges.push_back({a, b, c});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const EdgeRef& l, const EdgeRef& r) {
        return std::tie(l.a, l.b, l.cell) < std::tie(r.a, r.b, r.cell);
    });

    facets_.clear();
    for (std::size_t k = 0; k < edges.size();) {
        std::size_t end = k + 1;
        while (end < edges.size() && edges[end].a == edges[k].a && edges[end].b == edges[k].b) ++end;
        if (end - k > 2) {
            throw GeometryError("non-conforming mesh: an edge is shared by more than two cells");
        }
        Facet f;
        f.v = {edges[k].a, edges[k].b};
        f.cells[0] = edges[k].cell;
        if (end - k == 2) f.cells[1] = edges[k + 1].cell;
        facets_.push_back(f);
        k = end;
    }

    boundary_.assign(vertices_.size(), 0);
    for (const auto& f : facets_) {
        if (f.is_boundary()) {
            boundary_[f.v[0]] = 1;
            boundary_[f.v[1]] = 1;
        }
    }

    vertex_cell_offsets_.assign(vertices_.size() + 1, 0);
    for (const auto& c : cells_) {
        for (Index v : c.v) ++vertex_cell_offsets_[v + 1];
    }
    for (std::size_t v = 0; v < vertices_.size(); ++v) {
        vertex_cell_offsets_[v + 1] += vertex_cell_offsets_[v];
    }
    vertex_cells_.resize(vertex_cell_offsets_.back());
    auto cursor = vertex_cell_offsets_;
    for (Index c = 0; c < cells_.size(); ++c) {
        for (Index v : cells_[c].v) vertex_cells_[cursor[v]++] = c;
    }
}

void Mesh::validate() const {
    // Neumaier summation keeps the area check meaningful on large meshes.
    double sum = 0.0;
    double comp = 0.0;
    for (Index c = 0; c < cells_.size(); ++c) {
        const double a = cell_area(c);
        if (!(a > 0.0) || !std::isfinite(a)) {
            std::ostringstream msg;
            msg << "cell " << c << " has non-positive signed area " << a;
            throw GeometryError(msg.str());
        }
        const double t = sum + a;
        comp += std::abs(sum) >= std::abs(a) ? (sum - t) + a : (a - t) + sum;
        sum = t;
    }
    if (std::abs(sum + comp - 1.0) > kAreaSumTol) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "cell areas sum to " << sum + comp << ", expected 1";
        throw GeometryError(msg.str());
    }
    for (const auto& f : facets_) {
        if (f.is_boundary() && !on_one_side(vertices_[f.v[0]], vertices_[f.v[1]])) {
            throw GeometryError("boundary facet off the unit square boundary (hanging node or hole)");
        }
    }
    for (Index v = 0; v < vertices_.size(); ++v) {
        const Point2 p = vertices_[v];
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw GeometryError("non-finite vertex coordinate");
        }
        if (boundary_[v] && !on_square_boundary(p)) {
            throw GeometryError("boundary vertex off the unit square boundary");
        }
        if (vertex_cell_offsets_[v] == vertex_cell_offsets_[v + 1]) {
            throw GeometryError("vertex not used by any cell");
        }
    }
}

std::array<Point2, 3> Mesh::cell_points(Index c) const {
    const auto& v = cells_[c].v;
    return {vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]};
}

double Mesh::cell_area(Index c) const {
    const auto p = cell_points(c);
    return signed_area(p[0], p[1], p[2]);
}

std::size_t Mesh::num_boundary_vertices() const {
    return static_cast<std::size_t>(std::count(boundary_.begin(), boundary_.end(), std::uint8_t{1}));
}

std::span<const Index> Mesh::cells_of_vertex(Index v) const {
    return {vertex_cells_.data() + vertex_cell_offsets_[v],
            vertex_cell_offsets_[v + 1] - vertex_cell_offsets_[v]};
}

std::optional<Index> Mesh::find_facet(Index a, Index b) const {
    if (a > b) std::swap(a, b);
    const auto it = std::lower_bound(facets_.begin(), facets_.end(), std::pair{a, b},
                                     [](const Facet& f, const std::pair<Index, Index>& key) {
                                         return std::pair{f.v[0], f.v[1]} < key;
                                     });
    if (it == facets_.end() || it->v[0] != a || it->v[1] != b) return std::nullopt;
    return static_cast<Index>(it - facets_.begin());
}

Mesh Mesh::with_vertices(std::vector<Point2> vertices) const {
    if (vertices.size() != vertices_.size()) {
        throw InvalidArgument("vertex count changed");
    }
    return Mesh(std::move(vertices), cells_, h_, grid_size_);
}

Mesh build_uniform_unit_square_mesh(std::size_t n) {
    if (n < 2) throw InvalidArgument("uniform mesh needs n >= 2");
    const double nd = static_cast<double>(n);
    std::vector<Point2> vertices;
    vertices.reserve((n + 1) * (n + 1));
    for (std::size_t j = 0; j <= n; ++j) {
        for (std::size_t i = 0; i <= n; ++i) {
            vertices.push_back({static_cast<double>(i) / nd, static_cast<double>(j) / nd});
        }
    }
    std::vector<Cell> cells;
    cells.reserve(2 * n * n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const Index ll = j * (n + 1) + i;
            const Index lr = ll + 1;
            const Index ur = ll + n + 2;
            const Index ul = ll + n + 1;
            cells.push_back({{ll, lr, ur}});
            cells.push_back({{ll, ur, ul}});
        }
    }
    return Mesh(std::move(vertices), std::move(cells), 1.0 / nd, n);
}

Patch make_patch(const Mesh& mesh, Index deg_cell, Index nd_cell) {
    if (deg_cell >= mesh.num_cells() || nd_cell >= mesh.num_cells() || deg_cell == nd_cell) {
        throw InvalidPatchError("patch cells out of range or identical");
    }
    const auto& dv = mesh.cells()[deg_cell].v;
    const auto& nv = mesh.cells()[nd_cell].v;
    std::vector<Index> shared;
    for (Index a : dv) {
        if (std::find(nv.begin(), nv.end(), a) != nv.end()) shared.push_back(a);
    }
    if (shared.size() != 2) {
        throw InvalidPatchError("patch cells must share exactly one facet");
    }
    Patch p;
    p.deg_cell = deg_cell;
    p.nd_cell = nd_cell;
    p.facet_vertices = {std::min(shared[0], shared[1]), std::max(shared[0], shared[1])};
    p.facet = *mesh.find_facet(shared[0], shared[1]);
    for (Index a : dv) {
        if (a != shared[0] && a != shared[1]) p.apex_vertex = a;
    }
    for (Index a : nv) {
        if (a != shared[0] && a != shared[1]) p.opposite_vertex = a;
    }

    for (Index v : p.vertices()) {
        for (Index c : mesh.cells_of_vertex(v)) p.extended_cells.push_back(c);
    }
    std::sort(p.extended_cells.begin(), p.extended_cells.end());
    p.extended_cells.erase(std::unique(p.extended_cells.begin(), p.extended_cells.end()),
                           p.extended_cells.end());

    const auto pv = p.vertices();
    for (std::size_t a = 0; a < pv.size(); ++a) {
        for (std::size_t b = a + 1; b < pv.size(); ++b) {
            p.diameter = std::max(p.diameter, distance(mesh.vertex(pv[a]), mesh.vertex(pv[b])));
        }
    }
    return p;
}

namespace {

// Moves the lower-right corner of `s` in place; returns the (deg, nd) cells.
std::pair<Index, Index> move_corner(const Mesh& topology, std::vector<Point2>& vertices, GridSquare s,
                                    double epsilon) {
    const std::size_t n = topology.grid_size();
    if (n == 0) throw InvalidArgument("degeneration needs a uniform grid mesh");
    if (!is_admissible(n, s)) {
        std::ostringstream msg;
        msg << "square (" << s.i << ", " << s.j << ") is not strictly interior for n = " << n;
        throw InvalidArgument(msg.str());
    }
    const Point2 a = vertices[topology.grid_vertex(s.i, s.j)];
    const Point2 b = vertices[topology.grid_vertex(s.i + 1, s.j + 1)];
    const Index moved = topology.grid_vertex(s.i + 1, s.j);
    const Point2 p = vertices[moved];

    const Point2 dir = b - a;
    const double len = norm(dir);
    const Point2 unit_normal = (1.0 / len) * Point2{dir.y, -dir.x};  // points to the lower-right side
    const double dist = dot(p - a, unit_normal);
    const double height = topology.h() / std::numbers::sqrt2;
    if (!(epsilon > 0.0) || epsilon > height * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "epsilon " << epsilon << " outside (0, " << height << "]";
        throw InvalidArgument(msg.str());
    }
    if (!(dist > 0.0)) {
        throw GeometryError("corner already on or across the diagonal");
    }
    vertices[moved] = p - (dist - epsilon) * unit_normal;
    return {topology.lower_cell(s), topology.upper_cell(s)};
}

void check_incident_cells(const Mesh& topology, const std::vector<Point2>& vertices, Index moved) {
    for (Index c : topology.cells_of_vertex(moved)) {
        const auto& v = topology.cells()[c].v;
        if (!(signed_area(vertices[v[0]], vertices[v[1]], vertices[v[2]]) > 0.0)) {
            std::ostringstream msg;
            msg << "moving vertex " << moved << " would invert cell " << c;
            throw GeometryError(msg.str());
        }
    }
}

}  // namespace

DegeneratedMesh degenerate_square(const Mesh& mesh, GridSquare square, double epsilon) {
    const std::array<GridSquare, 1> one{square};
    return degenerate_squares(mesh, one, epsilon);
}

DegeneratedMesh degenerate_squares(const Mesh& mesh, std::span<const GridSquare> squares, double epsilon) {
    std::vector<Point2> vertices = mesh.vertices();
    std::vector<std::pair<Index, Index>> pairs;
    pairs.reserve(squares.size());
    for (const auto& s : squares) {
        pairs.push_back(move_corner(mesh, vertices, s, epsilon));
        check_incident_cells(mesh, vertices, mesh.grid_vertex(s.i + 1, s.j));
    }
    DegeneratedMesh out{mesh.with_vertices(std::move(vertices)), {}};
    out.patches.reserve(pairs.size());
    for (const auto& [deg, nd] : pairs) out.patches.push_back(make_patch(out.mesh, deg, nd));
    return out;
}

std::size_t max_separated_squares(std::size_t n) {
    if (n < 3) return 0;
    const std::size_t side = (n - 2 + 2) / 3;  // ceil((n - 2) / 3)
    return side * side;
}

std::vector<GridSquare> select_degenerate_squares(std::size_t n, std::size_t count, std::uint64_t seed) {
    const std::size_t cap = max_separated_squares(n);
    if (count > cap) {
        std::ostringstream msg;
        msg << "cannot place " << count << " separated degenerate squares on an n = " << n
            << " grid; at most " << cap << " fit";
        throw CapacityError(msg.str(), cap);
    }
    std::vector<GridSquare> chosen;
    if (count == 0) return chosen;

    std::vector<GridSquare> candidates;
    for (std::size_t j = 1; j + 2 <= n; ++j) {
        for (std::size_t i = 1; i + 2 <= n; ++i) candidates.push_back({i, j});
    }
    std::mt19937_64 rng(seed);
    bool found = false;
    for (int attempt = 0; attempt < 64 && !found; ++attempt) {
        seeded_shuffle(candidates, rng);
        chosen.clear();
        for (const auto& c : candidates) {
            const bool far = std::all_of(chosen.begin(), chosen.end(),
                                         [&](const GridSquare& o) { return chebyshev(c, o) >= 3; });
            if (far) {
                chosen.push_back(c);
                if (chosen.size() == count) break;
            }
        }
        found = chosen.size() == count;
    }
    if (!found) {
        // Near capacity random greedy packing can fall short; pick from the
        // maximal lattice packing instead.
        std::vector<GridSquare> lattice;
        for (std::size_t j = 1; j + 2 <= n; j += 3) {
            for (std::size_t i = 1; i + 2 <= n; i += 3) lattice.push_back({i, j});
        }
        seeded_shuffle(lattice, rng);
        chosen.assign(lattice.begin(), lattice.begin() + static_cast<std::ptrdiff_t>(count));
    }
    std::sort(chosen.begin(), chosen.end(), [](const GridSquare& a, const GridSquare& b) {
        return std::tie(a.j, a.i) < std::tie(b.j, b.i);
    });
    return chosen;
}

std::vector<GridSquare> dense_degenerate_pattern(std::size_t n) {
    if (n < 9 || n % 3 != 0) {
        throw InvalidArgument("dense pattern needs n >= 9 and divisible by 3");
    }
    std::vector<GridSquare> out;
    for (std::size_t j = 1; j < n; j += 3) {
        for (std::size_t i = 1; i < n; i += 3) out.push_back({i, j});
    }
    return out;
}

CellQuality triangle_quality(Point2 a, Point2 b, Point2 c) {
    const double area = signed_area(a, b, c);
    if (!(std::abs(area) > 0.0)) throw GeometryError("zero-area cell");
    const std::array<Point2, 3> p{a, b, c};
    CellQuality q;
    q.area = std::abs(area);
    double perimeter = 0.0;
    q.alpha_min = std::numbers::pi;
    q.beta_max = 0.0;
    for (int k = 0; k < 3; ++k) {
        const Point2 e = p[(k + 1) % 3] - p[k];
        const double len = norm(e);
        perimeter += len;
        q.h_K = std::max(q.h_K, len);
        // Angle at vertex k; atan2 stays accurate for slivers.
        const Point2 u = p[(k + 1) % 3] - p[k];
        const Point2 w = p[(k + 2) % 3] - p[k];
        const double angle = std::atan2(std::abs(cross(u, w)), dot(u, w));
        q.alpha_min = std::min(q.alpha_min, angle);
        q.beta_max = std::max(q.beta_max, angle);
    }
    q.rho_K = 2.0 * q.area / perimeter;
    q.quality = q.h_K / q.rho_K;
    return q;
}

CellQuality cell_quality(const Mesh& mesh, Index cell) {
    if (cell >= mesh.num_cells()) throw InvalidArgument("cell index out of range");
    const auto p = mesh.cell_points(cell);
    return triangle_quality(p[0], p[1], p[2]);
}

std::vector<Index> detect_degenerate_cells(const Mesh& mesh, double c0) {
    if (!(c0 > 2.0 * std::numbers::sqrt3)) {
        throw InvalidArgument("c0 must exceed the equilateral optimum 2*sqrt(3)");
    }
    std::vector<Index> out;
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        if (cell_quality(mesh, c).quality > c0) out.push_back(c);
    }
    return out;
}

ValidationReport validate_assumptions(const Mesh& mesh, std::span<const Patch> patches, double c0,
                                      std::size_t max_extended_cells) {
    ValidationReport report;
    std::vector<std::size_t> owner(mesh.num_cells(), patches.size());
    std::vector<std::vector<std::size_t>> overlaps(patches.size());
    for (std::size_t k = 0; k < patches.size(); ++k) {
        for (Index c : patches[k].extended_cells) {
            if (c >= mesh.num_cells()) continue;
            if (owner[c] != patches.size() && owner[c] != k) {
                overlaps[k].push_back(owner[c]);
                overlaps[owner[c]].push_back(k);
            } else {
                owner[c] = k;
            }
        }
    }

    for (std::size_t k = 0; k < patches.size(); ++k) {
        const Patch& p = patches[k];
        PatchCheck check;
        check.patch = k;
        std::sort(overlaps[k].begin(), overlaps[k].end());
        overlaps[k].erase(std::unique(overlaps[k].begin(), overlaps[k].end()), overlaps[k].end());
        check.overlaps = overlaps[k];

        try {
            const Patch rebuilt = make_patch(mesh, p.deg_cell, p.nd_cell);
            check.well_formed = rebuilt.facet == p.facet && rebuilt.apex_vertex == p.apex_vertex &&
                                rebuilt.extended_cells == p.extended_cells;
        } catch (const InvalidPatchError&) {
            check.well_formed = false;
        }
        check.extended_size = p.extended_cells.size();
        check.within_bound = check.extended_size <= max_extended_cells;
        if (p.nd_cell < mesh.num_cells()) {
            check.nd_quality = cell_quality(mesh, p.nd_cell).quality;
            check.nd_regular = check.nd_quality <= c0;
        }
        if (check.well_formed) {
            for (Index v : p.vertices()) check.touches_boundary |= mesh.is_boundary_vertex(v);
        }
        report.patches.push_back(std::move(check));
    }

    std::vector<std::uint8_t> is_sliver(mesh.num_cells(), 0);
    for (const auto& p : patches) {
        if (p.deg_cell < mesh.num_cells()) is_sliver[p.deg_cell] = 1;
    }
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        if (!is_sliver[c] && cell_quality(mesh, c).quality > c0) report.uncovered_degenerate_cells.push_back(c);
    }

    report.passed = report.uncovered_degenerate_cells.empty() &&
                    std::all_of(report.patches.begin(), report.patches.end(),
                                [](const PatchCheck& c) { return c.passed(); });
    return report;
}

std::string ValidationReport::summary() const {
    std::ostringstream out;
    out << (passed ? "PASS" : "FAIL") << ": " << patches.size() << " patches";
    for (const auto& c : patches) {
        if (c.passed()) continue;
        out << "\n  patch " << c.patch << ":";
        if (!c.well_formed) out << " malformed";
        if (!c.overlaps.empty()) {
            out << " overlaps";
            for (auto o : c.overlaps) out << ' ' << o;
        }
        if (!c.within_bound) out << " extended patch has " << c.extended_size << " cells";
        if (!c.nd_regular) out << " regular cell quality " << c.nd_quality;
        if (c.touches_boundary) out << " touches the boundary";
    }
    if (!uncovered_degenerate_cells.empty()) {
        out << "\n  " << uncovered_degenerate_cells.size() << " degenerated cells outside any patch";
    }
    return out.str();
}

}  // namespace dmfem
