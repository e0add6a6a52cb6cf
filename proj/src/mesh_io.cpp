#include "dmfem/mesh_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "dmfem/errors.hpp"
#include "dmfem/format.hpp"

namespace dmfem {

namespace {

constexpr const char* kHeader = "dmfem-mesh v1";

std::size_t read_section(std::istream& in, const std::string& name) {
    std::string line;
    while (std::getline(in, line) && line.empty()) {
    }
    std::istringstream ls(line);
    std::string word;
    long long count = -1;
    if (!(ls >> word >> count) || word != name || count < 0) {
        throw IoError("expected section '" + name + " <count>', got '" + line + "'");
    }
    return static_cast<std::size_t>(count);
}

std::string next_line(std::istream& in, const char* what) {
    std::string line;
    if (!std::getline(in, line)) throw IoError(std::string("truncated mesh file in ") + what);
    return line;
}

// Exact inverse of format_double; istream >> double is not guaranteed
// to round correctly everywhere.
double parse_double(const std::string& token) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw IoError("bad number '" + token + "'");
    }
    return v;
}

// (n+1)^2 vertices in row-major lattice order with the generator's
// connectivity.
std::size_t detect_grid(const std::vector<Point2>& vertices, const std::vector<Cell>& cells) {
    const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(cells.size()) / 2.0)));
    if (n < 2 || 2 * n * n != cells.size() || (n + 1) * (n + 1) != vertices.size()) return 0;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const Index ll = j * (n + 1) + i;
            const Index lr = ll + 1;
            const Index ur = ll + n + 2;
            const Index ul = ll + n + 1;
            const auto& lower = cells[2 * (j * n + i)].v;
            const auto& upper = cells[2 * (j * n + i) + 1].v;
            if (lower != std::array<Index, 3>{ll, lr, ur} || upper != std::array<Index, 3>{ll, ur, ul}) return 0;
        }
    }
    return n;
}

}  // namespace

void write_mesh(std::ostream& out, const Mesh& mesh, std::span<const Patch> patches) {
    out << kHeader << '\n';
    out << "vertices " << mesh.num_vertices() << '\n';
    for (Index v = 0; v < mesh.num_vertices(); ++v) {
        const Point2 p = mesh.vertex(v);
        out << format_double(p.x) << ' ' << format_double(p.y) << ' ' << (mesh.is_boundary_vertex(v) ? 1 : 0)
            << '\n';
    }
    out << "cells " << mesh.num_cells() << '\n';
    for (const auto& c : mesh.cells()) out << c.v[0] << ' ' << c.v[1] << ' ' << c.v[2] << '\n';
    out << "patches " << patches.size() << '\n';
    for (const auto& p : patches) {
        out << p.deg_cell << ' ' << p.nd_cell << ' ' << p.facet_vertices[0] << ' ' << p.facet_vertices[1] << '\n';
    }
}

void write_mesh(const std::string& path, const Mesh& mesh, std::span<const Patch> patches) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_mesh(out, mesh, patches);
    if (!out) throw IoError("write to '" + path + "' failed");
}

DegeneratedMesh read_mesh(std::istream& in) {
    std::string header;
    while (std::getline(in, header) && header.empty()) {
    }
    if (header != kHeader) throw IoError("not a dmfem mesh (header '" + header + "')");

    const std::size_t nv = read_section(in, "vertices");
    std::vector<Point2> vertices(nv);
    std::vector<int> flags(nv);
    for (std::size_t k = 0; k < nv; ++k) {
        std::istringstream ls(next_line(in, "vertices"));
        std::string xs, ys;
        if (!(ls >> xs >> ys >> flags[k])) throw IoError("bad vertex line");
        vertices[k] = {parse_double(xs), parse_double(ys)};
    }

    const std::size_t nc = read_section(in, "cells");
    std::vector<Cell> cells(nc);
    for (auto& c : cells) {
        std::istringstream ls(next_line(in, "cells"));
        if (!(ls >> c.v[0] >> c.v[1] >> c.v[2])) throw IoError("bad cell line");
    }
    if (nc == 0) throw IoError("mesh without cells");

    const std::size_t np = read_section(in, "patches");
    struct PatchLine {
        Index deg, nd, f0, f1;
    };
    std::vector<PatchLine> lines(np);
    for (auto& p : lines) {
        std::istringstream ls(next_line(in, "patches"));
        if (!(ls >> p.deg >> p.nd >> p.f0 >> p.f1)) throw IoError("bad patch line");
    }

    const std::size_t grid = detect_grid(vertices, cells);
    const double h = grid > 0 ? 1.0 / static_cast<double>(grid)
                              : std::sqrt(2.0 / static_cast<double>(nc));
    DegeneratedMesh out{Mesh(std::move(vertices), std::move(cells), h, grid), {}};
    for (Index v = 0; v < out.mesh.num_vertices(); ++v) {
        if ((flags[v] != 0) != out.mesh.is_boundary_vertex(v)) {
            throw IoError("boundary flag of vertex " + std::to_string(v) + " disagrees with topology");
        }
    }
    for (const auto& l : lines) {
        if (l.deg >= out.mesh.num_cells() || l.nd >= out.mesh.num_cells()) throw IoError("patch cell out of range");
        Patch p = make_patch(out.mesh, l.deg, l.nd);
        const Index lo = std::min(l.f0, l.f1);
        const Index hi = std::max(l.f0, l.f1);
        if (p.facet_vertices[0] != lo || p.facet_vertices[1] != hi) {
            throw IoError("patch facet does not match the shared edge of its cells");
        }
        out.patches.push_back(std::move(p));
    }
    return out;
}

DegeneratedMesh read_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_mesh(in);
}

}  // namespace dmfem
