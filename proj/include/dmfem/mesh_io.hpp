#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "dmfem/mesh.hpp"

namespace dmfem {

// Line-oriented mesh text format:
//
//   dmfem-mesh v1
//   vertices N
//   x y boundary_flag        (N lines, 17 significant digits)
//   cells M
//   v0 v1 v2                 (M lines, 0-based, counterclockwise)
//   patches P
//   deg nd facet_v0 facet_v1 (P lines)
//
// Coordinates round-trip exactly. The nominal step of a loaded mesh is
// sqrt(2 * area / cells), which recovers 1/n for (degenerated) uniform
// meshes; grid structure is re-detected from the connectivity.

void write_mesh(std::ostream& out, const Mesh& mesh, std::span<const Patch> patches);
void write_mesh(const std::string& path, const Mesh& mesh, std::span<const Patch> patches);

DegeneratedMesh read_mesh(std::istream& in);
DegeneratedMesh read_mesh(const std::string& path);

}  // namespace dmfem
