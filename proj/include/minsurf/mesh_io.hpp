#pragma once

#include <string>

#include "minsurf/mesh.hpp"

namespace minsurf {

// A triangulation together with the vertex position field it was stored
// with.
struct MeshData {
  Triangulation mesh;
  Eigen::MatrixXd positions;  // V x m
};

// Writes mesh and positions as OBJ or OFF, chosen by file extension
// (".obj" / ".off", case-insensitive). Floats are printed with %.17g so a
// read-back reproduces every bit. Chart coordinates travel as OBJ texture
// coordinates (as comment lines in OFF); everything a plain viewer has no
// slot for (boundary parameters, boundary facets, per-simplex corner charts
// on seams, the chart period) goes into comment lines of the form
//   # bparam <vid> <component> <t>
//   # bfacet <v0> <v1>
//   # cparam <sid> <corner> <x> [<y>]
// with 1-based ids, which standard readers skip.
void write_mesh(const std::string& path, const Triangulation& t,
                const Eigen::MatrixXd& positions);

// Reads a mesh written by write_mesh (either format). Validates the result
// and throws DomainError with the offending line on malformed input.
MeshData read_mesh(const std::string& path);

}  // namespace minsurf
