#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "eqmag/mesh.hpp"

namespace eqmag {

/// Meaning of physical tags in an MSH file. Triangles whose tag is in
/// gamma_t / gamma_n classify boundary faces, tags in `surfaces` form cutting
/// surfaces (triangle vertex order gives the normal). Tet physical tags are
/// region ids.
struct MshTagMap {
  std::set<int> gamma_t{1};
  std::set<int> gamma_n{2};
  std::optional<BoundaryKind> default_boundary;
  std::map<int, std::pair<std::string, SurfaceRole>> surfaces;
  std::map<int, Mat3> materials;
};

/// Reads the ASCII v2.2 subset: $Nodes and $Elements with triangles (type 2)
/// and tets (type 4). Points and lines are skipped; any other element type is
/// rejected.
TetMesh parse_msh(const std::string& path, const MshTagMap& tags = {});
TetMesh parse_msh(std::istream& in, const MshTagMap& tags = {});

/// Writes boundary faces (tag 1 for Gamma_T, 2 for Gamma_N), surfaces (tags
/// 100, 101, ...) and tets with their region tag.
void write_msh(const TetMesh& mesh, std::ostream& out);

}  // namespace eqmag
