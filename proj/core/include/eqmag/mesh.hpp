#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eqmag/types.hpp"

namespace eqmag {

/// Classification of a mesh face. Boundary faces are split into the part
/// where the tangential trace of the magnetic field is prescribed (Gamma_T)
/// and the part where the normal trace of the induction is (Gamma_N).
enum class BoundaryKind : std::uint8_t { Interior, GammaT, GammaN };

/// A cutting surface either constrains the discrete potential space (its
/// boundary lies on Gamma_T) or is used to check the periods of the
/// reconstructed induction (its boundary lies on Gamma_N).
enum class SurfaceRole : std::uint8_t { LambdaConstraint, PeriodCheck };

struct CutSurface {
  std::string name;
  SurfaceRole role = SurfaceRole::LambdaConstraint;
  /// Global face ids, ascending.
  std::vector<int> faces;
  /// +1 when the surface normal agrees with the canonical normal of the face
  /// (see TetMesh::face_normal), -1 otherwise.
  std::vector<int> signs;
};

/// Surface given as triangles whose vertex order fixes the normal by the
/// right-hand rule.
struct SurfaceInput {
  std::string name;
  SurfaceRole role = SurfaceRole::LambdaConstraint;
  std::vector<std::array<int, 3>> triangles;
};

using FaceKey = std::array<int, 3>;

inline FaceKey sorted_key(std::array<int, 3> v) {
  if (v[0] > v[1]) std::swap(v[0], v[1]);
  if (v[1] > v[2]) std::swap(v[1], v[2]);
  if (v[0] > v[1]) std::swap(v[0], v[1]);
  return v;
}

/// Raw mesh description consumed by TetMesh::build.
struct MeshInput {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;
  /// Region tag per tet; empty means every tet is in region 0.
  std::vector<int> regions;
  /// Boundary classification keyed by the sorted vertex triple.
  std::map<FaceKey, BoundaryKind> boundary;
  /// Applied to boundary faces absent from `boundary`; if unset such faces
  /// are an error.
  std::optional<BoundaryKind> default_boundary;
  std::vector<SurfaceInput> surfaces;
  /// Permeability per region; regions without an entry get the identity.
  std::map<int, Mat3> materials;
};

/// Conforming tetrahedral mesh with deduplicated edges and faces.
///
/// Entity numbering is deterministic: edges and faces are numbered in
/// lexicographic order of their sorted global vertex tuples. Finite element
/// code works on the *sorted* vertex order of each tet (see sorted_tet), which
/// makes every shared edge and face parameterized identically from both sides.
/// Immutable after construction.
class TetMesh {
 public:
  static TetMesh build(MeshInput input);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_tets() const { return static_cast<int>(tets_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }

  const Vec3& vertex(int v) const { return vertices_[v]; }
  std::span<const Vec3> vertices() const { return vertices_; }

  /// Vertices in stored order (positive signed volume).
  const std::array<int, 4>& tet(int k) const { return tets_[k]; }
  /// Vertices in ascending global index order.
  std::array<int, 4> sorted_tet(int k) const;
  /// Local edges (0,1),(0,2),(0,3),(1,2),(1,3),(2,3) of the sorted order.
  const std::array<int, 6>& tet_edges(int k) const { return tet_edges_[k]; }
  /// Face i is opposite sorted local vertex i.
  const std::array<int, 4>& tet_faces(int k) const { return tet_faces_[k]; }

  const std::array<int, 2>& edge(int e) const { return edges_[e]; }
  const std::array<int, 3>& face(int f) const { return faces_[f]; }
  /// Adjacent tets, ascending; the second entry is -1 on the boundary.
  const std::array<int, 2>& face_tets(int f) const { return face_tets_[f]; }
  BoundaryKind face_kind(int f) const { return face_kind_[f]; }
  bool is_boundary_face(int f) const { return face_tets_[f][1] < 0; }

  int region(int k) const { return regions_[k]; }
  const Mat3& mu(int k) const { return mu_[region_slot_[k]]; }
  const Mat3& chi(int k) const { return chi_[region_slot_[k]]; }
  const std::map<int, Mat3>& materials() const { return materials_; }

  std::span<const int> vertex_tets(int v) const;
  const std::vector<CutSurface>& surfaces() const { return surfaces_; }

  double volume(int k) const;
  double diameter() const;
  /// Unit normal (x1 - x0) x (x2 - x0) of the sorted face triple.
  Vec3 face_normal(int f) const;
  /// Unit normal n_F: outward on the boundary, from the lower to the higher
  /// indexed adjacent tet on interior faces.
  Vec3 jump_normal(int f) const;
  /// Outward unit normal of tet k on its face with local index i.
  Vec3 outward_normal(int k, int i) const;
  double face_area(int f) const;

  int find_edge(int a, int b) const;
  int find_face(FaceKey key) const;

  bool has_gamma_n() const { return has_gamma_n_; }
  bool has_gamma_t() const { return has_gamma_t_; }
  /// True if the vertex belongs to a face of the given boundary kind.
  bool vertex_on(int v, BoundaryKind kind) const;
  bool edge_on(int e, BoundaryKind kind) const;

  /// Reconstructs an input description (boundary map, oriented surface
  /// triangles, materials) that builds an identical mesh.
  MeshInput to_input() const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 4>> tets_;
  std::vector<int> regions_;
  std::vector<int> region_slot_;
  std::vector<Mat3> mu_, chi_;
  std::map<int, Mat3> materials_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> faces_;
  std::vector<std::array<int, 6>> tet_edges_;
  std::vector<std::array<int, 4>> tet_faces_;
  std::vector<std::array<int, 2>> face_tets_;
  std::vector<BoundaryKind> face_kind_;
  std::vector<int> vertex_tet_offsets_, vertex_tet_list_;
  std::vector<std::uint8_t> vertex_flags_, edge_flags_;
  std::vector<CutSurface> surfaces_;
  bool has_gamma_n_ = false, has_gamma_t_ = false;
};

/// Result of validate_conformity. Empty means conforming.
struct ConformityReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks that a tet soup is conforming: no face shared by more than two
/// tets, no vertex lying inside a face or edge it is not a vertex of.
ConformityReport validate_conformity(std::span<const Vec3> vertices,
                                     std::span<const std::array<int, 4>> tets);
ConformityReport validate_conformity(const TetMesh& mesh);

struct ShapeRegularity {
  std::vector<double> h;      ///< longest edge
  std::vector<double> rho;    ///< inscribed ball diameter, 6V / sum of face areas
  std::vector<double> kappa;  ///< h / rho
  double h_max = 0.0;
  double kappa_max = 0.0;
};

ShapeRegularity shape_regularity(const TetMesh& mesh);

/// Tets sharing a vertex, with the hat-function gradients on each of them.
struct VertexPatch {
  int vertex = -1;
  std::vector<int> tets;  ///< ascending
  /// Position of `vertex` in sorted_tet() of each patch tet.
  std::vector<int> local_vertex;
  std::vector<Vec3> grad_psi;
  /// Faces containing the vertex, ascending.
  std::vector<int> faces;
  /// True when the zero normal-trace condition covers the whole patch
  /// boundary, i.e. the vertex is interior or all boundary faces containing
  /// it lie on Gamma_N. The divergence data must then have zero mean.
  bool closed_boundary = false;
  /// The vertex touches both Gamma_T and Gamma_N faces.
  bool mixed_boundary = false;
};

VertexPatch build_vertex_patch(const TetMesh& mesh, int vertex);

/// Split of a vertex patch into the two sides of a cutting surface. The plus
/// side has outward normal +n_Sigma on the surface.
struct PatchSplit {
  int vertex = -1;
  int surface = -1;
  std::vector<int> plus, minus;
  /// Selected side, +1 or -1.
  int side = 1;
  const std::vector<int>& chosen() const { return side > 0 ? plus : minus; }
};

PatchSplit split_patch_by_surface(const TetMesh& mesh, const VertexPatch& patch,
                                  int surface_index);

/// Barycentric gradients of the sorted local vertices of tet k.
std::array<Vec3, 4> barycentric_gradients(const TetMesh& mesh, int k);

}  // namespace eqmag
