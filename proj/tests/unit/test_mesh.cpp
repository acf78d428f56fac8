#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "eqmag/meshgen.hpp"
#include "eqmag/msh_io.hpp"

using namespace eqmag;

namespace {

std::string fixture(const char* name) { return std::string(EQMAG_FIXTURES) + "/" + name; }

double total_volume(const TetMesh& m) {
  double v = 0.0;
  for (int k = 0; k < m.num_tets(); ++k) v += m.volume(k);
  return v;
}

}  // namespace

TEST(MshIo, ReferenceTet) {
  const TetMesh m = parse_msh(fixture("reference_tet.msh"));
  EXPECT_EQ(m.num_tets(), 1);
  EXPECT_EQ(m.num_faces(), 4);
  EXPECT_EQ(m.num_edges(), 6);
  for (int f = 0; f < 4; ++f) EXPECT_EQ(m.face_kind(f), BoundaryKind::GammaT);
  EXPECT_EQ(m.region(0), 10);
}

TEST(MshIo, SixTetCubeMatchesBruteForceDedup) {
  const TetMesh m = parse_msh(fixture("cube6.msh"));
  std::map<std::array<int, 3>, int> count;
  for (int k = 0; k < m.num_tets(); ++k) {
    const auto& t = m.tet(k);
    for (int skip = 0; skip < 4; ++skip) {
      std::array<int, 3> f{};
      int n = 0;
      for (int a = 0; a < 4; ++a)
        if (a != skip) f[n++] = t[a];
      std::sort(f.begin(), f.end());
      ++count[f];
    }
  }
  int boundary = 0;
  for (const auto& [f, c] : count) boundary += c == 1;
  EXPECT_EQ(m.num_vertices(), 8);
  EXPECT_EQ(m.num_tets(), 6);
  EXPECT_EQ(m.num_faces(), static_cast<int>(count.size()));
  EXPECT_EQ(m.num_faces(), 18);
  EXPECT_EQ(boundary, 12);
  EXPECT_NEAR(total_volume(m), 1.0, 1e-14);
}

TEST(MshIo, RejectsPentahedron) {
  try {
    parse_msh(fixture("pentahedron.msh"));
    FAIL() << "expected MeshError";
  } catch (const MeshError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported element type"), std::string::npos);
  }
}

TEST(MshIo, RejectsUntaggedBoundaryFace) {
  std::istringstream in(
      "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n$EndNodes\n"
      "$Elements\n2\n1 2 2 1 1 1 2 3\n2 4 2 1 1 1 2 3 4\n$EndElements\n");
  EXPECT_THROW(parse_msh(in), MeshError);
}

TEST(MshIo, RejectsMalformed) {
  std::istringstream in("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0\n");
  EXPECT_THROW(parse_msh(in), MeshError);
}

TEST(MshIo, RoundTripPreservesTopologyAndSurfaces) {
  const TetMesh m = torus_mesh(1, BoundaryKind::GammaN);
  std::stringstream ss;
  write_msh(m, ss);
  MshTagMap tags;
  tags.surfaces[100] = {"disk", SurfaceRole::PeriodCheck};
  const TetMesh r = parse_msh(ss, tags);
  EXPECT_EQ(r.num_tets(), m.num_tets());
  EXPECT_EQ(r.num_faces(), m.num_faces());
  ASSERT_EQ(r.surfaces().size(), 1u);
  EXPECT_EQ(r.surfaces()[0].faces, m.surfaces()[0].faces);
  EXPECT_EQ(r.surfaces()[0].signs, m.surfaces()[0].signs);
}

TEST(TetMeshBuild, RejectsInvertedElement) {
  MeshInput in;
  in.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  in.tets = {{0, 2, 1, 3}};
  in.default_boundary = BoundaryKind::GammaT;
  EXPECT_THROW(TetMesh::build(in), MeshError);
}

TEST(TetMeshBuild, RejectsNonSpdMaterial) {
  MeshInput in;
  in.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  in.tets = {{0, 1, 2, 3}};
  in.default_boundary = BoundaryKind::GammaT;
  in.materials[0] = Mat3::Identity();
  in.materials[0](0, 0) = -1.0;
  EXPECT_THROW(TetMesh::build(in), MeshError);
}

TEST(Conformity, CubeIsConforming) {
  EXPECT_TRUE(validate_conformity(cube_mesh(1)).ok());
  EXPECT_TRUE(validate_conformity(cube_mesh(3)).ok());
  EXPECT_TRUE(validate_conformity(torus_mesh(1)).ok());
}

TEST(Conformity, HangingVertexInsideSharedFace) {
  // Two tets glued on the face (0,1,2); vertex 5 sits inside that face.
  std::vector<Vec3> v{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1),
                      Vec3(0.25, 0.25, 0)};
  std::vector<std::array<int, 4>> t{{0, 1, 2, 3}, {0, 2, 1, 4}};
  const auto rep = validate_conformity(v, t);
  ASSERT_FALSE(rep.ok());
  bool found = false;
  for (const auto& s : rep.violations) found = found || s.find("hanging vertex") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(Conformity, DuplicateTet) {
  const TetMesh c = cube_mesh(1);
  std::vector<std::array<int, 4>> t;
  for (int k = 0; k < c.num_tets(); ++k) t.push_back(c.tet(k));
  t.push_back(c.tet(2));
  const auto rep = validate_conformity(c.vertices(), t);
  bool found = false;
  for (const auto& s : rep.violations) found = found || s.find("face shared by >2 tets") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(ShapeRegularity, RegularTetrahedron) {
  MeshInput in;
  in.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, std::sqrt(3.0) / 2, 0),
                 Vec3(0.5, std::sqrt(3.0) / 6, std::sqrt(2.0 / 3.0))};
  in.tets = {{0, 1, 2, 3}};
  in.default_boundary = BoundaryKind::GammaT;
  const auto r = shape_regularity(TetMesh::build(in));
  EXPECT_NEAR(r.h[0], 1.0, 1e-14);
  EXPECT_NEAR(r.rho[0], 1.0 / std::sqrt(6.0), 1e-14);
  EXPECT_NEAR(r.kappa[0], std::sqrt(6.0), 1e-13);
}

TEST(ShapeRegularity, ReferenceTetAndLowerBound) {
  const TetMesh m = parse_msh(fixture("reference_tet.msh"));
  EXPECT_NEAR(shape_regularity(m).h[0], std::sqrt(2.0), 1e-14);
  const auto r = shape_regularity(lbrick_mesh(1));
  for (double k : r.kappa) EXPECT_GE(k, 1.0);
}

TEST(TetMeshBuild, FaceAdjacencyAndOrientation) {
  const TetMesh m = cube_mesh(3);
  int incidences = 0;
  for (int f = 0; f < m.num_faces(); ++f) {
    const auto& ft = m.face_tets(f);
    incidences += ft[1] < 0 ? 1 : 2;
    EXPECT_EQ(m.is_boundary_face(f), m.face_kind(f) != BoundaryKind::Interior);
    if (ft[1] >= 0) {
      int i0 = -1, i1 = -1;
      for (int i = 0; i < 4; ++i) {
        if (m.tet_faces(ft[0])[i] == f) i0 = i;
        if (m.tet_faces(ft[1])[i] == f) i1 = i;
      }
      EXPECT_NEAR(m.outward_normal(ft[0], i0).dot(m.outward_normal(ft[1], i1)), -1.0, 1e-14);
    }
  }
  EXPECT_EQ(incidences, 4 * m.num_tets());
  for (int k = 0; k < m.num_tets(); ++k) EXPECT_GT(m.volume(k), 0.0);
}

TEST(VertexPatch, ClosedFlagAndCover) {
  const TetMesh m = cube_mesh(3);
  const int interior = [&] {
    for (int v = 0; v < m.num_vertices(); ++v)
      if ((m.vertex(v) - Vec3(1.0 / 3, 1.0 / 3, 1.0 / 3)).norm() < 1e-12) return v;
    return -1;
  }();
  ASSERT_GE(interior, 0);
  EXPECT_TRUE(build_vertex_patch(m, interior).closed_boundary);
  EXPECT_FALSE(build_vertex_patch(m, 0).closed_boundary);

  const TetMesh mn = cube_mesh(2, BoundaryKind::GammaN);
  EXPECT_TRUE(build_vertex_patch(mn, 0).closed_boundary);

  std::vector<int> cover(m.num_tets(), 0);
  for (int v = 0; v < m.num_vertices(); ++v)
    for (int k : build_vertex_patch(m, v).tets) ++cover[k];
  for (int c : cover) EXPECT_EQ(c, 4);
}

TEST(VertexPatch, PartitionOfUnity) {
  const TetMesh m = lbrick_mesh(1);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < m.num_tets(); k += 7) {
    const auto g = barycentric_gradients(m, k);
    const auto s = m.sorted_tet(k);
    for (int trial = 0; trial < 10; ++trial) {
      double l[4] = {u(rng), u(rng), u(rng), u(rng)};
      const double sum = l[0] + l[1] + l[2] + l[3];
      Vec3 x = Vec3::Zero();
      for (int i = 0; i < 4; ++i) x += l[i] / sum * m.vertex(s[i]);
      double total = 0.0;
      for (int i = 0; i < 4; ++i) total += 1.0 + g[i].dot(x - m.vertex(s[i]));
      EXPECT_NEAR(total, 1.0, 1e-13);
    }
    EXPECT_NEAR((g[0] + g[1] + g[2] + g[3]).norm(), 0.0, 1e-13);
  }
}

TEST(Builtin, VolumesAndCounts) {
  EXPECT_EQ(cube_mesh(1).num_tets(), 6);
  EXPECT_NEAR(total_volume(torus_mesh(1)), 24.0, 1e-12);
  EXPECT_NEAR(total_volume(torus_mesh(2)), 24.0, 1e-12);
  EXPECT_NEAR(total_volume(lbrick_mesh(1)), 24.0, 1e-12);
  EXPECT_EQ(lbrick_mesh(1).num_tets(), 144);
  EXPECT_THROW(cube_mesh(0), MeshError);
  EXPECT_THROW(builtin_mesh("sphere:2"), MeshError);
}

TEST(Builtin, TorusDisk) {
  const TetMesh m = torus_mesh(2);
  ASSERT_EQ(m.surfaces().size(), 1u);
  const auto& s = m.surfaces()[0];
  EXPECT_EQ(s.role, SurfaceRole::LambdaConstraint);
  double area = 0.0;
  for (std::size_t i = 0; i < s.faces.size(); ++i) {
    area += m.face_area(s.faces[i]);
    EXPECT_NEAR((s.signs[i] * m.face_normal(s.faces[i]) - Vec3(0, 0, 1)).norm(), 0.0, 1e-14);
  }
  EXPECT_NEAR(area, 2.0, 1e-13);
  EXPECT_EQ(torus_mesh(1, BoundaryKind::GammaN).surfaces()[0].role, SurfaceRole::PeriodCheck);
}

TEST(Surfaces, RejectsOpenEdgeOffBoundaryPart) {
  // A disk that stops in the interior of the cube does not have its boundary on Gamma_T.
  const TetMesh c = cube_mesh(2);
  MeshInput in = c.to_input();
  SurfaceInput s;
  s.name = "partial";
  for (int f = 0; f < c.num_faces(); ++f) {
    const auto& fv = c.face(f);
    bool on = true;
    for (int v : fv) on = on && std::abs(c.vertex(v)[2] - 0.5) < 1e-12 && c.vertex(v)[0] < 0.5 + 1e-12;
    if (on) s.triangles.push_back(fv);
  }
  ASSERT_FALSE(s.triangles.empty());
  // orient consistently
  for (auto& t : s.triangles)
    if ((c.vertex(t[1]) - c.vertex(t[0])).cross(c.vertex(t[2]) - c.vertex(t[0]))[2] < 0) std::swap(t[1], t[2]);
  in.surfaces = {s};
  EXPECT_THROW(TetMesh::build(in), MeshError);
}

namespace {

// Independent flood fill over face adjacency, skipping the surface faces.
std::vector<std::set<int>> flood_components(const TetMesh& m, const VertexPatch& p, const std::set<int>& blocked) {
  std::set<int> left(p.tets.begin(), p.tets.end());
  std::vector<std::set<int>> comps;
  while (!left.empty()) {
    std::set<int> comp{*left.begin()};
    std::vector<int> stack{*left.begin()};
    left.erase(left.begin());
    while (!stack.empty()) {
      const int k = stack.back();
      stack.pop_back();
      for (int f : m.tet_faces(k)) {
        if (blocked.count(f)) continue;
        const auto& fv = m.face(f);
        if (fv[0] != p.vertex && fv[1] != p.vertex && fv[2] != p.vertex) continue;
        for (int n : m.face_tets(f))
          if (n >= 0 && left.count(n)) {
            left.erase(n);
            comp.insert(n);
            stack.push_back(n);
          }
      }
    }
    comps.push_back(comp);
  }
  return comps;
}

}  // namespace

TEST(PatchSplit, MatchesFloodFillOnTorusDisk) {
  const TetMesh m = torus_mesh(2, BoundaryKind::GammaN);
  const auto& s = m.surfaces()[0];
  std::set<int> blocked(s.faces.begin(), s.faces.end());
  std::set<int> disk_vertices;
  for (int f : s.faces)
    for (int v : m.face(f)) disk_vertices.insert(v);
  int interior_checked = 0;
  for (int v : disk_vertices) {
    const auto patch = build_vertex_patch(m, v);
    const auto split = split_patch_by_surface(m, patch, 0);
    std::set<int> plus(split.plus.begin(), split.plus.end()), minus(split.minus.begin(), split.minus.end());
    std::vector<int> all;
    std::set_union(plus.begin(), plus.end(), minus.begin(), minus.end(), std::back_inserter(all));
    EXPECT_EQ(all, patch.tets);
    std::vector<int> both;
    std::set_intersection(plus.begin(), plus.end(), minus.begin(), minus.end(), std::back_inserter(both));
    EXPECT_TRUE(both.empty());
    const auto comps = flood_components(m, patch, blocked);
    ASSERT_EQ(comps.size(), 2u);
    EXPECT_TRUE((comps[0] == plus && comps[1] == minus) || (comps[0] == minus && comps[1] == plus));
    // Plus side has outward normal +z on the disk, so it lies below.
    for (int k : split.plus) {
      Vec3 c = Vec3::Zero();
      for (int a : m.tet(k)) c += m.vertex(a) / 4;
      EXPECT_LT(c[2], 0.0);
    }
    if (m.vertex_on(v, BoundaryKind::Interior)) ++interior_checked;
  }
  EXPECT_GT(interior_checked, 0);
}

TEST(PatchSplit, BoundaryHuggingSurfaceHasEmptySide) {
  // Surface on the bottom face z = 0 of the cube: all patch tets lie above.
  const TetMesh c = cube_mesh(2, BoundaryKind::GammaN);
  MeshInput in = c.to_input();
  SurfaceInput s;
  s.name = "floor";
  s.role = SurfaceRole::PeriodCheck;
  for (int f = 0; f < c.num_faces(); ++f) {
    const auto& fv = c.face(f);
    bool on = true;
    for (int v : fv) on = on && std::abs(c.vertex(v)[2]) < 1e-12;
    if (!on) continue;
    auto t = fv;
    if ((c.vertex(t[1]) - c.vertex(t[0])).cross(c.vertex(t[2]) - c.vertex(t[0]))[2] < 0) std::swap(t[1], t[2]);
    s.triangles.push_back(t);
  }
  in.surfaces = {s};
  const TetMesh m = TetMesh::build(in);
  int v = -1;
  for (int a = 0; a < m.num_vertices(); ++a)
    if ((m.vertex(a) - Vec3(0.5, 0.5, 0.0)).norm() < 1e-12) v = a;
  ASSERT_GE(v, 0);
  const auto patch = build_vertex_patch(m, v);
  const auto split = split_patch_by_surface(m, patch, 0);
  // Normal +z points into the domain, so the tets sit on the minus side.
  EXPECT_TRUE(split.plus.empty());
  EXPECT_EQ(split.minus.size(), patch.tets.size());
  EXPECT_EQ(split.side, -1);
}
