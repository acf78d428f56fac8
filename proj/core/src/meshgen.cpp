#include "eqmag/meshgen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace eqmag {

namespace {

// Structured grid of hexes of size h starting at lo; hexes whose center fails
// `keep` are dropped and unused vertices are removed.
MeshInput kuhn_grid(const Vec3& lo, double h, std::array<int, 3> n, const std::function<bool(const Vec3&)>& keep) {
  auto gid = [&](int i, int j, int k) { return i + (n[0] + 1) * (j + (n[1] + 1) * k); };
  const int total = (n[0] + 1) * (n[1] + 1) * (n[2] + 1);
  std::vector<int> renum(total, -1);
  MeshInput in;
  static const std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  auto vid = [&](int i, int j, int k) {
    int& r = renum[gid(i, j, k)];
    if (r < 0) {
      r = static_cast<int>(in.vertices.size());
      in.vertices.push_back(lo + h * Vec3(i, j, k));
    }
    return r;
  };
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        const Vec3 center = lo + h * Vec3(i + 0.5, j + 0.5, k + 0.5);
        if (!keep(center)) continue;
        for (const auto& p : perms) {
          std::array<int, 3> c{i, j, k};
          std::array<int, 4> t{};
          t[0] = vid(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[p[s]];
            t[s + 1] = vid(c[0], c[1], c[2]);
          }
          const Vec3 &a = in.vertices[t[0]], &b = in.vertices[t[1]], &cc = in.vertices[t[2]], &d = in.vertices[t[3]];
          if ((b - a).dot((cc - a).cross(d - a)) < 0.0) std::swap(t[2], t[3]);
          in.tets.push_back(t);
        }
      }
  return in;
}

}  // namespace

TetMesh cube_mesh(int n, BoundaryKind boundary) {
  if (n < 1) throw MeshError("cube mesh needs n >= 1");
  MeshInput in = kuhn_grid(Vec3::Zero(), 1.0 / n, {n, n, n}, [](const Vec3&) { return true; });
  in.default_boundary = boundary;
  return TetMesh::build(std::move(in));
}

TetMesh torus_mesh(int n, BoundaryKind boundary) {
  if (n < 1) throw MeshError("torus mesh needs n >= 1");
  const double h = 1.0 / n;
  MeshInput in = kuhn_grid(Vec3(-2, -1, -2), h, {4 * n, 2 * n, 4 * n},
                           [](const Vec3& c) { return !(std::abs(c[0]) < 1.0 && std::abs(c[2]) < 1.0); });
  in.default_boundary = boundary;

  // Cutting disk: faces in the plane z = 0 with x >= 1, oriented along +z.
  SurfaceInput disk;
  disk.name = "disk";
  disk.role = boundary == BoundaryKind::GammaT ? SurfaceRole::LambdaConstraint : SurfaceRole::PeriodCheck;
  const double tol = 1e-9 * h;
  std::vector<FaceKey> seen;
  for (const auto& t : in.tets)
    for (int skip = 0; skip < 4; ++skip) {
      std::array<int, 3> tri{};
      int m = 0;
      for (int a = 0; a < 4; ++a)
        if (a != skip) tri[m++] = t[a];
      bool on = true;
      for (int v : tri) on = on && std::abs(in.vertices[v][2]) < tol && in.vertices[v][0] > 1.0 - tol;
      if (!on) continue;
      const FaceKey key = sorted_key(tri);
      if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
      seen.push_back(key);
      const Vec3& a = in.vertices[tri[0]];
      if ((in.vertices[tri[1]] - a).cross(in.vertices[tri[2]] - a)[2] < 0.0) std::swap(tri[1], tri[2]);
      disk.triangles.push_back(tri);
    }
  in.surfaces.push_back(std::move(disk));
  return TetMesh::build(std::move(in));
}

TetMesh lbrick_mesh(int n, BoundaryKind boundary) {
  if (n < 1) throw MeshError("lbrick mesh needs n >= 1");
  MeshInput in = kuhn_grid(Vec3(-2, -2, 0), 1.0 / n, {4 * n, 4 * n, 2 * n},
                           [](const Vec3& c) { return !(c[0] > 0.0 && c[1] < 0.0); });
  in.default_boundary = boundary;
  return TetMesh::build(std::move(in));
}

TetMesh builtin_mesh(const std::string& descriptor, BoundaryKind boundary) {
  const auto colon = descriptor.find(':');
  const std::string name = descriptor.substr(0, colon);
  int n = 1;
  if (colon != std::string::npos) {
    try {
      n = std::stoi(descriptor.substr(colon + 1));
    } catch (const std::exception&) {
      throw MeshError("bad builtin mesh size in '" + descriptor + "'");
    }
  }
  if (name == "cube") return cube_mesh(n, boundary);
  if (name == "torus") return torus_mesh(n, boundary);
  if (name == "lbrick") return lbrick_mesh(n, boundary);
  throw MeshError("unknown builtin mesh '" + name + "'");
}

}  // namespace eqmag
