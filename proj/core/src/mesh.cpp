#include "eqmag/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <Eigen/Dense>

namespace eqmag {

namespace {

constexpr std::array<std::array<int, 2>, 6> kLocalEdges{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
constexpr std::array<std::array<int, 3>, 4> kLocalFaces{
    {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

enum VertexFlag : std::uint8_t { kOnGammaT = 1, kOnGammaN = 2 };

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

std::string key_string(const FaceKey& k) {
  std::ostringstream os;
  os << "(" << k[0] << "," << k[1] << "," << k[2] << ")";
  return os.str();
}

bool is_spd(const Mat3& m) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff()))
    return false;
  Eigen::SelfAdjointEigenSolver<Mat3> es(m);
  return es.eigenvalues().minCoeff() > 0.0;
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

std::array<int, 4> TetMesh::sorted_tet(int k) const {
  auto t = tets_[k];
  std::sort(t.begin(), t.end());
  return t;
}

std::span<const int> TetMesh::vertex_tets(int v) const {
  return {vertex_tet_list_.data() + vertex_tet_offsets_[v],
          static_cast<std::size_t>(vertex_tet_offsets_[v + 1] - vertex_tet_offsets_[v])};
}

double TetMesh::volume(int k) const {
  const auto& t = tets_[k];
  return signed_volume(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]], vertices_[t[3]]);
}

double TetMesh::diameter() const {
  Vec3 lo = vertices_.front(), hi = vertices_.front();
  for (const auto& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

Vec3 TetMesh::face_normal(int f) const {
  const auto& fv = faces_[f];
  Vec3 n = (vertices_[fv[1]] - vertices_[fv[0]]).cross(vertices_[fv[2]] - vertices_[fv[0]]);
  return n.normalized();
}

double TetMesh::face_area(int f) const {
  const auto& fv = faces_[f];
  return 0.5 * (vertices_[fv[1]] - vertices_[fv[0]]).cross(vertices_[fv[2]] - vertices_[fv[0]]).norm();
}

Vec3 TetMesh::outward_normal(int k, int i) const {
  const int f = tet_faces_[k][i];
  const auto s = sorted_tet(k);
  Vec3 n = face_normal(f);
  if (n.dot(vertices_[s[i]] - vertices_[faces_[f][0]]) > 0.0) n = -n;
  return n;
}

Vec3 TetMesh::jump_normal(int f) const {
  const int k = face_tets_[f][0];
  const auto& tf = tet_faces_[k];
  const int i = static_cast<int>(std::find(tf.begin(), tf.end(), f) - tf.begin());
  return outward_normal(k, i);
}

int TetMesh::find_edge(int a, int b) const {
  std::array<int, 2> key{std::min(a, b), std::max(a, b)};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return -1;
  return static_cast<int>(it - edges_.begin());
}

int TetMesh::find_face(FaceKey key) const {
  key = sorted_key(key);
  auto it = std::lower_bound(faces_.begin(), faces_.end(), key);
  if (it == faces_.end() || *it != key) return -1;
  return static_cast<int>(it - faces_.begin());
}

bool TetMesh::vertex_on(int v, BoundaryKind kind) const {
  if (kind == BoundaryKind::GammaT) return vertex_flags_[v] & kOnGammaT;
  if (kind == BoundaryKind::GammaN) return vertex_flags_[v] & kOnGammaN;
  return vertex_flags_[v] == 0;
}

bool TetMesh::edge_on(int e, BoundaryKind kind) const {
  if (kind == BoundaryKind::GammaT) return edge_flags_[e] & kOnGammaT;
  if (kind == BoundaryKind::GammaN) return edge_flags_[e] & kOnGammaN;
  return edge_flags_[e] == 0;
}

TetMesh TetMesh::build(MeshInput in) {
  TetMesh m;
  const int nv = static_cast<int>(in.vertices.size());
  const int nt = static_cast<int>(in.tets.size());
  if (nt == 0) throw MeshError("mesh has no tetrahedra");
  if (!in.regions.empty() && static_cast<int>(in.regions.size()) != nt)
    throw MeshError("region list size does not match tet count");

  for (int k = 0; k < nt; ++k) {
    const auto& t = in.tets[k];
    for (int v : t)
      if (v < 0 || v >= nv) throw MeshError("tet " + std::to_string(k) + " references a missing vertex");
    auto s = t;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
      throw MeshError("tet " + std::to_string(k) + " has repeated vertices");
    const double vol = signed_volume(in.vertices[t[0]], in.vertices[t[1]], in.vertices[t[2]],
                                     in.vertices[t[3]]);
    double scale = 0.0;
    for (const auto& e : kLocalEdges)
      scale = std::max(scale, (in.vertices[t[e[0]]] - in.vertices[t[e[1]]]).norm());
    if (std::abs(vol) <= 1e-14 * scale * scale * scale)
      throw MeshError("degenerate element " + std::to_string(k) + " (zero volume)");
    if (vol < 0.0) throw MeshError("inverted element " + std::to_string(k));
  }

  m.vertices_ = std::move(in.vertices);
  m.tets_ = std::move(in.tets);
  m.regions_ = in.regions.empty() ? std::vector<int>(nt, 0) : std::move(in.regions);

  // Faces: sort (key, tet, local) records and group.
  struct FaceRec {
    FaceKey key;
    int tet;
    int local;
  };
  std::vector<FaceRec> recs;
  recs.reserve(4 * nt);
  std::vector<std::array<int, 2>> edge_recs;
  edge_recs.reserve(6 * nt);
  for (int k = 0; k < nt; ++k) {
    const auto s = m.sorted_tet(k);
    for (int i = 0; i < 4; ++i) {
      const auto& lf = kLocalFaces[i];
      recs.push_back({{s[lf[0]], s[lf[1]], s[lf[2]]}, k, i});
    }
    for (const auto& le : kLocalEdges) edge_recs.push_back({s[le[0]], s[le[1]]});
  }
  std::sort(recs.begin(), recs.end(), [](const FaceRec& a, const FaceRec& b) {
    return a.key != b.key ? a.key < b.key : a.tet < b.tet;
  });
  m.tet_faces_.assign(nt, {-1, -1, -1, -1});
  for (std::size_t i = 0; i < recs.size();) {
    std::size_t j = i;
    while (j < recs.size() && recs[j].key == recs[i].key) ++j;
    if (j - i > 2) throw MeshError("face " + key_string(recs[i].key) + " shared by >2 tets");
    const int f = static_cast<int>(m.faces_.size());
    m.faces_.push_back(recs[i].key);
    m.face_tets_.push_back({recs[i].tet, j - i == 2 ? recs[i + 1].tet : -1});
    for (std::size_t r = i; r < j; ++r) m.tet_faces_[recs[r].tet][recs[r].local] = f;
    i = j;
  }

  std::sort(edge_recs.begin(), edge_recs.end());
  edge_recs.erase(std::unique(edge_recs.begin(), edge_recs.end()), edge_recs.end());
  m.edges_ = std::move(edge_recs);
  m.tet_edges_.resize(nt);
  for (int k = 0; k < nt; ++k) {
    const auto s = m.sorted_tet(k);
    for (int i = 0; i < 6; ++i) m.tet_edges_[k][i] = m.find_edge(s[kLocalEdges[i][0]], s[kLocalEdges[i][1]]);
  }

  // Boundary classification.
  const int nf = m.num_faces();
  m.face_kind_.assign(nf, BoundaryKind::Interior);
  for (const auto& [key, kind] : in.boundary) {
    const int f = m.find_face(key);
    if (f < 0) throw MeshError("boundary triangle " + key_string(key) + " is not a mesh face");
    if (!m.is_boundary_face(f)) {
      throw MeshError("boundary tag on interior face " + key_string(key));
    }
    if (kind == BoundaryKind::Interior) throw MeshError("boundary face tagged as interior");
    m.face_kind_[f] = kind;
  }
  m.vertex_flags_.assign(m.num_vertices(), 0);
  m.edge_flags_.assign(m.num_edges(), 0);
  for (int f = 0; f < nf; ++f) {
    if (!m.is_boundary_face(f)) continue;
    if (m.face_kind_[f] == BoundaryKind::Interior) {
      if (!in.default_boundary) throw MeshError("untagged boundary face " + key_string(m.faces_[f]));
      m.face_kind_[f] = *in.default_boundary;
    }
    const std::uint8_t flag = m.face_kind_[f] == BoundaryKind::GammaT ? kOnGammaT : kOnGammaN;
    (m.face_kind_[f] == BoundaryKind::GammaT ? m.has_gamma_t_ : m.has_gamma_n_) = true;
    const auto& fv = m.faces_[f];
    for (int a = 0; a < 3; ++a) {
      m.vertex_flags_[fv[a]] |= flag;
      m.edge_flags_[m.find_edge(fv[a], fv[(a + 1) % 3])] |= flag;
    }
  }

  // Vertex to tet adjacency (CSR, tets ascending).
  m.vertex_tet_offsets_.assign(m.num_vertices() + 1, 0);
  for (const auto& t : m.tets_)
    for (int v : t) ++m.vertex_tet_offsets_[v + 1];
  std::partial_sum(m.vertex_tet_offsets_.begin(), m.vertex_tet_offsets_.end(),
                   m.vertex_tet_offsets_.begin());
  m.vertex_tet_list_.resize(4 * nt);
  {
    auto fill = m.vertex_tet_offsets_;
    for (int k = 0; k < nt; ++k)
      for (int v : m.tets_[k]) m.vertex_tet_list_[fill[v]++] = k;
  }

  // Materials.
  m.materials_ = std::move(in.materials);
  std::map<int, int> slot;
  m.region_slot_.resize(nt);
  for (int k = 0; k < nt; ++k) {
    const int r = m.regions_[k];
    auto it = slot.find(r);
    if (it == slot.end()) {
      auto mat = m.materials_.find(r);
      const Mat3 mu = mat == m.materials_.end() ? Mat3::Identity() : mat->second;
      if (!is_spd(mu)) throw MeshError("permeability of region " + std::to_string(r) + " is not SPD");
      it = slot.emplace(r, static_cast<int>(m.mu_.size())).first;
      m.mu_.push_back(mu);
      m.chi_.push_back(mu.inverse());
    }
    m.region_slot_[k] = it->second;
  }

  // Cutting surfaces.
  for (const auto& sin : in.surfaces) {
    CutSurface cs;
    cs.name = sin.name;
    cs.role = sin.role;
    std::vector<std::pair<int, int>> face_sign;
    // Directed edge usage for orientation and boundary detection.
    std::map<std::array<int, 2>, std::vector<std::pair<int, int>>> edge_use;
    for (const auto& tri : sin.triangles) {
      const int f = m.find_face(tri);
      if (f < 0) throw MeshError("surface '" + sin.name + "' triangle " + key_string(tri) + " is not a mesh face");
      const Vec3 n = (m.vertices_[tri[1]] - m.vertices_[tri[0]]).cross(m.vertices_[tri[2]] - m.vertices_[tri[0]]);
      face_sign.emplace_back(f, n.dot(m.face_normal(f)) > 0.0 ? 1 : -1);
      for (int a = 0; a < 3; ++a) {
        const int u = tri[a], w = tri[(a + 1) % 3];
        edge_use[{std::min(u, w), std::max(u, w)}].emplace_back(static_cast<int>(face_sign.size()) - 1, u < w ? 1 : -1);
      }
    }
    std::sort(face_sign.begin(), face_sign.end());
    for (std::size_t i = 1; i < face_sign.size(); ++i)
      if (face_sign[i].first == face_sign[i - 1].first)
        throw MeshError("surface '" + sin.name + "' lists a face twice");
    if (face_sign.empty()) throw MeshError("surface '" + sin.name + "' is empty");

    DisjointSet ds(static_cast<int>(sin.triangles.size()));
    const BoundaryKind required =
        sin.role == SurfaceRole::LambdaConstraint ? BoundaryKind::GammaT : BoundaryKind::GammaN;
    for (const auto& [edge, uses] : edge_use) {
      if (uses.size() > 2) throw MeshError("surface '" + sin.name + "' is not a manifold");
      if (uses.size() == 2) {
        if (uses[0].second == uses[1].second)
          throw MeshError("surface '" + sin.name + "' is not consistently oriented");
        ds.unite(uses[0].first, uses[1].first);
      } else {
        const int e = m.find_edge(edge[0], edge[1]);
        if (!m.edge_on(e, required))
          throw MeshError("surface '" + sin.name + "' has a boundary edge off " +
                          std::string(required == BoundaryKind::GammaT ? "Gamma_T" : "Gamma_N"));
      }
    }
    const int root = ds.find(0);
    for (int i = 1; i < static_cast<int>(sin.triangles.size()); ++i)
      if (ds.find(i) != root) throw MeshError("surface '" + sin.name + "' is not connected");

    for (const auto& [f, s] : face_sign) {
      cs.faces.push_back(f);
      cs.signs.push_back(s);
    }
    m.surfaces_.push_back(std::move(cs));
  }
  return m;
}

MeshInput TetMesh::to_input() const {
  MeshInput in;
  in.vertices = vertices_;
  in.tets = tets_;
  in.regions = regions_;
  in.materials = materials_;
  for (int f = 0; f < num_faces(); ++f)
    if (is_boundary_face(f)) in.boundary[faces_[f]] = face_kind_[f];
  for (const auto& cs : surfaces_) {
    SurfaceInput s;
    s.name = cs.name;
    s.role = cs.role;
    for (std::size_t i = 0; i < cs.faces.size(); ++i) {
      auto tri = faces_[cs.faces[i]];
      if (cs.signs[i] < 0) std::swap(tri[1], tri[2]);
      s.triangles.push_back(tri);
    }
    in.surfaces.push_back(std::move(s));
  }
  return in;
}

ConformityReport validate_conformity(std::span<const Vec3> vertices,
                                     std::span<const std::array<int, 4>> tets) {
  ConformityReport report;
  std::map<std::array<int, 4>, int> tet_seen;
  std::map<FaceKey, int> face_count;
  for (std::size_t k = 0; k < tets.size(); ++k) {
    auto s = tets[k];
    std::sort(s.begin(), s.end());
    if (auto [it, fresh] = tet_seen.emplace(s, static_cast<int>(k)); !fresh)
      report.violations.push_back("duplicate tet " + std::to_string(k) + " of tet " +
                                  std::to_string(it->second));
    for (const auto& lf : kLocalFaces) ++face_count[{s[lf[0]], s[lf[1]], s[lf[2]]}];
  }
  std::vector<FaceKey> all_faces;
  for (const auto& [key, n] : face_count) {
    if (n > 2) report.violations.push_back("face shared by >2 tets " + key_string(key));
    all_faces.push_back(key);
  }

  // Hanging vertices: a vertex inside (or on an edge of) a face it does not
  // belong to. Vertices are bucketed on a uniform grid.
  if (vertices.empty() || all_faces.empty()) return report;
  Vec3 lo = vertices[0], hi = vertices[0];
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double diam = std::max((hi - lo).norm(), 1e-300);
  const int cells = std::max(1, static_cast<int>(std::cbrt(static_cast<double>(vertices.size()))));
  const Vec3 ext = (hi - lo).cwiseMax(Vec3::Constant(1e-12 * diam));
  auto cell_of = [&](const Vec3& x) {
    std::array<int, 3> c{};
    for (int d = 0; d < 3; ++d)
      c[d] = std::clamp(static_cast<int>((x[d] - lo[d]) / ext[d] * cells), 0, cells - 1);
    return c;
  };
  std::unordered_map<long long, std::vector<int>> grid;
  auto cell_id = [&](const std::array<int, 3>& c) {
    return (static_cast<long long>(c[0]) * cells + c[1]) * cells + c[2];
  };
  for (int v = 0; v < static_cast<int>(vertices.size()); ++v) grid[cell_id(cell_of(vertices[v]))].push_back(v);

  const double tol = 1e-10;
  for (const auto& key : all_faces) {
    const Vec3 &a = vertices[key[0]], &b = vertices[key[1]], &c = vertices[key[2]];
    const Vec3 n = (b - a).cross(c - a);
    const double area2 = n.norm();
    const double scale = std::max({(b - a).norm(), (c - a).norm(), (c - b).norm()});
    const Vec3 flo = a.cwiseMin(b).cwiseMin(c) - Vec3::Constant(tol * scale);
    const Vec3 fhi = a.cwiseMax(b).cwiseMax(c) + Vec3::Constant(tol * scale);
    const auto c0 = cell_of(flo), c1 = cell_of(fhi);
    for (int i = c0[0]; i <= c1[0]; ++i)
      for (int j = c0[1]; j <= c1[1]; ++j)
        for (int l = c0[2]; l <= c1[2]; ++l) {
          auto it = grid.find(cell_id({i, j, l}));
          if (it == grid.end()) continue;
          for (int v : it->second) {
            if (v == key[0] || v == key[1] || v == key[2]) continue;
            const Vec3& p = vertices[v];
            if (std::abs(n.dot(p - a)) > tol * scale * area2) continue;
            const double l0 = n.dot((b - p).cross(c - p)) / (area2 * area2);
            const double l1 = n.dot((c - p).cross(a - p)) / (area2 * area2);
            const double l2 = 1.0 - l0 - l1;
            if (l0 >= -tol && l1 >= -tol && l2 >= -tol)
              report.violations.push_back("hanging vertex " + std::to_string(v) + " on face " +
                                          key_string(key));
          }
        }
  }
  return report;
}

ConformityReport validate_conformity(const TetMesh& mesh) {
  std::vector<std::array<int, 4>> tets(mesh.num_tets());
  for (int k = 0; k < mesh.num_tets(); ++k) tets[k] = mesh.tet(k);
  return validate_conformity(mesh.vertices(), tets);
}

ShapeRegularity shape_regularity(const TetMesh& mesh) {
  ShapeRegularity r;
  const int nt = mesh.num_tets();
  r.h.resize(nt);
  r.rho.resize(nt);
  r.kappa.resize(nt);
  for (int k = 0; k < nt; ++k) {
    const auto& t = mesh.tet(k);
    double h = 0.0;
    for (const auto& e : kLocalEdges) h = std::max(h, (mesh.vertex(t[e[0]]) - mesh.vertex(t[e[1]])).norm());
    const double vol = mesh.volume(k);
    if (vol <= 0.0) throw MeshError("degenerate element " + std::to_string(k));
    double area = 0.0;
    for (int f : mesh.tet_faces(k)) area += mesh.face_area(f);
    r.h[k] = h;
    r.rho[k] = 6.0 * vol / area;
    r.kappa[k] = h / r.rho[k];
    r.h_max = std::max(r.h_max, h);
    r.kappa_max = std::max(r.kappa_max, r.kappa[k]);
  }
  return r;
}

std::array<Vec3, 4> barycentric_gradients(const TetMesh& mesh, int k) {
  const auto s = mesh.sorted_tet(k);
  Mat3 jac;
  for (int d = 0; d < 3; ++d) jac.col(d) = mesh.vertex(s[d + 1]) - mesh.vertex(s[0]);
  const Mat3 inv = jac.inverse();
  std::array<Vec3, 4> g;
  for (int d = 0; d < 3; ++d) g[d + 1] = inv.row(d).transpose();
  g[0] = -(g[1] + g[2] + g[3]);
  return g;
}

VertexPatch build_vertex_patch(const TetMesh& mesh, int vertex) {
  if (vertex < 0 || vertex >= mesh.num_vertices()) throw MeshError("vertex index out of range");
  VertexPatch p;
  p.vertex = vertex;
  const auto tets = mesh.vertex_tets(vertex);
  if (tets.empty()) throw MeshError("isolated vertex " + std::to_string(vertex));
  p.tets.assign(tets.begin(), tets.end());
  std::sort(p.tets.begin(), p.tets.end());
  bool touches_t = false, touches_n = false;
  for (int k : p.tets) {
    const auto s = mesh.sorted_tet(k);
    const int lv = static_cast<int>(std::find(s.begin(), s.end(), vertex) - s.begin());
    p.local_vertex.push_back(lv);
    p.grad_psi.push_back(barycentric_gradients(mesh, k)[lv]);
    for (int i = 0; i < 4; ++i) {
      if (i == lv) continue;
      const int f = mesh.tet_faces(k)[i];
      p.faces.push_back(f);
      if (mesh.face_kind(f) == BoundaryKind::GammaT) touches_t = true;
      if (mesh.face_kind(f) == BoundaryKind::GammaN) touches_n = true;
    }
  }
  std::sort(p.faces.begin(), p.faces.end());
  p.faces.erase(std::unique(p.faces.begin(), p.faces.end()), p.faces.end());
  p.closed_boundary = !touches_t;
  p.mixed_boundary = touches_t && touches_n;
  return p;
}

PatchSplit split_patch_by_surface(const TetMesh& mesh, const VertexPatch& patch, int surface_index) {
  const CutSurface& surf = mesh.surfaces().at(surface_index);
  PatchSplit split;
  split.vertex = patch.vertex;
  split.surface = surface_index;

  std::map<int, int> sigma_sign;  // faces of the surface containing the vertex
  for (std::size_t i = 0; i < surf.faces.size(); ++i) {
    const auto& fv = mesh.face(surf.faces[i]);
    if (fv[0] == patch.vertex || fv[1] == patch.vertex || fv[2] == patch.vertex)
      sigma_sign[surf.faces[i]] = surf.signs[i];
  }
  if (sigma_sign.empty())
    throw MeshError("vertex " + std::to_string(patch.vertex) + " is not on surface '" + surf.name + "'");

  const int n = static_cast<int>(patch.tets.size());
  std::map<int, int> local_of;
  for (int i = 0; i < n; ++i) local_of[patch.tets[i]] = i;
  DisjointSet ds(n);
  for (int f : patch.faces) {
    const auto& ft = mesh.face_tets(f);
    if (ft[1] < 0 || sigma_sign.count(f)) continue;
    ds.unite(local_of.at(ft[0]), local_of.at(ft[1]));
  }

  // Side of each component from the orientation of adjacent surface faces.
  std::map<int, int> comp_side;
  for (int i = 0; i < n; ++i) {
    const int k = patch.tets[i];
    for (int lf = 0; lf < 4; ++lf) {
      const int f = mesh.tet_faces(k)[lf];
      auto it = sigma_sign.find(f);
      if (it == sigma_sign.end()) continue;
      const Vec3 n_sigma = it->second * mesh.face_normal(f);
      const int side = mesh.outward_normal(k, lf).dot(n_sigma) > 0.0 ? 1 : -1;
      auto [c, fresh] = comp_side.emplace(ds.find(i), side);
      if (!fresh && c->second != side)
        throw MeshError("surface '" + surf.name + "' does not separate the patch of vertex " +
                        std::to_string(patch.vertex));
    }
  }
  std::set<int> roots;
  for (int i = 0; i < n; ++i) roots.insert(ds.find(i));
  if (roots.size() > 2 || comp_side.size() != roots.size())
    throw MeshError("non-manifold surface configuration at vertex " + std::to_string(patch.vertex));
  if (roots.size() == 2 && comp_side.begin()->second == std::next(comp_side.begin())->second)
    throw MeshError("both patch halves on the same side of surface '" + surf.name + "'");

  for (int i = 0; i < n; ++i) (comp_side.at(ds.find(i)) > 0 ? split.plus : split.minus).push_back(patch.tets[i]);

  // Prefer a side whose boundary faces through the vertex avoid Gamma_T.
  auto touches_gamma_t = [&](const std::vector<int>& side) {
    for (int k : side)
      for (int f : mesh.tet_faces(k)) {
        if (mesh.face_kind(f) != BoundaryKind::GammaT) continue;
        const auto& fv = mesh.face(f);
        if (fv[0] == patch.vertex || fv[1] == patch.vertex || fv[2] == patch.vertex) return true;
      }
    return false;
  };
  const bool on_gamma_n = mesh.vertex_on(patch.vertex, BoundaryKind::GammaN);
  auto admissible = [&](const std::vector<int>& side) {
    return !side.empty() && (!on_gamma_n || !touches_gamma_t(side));
  };
  if (admissible(split.plus)) {
    split.side = 1;
  } else if (admissible(split.minus)) {
    split.side = -1;
  } else {
    throw MeshError("no admissible half patch at vertex " + std::to_string(patch.vertex));
  }
  return split;
}

}  // namespace eqmag
