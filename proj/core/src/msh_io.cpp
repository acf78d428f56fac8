#include "eqmag/msh_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

namespace eqmag {

namespace {

std::string next_line(std::istream& in, const char* context) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) return line;
  }
  throw MeshError(std::string("malformed msh: unexpected end of file in ") + context);
}

void expect(std::istream& in, const std::string& token) {
  const std::string line = next_line(in, token.c_str());
  std::istringstream ls(line);
  std::string word;
  ls >> word;
  if (word != token) throw MeshError("malformed msh: expected " + token + ", got '" + line + "'");
}

long long read_count(std::istream& in, const char* context) {
  std::istringstream ls(next_line(in, context));
  long long n = -1;
  if (!(ls >> n) || n < 0) throw MeshError(std::string("malformed msh: bad count in ") + context);
  return n;
}

}  // namespace

TetMesh parse_msh(const std::string& path, const MshTagMap& tags) {
  std::ifstream f(path);
  if (!f) throw MeshError("cannot open mesh file '" + path + "'");
  return parse_msh(f, tags);
}

TetMesh parse_msh(std::istream& in, const MshTagMap& tags) {
  MeshInput mi;
  mi.default_boundary = tags.default_boundary;
  mi.materials = tags.materials;
  std::unordered_map<long long, int> node_index;
  struct Tri {
    std::array<int, 3> v;
    int tag;
  };
  std::vector<Tri> tris;
  std::vector<std::array<long long, 4>> raw_tets;
  std::vector<std::array<long long, 3>> raw_tris;
  std::vector<int> tri_tags;
  bool have_format = false, have_nodes = false, have_elements = false;

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream hs(line);
    std::string section;
    if (!(hs >> section)) continue;
    if (section == "$MeshFormat") {
      std::istringstream ls(next_line(in, "$MeshFormat"));
      double version = 0.0;
      int file_type = -1;
      if (!(ls >> version >> file_type)) throw MeshError("malformed msh: bad $MeshFormat");
      if (version < 2.0 || version >= 3.0 || file_type != 0)
        throw MeshError("unsupported msh format (need ASCII 2.2)");
      expect(in, "$EndMeshFormat");
      have_format = true;
    } else if (section == "$Nodes") {
      const long long n = read_count(in, "$Nodes");
      for (long long i = 0; i < n; ++i) {
        std::istringstream ls(next_line(in, "$Nodes"));
        long long id;
        double x, y, z;
        if (!(ls >> id >> x >> y >> z)) throw MeshError("malformed msh: bad node line");
        if (!node_index.emplace(id, static_cast<int>(mi.vertices.size())).second)
          throw MeshError("malformed msh: duplicate node id " + std::to_string(id));
        mi.vertices.emplace_back(x, y, z);
      }
      expect(in, "$EndNodes");
      have_nodes = true;
    } else if (section == "$Elements") {
      const long long n = read_count(in, "$Elements");
      for (long long i = 0; i < n; ++i) {
        std::istringstream ls(next_line(in, "$Elements"));
        long long id;
        int type, ntags;
        if (!(ls >> id >> type >> ntags) || ntags < 0) throw MeshError("malformed msh: bad element line");
        std::vector<int> etags(ntags);
        for (auto& t : etags)
          if (!(ls >> t)) throw MeshError("malformed msh: bad element tags");
        const int physical = ntags > 0 ? etags[0] : 0;
        int nn = 0;
        if (type == 15) nn = 1;
        else if (type == 1) nn = 2;
        else if (type == 2) nn = 3;
        else if (type == 4) nn = 4;
        else throw MeshError("unsupported element type " + std::to_string(type));
        std::vector<long long> nodes(nn);
        for (auto& v : nodes)
          if (!(ls >> v)) throw MeshError("malformed msh: missing element nodes");
        if (type == 2) {
          raw_tris.push_back({nodes[0], nodes[1], nodes[2]});
          tri_tags.push_back(physical);
        } else if (type == 4) {
          raw_tets.push_back({nodes[0], nodes[1], nodes[2], nodes[3]});
          mi.regions.push_back(physical);
        }
      }
      expect(in, "$EndElements");
      have_elements = true;
    } else if (section.rfind("$End", 0) != 0 && section[0] == '$') {
      // Skip unknown sections such as $PhysicalNames.
      const std::string end = "$End" + section.substr(1);
      std::string l;
      bool closed = false;
      while (std::getline(in, l)) {
        if (l.rfind(end, 0) == 0) {
          closed = true;
          break;
        }
      }
      if (!closed) throw MeshError("malformed msh: unterminated " + section);
    } else {
      throw MeshError("malformed msh: unexpected line '" + line + "'");
    }
  }
  if (!have_format || !have_nodes || !have_elements) throw MeshError("malformed msh: missing section");

  auto lookup = [&](long long id) {
    auto it = node_index.find(id);
    if (it == node_index.end()) throw MeshError("malformed msh: unknown node " + std::to_string(id));
    return it->second;
  };
  for (const auto& t : raw_tets) mi.tets.push_back({lookup(t[0]), lookup(t[1]), lookup(t[2]), lookup(t[3])});
  if (mi.tets.empty()) throw MeshError("msh file has no tetrahedra");

  std::map<int, SurfaceInput> surfaces;
  for (std::size_t i = 0; i < raw_tris.size(); ++i) {
    const std::array<int, 3> tri{lookup(raw_tris[i][0]), lookup(raw_tris[i][1]), lookup(raw_tris[i][2])};
    const int tag = tri_tags[i];
    if (tags.gamma_t.count(tag)) {
      mi.boundary[sorted_key(tri)] = BoundaryKind::GammaT;
    } else if (tags.gamma_n.count(tag)) {
      mi.boundary[sorted_key(tri)] = BoundaryKind::GammaN;
    } else if (auto it = tags.surfaces.find(tag); it != tags.surfaces.end()) {
      auto& s = surfaces[tag];
      s.name = it->second.first;
      s.role = it->second.second;
      s.triangles.push_back(tri);
    } else {
      throw MeshError("triangle with unmapped physical tag " + std::to_string(tag));
    }
  }
  for (auto& [tag, s] : surfaces) mi.surfaces.push_back(std::move(s));

  // Gmsh does not guarantee positive orientation.
  for (auto& t : mi.tets) {
    const Vec3 &a = mi.vertices[t[0]], &b = mi.vertices[t[1]], &c = mi.vertices[t[2]], &d = mi.vertices[t[3]];
    if ((b - a).dot((c - a).cross(d - a)) < 0.0) std::swap(t[2], t[3]);
  }
  return TetMesh::build(std::move(mi));
}

void write_msh(const TetMesh& mesh, std::ostream& out) {
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n" << mesh.num_vertices() << "\n";
  out << std::setprecision(17);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec3& x = mesh.vertex(v);
    out << v + 1 << " " << x[0] << " " << x[1] << " " << x[2] << "\n";
  }
  out << "$EndNodes\n$Elements\n";
  std::ostringstream body;
  long long count = 0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (!mesh.is_boundary_face(f)) continue;
    const auto& fv = mesh.face(f);
    const int tag = mesh.face_kind(f) == BoundaryKind::GammaT ? 1 : 2;
    body << ++count << " 2 2 " << tag << " " << tag << " " << fv[0] + 1 << " " << fv[1] + 1 << " " << fv[2] + 1
         << "\n";
  }
  for (std::size_t s = 0; s < mesh.surfaces().size(); ++s) {
    const auto& cs = mesh.surfaces()[s];
    const int tag = 100 + static_cast<int>(s);
    for (std::size_t i = 0; i < cs.faces.size(); ++i) {
      auto fv = mesh.face(cs.faces[i]);
      if (cs.signs[i] < 0) std::swap(fv[1], fv[2]);
      body << ++count << " 2 2 " << tag << " " << tag << " " << fv[0] + 1 << " " << fv[1] + 1 << " " << fv[2] + 1
           << "\n";
    }
  }
  for (int k = 0; k < mesh.num_tets(); ++k) {
    const auto& t = mesh.tet(k);
    body << ++count << " 4 2 " << mesh.region(k) << " " << mesh.region(k) << " " << t[0] + 1 << " " << t[1] + 1
         << " " << t[2] + 1 << " " << t[3] + 1 << "\n";
  }
  out << count << "\n" << body.str() << "$EndElements\n";
}

}  // namespace eqmag
