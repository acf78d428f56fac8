#include "eqmag/adaptivity.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <tuple>

namespace eqmag {

namespace {

using Edge = std::array<int, 2>;

Edge edge_key(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

struct EdgeOrder {
  const std::vector<Vec3>* x;
  // Total order that depends on the edge only: length, then vertex pair.
  bool less(const Edge& a, const Edge& b) const {
    const double la = ((*x)[a[0]] - (*x)[a[1]]).squaredNorm();
    const double lb = ((*x)[b[0]] - (*x)[b[1]]).squaredNorm();
    if (la != lb) return la < lb;
    return a < b;
  }
};

Edge longest_edge(const std::array<int, 4>& t, const EdgeOrder& ord) {
  Edge best = edge_key(t[0], t[1]);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const Edge e = edge_key(t[i], t[j]);
      if (ord.less(best, e)) best = e;
    }
  return best;
}

Edge longest_edge(const std::array<int, 3>& t, const EdgeOrder& ord) {
  Edge best = edge_key(t[0], t[1]);
  for (const Edge e : {edge_key(t[0], t[2]), edge_key(t[1], t[2])})
    if (ord.less(best, e)) best = e;
  return best;
}

struct Bisector {
  std::vector<Vec3>& x;
  std::map<Edge, int> midpoint;

  int split(const Edge& e) {
    auto [it, fresh] = midpoint.emplace(e, -1);
    if (fresh) {
      it->second = static_cast<int>(x.size());
      x.push_back(0.5 * (x[e[0]] + x[e[1]]));
    }
    return it->second;
  }

  bool has_split_edge(const std::array<int, 4>& t) const {
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (midpoint.count(edge_key(t[i], t[j]))) return true;
    return false;
  }
};

// Replacing one endpoint of the bisected edge by the midpoint keeps the
// orientation of the vertex tuple.
template <std::size_t N>
std::pair<std::array<int, N>, std::array<int, N>> halves(const std::array<int, N>& t, const Edge& e, int m) {
  auto first = t, second = t;
  for (std::size_t i = 0; i < N; ++i) {
    if (t[i] == e[0]) first[i] = m;
    if (t[i] == e[1]) second[i] = m;
  }
  return {first, second};
}

void split_triangle(const std::array<int, 3>& t, const Bisector& b, const EdgeOrder& ord,
                    std::vector<std::array<int, 3>>& out) {
  const Edge e = longest_edge(t, ord);
  const auto it = b.midpoint.find(e);
  if (it == b.midpoint.end()) {
    out.push_back(t);
    return;
  }
  const auto [lo, hi] = halves(t, e, it->second);
  split_triangle(lo, b, ord, out);
  split_triangle(hi, b, ord, out);
}

}  // namespace

MarkResult doerfler_mark(const std::vector<double>& eta, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("marking parameter must lie in (0, 1]");
  MarkResult r;
  r.theta = theta;
  std::vector<int> order(eta.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eta[a] * eta[a] > eta[b] * eta[b]; });
  double total = 0.0;
  for (double e : eta) total += e * e;
  if (total == 0.0) {
    r.all_zero = true;
    std::cerr << "warning: all error indicators vanish, nothing marked\n";
    return r;
  }
  const double goal = theta * theta * total;
  double acc = 0.0;
  for (int k : order) {
    if (acc >= goal) break;
    r.marked.push_back(k);
    acc += eta[k] * eta[k];
  }
  r.fraction = acc / total;
  if (!r.marked.empty()) {
    const double last = eta[r.marked.back()];
    r.minimal = acc - last * last < goal;
  }
  return r;
}

RefineResult refine(const TetMesh& mesh, const std::vector<int>& marked, int max_passes) {
  MeshInput in = mesh.to_input();
  RefineResult out;
  std::vector<std::array<int, 4>> tets = in.tets;
  std::vector<int> regions = in.regions;
  std::vector<int> parent(tets.size());
  std::iota(parent.begin(), parent.end(), 0);

  EdgeOrder ord{&in.vertices};
  Bisector bis{in.vertices, {}};

  std::vector<char> flag(tets.size(), 0);
  for (int k : marked) {
    if (k < 0 || k >= mesh.num_tets()) throw MeshError("marked tet " + std::to_string(k) + " out of range");
    flag[k] = 1;
  }
  const int num_marked = static_cast<int>(std::count(flag.begin(), flag.end(), 1));

  for (int pass = 0;; ++pass) {
    if (pass >= max_passes) throw MeshError("refinement closure did not terminate");
    std::vector<std::array<int, 4>> next;
    std::vector<int> next_region, next_parent;
    next.reserve(tets.size() * 2);
    int count = 0;
    for (std::size_t k = 0; k < tets.size(); ++k) {
      const bool go = pass == 0 ? flag[k] != 0 : bis.has_split_edge(tets[k]);
      if (!go) {
        next.push_back(tets[k]);
        next_region.push_back(regions[k]);
        next_parent.push_back(parent[k]);
        continue;
      }
      const Edge e = longest_edge(tets[k], ord);
      const auto [a, b] = halves(tets[k], e, bis.split(e));
      for (const auto& child : {a, b}) {
        next.push_back(child);
        next_region.push_back(regions[k]);
        next_parent.push_back(parent[k]);
      }
      ++count;
    }
    tets = std::move(next);
    regions = std::move(next_region);
    parent = std::move(next_parent);
    out.bisections += count;
    out.passes = pass + 1;
    if (pass > 0 && count == 0) break;
    if (pass == 0 && bis.midpoint.empty()) break;
  }
  out.closure_bisections = out.bisections - num_marked;

  std::map<FaceKey, BoundaryKind> boundary;
  for (const auto& [key, kind] : in.boundary) {
    std::vector<std::array<int, 3>> parts;
    split_triangle(key, bis, ord, parts);
    for (const auto& t : parts) boundary[sorted_key(t)] = kind;
  }
  for (auto& s : in.surfaces) {
    std::vector<std::array<int, 3>> parts;
    for (const auto& t : s.triangles) split_triangle(t, bis, ord, parts);
    s.triangles = std::move(parts);
  }
  in.boundary = std::move(boundary);
  in.tets = std::move(tets);
  in.regions = std::move(regions);
  out.parent = std::move(parent);
  out.mesh = TetMesh::build(std::move(in));
  return out;
}

double lbrick_feature_distance(const Vec3& x) {
  const Vec3 source(-1.0, 1.0, 1.0);
  return std::min((x - source).norm(), std::hypot(x[0], x[1]));
}

AdaptResult adapt_loop(const TetMesh& initial, const AnalyticCase& c, const AdaptOptions& opt, bool keep_meshes) {
  constexpr double localization_radius = 0.5;
  AdaptResult result;
  TetMesh mesh = initial;
  for (int it = 0; it < opt.max_iters; ++it) {
    PipelineOptions po;
    po.oscillation = opt.oscillation;
    po.contract = opt.contract;
    const PipelineResult r = run_pipeline(mesh, opt.p, c, po);

    AdaptIteration row;
    row.row = make_row(r);
    row.row.iter = it;
    row.tets = mesh.num_tets();
    row.kappa_max = shape_regularity(mesh).kappa_max;
    row.invariants = r.invariants;
    if (keep_meshes) {
      result.meshes.push_back(mesh);
      row.eta_K = r.errors.eta_K;
      row.errH_K = r.errors.errH_K;
    }

    const bool last = it + 1 == opt.max_iters || row.row.dofs >= opt.dof_budget;
    if (!last) {
      const auto& ind = opt.driver == MarkingDriver::Estimator ? r.errors.eta_K : r.errors.errH_K;
      const MarkResult m = doerfler_mark(ind, opt.theta);
      row.marked = static_cast<int>(m.marked.size());
      int near = 0;
      for (int k : m.marked) {
        Vec3 centroid = Vec3::Zero();
        for (int v : mesh.tet(k)) centroid += mesh.vertex(v) / 4.0;
        if (lbrick_feature_distance(centroid) <= localization_radius) ++near;
      }
      row.localized_fraction = m.marked.empty() ? 0.0 : static_cast<double>(near) / m.marked.size();
      result.iterations.push_back(row);
      if (m.marked.empty()) break;
      mesh = refine(mesh, m.marked).mesh;
    } else {
      result.iterations.push_back(row);
      break;
    }
  }
  return result;
}

}  // namespace eqmag
