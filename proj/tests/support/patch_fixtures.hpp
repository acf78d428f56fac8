#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "eqmag/equilibration.hpp"

namespace eqmag::testing_support {

inline int interior_vertex(const TetMesh& mesh) {
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (!mesh.vertex_on(v, BoundaryKind::GammaT) && !mesh.vertex_on(v, BoundaryKind::GammaN)) return v;
  return -1;
}

inline FieldCoefficients random_field(std::shared_ptr<const DofMap> space, std::mt19937& rng) {
  std::normal_distribution<double> n;
  FieldCoefficients f(space);
  for (int d : space->free_dofs()) f.values[d] = n(rng);
  return f;
}

// Removes the component of H along every hat gradient that lies in V_h, so
// that all closed patches become compatible.
inline FieldCoefficients make_compatible(const TetMesh& mesh, FieldCoefficients H) {
  std::vector<int> closed;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (!mesh.vertex_on(v, BoundaryKind::GammaT)) closed.push_back(v);
  const int n = static_cast<int>(closed.size());
  std::vector<int> slot(mesh.num_vertices(), -1);
  for (int i = 0; i < n; ++i) slot[closed[i]] = i;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < mesh.num_tets(); ++k) {
    const auto g = barycentric_gradients(mesh, k);
    const auto s = mesh.sorted_tet(k);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        if (slot[s[a]] >= 0 && slot[s[b]] >= 0)
          K(slot[s[a]], slot[s[b]]) += mesh.volume(k) * g[a].dot(mesh.mu(k) * g[b]);
  }
  std::vector<FieldCoefficients> grads;
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) {
    grads.push_back(hat_gradient(mesh, H.space, closed[i]));
    f[i] = mu_inner(mesh, H, grads.back());
  }
  const Eigen::VectorXd c = K.completeOrthogonalDecomposition().solve(f);
  for (int i = 0; i < n; ++i) H.values -= c[i] * grads[i].values;
  return H;
}

}  // namespace eqmag::testing_support
