#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "eqmag/basis.hpp"
#include "eqmag/mesh.hpp"

namespace eqmag {

/// Global numbering of a finite element space: edge DOFs first (edge-major),
/// then face DOFs, then cell-interior DOFs. Because every tet uses the
/// sorted-vertex reference map, the moments of a shared edge or face are
/// computed identically from both sides and all orientation signs are +1.
class DofMap {
 public:
  DofMap(const TetMesh& mesh, Family family, int degree);

  Family family() const { return family_; }
  int degree() const { return degree_; }
  const BasisSet& basis() const { return *basis_; }
  int num_dofs() const { return ndofs_; }
  int local_dim() const { return nloc_; }
  int num_tets() const { return static_cast<int>(cell_dofs_.size()) / nloc_; }

  std::span<const int> cell_dofs(int k) const { return {cell_dofs_.data() + k * nloc_, static_cast<std::size_t>(nloc_)}; }
  int edge_dof(int e, int m) const { return e * basis_->dofs_per_edge() + m; }
  int face_dof(int f, int m) const { return face_offset_ + f * basis_->dofs_per_face() + m; }
  int cell_dof(int k, int m) const { return cell_offset_ + k * basis_->dofs_interior() + m; }

  /// Marks DOFs as eliminated (essential zero condition). Free DOFs are
  /// renumbered contiguously in ascending global order.
  void constrain(const std::vector<char>& mask);
  bool is_constrained(int dof) const { return constrained_[dof] != 0; }
  int free_index(int dof) const { return free_index_[dof]; }
  int num_free() const { return nfree_; }
  const std::vector<int>& free_dofs() const { return free_dofs_; }

 private:
  Family family_;
  int degree_;
  const BasisSet* basis_;
  int ndofs_ = 0, nloc_ = 0, face_offset_ = 0, cell_offset_ = 0, nfree_ = 0;
  std::vector<int> cell_dofs_;
  std::vector<char> constrained_;
  std::vector<int> free_index_, free_dofs_;
};

/// N_q with zero tangential trace on Gamma_T.
std::shared_ptr<const DofMap> nedelec_space(const TetMesh& mesh, int q);
/// RT_q with zero normal trace on Gamma_T.
std::shared_ptr<const DofMap> rt_space(const TetMesh& mesh, int q);
/// RT_q without constraints.
std::shared_ptr<const DofMap> rt_space_free(const TetMesh& mesh, int q);
/// Broken P_q.
std::shared_ptr<const DofMap> broken_p_space(const TetMesh& mesh, int q);

}  // namespace eqmag
