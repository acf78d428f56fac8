#include "eqmag/dofmap.hpp"

namespace eqmag {

DofMap::DofMap(const TetMesh& mesh, Family family, int degree)
    : family_(family), degree_(degree), basis_(&BasisSet::get(family, degree)) {
  const int pe = basis_->dofs_per_edge(), pf = basis_->dofs_per_face(), pc = basis_->dofs_interior();
  face_offset_ = mesh.num_edges() * pe;
  cell_offset_ = face_offset_ + mesh.num_faces() * pf;
  ndofs_ = cell_offset_ + mesh.num_tets() * pc;
  nloc_ = basis_->dim();
  cell_dofs_.resize(static_cast<std::size_t>(mesh.num_tets()) * nloc_);
  for (int k = 0; k < mesh.num_tets(); ++k) {
    int* out = cell_dofs_.data() + k * nloc_;
    for (const auto& ent : basis_->entities()) {
      if (ent.dim == 1) {
        *out++ = edge_dof(mesh.tet_edges(k)[ent.local], ent.moment);
      } else if (ent.dim == 2) {
        *out++ = face_dof(mesh.tet_faces(k)[ent.local], ent.moment);
      } else {
        *out++ = cell_dof(k, ent.moment);
      }
    }
  }
  constrain(std::vector<char>(ndofs_, 0));
}

void DofMap::constrain(const std::vector<char>& mask) {
  if (static_cast<int>(mask.size()) != ndofs_) throw FemError("constraint mask has wrong length");
  constrained_ = mask;
  free_index_.assign(ndofs_, -1);
  free_dofs_.clear();
  for (int i = 0; i < ndofs_; ++i)
    if (!constrained_[i]) {
      free_index_[i] = static_cast<int>(free_dofs_.size());
      free_dofs_.push_back(i);
    }
  nfree_ = static_cast<int>(free_dofs_.size());
}

std::shared_ptr<const DofMap> nedelec_space(const TetMesh& mesh, int q) {
  auto map = std::make_shared<DofMap>(mesh, Family::N, q);
  std::vector<char> mask(map->num_dofs(), 0);
  const auto& b = map->basis();
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (mesh.edge_on(e, BoundaryKind::GammaT))
      for (int m = 0; m < b.dofs_per_edge(); ++m) mask[map->edge_dof(e, m)] = 1;
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (mesh.face_kind(f) == BoundaryKind::GammaT)
      for (int m = 0; m < b.dofs_per_face(); ++m) mask[map->face_dof(f, m)] = 1;
  map->constrain(mask);
  return map;
}

std::shared_ptr<const DofMap> rt_space(const TetMesh& mesh, int q) {
  auto map = std::make_shared<DofMap>(mesh, Family::RT, q);
  std::vector<char> mask(map->num_dofs(), 0);
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (mesh.face_kind(f) == BoundaryKind::GammaT)
      for (int m = 0; m < map->basis().dofs_per_face(); ++m) mask[map->face_dof(f, m)] = 1;
  map->constrain(mask);
  return map;
}

std::shared_ptr<const DofMap> rt_space_free(const TetMesh& mesh, int q) {
  return std::make_shared<DofMap>(mesh, Family::RT, q);
}

std::shared_ptr<const DofMap> broken_p_space(const TetMesh& mesh, int q) {
  return std::make_shared<DofMap>(mesh, Family::P, q);
}

}  // namespace eqmag
