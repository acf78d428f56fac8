#include "eqmag/field.hpp"

#include <Eigen/Dense>

namespace eqmag {

Eigen::VectorXd FieldCoefficients::cell_values(int k) const {
  const auto dofs = space->cell_dofs(k);
  Eigen::VectorXd c(dofs.size());
  for (std::size_t i = 0; i < dofs.size(); ++i) c[i] = values[dofs[i]];
  return c;
}

Eigen::VectorXd evaluate_reference(const TetMesh& mesh, const FieldCoefficients& f, int k, const Vec3& xhat) {
  const ElementGeometry g = element_geometry(mesh, k);
  const BasisSet& b = f.space->basis();
  return push_values(g, b.family(), b.values(xhat)) * f.cell_values(k);
}

Eigen::VectorXd evaluate_diff_reference(const TetMesh& mesh, const FieldCoefficients& f, int k,
                                        const Vec3& xhat) {
  const ElementGeometry g = element_geometry(mesh, k);
  const BasisSet& b = f.space->basis();
  return push_diffs(g, b.family(), b.diffs(xhat)) * f.cell_values(k);
}

namespace {

Vec3 checked_reference(const TetMesh& mesh, int k, const Vec3& x) {
  const Vec3 xh = element_geometry(mesh, k).to_reference(x);
  const double tol = 1e-10;
  if (xh.minCoeff() < -tol || xh.sum() > 1.0 + tol)
    throw FemError("point outside tet " + std::to_string(k));
  return xh;
}

}  // namespace

Eigen::VectorXd evaluate(const TetMesh& mesh, const FieldCoefficients& f, int k, const Vec3& x) {
  return evaluate_reference(mesh, f, k, checked_reference(mesh, k, x));
}

Eigen::VectorXd evaluate_diff(const TetMesh& mesh, const FieldCoefficients& f, int k, const Vec3& x) {
  return evaluate_diff_reference(mesh, f, k, checked_reference(mesh, k, x));
}

Eigen::MatrixXd tabulated_values(const ElementGeometry& g, const Tabulation& t, const Eigen::VectorXd& local) {
  const int vd = t.basis->value_dim();
  Eigen::MatrixXd ref(vd, t.rule->size());
  for (int c = 0; c < vd; ++c) ref.row(c) = (t.val[c] * local).transpose();
  return push_values(g, t.basis->family(), ref);
}

Eigen::MatrixXd tabulated_diffs(const ElementGeometry& g, const Tabulation& t, const Eigen::VectorXd& local) {
  const int dd = t.basis->diff_dim();
  Eigen::MatrixXd ref(dd, t.rule->size());
  for (int c = 0; c < dd; ++c) ref.row(c) = (t.diff[c] * local).transpose();
  return push_diffs(g, t.basis->family(), ref);
}

FieldCoefficients interpolate(const TetMesh& mesh, std::shared_ptr<const DofMap> space, const VectorFunction& u) {
  FieldCoefficients out(space);
  const BasisSet& b = space->basis();
  for (int k = 0; k < mesh.num_tets(); ++k) {
    const ElementGeometry g = element_geometry(mesh, k);
    const Eigen::VectorXd local =
        b.apply_dofs([&](const Vec3& xh) { return pull_value(g, b.family(), u(g.map(xh))); });
    const auto dofs = space->cell_dofs(k);
    for (std::size_t i = 0; i < dofs.size(); ++i) out.values[dofs[i]] = local[i];
  }
  return out;
}

FieldCoefficients interpolate_scalar(const TetMesh& mesh, std::shared_ptr<const DofMap> space,
                                     const ScalarFunction& u) {
  if (space->family() != Family::P) throw FemError("scalar interpolation needs a P space");
  return interpolate(mesh, std::move(space), [&](const Vec3& x) { return Vec3(u(x), 0.0, 0.0); });
}

}  // namespace eqmag
