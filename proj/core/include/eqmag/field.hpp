#pragma once

#include <functional>
#include <memory>

#include <Eigen/Core>

#include "eqmag/dofmap.hpp"
#include "eqmag/element.hpp"

namespace eqmag {

using VectorFunction = std::function<Vec3(const Vec3&)>;
using ScalarFunction = std::function<double(const Vec3&)>;

/// Coefficients of a discrete field over all DOFs (constrained ones included,
/// they hold zero unless set explicitly).
struct FieldCoefficients {
  std::shared_ptr<const DofMap> space;
  Eigen::VectorXd values;

  FieldCoefficients() = default;
  explicit FieldCoefficients(std::shared_ptr<const DofMap> s)
      : space(std::move(s)), values(Eigen::VectorXd::Zero(space->num_dofs())) {}

  Eigen::VectorXd cell_values(int k) const;
};

/// Value (1 or 3 components) at a reference point of tet k.
Eigen::VectorXd evaluate_reference(const TetMesh& mesh, const FieldCoefficients& f, int k, const Vec3& xhat);
/// Gradient (P), curl (N) or divergence (RT) at a reference point.
Eigen::VectorXd evaluate_diff_reference(const TetMesh& mesh, const FieldCoefficients& f, int k,
                                        const Vec3& xhat);

/// Evaluation at a physical point inside tet k; throws FemError when the
/// point is outside the tet beyond a relative tolerance.
Eigen::VectorXd evaluate(const TetMesh& mesh, const FieldCoefficients& f, int k, const Vec3& x);
Eigen::VectorXd evaluate_diff(const TetMesh& mesh, const FieldCoefficients& f, int k, const Vec3& x);

/// Physical values (value_dim x nq) and differentials (diff_dim x nq) of a
/// local coefficient vector at the points of a tabulation.
Eigen::MatrixXd tabulated_values(const ElementGeometry& g, const Tabulation& t, const Eigen::VectorXd& local);
Eigen::MatrixXd tabulated_diffs(const ElementGeometry& g, const Tabulation& t, const Eigen::VectorXd& local);

/// Canonical interpolant: the DOF functionals applied to the pulled-back
/// field. Constrained DOFs are set too.
FieldCoefficients interpolate(const TetMesh& mesh, std::shared_ptr<const DofMap> space, const VectorFunction& u);
FieldCoefficients interpolate_scalar(const TetMesh& mesh, std::shared_ptr<const DofMap> space,
                                     const ScalarFunction& u);

}  // namespace eqmag
