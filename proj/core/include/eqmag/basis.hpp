#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "eqmag/types.hpp"

namespace eqmag {

/// Monomials x^i y^j z^k of total degree <= n, ordered by degree then
/// lexicographically descending in the exponent of x.
struct MonomialSet {
  int degree = 0;
  std::vector<std::array<int, 3>> exponents;
  int size() const { return static_cast<int>(exponents.size()); }

  static const MonomialSet& get(int degree);
  Eigen::VectorXd eval(const Vec3& x) const;
  /// Row b holds d/dx_b of every monomial.
  Eigen::Matrix<double, 3, Eigen::Dynamic> grad(const Vec3& x) const;
};

inline int dim_p3(int q) { return q < 0 ? 0 : (q + 1) * (q + 2) * (q + 3) / 6; }
inline int dim_p2(int q) { return q < 0 ? 0 : (q + 1) * (q + 2) / 2; }

enum class Family { P, N, RT };

const char* family_name(Family f);

/// Entity carrying a degree of freedom: dim 1 = edge, 2 = face, 3 = cell.
struct DofEntity {
  int dim = 3;
  int local = 0;
  int moment = 0;
};

/// Reference basis dual to entity moments of the sorted-vertex reference
/// tetrahedron.
///
/// N_q: edge moments of the tangential component against Legendre P_k(s),
/// face moments of the two edge tangents against P_{q-1}(s,t), interior
/// moments against P_{q-2}. RT_q: face moments of the normal t1 x t2 against
/// P_q(s,t), interior moments against P_{q-1}. P_q: nodal values on the
/// equispaced lattice (centroid for q = 0), all interior. Face and interior
/// test polynomials are L2-orthogonal on the reference simplex.
///
/// Face parameters are x = v_a + s (v_b - v_a) + t (v_c - v_a) for the face's
/// sorted local vertices a < b < c; the first face moment of RT is against 1,
/// so it equals the normal flux through the face.
class BasisSet {
 public:
  static const BasisSet& get(Family family, int degree);

  Family family() const { return family_; }
  int degree() const { return degree_; }
  int dim() const { return static_cast<int>(entity_.size()); }
  /// 1 for P, 3 for N and RT.
  int value_dim() const { return family_ == Family::P ? 1 : 3; }
  /// 3 for P (gradient) and N (curl), 1 for RT (divergence).
  int diff_dim() const { return family_ == Family::RT ? 1 : 3; }

  int dofs_per_edge() const { return per_edge_; }
  int dofs_per_face() const { return per_face_; }
  int dofs_interior() const { return per_cell_; }
  const std::vector<DofEntity>& entities() const { return entity_; }

  const MonomialSet& monomials() const { return *mono_; }
  /// Coefficients of component c: dim() x monomials().size().
  const Eigen::MatrixXd& coefficients(int c) const { return coef_[c]; }

  /// value_dim() x dim() matrix of reference values.
  Eigen::MatrixXd values(const Vec3& xhat) const;
  /// diff_dim() x dim() matrix of the reference gradient, curl or divergence.
  Eigen::MatrixXd diffs(const Vec3& xhat) const;

  /// Applies the degrees of freedom to a reference field given by a callable
  /// returning value_dim() components.
  template <class F>
  Eigen::VectorXd apply_dofs(F&& field) const;

  /// Rows of the DOF functionals acting on 3 * nmono coefficient vectors
  /// (component-major). Exposed for tests.
  const Eigen::MatrixXd& functionals() const { return functionals_; }

 private:
  BasisSet(Family family, int degree);
  Family family_;
  int degree_;
  int per_edge_ = 0, per_face_ = 0, per_cell_ = 0;
  const MonomialSet* mono_ = nullptr;
  std::vector<DofEntity> entity_;
  std::array<Eigen::MatrixXd, 3> coef_;
  Eigen::MatrixXd functionals_;

  // Quadrature description of each functional, used by apply_dofs.
  struct Functional {
    std::vector<Vec3> points;
    std::vector<Vec3> weights;  // per component weight (scalar uses [0])
  };
  std::vector<Functional> dof_quad_;
};

template <class F>
Eigen::VectorXd BasisSet::apply_dofs(F&& field) const {
  Eigen::VectorXd out(dim());
  for (int i = 0; i < dim(); ++i) {
    double acc = 0.0;
    const auto& fq = dof_quad_[i];
    for (std::size_t k = 0; k < fq.points.size(); ++k) {
      const auto v = field(fq.points[k]);
      for (int c = 0; c < value_dim(); ++c) acc += fq.weights[k][c] * v[c];
    }
    out[i] = acc;
  }
  return out;
}

/// Shifted Legendre polynomial of degree k on [0, 1].
double legendre01(int k, double s);

/// Reference coordinates of the four reference vertices.
const std::array<Vec3, 4>& reference_vertices();

/// Local edge and face vertex tables of the sorted reference tet.
const std::array<std::array<int, 2>, 6>& local_edges();
const std::array<std::array<int, 3>, 4>& local_faces();

}  // namespace eqmag
