#pragma once

#include <array>

#include <Eigen/Core>

#include "eqmag/basis.hpp"
#include "eqmag/mesh.hpp"
#include "eqmag/quadrature.hpp"

namespace eqmag {

/// Affine map x = x0 + J xhat from the reference tet onto tet k with its
/// vertices in ascending global order. detJ may be negative.
struct ElementGeometry {
  Mat3 J, Jinv;
  double detJ = 0.0;
  Vec3 x0;

  Vec3 map(const Vec3& xhat) const { return x0 + J * xhat; }
  Vec3 to_reference(const Vec3& x) const { return Jinv * (x - x0); }
  double sign() const { return detJ > 0.0 ? 1.0 : -1.0; }
  double abs_det() const { return std::abs(detJ); }
};

ElementGeometry element_geometry(const TetMesh& mesh, int k);

/// Physical values and differentials from reference ones.
/// N: covariant Piola, curl by J / detJ. RT: contravariant Piola, div by
/// 1 / detJ. P: identity, gradient by J^{-T}.
Eigen::MatrixXd push_values(const ElementGeometry& g, Family f, const Eigen::MatrixXd& ref);
Eigen::MatrixXd push_diffs(const ElementGeometry& g, Family f, const Eigen::MatrixXd& ref);
/// Reference field from a physical one (inverse of push_values).
Vec3 pull_value(const ElementGeometry& g, Family f, const Vec3& phys);

/// Reference basis tabulated at the points of a tet rule. val[c] and diff[c]
/// are (points x basis) matrices for each component.
struct Tabulation {
  const QuadRule* rule = nullptr;
  const BasisSet* basis = nullptr;
  std::array<Eigen::MatrixXd, 3> val;
  std::array<Eigen::MatrixXd, 3> diff;
};

/// Cached and thread-safe.
const Tabulation& tabulate(Family family, int degree, int quad_degree);

/// T^{ab}_{ij} = sum_g w_g u_i[a] v_j[b] between two tabulations; used for
/// every Piola-mapped bilinear form on affine tets.
using RefTensor = std::array<Eigen::MatrixXd, 9>;
/// Values of (fa, qa) against values of (fb, qb). Cached.
const RefTensor& value_tensor(Family fa, int qa, Family fb, int qb, int quad_degree);
/// Values of RT_qa against curls of N_qb. Cached.
const RefTensor& value_curl_tensor(int qa, int qb, int quad_degree);

/// (mu u_i, u_j)_K for N_q.
Eigen::MatrixXd nedelec_mass(const ElementGeometry& g, int q, const Mat3& mu);
/// (chi w_i, w_j)_K for RT_q.
Eigen::MatrixXd rt_mass(const ElementGeometry& g, int q, const Mat3& chi);
/// C[i][j] = (w_i, curl v_j)_K, w in RT_qa, v in N_qb.
Eigen::MatrixXd curl_coupling(const ElementGeometry& g, int qa, int qb);
/// D[i][j] = (r_i, div w_j)_K, r in P_qr, w in RT_qw.
Eigen::MatrixXd div_coupling(const ElementGeometry& g, int qr, int qw);
/// (r_i, r_j)_K for broken P_q.
Eigen::MatrixXd p_mass(const ElementGeometry& g, int q);
/// (r_i, 1)_K.
Eigen::VectorXd p_integrals(const ElementGeometry& g, int q);

struct LocalMatrices {
  Eigen::MatrixXd M_mu;   ///< N_p x N_p
  Eigen::MatrixXd M_chi;  ///< RT_p x RT_p
  Eigen::MatrixXd C;      ///< RT_p x N_p
  Eigen::MatrixXd D;      ///< P_p x RT_p
};

/// The local blocks of the mixed system on tet k at degree p. Throws FemError
/// for a non-SPD coefficient.
LocalMatrices local_matrices(const TetMesh& mesh, int k, int p, const Mat3& mu);

inline int mass_quad_degree(int q) { return 2 * q + 2; }

}  // namespace eqmag
