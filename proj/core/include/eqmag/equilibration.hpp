#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "eqmag/field.hpp"

namespace eqmag {

/// Local minimization on the patch of vertex a:
///   min ||v - psi_a mu H_h||_{chi, omega_a}  over v in RT_q(patch) with
///   div v = grad psi_a . mu H_h and v.n = 0 on the faces opposite a and on
///   Gamma_N faces containing a.
/// Unknowns are the non-eliminated global RT_q DOFs touching the patch, in
/// ascending global order, followed by broken P_q multipliers (patch tet
/// major) and, for closed patches, one mean-value pin.
struct PatchProblem {
  VertexPatch patch;
  int q = 0;
  std::vector<int> dofs;
  int num_multipliers = 0;
  bool closed = false;
  /// Local indices of cell DOFs per patch tet, -1 where eliminated.
  std::vector<std::vector<int>> local_index;

  Eigen::SparseMatrix<double> mass;  ///< (chi w_i, w_j)
  Eigen::SparseMatrix<double> div;   ///< (s_i, div w_j)
  /// Per patch tet: local chi-mass and the local RT_q coefficients of
  /// xi = psi_a mu H_h, which lies in RT_q(K) for q >= p + 2.
  std::vector<Eigen::MatrixXd> tet_mass;
  std::vector<Eigen::VectorXd> tet_target;
  Eigen::VectorXd target_load;       ///< (chi xi, w_j)
  Eigen::VectorXd div_load;          ///< (r_a, s_i)
  Eigen::VectorXd pin;               ///< (s_i, 1)
  double target_norm2 = 0.0;         ///< ||xi||^2_chi
  double compatibility = 0.0;        ///< integral of r_a over the patch
  double compatibility_scale = 0.0;  ///< integral of |r_a|

  int num_dofs() const { return static_cast<int>(dofs.size()); }
};

struct PatchSolution {
  int vertex = -1;
  std::vector<int> dofs;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd multiplier;
  /// ||B_a - psi_a mu H_h||_{chi, omega_a}.
  double objective = 0.0;
  double relative_residual = 0.0;
  bool closed = false, mixed = false;
  /// |int r_a| / int |r_a| (0 when r_a vanishes).
  double compatibility = 0.0;
  /// int r_a = (mu H_h, grad psi_a).
  double divergence_mean = 0.0;
};

/// Global RT_q space without constraints; the patch problems eliminate the
/// Gamma_N traces themselves.
std::shared_ptr<const DofMap> reconstruction_space(const TetMesh& mesh, int q);

PatchProblem build_patch_problem(const TetMesh& mesh, const FieldCoefficients& H, const DofMap& space, int vertex);
PatchProblem build_patch_problem(const TetMesh& mesh, const FieldCoefficients& H, int vertex, int q);

/// Sparse LU of the KKT system with iterative refinement.
PatchSolution solve_patch(const PatchProblem& problem);

/// Independent route: particular solution plus a null-space basis of the
/// divergence operator from a dense SVD, then reduced normal equations.
Eigen::VectorXd solve_patch_nullspace(const PatchProblem& problem);

/// sqrt(c^T M c) with the patch chi-mass matrix.
double patch_chi_norm(const PatchProblem& problem, const Eigen::VectorXd& c);
/// ||c - xi||_chi, summed tet by tet.
double patch_objective(const PatchProblem& problem, const Eigen::VectorXd& c);

struct SurfacePeriod {
  std::string name;
  double value = 0.0;
};

struct Reconstruction {
  int q = 0;
  FieldCoefficients B;
  std::vector<double> eta;  ///< ||B_h - mu H_h||_{chi, K}
  double estimator = 0.0;   ///< (sum eta_K^2)^{1/2}
  std::vector<double> patch_objective;

  double norm_B = 0.0;         ///< ||B_h||_Omega
  double max_div = 0.0;        ///< max_K ||div B_h||_K
  double max_jump = 0.0;       ///< max normal-trace jump at face quadrature points
  double max_compatibility = 0.0;  ///< max over closed patches of |int r_a| / int |r_a|
  double max_divergence_mean = 0.0;  ///< max over closed patches of |int r_a|
  int mixed_patches = 0;
  std::vector<SurfacePeriod> periods;  ///< PeriodCheck surfaces
};

/// Sums patch contributions and evaluates eta_K and the diagnostics.
Reconstruction accumulate(const TetMesh& mesh, const FieldCoefficients& H, std::shared_ptr<const DofMap> space,
                          const std::vector<PatchSolution>& patches);

/// All patches (in parallel) followed by accumulate. q defaults to p + 2.
Reconstruction reconstruct(const TetMesh& mesh, const FieldCoefficients& H, int q = -1);

/// v_h = sum over vertices a of the surface closure of
/// iota_a 1_{chosen side} grad psi_a, stored in N_0 together with the checks
/// that it is a genuine element of V_h.
struct PeriodTestFunction {
  FieldCoefficients v;
  double max_jump = 0.0;       ///< disagreement of edge moments between tets
  double max_curl = 0.0;       ///< max elementwise |curl v_h|
  double max_gamma_t = 0.0;    ///< max edge moment on Gamma_T edges
  int empty_sides = 0;
};

PeriodTestFunction period_test_function(const TetMesh& mesh, int surface_index);

/// grad psi_a as an element of the given N space; constrained DOFs are
/// zeroed, so the result is exact only when psi_a vanishes on Gamma_T.
FieldCoefficients hat_gradient(const TetMesh& mesh, std::shared_ptr<const DofMap> space, int vertex);

/// (mu H_h, v)_Omega for an N field v, by quadrature.
double mu_inner(const TetMesh& mesh, const FieldCoefficients& H, const FieldCoefficients& v);

}  // namespace eqmag
