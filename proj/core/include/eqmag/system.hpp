#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "eqmag/field.hpp"

namespace eqmag {

/// Offsets of the unknown blocks: H (free N_p), A (free RT_p), q (broken P_p),
/// zeta (one per LambdaConstraint surface) and an optional mean pin on q.
struct BlockLayout {
  int nH = 0, nA = 0, nQ = 0, nZeta = 0, nPin = 0;
  int offH() const { return 0; }
  int offA() const { return nH; }
  int offQ() const { return nH + nA; }
  int offZeta() const { return nH + nA + nQ; }
  int offPin() const { return nH + nA + nQ + nZeta; }
  int size() const { return nH + nA + nQ + nZeta + nPin; }
};

/// Symmetric block system
///   [ M_mu  C^T   0    0   ] [H]   [  0  ]
///   [ C     0     D^T  P^T ] [A] = [(J,w)]
///   [ 0     D     0    0   ] [q]   [  0  ]
///   [ 0     P     0    0   ] [z]   [  0  ]
/// with P the fluxes through the LambdaConstraint surfaces and, when the
/// whole boundary is Gamma_T, one extra row fixing the mean of q.
struct SparseSystem {
  const TetMesh* mesh = nullptr;
  int p = 0;
  std::shared_ptr<const DofMap> V, W, Q;
  std::vector<int> lambda_surfaces;
  BlockLayout layout;
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

struct LinearSolveContract {
  double tol = 1e-10;
  int max_refinement_steps = 8;
};

struct SolveReport {
  std::string method;
  double relative_residual = 0.0;
  int refinement_steps = 0;
};

struct MixedSolution {
  int p = 0;
  FieldCoefficients H, A, q;
  Eigen::VectorXd zeta;
  SolveReport report;
  /// ||div A_h||_Omega and ||A_h||_{H(div)}.
  double div_A = 0.0, norm_A = 0.0;
  /// Fluxes of A_h through the LambdaConstraint surfaces.
  std::vector<double> periods_A;
  int num_dofs() const { return H.space->num_free(); }
};

SparseSystem assemble_mixed_system(const TetMesh& mesh, int p, const VectorFunction& J);

/// Direct factorization (UMFPACK when available, Eigen SparseLU otherwise)
/// followed by iterative refinement until the contract is met.
Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                             const LinearSolveContract& contract, SolveReport* report = nullptr);

MixedSolution solve(const SparseSystem& system, const LinearSolveContract& contract = {});

/// Assemble and solve in one call.
MixedSolution solve_mixed(const TetMesh& mesh, int p, const VectorFunction& J,
                          const LinearSolveContract& contract = {});

/// chi-weighted L2 projection of phi onto {w in W_h : div w = 0, fluxes
/// through LambdaConstraint surfaces = 0}.
FieldCoefficients project_onto_lambda_h(const TetMesh& mesh, int p, const VectorFunction& phi,
                                        const LinearSolveContract& contract = {});

/// ||J - pi_h^0 J||_{mu, Omega}.
double oscillation_proxy(const TetMesh& mesh, int p, const VectorFunction& J,
                         const LinearSolveContract& contract = {});

/// ||div w||_Omega and ||w||_{H(div)} of an RT field.
std::pair<double, double> divergence_norms(const TetMesh& mesh, const FieldCoefficients& w);

/// Flux of an RT field through a surface, using the canonical face normals
/// and the surface signs.
double surface_flux(const TetMesh& mesh, const FieldCoefficients& w, const CutSurface& surface);

/// Scatters a vector of free DOF values into a full coefficient vector.
FieldCoefficients from_free(std::shared_ptr<const DofMap> space, const Eigen::VectorXd& free_values);

}  // namespace eqmag
