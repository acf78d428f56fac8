#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eqmag/equilibration.hpp"
#include "eqmag/system.hpp"

namespace eqmag {

/// Manufactured or source-only test problem.
struct AnalyticCase {
  std::string name;
  /// Builtin mesh family: "cube", "torus" or "lbrick".
  std::string domain;
  BoundaryKind boundary = BoundaryKind::GammaT;
  VectorFunction J;
  /// Exact magnetic field, when known.
  std::optional<VectorFunction> H;
  bool has_exact() const { return H.has_value(); }
};

/// "cube", "torus", "torus-neumann", "lbrick", "zero".
AnalyticCase analytic_case(const std::string& name);
std::vector<std::string> analytic_case_names();

/// Max |curl H - J| over random points of the bounding box of the domain,
/// with central differences of step 1e-6 times the domain diameter.
double curl_consistency(const AnalyticCase& c, int samples = 20, unsigned seed = 1);

/// L2 norm of J.n over the boundary faces.
double boundary_normal_trace(const TetMesh& mesh, const VectorFunction& J);

struct ErrorReport {
  double errH = 0.0;         ///< ||H - H_h||_mu
  double errB = 0.0;         ///< ||H - chi B_h||_mu
  double est = 0.0;          ///< (sum eta_K^2)^{1/2}
  double effectivity = 0.0;  ///< est / errH
  std::vector<double> errH_K, errB_K, eta_K;
};

/// Error norms against an exact field, with quadrature of degree 2p + 6.
ErrorReport error_norms(const TetMesh& mesh, const MixedSolution& sol, const Reconstruction& rec,
                        const VectorFunction& H);
/// Same against a discrete reference field (any N space on the same mesh).
ErrorReport error_norms(const TetMesh& mesh, const MixedSolution& sol, const Reconstruction& rec,
                        const FieldCoefficients& reference);
ErrorReport error_norms(const TetMesh& mesh, const MixedSolution& sol, const Reconstruction& rec,
                        const AnalyticCase& c);

/// H_h of the same problem at degree p + 1.
FieldCoefficients reference_solution(const TetMesh& mesh, int p, const AnalyticCase& c,
                                     const LinearSolveContract& contract = {});

/// max / min eigenvalue of mu over the given tets (all tets when empty).
double contrast(const TetMesh& mesh, const std::vector<int>& tets = {});

/// ||mu H_h||_Omega.
double mu_norm(const TetMesh& mesh, const FieldCoefficients& H);

/// Machine-precision checks of one run; each value is already relative.
struct InvariantReport {
  double div_B = 0.0;       ///< max_K ||div B_h||_K / ||B_h||
  double jump_B = 0.0;      ///< max normal jump / max(1, ||B_h||)
  double div_A = 0.0;       ///< ||div A_h|| / ||A_h||_{H(div)}
  double galerkin = 0.0;    ///< max_a |(mu H_h, grad psi_a)| / ||mu H_h||
  double period_A = 0.0;    ///< max |period(A_h)| / ||A_h||_{H(div)}
  double period_B = 0.0;    ///< max |period(B_h)| / ||B_h||
  bool ok(double tol = 1e-10) const;
};

struct PipelineOptions {
  int q = -1;  ///< reconstruction degree, p + 2 by default
  bool oscillation = true;
  LinearSolveContract contract{};
};

struct PipelineResult {
  MixedSolution solution;
  Reconstruction reconstruction;
  ErrorReport errors;
  double osc = 0.0;
  InvariantReport invariants;
};

/// Solve, reconstruct, and measure against the exact field, or against the
/// degree p + 1 reference solution when the case has none.
PipelineResult run_pipeline(const TetMesh& mesh, int p, const AnalyticCase& c, const PipelineOptions& opt = {});

InvariantReport check_invariants(const TetMesh& mesh, const MixedSolution& sol, const Reconstruction& rec);

/// One line of a convergence or adaptive study.
struct StudyRow {
  int iter = -1;  ///< adaptive iteration, -1 outside adaptive runs
  long dofs = 0;
  double errH = 0.0, errB = 0.0, est = 0.0, effectivity = 0.0, osc = 0.0;
};

StudyRow make_row(const PipelineResult& r);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace eqmag
