#include "eqmag/system.hpp"

#include <cmath>
#include <tuple>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#ifdef EQMAG_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "eqmag/parallel.hpp"

namespace eqmag {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

int rhs_quad_degree(int p) { return std::min(2 * p + 4, kMaxQuadratureDegree); }

// (f, w_i)_K for the RT_q basis on tet k.
Eigen::VectorXd rt_load(const ElementGeometry& g, int q, int qdeg, const VectorFunction& f) {
  const Tabulation& t = tabulate(Family::RT, q, qdeg);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(t.basis->dim());
  for (int i = 0; i < t.rule->size(); ++i) {
    const Vec3 pulled = g.J.transpose() * f(g.map(t.rule->points[i]));
    for (int c = 0; c < 3; ++c) out += (t.rule->weights[i] * pulled[c]) * t.val[c].row(i).transpose();
  }
  return g.sign() * out;
}

void add_block(Triplets& trip, const Eigen::MatrixXd& m, std::span<const int> rows, std::span<const int> cols,
               bool mirror) {
  for (int i = 0; i < m.rows(); ++i) {
    if (rows[i] < 0) continue;
    for (int j = 0; j < m.cols(); ++j) {
      if (cols[j] < 0 || m(i, j) == 0.0) continue;
      trip.emplace_back(rows[i], cols[j], m(i, j));
      if (mirror) trip.emplace_back(cols[j], rows[i], m(i, j));
    }
  }
}

std::vector<int> free_rows(const DofMap& space, int k, int offset) {
  const auto dofs = space.cell_dofs(k);
  std::vector<int> out(dofs.size());
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const int f = space.free_index(dofs[i]);
    out[i] = f < 0 ? -1 : offset + f;
  }
  return out;
}

std::vector<int> lambda_surface_ids(const TetMesh& mesh) {
  std::vector<int> out;
  for (int s = 0; s < static_cast<int>(mesh.surfaces().size()); ++s)
    if (mesh.surfaces()[s].role == SurfaceRole::LambdaConstraint) out.push_back(s);
  return out;
}

// Rows and columns shared by the mixed system and the Lambda_h projection:
// the divergence block, the surface flux rows and the mean pin on q.
void add_constraints(Triplets& trip, const TetMesh& mesh, const DofMap& W, const DofMap& Q,
                     const std::vector<int>& surfaces, const BlockLayout& L,
                     const std::vector<Eigen::MatrixXd>& D, const std::vector<Eigen::VectorXd>& pin) {
  for (int k = 0; k < mesh.num_tets(); ++k) {
    const auto wr = free_rows(W, k, L.offA());
    std::vector<int> qr(Q.local_dim());
    for (int i = 0; i < Q.local_dim(); ++i) qr[i] = L.offQ() + Q.cell_dofs(k)[i];
    add_block(trip, D[k], qr, wr, true);
    if (L.nPin) {
      const int pr = L.offPin();
      for (int i = 0; i < Q.local_dim(); ++i) {
        trip.emplace_back(pr, qr[i], pin[k][i]);
        trip.emplace_back(qr[i], pr, pin[k][i]);
      }
    }
  }
  for (std::size_t j = 0; j < surfaces.size(); ++j) {
    const CutSurface& s = mesh.surfaces()[surfaces[j]];
    const int zr = L.offZeta() + static_cast<int>(j);
    for (std::size_t i = 0; i < s.faces.size(); ++i) {
      const int f = W.free_index(W.face_dof(s.faces[i], 0));
      if (f < 0) continue;
      trip.emplace_back(zr, L.offA() + f, s.signs[i]);
      trip.emplace_back(L.offA() + f, zr, s.signs[i]);
    }
  }
}

Eigen::SparseMatrix<double> to_matrix(int n, Triplets& trip) {
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

template <class Solver>
void configure(Solver&) {}

#ifdef EQMAG_HAVE_UMFPACK
// Saddle-point matrices are structurally symmetric; the symmetric strategy
// orders them far better than the default column ordering.
void configure(Eigen::UmfPackLU<Eigen::SparseMatrix<double>>& lu) {
  lu.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
}
#endif

template <class Solver>
bool factor_and_refine(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b, const LinearSolveContract& c,
                       Eigen::VectorXd& x, SolveReport& rep) {
  Solver lu;
  configure(lu);
  lu.compute(A);
  if (lu.info() != Eigen::Success) return false;
  const double nb = b.norm();
  x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) return false;
  Eigen::VectorXd r = b - A * x;
  int steps = 0;
  while (r.norm() > c.tol * nb && steps < c.max_refinement_steps) {
    x += lu.solve(r);
    r = b - A * x;
    ++steps;
  }
  rep.relative_residual = r.norm() / nb;
  rep.refinement_steps = steps;
  return std::isfinite(rep.relative_residual);
}

}  // namespace

FieldCoefficients from_free(std::shared_ptr<const DofMap> space, const Eigen::VectorXd& free_values) {
  FieldCoefficients f(space);
  const auto& fd = space->free_dofs();
  for (std::size_t i = 0; i < fd.size(); ++i) f.values[fd[i]] = free_values[i];
  return f;
}

SparseSystem assemble_mixed_system(const TetMesh& mesh, int p, const VectorFunction& J) {
  if (p < 0 || p > 3) throw FemError("unsupported degree " + std::to_string(p));
  SparseSystem sys;
  sys.mesh = &mesh;
  sys.p = p;
  sys.V = nedelec_space(mesh, p);
  sys.W = rt_space(mesh, p);
  sys.Q = broken_p_space(mesh, p);
  sys.lambda_surfaces = lambda_surface_ids(mesh);
  BlockLayout& L = sys.layout;
  L.nH = sys.V->num_free();
  L.nA = sys.W->num_free();
  L.nQ = sys.Q->num_dofs();
  L.nZeta = static_cast<int>(sys.lambda_surfaces.size());
  L.nPin = mesh.has_gamma_n() ? 0 : 1;

  const int nt = mesh.num_tets();
  std::vector<LocalMatrices> lm(nt);
  std::vector<Eigen::VectorXd> load(nt), pin(nt);
  parallel_for(nt, [&](int k) {
    lm[k] = local_matrices(mesh, k, p, mesh.mu(k));
    lm[k].M_mu = (0.5 * (lm[k].M_mu + lm[k].M_mu.transpose())).eval();
    const ElementGeometry g = element_geometry(mesh, k);
    load[k] = rt_load(g, p, rhs_quad_degree(p), J);
    pin[k] = p_integrals(g, p);
  });

  Triplets trip;
  sys.rhs = Eigen::VectorXd::Zero(L.size());
  std::vector<Eigen::MatrixXd> D(nt);
  for (int k = 0; k < nt; ++k) {
    const auto hr = free_rows(*sys.V, k, L.offH());
    const auto ar = free_rows(*sys.W, k, L.offA());
    add_block(trip, lm[k].M_mu, hr, hr, false);
    add_block(trip, lm[k].C, ar, hr, true);
    for (std::size_t i = 0; i < ar.size(); ++i)
      if (ar[i] >= 0) sys.rhs[ar[i]] += load[k][i];
    D[k] = std::move(lm[k].D);
  }
  add_constraints(trip, mesh, *sys.W, *sys.Q, sys.lambda_surfaces, L, D, pin);
  sys.matrix = to_matrix(L.size(), trip);
  return sys;
}

Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                             const LinearSolveContract& contract, SolveReport* report) {
  SolveReport rep;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  if (b.norm() == 0.0) {
    rep.method = "trivial";
    if (report) *report = rep;
    return x;
  }
  bool ok = false;
#ifdef EQMAG_HAVE_UMFPACK
  rep.method = "umfpack";
  ok = factor_and_refine<Eigen::UmfPackLU<Eigen::SparseMatrix<double>>>(A, b, contract, x, rep);
#endif
  if (!ok) {
    rep.method = "sparselu";
    ok = factor_and_refine<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>>(A, b, contract,
                                                                                                     x, rep);
  }
  if (!ok) throw SolverError("sparse factorization failed (singular system)");
  if (rep.relative_residual > contract.tol)
    throw SolverError("residual " + std::to_string(rep.relative_residual) + " above tolerance");
  if (report) *report = rep;
  return x;
}

std::pair<double, double> divergence_norms(const TetMesh& mesh, const FieldCoefficients& w) {
  const int q = w.space->degree();
  const Tabulation& t = tabulate(Family::RT, q, mass_quad_degree(q));
  std::vector<double> d2(mesh.num_tets()), v2(mesh.num_tets());
  parallel_for(mesh.num_tets(), [&](int k) {
    const ElementGeometry g = element_geometry(mesh, k);
    const Eigen::VectorXd c = w.cell_values(k);
    const Eigen::MatrixXd dv = tabulated_diffs(g, t, c);
    const Eigen::MatrixXd vv = tabulated_values(g, t, c);
    double a = 0.0, b = 0.0;
    for (int i = 0; i < t.rule->size(); ++i) {
      a += t.rule->weights[i] * dv(0, i) * dv(0, i);
      b += t.rule->weights[i] * vv.col(i).squaredNorm();
    }
    d2[k] = a * g.abs_det();
    v2[k] = b * g.abs_det();
  });
  double div2 = 0.0, val2 = 0.0;
  for (int k = 0; k < mesh.num_tets(); ++k) {
    div2 += d2[k];
    val2 += v2[k];
  }
  return {std::sqrt(div2), std::sqrt(div2 + val2)};
}

double surface_flux(const TetMesh&, const FieldCoefficients& w, const CutSurface& surface) {
  if (w.space->family() != Family::RT) throw FemError("flux needs an RT field");
  double flux = 0.0;
  for (std::size_t i = 0; i < surface.faces.size(); ++i)
    flux += surface.signs[i] * w.values[w.space->face_dof(surface.faces[i], 0)];
  return flux;
}

MixedSolution solve(const SparseSystem& system, const LinearSolveContract& contract) {
  const BlockLayout& L = system.layout;
  MixedSolution sol;
  sol.p = system.p;
  const Eigen::VectorXd x = solve_linear(system.matrix, system.rhs, contract, &sol.report);
  sol.H = from_free(system.V, x.segment(L.offH(), L.nH));
  sol.A = from_free(system.W, x.segment(L.offA(), L.nA));
  sol.q = FieldCoefficients(system.Q);
  sol.q.values = x.segment(L.offQ(), L.nQ);
  sol.zeta = x.segment(L.offZeta(), L.nZeta);
  std::tie(sol.div_A, sol.norm_A) = divergence_norms(*system.mesh, sol.A);
  for (int s : system.lambda_surfaces)
    sol.periods_A.push_back(surface_flux(*system.mesh, sol.A, system.mesh->surfaces()[s]));
  return sol;
}

MixedSolution solve_mixed(const TetMesh& mesh, int p, const VectorFunction& J, const LinearSolveContract& contract) {
  return solve(assemble_mixed_system(mesh, p, J), contract);
}

FieldCoefficients project_onto_lambda_h(const TetMesh& mesh, int p, const VectorFunction& phi,
                                        const LinearSolveContract& contract) {
  auto W = rt_space(mesh, p);
  auto Q = broken_p_space(mesh, p);
  const auto surfaces = lambda_surface_ids(mesh);
  BlockLayout L;
  L.nA = W->num_free();
  L.nQ = Q->num_dofs();
  L.nZeta = static_cast<int>(surfaces.size());
  L.nPin = mesh.has_gamma_n() ? 0 : 1;

  const int nt = mesh.num_tets();
  std::vector<Eigen::MatrixXd> M(nt), D(nt);
  std::vector<Eigen::VectorXd> load(nt), pin(nt);
  parallel_for(nt, [&](int k) {
    const ElementGeometry g = element_geometry(mesh, k);
    M[k] = rt_mass(g, p, mesh.chi(k));
    M[k] = (0.5 * (M[k] + M[k].transpose())).eval();
    D[k] = div_coupling(g, p, p);
    const Mat3 chi = mesh.chi(k);
    load[k] = rt_load(g, p, rhs_quad_degree(p), [&](const Vec3& x) -> Vec3 { return chi * phi(x); });
    pin[k] = p_integrals(g, p);
  });
  Triplets trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(L.size());
  for (int k = 0; k < nt; ++k) {
    const auto ar = free_rows(*W, k, L.offA());
    add_block(trip, M[k], ar, ar, false);
    for (std::size_t i = 0; i < ar.size(); ++i)
      if (ar[i] >= 0) rhs[ar[i]] += load[k][i];
  }
  add_constraints(trip, mesh, *W, *Q, surfaces, L, D, pin);
  const Eigen::SparseMatrix<double> A = to_matrix(L.size(), trip);
  const Eigen::VectorXd x = solve_linear(A, rhs, contract);
  return from_free(W, x.segment(L.offA(), L.nA));
}

double oscillation_proxy(const TetMesh& mesh, int p, const VectorFunction& J, const LinearSolveContract& contract) {
  const FieldCoefficients pj = project_onto_lambda_h(mesh, p, J, contract);
  const int qdeg = std::min(2 * p + 6, kMaxQuadratureDegree);
  const Tabulation& t = tabulate(Family::RT, p, qdeg);
  std::vector<double> e2(mesh.num_tets());
  parallel_for(mesh.num_tets(), [&](int k) {
    const ElementGeometry g = element_geometry(mesh, k);
    const Eigen::MatrixXd v = tabulated_values(g, t, pj.cell_values(k));
    double acc = 0.0;
    for (int i = 0; i < t.rule->size(); ++i) {
      const Vec3 d = J(g.map(t.rule->points[i])) - v.col(i);
      acc += t.rule->weights[i] * d.dot(mesh.mu(k) * d);
    }
    e2[k] = acc * g.abs_det();
  });
  double total = 0.0;
  for (double e : e2) total += e;
  return std::sqrt(total);
}

}  // namespace eqmag
