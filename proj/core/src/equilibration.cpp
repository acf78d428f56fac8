#include "eqmag/equilibration.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "eqmag/parallel.hpp"
#include "eqmag/system.hpp"

namespace eqmag {

namespace {

int patch_quad_degree(int q) { return std::min(2 * q + 2, kMaxQuadratureDegree); }

double hat_value(int local_vertex, const Vec3& xh) {
  return local_vertex == 0 ? 1.0 - xh.sum() : xh[local_vertex - 1];
}

// Reference values of H on tet k at xh, pushed forward.
Vec3 field_value(const ElementGeometry& g, const FieldCoefficients& f, const Eigen::VectorXd& local,
                 const Vec3& xh) {
  const BasisSet& b = f.space->basis();
  return push_values(g, b.family(), b.values(xh)) * local;
}

bool eliminated_face(const TetMesh& mesh, int vertex, int face) {
  const auto& fv = mesh.face(face);
  if (fv[0] != vertex && fv[1] != vertex && fv[2] != vertex) return true;
  return mesh.is_boundary_face(face) && mesh.face_kind(face) == BoundaryKind::GammaN;
}

}  // namespace

std::shared_ptr<const DofMap> reconstruction_space(const TetMesh& mesh, int q) { return rt_space_free(mesh, q); }

PatchProblem build_patch_problem(const TetMesh& mesh, const FieldCoefficients& H, const DofMap& space, int vertex) {
  if (space.family() != Family::RT) throw EquilibrationError("reconstruction space must be RT");
  const int q = space.degree();
  const int p = H.space->degree();
  if (q < p + 2) throw EquilibrationError("reconstruction degree must be at least p + 2");

  PatchProblem pb;
  pb.patch = build_vertex_patch(mesh, vertex);
  pb.q = q;
  pb.closed = pb.patch.closed_boundary;
  const BasisSet& rt = space.basis();
  const int nt = static_cast<int>(pb.patch.tets.size());
  const int np = dim_p3(q);
  pb.num_multipliers = nt * np;

  // Free local DOFs, ascending in global numbering.
  std::vector<std::vector<char>> keep(nt, std::vector<char>(rt.dim(), 1));
  for (int t = 0; t < nt; ++t) {
    const int k = pb.patch.tets[t];
    const auto dofs = space.cell_dofs(k);
    for (int i = 0; i < rt.dim(); ++i) {
      const DofEntity& e = rt.entities()[i];
      if (e.dim == 2 && eliminated_face(mesh, vertex, mesh.tet_faces(k)[e.local])) keep[t][i] = 0;
      if (keep[t][i]) pb.dofs.push_back(dofs[i]);
    }
  }
  std::sort(pb.dofs.begin(), pb.dofs.end());
  pb.dofs.erase(std::unique(pb.dofs.begin(), pb.dofs.end()), pb.dofs.end());
  pb.local_index.assign(nt, std::vector<int>(rt.dim(), -1));
  for (int t = 0; t < nt; ++t) {
    const auto dofs = space.cell_dofs(pb.patch.tets[t]);
    for (int i = 0; i < rt.dim(); ++i)
      if (keep[t][i])
        pb.local_index[t][i] =
            static_cast<int>(std::lower_bound(pb.dofs.begin(), pb.dofs.end(), dofs[i]) - pb.dofs.begin());
  }

  const int n = pb.num_dofs();
  const int qd = patch_quad_degree(q);
  const Tabulation& tp = tabulate(Family::P, q, qd);
  const Tabulation& th = tabulate(H.space->family(), p, qd);
  const QuadRule& rule = *tp.rule;
  std::vector<Eigen::Triplet<double>> mt, dt;
  pb.target_load = Eigen::VectorXd::Zero(n);
  pb.div_load = Eigen::VectorXd::Zero(pb.num_multipliers);
  pb.pin = Eigen::VectorXd::Zero(pb.num_multipliers);
  pb.tet_mass.resize(nt);
  pb.tet_target.resize(nt);

  for (int t = 0; t < nt; ++t) {
    const int k = pb.patch.tets[t];
    const int lv = pb.patch.local_vertex[t];
    const Vec3& grad = pb.patch.grad_psi[t];
    const ElementGeometry g = element_geometry(mesh, k);
    const Mat3& mu = mesh.mu(k);
    const Eigen::VectorXd hk = H.cell_values(k);

    Eigen::MatrixXd M = rt_mass(g, q, mesh.chi(k));
    M = (0.5 * (M + M.transpose())).eval();
    const Eigen::MatrixXd D = div_coupling(g, q, q);
    // xi restricted to K is a polynomial of degree p + 2, hence in RT_q(K)
    // and reproduced exactly by the local interpolant.
    const Eigen::VectorXd xi = rt.apply_dofs([&](const Vec3& xh) {
      return pull_value(g, Family::RT, hat_value(lv, xh) * (mu * field_value(g, H, hk, xh)));
    });
    const Eigen::VectorXd Mxi = M * xi;
    pb.target_norm2 += xi.dot(Mxi);

    Eigen::VectorXd rl = Eigen::VectorXd::Zero(np);
    const Eigen::MatrixXd hv = tabulated_values(g, th, hk);
    for (int i = 0; i < rule.size(); ++i) {
      const double r = grad.dot(mu * hv.col(i));
      const double w = rule.weights[i] * g.abs_det();
      rl += (w * r) * tp.val[0].row(i).transpose();
      pb.compatibility += w * r;
      pb.compatibility_scale += w * std::abs(r);
    }
    const Eigen::VectorXd e = p_integrals(g, q);

    const auto& li = pb.local_index[t];
    for (int i = 0; i < rt.dim(); ++i) {
      if (li[i] < 0) continue;
      pb.target_load[li[i]] += Mxi[i];
      for (int j = 0; j < rt.dim(); ++j)
        if (li[j] >= 0 && M(i, j) != 0.0) mt.emplace_back(li[i], li[j], M(i, j));
    }
    for (int r = 0; r < np; ++r) {
      const int row = t * np + r;
      pb.div_load[row] = rl[r];
      pb.pin[row] = e[r];
      for (int j = 0; j < rt.dim(); ++j)
        if (li[j] >= 0 && D(r, j) != 0.0) dt.emplace_back(row, li[j], D(r, j));
    }
    pb.tet_mass[t] = std::move(M);
    pb.tet_target[t] = xi;
  }
  pb.mass.resize(n, n);
  pb.mass.setFromTriplets(mt.begin(), mt.end());
  pb.div.resize(pb.num_multipliers, n);
  pb.div.setFromTriplets(dt.begin(), dt.end());

  if (pb.closed && std::abs(pb.compatibility) > 1e-8 * pb.compatibility_scale)
    throw EquilibrationError("patch " + std::to_string(vertex) + ": divergence data has nonzero mean " +
                             std::to_string(pb.compatibility));
  return pb;
}

PatchProblem build_patch_problem(const TetMesh& mesh, const FieldCoefficients& H, int vertex, int q) {
  return build_patch_problem(mesh, H, *reconstruction_space(mesh, q), vertex);
}

double patch_chi_norm(const PatchProblem& pb, const Eigen::VectorXd& c) { return std::sqrt(c.dot(pb.mass * c)); }

double patch_objective(const PatchProblem& pb, const Eigen::VectorXd& c) {
  double acc = 0.0;
  for (std::size_t t = 0; t < pb.tet_mass.size(); ++t) {
    Eigen::VectorXd d = -pb.tet_target[t];
    const auto& li = pb.local_index[t];
    for (std::size_t i = 0; i < li.size(); ++i)
      if (li[i] >= 0) d[i] += c[li[i]];
    acc += d.dot(pb.tet_mass[t] * d);
  }
  return std::sqrt(std::max(0.0, acc));
}

PatchSolution solve_patch(const PatchProblem& pb) {
  const int n = pb.num_dofs(), m = pb.num_multipliers, pin = pb.closed ? 1 : 0;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(pb.mass.nonZeros() + 2 * pb.div.nonZeros() + 2 * m);
  for (int c = 0; c < pb.mass.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(pb.mass, c); it; ++it)
      trip.emplace_back(it.row(), it.col(), it.value());
  for (int c = 0; c < pb.div.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(pb.div, c); it; ++it) {
      trip.emplace_back(n + it.row(), it.col(), it.value());
      trip.emplace_back(it.col(), n + it.row(), it.value());
    }
  if (pin)
    for (int i = 0; i < m; ++i) {
      trip.emplace_back(n + m, n + i, pb.pin[i]);
      trip.emplace_back(n + i, n + m, pb.pin[i]);
    }
  Eigen::SparseMatrix<double> K(n + m + pin, n + m + pin);
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m + pin);
  rhs.head(n) = pb.target_load;
  rhs.segment(n, m) = pb.div_load;

  PatchSolution sol;
  sol.vertex = pb.patch.vertex;
  sol.dofs = pb.dofs;
  sol.closed = pb.closed;
  sol.mixed = pb.patch.mixed_boundary;
  sol.divergence_mean = pb.compatibility;
  sol.compatibility = pb.compatibility_scale > 0.0 ? std::abs(pb.compatibility) / pb.compatibility_scale : 0.0;
  SolveReport rep;
  Eigen::VectorXd x;
  try {
    x = solve_linear(K, rhs, LinearSolveContract{1e-12, 10}, &rep);
  } catch (const SolverError& e) {
    const Eigen::FullPivLU<Eigen::MatrixXd> lu{Eigen::MatrixXd(K)};
    throw EquilibrationError("patch " + std::to_string(pb.patch.vertex) + ": singular KKT system, rank defect " +
                             std::to_string(K.rows() - lu.rank()) + " (" + e.what() + ")");
  }
  sol.coefficients = x.head(n);
  sol.multiplier = x.segment(n, m);
  sol.relative_residual = rep.relative_residual;
  sol.objective = patch_objective(pb, sol.coefficients);
  return sol;
}

Eigen::VectorXd solve_patch_nullspace(const PatchProblem& pb) {
  const Eigen::MatrixXd D(pb.div);
  const Eigen::MatrixXd M(pb.mass);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double tol = 1e-10 * s[0];
  int rank = 0;
  while (rank < s.size() && s[rank] > tol) ++rank;
  const Eigen::MatrixXd& U = svd.matrixU();
  const Eigen::MatrixXd& V = svd.matrixV();
  // Minimum-norm particular solution of D v = r.
  const Eigen::VectorXd v0 =
      V.leftCols(rank) * (s.head(rank).cwiseInverse().asDiagonal() * (U.leftCols(rank).transpose() * pb.div_load));
  const Eigen::MatrixXd Z = V.rightCols(V.cols() - rank);
  const Eigen::MatrixXd reduced = Z.transpose() * M * Z;
  const Eigen::VectorXd y = reduced.ldlt().solve(Z.transpose() * (pb.target_load - M * v0));
  return v0 + Z * y;
}

Reconstruction accumulate(const TetMesh& mesh, const FieldCoefficients& H, std::shared_ptr<const DofMap> space,
                          const std::vector<PatchSolution>& patches) {
  Reconstruction rec;
  rec.q = space->degree();
  rec.B = FieldCoefficients(space);
  rec.patch_objective.assign(mesh.num_vertices(), 0.0);
  for (const PatchSolution& ps : patches) {
    for (std::size_t i = 0; i < ps.dofs.size(); ++i) rec.B.values[ps.dofs[i]] += ps.coefficients[i];
    rec.patch_objective[ps.vertex] = ps.objective;
    if (ps.closed) {
      rec.max_compatibility = std::max(rec.max_compatibility, ps.compatibility);
      rec.max_divergence_mean = std::max(rec.max_divergence_mean, std::abs(ps.divergence_mean));
    }
    rec.mixed_patches += ps.mixed;
  }

  const int q = rec.q, nt = mesh.num_tets();
  const int qd = patch_quad_degree(q);
  const Tabulation& tb = tabulate(Family::RT, q, qd);
  const Tabulation& th = tabulate(H.space->family(), H.space->degree(), qd);
  std::vector<double> eta2(nt), b2(nt), div2(nt);
  parallel_for(nt, [&](int k) {
    const ElementGeometry g = element_geometry(mesh, k);
    const Eigen::VectorXd bk = rec.B.cell_values(k);
    const Eigen::MatrixXd bv = tabulated_values(g, tb, bk);
    const Eigen::MatrixXd bd = tabulated_diffs(g, tb, bk);
    const Eigen::MatrixXd hv = tabulated_values(g, th, H.cell_values(k));
    const Mat3& mu = mesh.mu(k);
    const Mat3& chi = mesh.chi(k);
    double e = 0.0, b = 0.0, d = 0.0;
    for (int i = 0; i < tb.rule->size(); ++i) {
      const double w = tb.rule->weights[i];
      const Vec3 r = bv.col(i) - mu * hv.col(i);
      e += w * r.dot(chi * r);
      b += w * bv.col(i).squaredNorm();
      d += w * bd(0, i) * bd(0, i);
    }
    eta2[k] = e * g.abs_det();
    b2[k] = b * g.abs_det();
    div2[k] = d * g.abs_det();
  });
  rec.eta.resize(nt);
  double est2 = 0.0, nb2 = 0.0;
  for (int k = 0; k < nt; ++k) {
    rec.eta[k] = std::sqrt(eta2[k]);
    est2 += eta2[k];
    nb2 += b2[k];
    rec.max_div = std::max(rec.max_div, std::sqrt(div2[k]));
  }
  rec.estimator = std::sqrt(est2);
  rec.norm_B = std::sqrt(nb2);

  // Two-sided normal traces on interior faces.
  const TriangleRule& tr = triangle_rule(std::min(q + 1, kMaxQuadratureDegree));
  const int nf = mesh.num_faces();
  std::vector<double> jump(nf, 0.0);
  parallel_for(nf, [&](int f) {
    if (mesh.is_boundary_face(f)) return;
    const auto& fv = mesh.face(f);
    const Vec3 n = mesh.face_normal(f);
    const auto& ft = mesh.face_tets(f);
    const ElementGeometry g0 = element_geometry(mesh, ft[0]), g1 = element_geometry(mesh, ft[1]);
    const Eigen::VectorXd c0 = rec.B.cell_values(ft[0]), c1 = rec.B.cell_values(ft[1]);
    for (int i = 0; i < tr.size(); ++i) {
      const Vec3 x = mesh.vertex(fv[0]) + tr.points[i][0] * (mesh.vertex(fv[1]) - mesh.vertex(fv[0])) +
                     tr.points[i][1] * (mesh.vertex(fv[2]) - mesh.vertex(fv[0]));
      const double a = field_value(g0, rec.B, c0, g0.to_reference(x)).dot(n);
      const double b = field_value(g1, rec.B, c1, g1.to_reference(x)).dot(n);
      jump[f] = std::max(jump[f], std::abs(a - b));
    }
  });
  for (double j : jump) rec.max_jump = std::max(rec.max_jump, j);

  for (const CutSurface& s : mesh.surfaces())
    if (s.role == SurfaceRole::PeriodCheck) rec.periods.push_back({s.name, surface_flux(mesh, rec.B, s)});
  return rec;
}

Reconstruction reconstruct(const TetMesh& mesh, const FieldCoefficients& H, int q) {
  if (q < 0) q = H.space->degree() + 2;
  const auto space = reconstruction_space(mesh, q);
  std::vector<PatchSolution> patches(mesh.num_vertices());
  parallel_for(mesh.num_vertices(),
               [&](int a) { patches[a] = solve_patch(build_patch_problem(mesh, H, *space, a)); });
  return accumulate(mesh, H, space, patches);
}

PeriodTestFunction period_test_function(const TetMesh& mesh, int surface_index) {
  const CutSurface& surface = mesh.surfaces().at(surface_index);
  std::vector<int> verts;
  for (int f : surface.faces)
    for (int v : mesh.face(f)) verts.push_back(v);
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());

  PeriodTestFunction out;
  std::vector<Vec3> u(mesh.num_tets(), Vec3::Zero());
  for (int a : verts) {
    const VertexPatch patch = build_vertex_patch(mesh, a);
    const PatchSplit split = split_patch_by_surface(mesh, patch, surface_index);
    const auto& side = split.chosen();
    if (side.empty()) ++out.empty_sides;
    for (int k : side) {
      const auto pos = std::lower_bound(patch.tets.begin(), patch.tets.end(), k) - patch.tets.begin();
      u[k] += static_cast<double>(split.side) * patch.grad_psi[pos];
    }
  }

  out.v = FieldCoefficients(nedelec_space(mesh, 0));
  std::vector<char> seen(mesh.num_edges(), 0);
  for (int k = 0; k < mesh.num_tets(); ++k) {
    const auto s = mesh.sorted_tet(k);
    for (int e = 0; e < 6; ++e) {
      const auto& le = local_edges()[e];
      const double m = u[k].dot(mesh.vertex(s[le[1]]) - mesh.vertex(s[le[0]]));
      const int ge = mesh.tet_edges(k)[e];
      double& slot = out.v.values[ge];
      if (seen[ge])
        out.max_jump = std::max(out.max_jump, std::abs(slot - m));
      else
        slot = m;
      seen[ge] = 1;
    }
  }
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (mesh.edge_on(e, BoundaryKind::GammaT)) out.max_gamma_t = std::max(out.max_gamma_t, std::abs(out.v.values[e]));
  const Vec3 centroid(0.25, 0.25, 0.25);
  for (int k = 0; k < mesh.num_tets(); ++k)
    out.max_curl = std::max(out.max_curl, evaluate_diff_reference(mesh, out.v, k, centroid).norm());
  return out;
}

FieldCoefficients hat_gradient(const TetMesh& mesh, std::shared_ptr<const DofMap> space, int vertex) {
  if (space->family() != Family::N) throw FemError("hat gradients live in an N space");
  FieldCoefficients out(space);
  const VertexPatch patch = build_vertex_patch(mesh, vertex);
  const BasisSet& b = space->basis();
  for (std::size_t t = 0; t < patch.tets.size(); ++t) {
    const int k = patch.tets[t];
    const ElementGeometry g = element_geometry(mesh, k);
    const Vec3 ref = pull_value(g, Family::N, patch.grad_psi[t]);
    const Eigen::VectorXd local = b.apply_dofs([&](const Vec3&) { return ref; });
    const auto dofs = space->cell_dofs(k);
    for (std::size_t i = 0; i < dofs.size(); ++i) out.values[dofs[i]] = local[i];
  }
  for (int d = 0; d < space->num_dofs(); ++d)
    if (space->is_constrained(d)) out.values[d] = 0.0;
  return out;
}

double mu_inner(const TetMesh& mesh, const FieldCoefficients& H, const FieldCoefficients& v) {
  const int qd = mass_quad_degree(std::max(H.space->degree(), v.space->degree()));
  const Tabulation& th = tabulate(H.space->family(), H.space->degree(), qd);
  const Tabulation& tv = tabulate(v.space->family(), v.space->degree(), qd);
  std::vector<double> part(mesh.num_tets());
  parallel_for(mesh.num_tets(), [&](int k) {
    const ElementGeometry g = element_geometry(mesh, k);
    const Eigen::MatrixXd hv = tabulated_values(g, th, H.cell_values(k));
    const Eigen::MatrixXd vv = tabulated_values(g, tv, v.cell_values(k));
    double acc = 0.0;
    for (int i = 0; i < th.rule->size(); ++i) acc += th.rule->weights[i] * vv.col(i).dot(mesh.mu(k) * hv.col(i));
    part[k] = acc * g.abs_det();
  });
  double total = 0.0;
  for (double x : part) total += x;
  return total;
}

}  // namespace eqmag
