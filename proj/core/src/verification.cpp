#include "eqmag/verification.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "eqmag/parallel.hpp"

namespace eqmag {

namespace {

constexpr double kPi = std::numbers::pi;

struct Box {
  Vec3 lo, hi;
};

Box domain_box(const std::string& domain) {
  if (domain == "cube") return {Vec3(0, 0, 0), Vec3(1, 1, 1)};
  if (domain == "torus") return {Vec3(-2, -1, -2), Vec3(2, 1, 2)};
  if (domain == "lbrick") return {Vec3(-2, -2, 0), Vec3(2, 2, 2)};
  throw ConfigError("unknown domain '" + domain + "'");
}

Vec3 sine_H(const Vec3& x) { return Vec3(0.0, 0.0, std::sin(kPi * x[0]) * std::sin(kPi * x[1])); }

Vec3 sine_J(const Vec3& x) {
  return kPi * Vec3(std::sin(kPi * x[0]) * std::cos(kPi * x[1]), -std::cos(kPi * x[0]) * std::sin(kPi * x[1]), 0.0);
}

Vec3 gaussian_J(const Vec3& x) {
  const Vec3 y(-1.0, 1.0, 1.0);
  const double sigma = 0.4;
  const Vec3 d = x - y;
  return Vec3(d[1], -d[0], 0.0) * std::exp(-d.squaredNorm() / (sigma * sigma));
}

double safe_ratio(double a, double b) { return a == 0.0 ? 0.0 : a / b; }

using Target = std::function<Vec3(int, const ElementGeometry&, const Vec3&)>;

ErrorReport error_norms_impl(const TetMesh& mesh, const MixedSolution& sol, const Reconstruction& rec,
                             const Target& target, int qdeg) {
  const Tabulation& th = tabulate(Family::N, sol.H.space->degree(), qdeg);
  const Tabulation& tb = tabulate(Family::RT, rec.B.space->degree(), qdeg);
  const int nt = mesh.num_tets();
  ErrorReport r;
  r.errH_K.resize(nt);
  r.errB_K.resize(nt);
  parallel_for(nt, [&](int k) {
    const ElementGeometry g = element_geometry(mesh, k);
    const Eigen::MatrixXd hv = tabulated_values(g, th, sol.H.cell_values(k));
    const Eigen::MatrixXd bv = tabulated_values(g, tb, rec.B.cell_values(k));
    const Mat3& mu = mesh.mu(k);
    const Mat3& chi = mesh.chi(k);
    double eh = 0.0, eb = 0.0;
    for (int i = 0; i < th.rule->size(); ++i) {
      const Vec3 h = target(k, g, th.rule->points[i]);
      const Vec3 dh = h - hv.col(i);
      const Vec3 db = h - chi * bv.col(i);
      eh += th.rule->weights[i] * dh.dot(mu * dh);
      eb += th.rule->weights[i] * db.dot(mu * db);
    }
    r.errH_K[k] = std::sqrt(eh * g.abs_det());
    r.errB_K[k] = std::sqrt(eb * g.abs_det());
  });
  double h2 = 0.0, b2 = 0.0;
  for (int k = 0; k < nt; ++k) {
    h2 += r.errH_K[k] * r.errH_K[k];
    b2 += r.errB_K[k] * r.errB_K[k];
  }
  r.errH = std::sqrt(h2);
  r.errB = std::sqrt(b2);
  r.eta_K = rec.eta;
  r.est = rec.estimator;
  r.effectivity = r.errH > 0.0 ? r.est / r.errH : 0.0;
  return r;
}

int error_quad_degree(int p) { return std::min(2 * p + 6, kMaxQuadratureDegree); }

}  // namespace

AnalyticCase analytic_case(const std::string& name) {
  AnalyticCase c;
  c.name = name;
  if (name == "cube") {
    c.domain = "cube";
    c.J = sine_J;
    c.H = sine_H;
  } else if (name == "torus") {
    c.domain = "torus";
    c.J = sine_J;
    c.H = sine_H;
  } else if (name == "torus-neumann") {
    // Same source; the exact field of this boundary configuration is unknown.
    c.domain = "torus";
    c.boundary = BoundaryKind::GammaN;
    c.J = sine_J;
  } else if (name == "lbrick") {
    c.domain = "lbrick";
    c.J = gaussian_J;
  } else if (name == "zero") {
    c.domain = "cube";
    c.J = [](const Vec3&) { return Vec3::Zero().eval(); };
    c.H = c.J;
  } else {
    throw ConfigError("unknown case '" + name + "'");
  }
  return c;
}

std::vector<std::string> analytic_case_names() { return {"cube", "torus", "torus-neumann", "lbrick", "zero"}; }

double curl_consistency(const AnalyticCase& c, int samples, unsigned seed) {
  if (!c.has_exact()) return 0.0;
  const Box box = domain_box(c.domain);
  const double step = 1e-6 * (box.hi - box.lo).norm();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const VectorFunction& H = *c.H;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vec3 x;
    for (int d = 0; d < 3; ++d) x[d] = box.lo[d] + u(rng) * (box.hi[d] - box.lo[d]);
    Mat3 grad;  // grad(i, j) = d H_i / d x_j
    for (int j = 0; j < 3; ++j) {
      Vec3 e = Vec3::Zero();
      e[j] = step;
      grad.col(j) = (H(x + e) - H(x - e)) / (2.0 * step);
    }
    const Vec3 curl(grad(2, 1) - grad(1, 2), grad(0, 2) - grad(2, 0), grad(1, 0) - grad(0, 1));
    worst = std::max(worst, (curl - c.J(x)).norm());
  }
  return worst;
}

double boundary_normal_trace(const TetMesh& mesh, const VectorFunction& J) {
  const TriangleRule& tr = triangle_rule(6);
  double acc = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (!mesh.is_boundary_face(f)) continue;
    const auto& v = mesh.face(f);
    const Vec3 n = mesh.face_normal(f);
    const double area2 = 2.0 * mesh.face_area(f);
    for (int i = 0; i < tr.size(); ++i) {
      const Vec3 x = mesh.vertex(v[0]) + tr.points[i][0] * (mesh.vertex(v[1]) - mesh.vertex(v[0])) +
                     tr.points[i][1] * (mesh.vertex(v[2]) - mesh.vertex(v[0]));
      const double jn = J(x).dot(n);
      acc += tr.weights[i] * area2 * jn * jn;
    }
  }
  return std::sqrt(acc);
}

ErrorReport error_norms(const TetMesh& mesh, const MixedSolution& sol, const Reconstruction& rec,
                        const VectorFunction& H) {
  return error_norms_impl(
      mesh, sol, rec, [&](int, const ElementGeometry& g, const Vec3& xh) { return H(g.map(xh)); },
      error_quad_degree(sol.p));
}

ErrorReport error_norms(const TetMesh& mesh, const MixedSolution& sol, const Reconstruction& rec,
                        const FieldCoefficients& reference) {
  const BasisSet& b = reference.space->basis();
  return error_norms_impl(
      mesh, sol, rec,
      [&](int k, const ElementGeometry& g, const Vec3& xh) -> Vec3 {
        return push_values(g, b.family(), b.values(xh)) * reference.cell_values(k);
      },
      error_quad_degree(std::max(sol.p, reference.space->degree())));
}

ErrorReport error_norms(const TetMesh& mesh, const MixedSolution& sol, const Reconstruction& rec,
                        const AnalyticCase& c) {
  if (!c.has_exact()) throw ConfigError("case '" + c.name + "' has no exact field; use a reference solution");
  return error_norms(mesh, sol, rec, *c.H);
}

FieldCoefficients reference_solution(const TetMesh& mesh, int p, const AnalyticCase& c,
                                     const LinearSolveContract& contract) {
  if (p + 1 > 3) throw FemError("reference solution needs degree " + std::to_string(p + 1) + " > 3");
  return solve_mixed(mesh, p + 1, c.J, contract).H;
}

double contrast(const TetMesh& mesh, const std::vector<int>& tets) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  auto visit = [&](int k) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(mesh.mu(k));
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  };
  if (tets.empty())
    for (int k = 0; k < mesh.num_tets(); ++k) visit(k);
  else
    for (int k : tets) visit(k);
  return hi / lo;
}

double mu_norm(const TetMesh& mesh, const FieldCoefficients& H) {
  const int q = H.space->degree();
  const Tabulation& t = tabulate(H.space->family(), q, mass_quad_degree(q));
  std::vector<double> part(mesh.num_tets());
  parallel_for(mesh.num_tets(), [&](int k) {
    const ElementGeometry g = element_geometry(mesh, k);
    const Eigen::MatrixXd hv = tabulated_values(g, t, H.cell_values(k));
    double acc = 0.0;
    for (int i = 0; i < t.rule->size(); ++i) acc += t.rule->weights[i] * (mesh.mu(k) * hv.col(i)).squaredNorm();
    part[k] = acc * g.abs_det();
  });
  double total = 0.0;
  for (double x : part) total += x;
  return std::sqrt(total);
}

bool InvariantReport::ok(double tol) const {
  return div_B <= tol && jump_B <= tol && div_A <= tol && galerkin <= tol && period_A <= tol && period_B <= tol;
}

InvariantReport check_invariants(const TetMesh& mesh, const MixedSolution& sol, const Reconstruction& rec) {
  InvariantReport r;
  r.div_B = safe_ratio(rec.max_div, rec.norm_B);
  r.jump_B = rec.max_jump / std::max(1.0, rec.norm_B);
  r.div_A = safe_ratio(sol.div_A, sol.norm_A);
  r.galerkin = safe_ratio(rec.max_divergence_mean, mu_norm(mesh, sol.H));
  for (double pa : sol.periods_A) r.period_A = std::max(r.period_A, safe_ratio(std::abs(pa), sol.norm_A));
  for (const auto& pb : rec.periods) r.period_B = std::max(r.period_B, safe_ratio(std::abs(pb.value), rec.norm_B));
  return r;
}

PipelineResult run_pipeline(const TetMesh& mesh, int p, const AnalyticCase& c, const PipelineOptions& opt) {
  PipelineResult out;
  out.solution = solve_mixed(mesh, p, c.J, opt.contract);
  out.reconstruction = reconstruct(mesh, out.solution.H, opt.q);
  if (c.has_exact())
    out.errors = error_norms(mesh, out.solution, out.reconstruction, *c.H);
  else
    out.errors = error_norms(mesh, out.solution, out.reconstruction, reference_solution(mesh, p, c, opt.contract));
  if (opt.oscillation) out.osc = oscillation_proxy(mesh, p, c.J, opt.contract);
  out.invariants = check_invariants(mesh, out.solution, out.reconstruction);
  return out;
}

StudyRow make_row(const PipelineResult& r) {
  StudyRow row;
  row.dofs = r.solution.num_dofs();
  row.errH = r.errors.errH;
  row.errB = r.errors.errB;
  row.est = r.errors.est;
  row.effectivity = r.errors.effectivity;
  row.osc = r.osc;
  return row;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::nan("");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace eqmag
