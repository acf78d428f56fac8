#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "eqmag/meshgen.hpp"
#include "eqmag/parallel.hpp"
#include "eqmag/system.hpp"

using namespace eqmag;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 cube_J(const Vec3& x) {
  return kPi * Vec3(std::sin(kPi * x[0]) * std::cos(kPi * x[1]), -std::cos(kPi * x[0]) * std::sin(kPi * x[1]), 0.0);
}

int locate(const TetMesh& mesh, const Vec3& x) {
  for (int k = 0; k < mesh.num_tets(); ++k) {
    const Vec3 xh = element_geometry(mesh, k).to_reference(x);
    if (xh.minCoeff() > -1e-12 && xh.sum() < 1.0 + 1e-12) return k;
  }
  throw std::runtime_error("point outside mesh");
}

FieldCoefficients random_free_field(std::shared_ptr<const DofMap> space, std::mt19937& rng) {
  std::normal_distribution<double> n;
  FieldCoefficients f(space);
  for (int d : space->free_dofs()) f.values[d] = n(rng);
  return f;
}

// (a, b)_{weight} summed over tets, both fields given as physical values at
// the points of a rule of degree qdeg.
template <class FA, class FB>
double inner(const TetMesh& mesh, int qdeg, FA&& a, FB&& b, bool use_chi = false) {
  const QuadRule& rule = quadrature_rule(qdeg);
  double acc = 0.0;
  for (int k = 0; k < mesh.num_tets(); ++k) {
    const ElementGeometry g = element_geometry(mesh, k);
    for (int i = 0; i < rule.size(); ++i) {
      const Vec3 va = a(k, rule.points[i]), vb = b(k, rule.points[i]);
      const Mat3 w = use_chi ? mesh.chi(k) : Mat3::Identity();
      acc += rule.weights[i] * g.abs_det() * va.dot(w * vb);
    }
  }
  return acc;
}

}  // namespace

TEST(System, LowestOrderBlockSizes) {
  const TetMesh mesh = cube_mesh(2);
  const SparseSystem sys = assemble_mixed_system(mesh, 0, cube_J);
  int interior_edges = 0, interior_faces = 0;
  for (int e = 0; e < mesh.num_edges(); ++e) interior_edges += !mesh.edge_on(e, BoundaryKind::GammaT);
  for (int f = 0; f < mesh.num_faces(); ++f) interior_faces += !mesh.is_boundary_face(f);
  EXPECT_EQ(sys.layout.nH, interior_edges);
  EXPECT_EQ(sys.layout.nA, interior_faces);
  EXPECT_EQ(sys.layout.nQ, mesh.num_tets());
  EXPECT_EQ(sys.layout.nZeta, 0);
  EXPECT_EQ(sys.layout.nPin, 1);
  EXPECT_EQ(sys.matrix.rows(), sys.layout.size());
}

TEST(System, ExactlySymmetric) {
  const TetMesh mesh = torus_mesh(1);
  for (int p : {0, 1}) {
    const SparseSystem sys = assemble_mixed_system(mesh, p, cube_J);
    const Eigen::SparseMatrix<double> t = sys.matrix.transpose();
    EXPECT_EQ((sys.matrix - t).norm(), 0.0);
  }
}

TEST(System, TorusHasOneLambdaMultiplier) {
  const TetMesh mesh = torus_mesh(1);
  const SparseSystem sys = assemble_mixed_system(mesh, 0, cube_J);
  EXPECT_EQ(sys.layout.nZeta, 1);
  const MixedSolution sol = solve(sys);
  ASSERT_EQ(sol.periods_A.size(), 1u);
  EXPECT_LE(std::abs(sol.periods_A[0]), 1e-10 * sol.norm_A);
  EXPECT_TRUE(std::isfinite(sol.zeta[0]));
  EXPECT_LE(sol.div_A, 1e-10 * sol.norm_A);
}

TEST(System, TorusNeumannVariantSolves) {
  const TetMesh mesh = torus_mesh(1, BoundaryKind::GammaN);
  const SparseSystem sys = assemble_mixed_system(mesh, 0, cube_J);
  EXPECT_EQ(sys.layout.nZeta, 0);
  EXPECT_EQ(sys.layout.nPin, 0);
  const MixedSolution sol = solve(sys);
  EXPECT_LE(sol.report.relative_residual, 1e-10);
  EXPECT_LE(sol.div_A, 1e-10 * sol.norm_A);
}

TEST(System, ZeroSourceGivesZeroSolution) {
  const TetMesh mesh = cube_mesh(2);
  const MixedSolution sol = solve_mixed(mesh, 1, [](const Vec3&) { return Vec3::Zero().eval(); });
  EXPECT_EQ(sol.H.values.norm(), 0.0);
  EXPECT_EQ(sol.A.values.norm(), 0.0);
}

TEST(System, ManufacturedSolveMeetsConstraints) {
  const TetMesh mesh = cube_mesh(2);
  for (int p : {0, 1}) {
    const MixedSolution sol = solve_mixed(mesh, p, cube_J);
    EXPECT_LE(sol.report.relative_residual, 1e-10);
    EXPECT_GT(sol.norm_A, 0.0);
    EXPECT_LE(sol.div_A, 1e-10 * sol.norm_A) << "p=" << p;
  }
}

TEST(System, GalerkinOrthogonalityToHatGradients) {
  const TetMesh mesh = cube_mesh(3);
  for (int p : {0, 1}) {
    const MixedSolution sol = solve_mixed(mesh, p, cube_J);
    const Tabulation& t = tabulate(Family::N, p, mass_quad_degree(p));
    double norm2 = 0.0;
    std::vector<double> per_vertex(mesh.num_vertices(), 0.0);
    for (int k = 0; k < mesh.num_tets(); ++k) {
      const ElementGeometry g = element_geometry(mesh, k);
      const Eigen::MatrixXd h = tabulated_values(g, t, sol.H.cell_values(k));
      const auto grads = barycentric_gradients(mesh, k);
      const auto s = mesh.sorted_tet(k);
      for (int i = 0; i < t.rule->size(); ++i) {
        const Vec3 muh = mesh.mu(k) * h.col(i);
        norm2 += t.rule->weights[i] * g.abs_det() * muh.squaredNorm();
        for (int a = 0; a < 4; ++a) per_vertex[s[a]] += t.rule->weights[i] * g.abs_det() * muh.dot(grads[a]);
      }
    }
    for (int v = 0; v < mesh.num_vertices(); ++v)
      if (build_vertex_patch(mesh, v).closed_boundary) EXPECT_LE(std::abs(per_vertex[v]), 1e-10 * std::sqrt(norm2));
  }
}

TEST(System, CurlOfHReproducesSourceOnLambda) {
  std::mt19937 rng(7);
  const TetMesh mesh = torus_mesh(1);
  const int p = 0;
  // Polynomial source, so the assembled load is exact.
  auto J = [](const Vec3& x) { return Vec3(x[1], x[2] * x[2], x[0]); };
  const MixedSolution sol = solve_mixed(mesh, p, J);
  const auto V = sol.H.space;
  for (int trial = 0; trial < 5; ++trial) {
    const FieldCoefficients v = random_free_field(V, rng);
    auto curl_v = [&](int k, const Vec3& xh) -> Vec3 { return evaluate_diff_reference(mesh, v, k, xh); };
    auto curl_h = [&](int k, const Vec3& xh) -> Vec3 { return evaluate_diff_reference(mesh, sol.H, k, xh); };
    auto j = [&](int k, const Vec3& xh) -> Vec3 { return J(element_geometry(mesh, k).map(xh)); };
    const double lhs = inner(mesh, 6, curl_h, curl_v);
    const double rhs = inner(mesh, 6, j, curl_v);
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(System, RepeatedSolveIsBitwiseIdenticalAcrossThreadCounts) {
  const TetMesh mesh = cube_mesh(2);
  set_num_threads(1);
  const SparseSystem a = assemble_mixed_system(mesh, 1, cube_J);
  const MixedSolution sa = solve(a);
  set_num_threads(4);
  const SparseSystem b = assemble_mixed_system(mesh, 1, cube_J);
  const MixedSolution sb = solve(b);
  set_num_threads(0);
  EXPECT_EQ((a.matrix - b.matrix).norm(), 0.0);
  EXPECT_TRUE(a.rhs == b.rhs);
  EXPECT_TRUE(sa.H.values == sb.H.values);
  EXPECT_TRUE(sa.A.values == sb.A.values);
}

TEST(System, PerturbationIsBounded) {
  const TetMesh mesh = cube_mesh(2);
  const SparseSystem sys = assemble_mixed_system(mesh, 0, cube_J);
  const Eigen::VectorXd x = solve_linear(sys.matrix, sys.rhs, {});
  Eigen::VectorXd b2 = sys.rhs;
  b2 *= 1.0 + 1e-8;
  const Eigen::VectorXd x2 = solve_linear(sys.matrix, b2, {});
  EXPECT_LE((x2 - x).norm(), 1e-7 * x.norm());
}

TEST(Projection, IdentityOnCurlsOfDiscreteFields) {
  std::mt19937 rng(3);
  for (const TetMesh& mesh : {cube_mesh(2), torus_mesh(1)}) {
    for (int p : {0, 1}) {
      const FieldCoefficients v = random_free_field(nedelec_space(mesh, p), rng);
      auto phi = [&](const Vec3& x) -> Vec3 { return evaluate_diff(mesh, v, locate(mesh, x), x); };
      const FieldCoefficients pi = project_onto_lambda_h(mesh, p, phi);
      const FieldCoefficients ref = interpolate(mesh, pi.space, phi);
      EXPECT_LE((pi.values - ref.values).norm(), 1e-10 * ref.values.norm()) << "p=" << p;
    }
  }
}

TEST(Projection, ResidualIsChiOrthogonalToLambda) {
  std::mt19937 rng(11);
  const TetMesh mesh = cube_mesh(2);
  const int p = 1;
  auto phi = [](const Vec3&) { return Vec3(1.0, 0.0, 0.0); };
  const FieldCoefficients pi = project_onto_lambda_h(mesh, p, phi);
  for (int trial = 0; trial < 10; ++trial) {
    const FieldCoefficients v = random_free_field(nedelec_space(mesh, p), rng);
    auto w = [&](int k, const Vec3& xh) -> Vec3 { return evaluate_diff_reference(mesh, v, k, xh); };
    auto r = [&](int k, const Vec3& xh) -> Vec3 { return phi(xh) - Vec3(evaluate_reference(mesh, pi, k, xh)); };
    const double scale = std::sqrt(inner(mesh, 4, w, w, true));
    EXPECT_LE(std::abs(inner(mesh, 4, r, w, true)), 1e-10 * scale);
  }
}

TEST(Oscillation, VanishesOnDiscreteCurlsAndZero) {
  std::mt19937 rng(5);
  const TetMesh mesh = cube_mesh(2);
  EXPECT_EQ(oscillation_proxy(mesh, 0, [](const Vec3&) { return Vec3::Zero().eval(); }), 0.0);
  const FieldCoefficients v = random_free_field(nedelec_space(mesh, 0), rng);
  auto J = [&](const Vec3& x) -> Vec3 { return evaluate_diff(mesh, v, locate(mesh, x), x); };
  EXPECT_LE(oscillation_proxy(mesh, 0, J), 1e-10 * v.values.norm());
}

TEST(Oscillation, DecreasesOnNestedCubes) {
  double prev = 1e300;
  for (int n : {1, 2, 4}) {
    const double osc = oscillation_proxy(cube_mesh(n), 0, cube_J);
    EXPECT_LT(osc, prev) << "n=" << n;
    prev = osc;
  }
}
