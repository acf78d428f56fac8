#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "eqmag/element.hpp"
#include "eqmag/field.hpp"
#include "eqmag/meshgen.hpp"

using namespace eqmag;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Closed form of the monomial integral over the reference tet.
double monomial_integral(int a, int b, int c) {
  return factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
}

TetMesh random_tet_mesh(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    MeshInput in;
    for (int i = 0; i < 4; ++i) in.vertices.emplace_back(u(rng), u(rng), u(rng));
    const double vol = (in.vertices[1] - in.vertices[0]).dot((in.vertices[2] - in.vertices[0]).cross(in.vertices[3] - in.vertices[0]));
    if (std::abs(vol) < 0.05) continue;
    in.tets = {{0, 1, 2, 3}};
    if (vol < 0) std::swap(in.tets[0][2], in.tets[0][3]);
    // Shuffle vertex indices so the sorted order differs from the stored one.
    std::array<int, 4> perm{0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    MeshInput p;
    p.vertices.resize(4);
    for (int i = 0; i < 4; ++i) p.vertices[perm[i]] = in.vertices[i];
    p.tets = {{perm[in.tets[0][0]], perm[in.tets[0][1]], perm[in.tets[0][2]], perm[in.tets[0][3]]}};
    p.default_boundary = BoundaryKind::GammaN;
    return TetMesh::build(p);
  }
}

Vec3 random_point_in_tet(const TetMesh& m, int k, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  double l[4] = {u(rng), u(rng), u(rng), u(rng)};
  const double s = l[0] + l[1] + l[2] + l[3];
  Vec3 x = Vec3::Zero();
  for (int i = 0; i < 4; ++i) x += l[i] / s * m.vertex(m.tet(k)[i]);
  return x;
}

}  // namespace

TEST(Quadrature, WeightsSumToReferenceVolume) {
  for (int d = 0; d <= kMaxQuadratureDegree; ++d) {
    const auto& r = quadrature_rule(d);
    double s = 0.0;
    for (double w : r.weights) s += w;
    EXPECT_NEAR(s, 1.0 / 6.0, 1e-15) << d;
    for (const auto& p : r.points) {
      EXPECT_GE(p.minCoeff(), 0.0);
      EXPECT_LE(p.sum(), 1.0);
    }
  }
  EXPECT_THROW(quadrature_rule(11), FemError);
  EXPECT_THROW(quadrature_rule(-1), FemError);
}

TEST(Quadrature, FirstMoment) {
  for (int d = 1; d <= kMaxQuadratureDegree; ++d) {
    const auto& r = quadrature_rule(d);
    double s = 0.0;
    for (int g = 0; g < r.size(); ++g) s += r.weights[g] * r.points[g][0];
    EXPECT_NEAR(s, 1.0 / 24.0, 1e-15);
  }
  // Monte Carlo cross-check of the closed form.
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double acc = 0.0;
  int inside = 0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double x = u(rng), y = u(rng), z = u(rng);
    if (x + y + z <= 1.0) {
      acc += x;
      ++inside;
    }
  }
  EXPECT_NEAR(acc / n, 1.0 / 24.0, 2e-4);
  EXPECT_NEAR(static_cast<double>(inside) / n, 1.0 / 6.0, 2e-3);
}

TEST(Quadrature, ExactForAllMonomialsUpToDegree) {
  for (int d = 0; d <= kMaxQuadratureDegree; ++d) {
    const auto& r = quadrature_rule(d);
    for (int a = 0; a <= d; ++a)
      for (int b = 0; a + b <= d; ++b)
        for (int c = 0; a + b + c <= d; ++c) {
          double s = 0.0;
          for (int g = 0; g < r.size(); ++g)
            s += r.weights[g] * std::pow(r.points[g][0], a) * std::pow(r.points[g][1], b) * std::pow(r.points[g][2], c);
          EXPECT_NEAR(s, monomial_integral(a, b, c), 1e-13) << d << ": " << a << b << c;
        }
  }
}

TEST(Quadrature, TriangleAndLineExactness) {
  for (int d = 0; d <= kMaxQuadratureDegree; ++d) {
    const auto& t = triangle_rule(d);
    for (int a = 0; a <= d; ++a)
      for (int b = 0; a + b <= d; ++b) {
        double s = 0.0;
        for (int g = 0; g < t.size(); ++g) s += t.weights[g] * std::pow(t.points[g][0], a) * std::pow(t.points[g][1], b);
        EXPECT_NEAR(s, factorial(a) * factorial(b) / factorial(a + b + 2), 1e-14);
      }
    const auto& l = line_rule(d);
    for (int a = 0; a <= d; ++a) {
      double s = 0.0;
      for (int g = 0; g < l.size(); ++g) s += l.weights[g] * std::pow(l.points[g], a);
      EXPECT_NEAR(s, 1.0 / (a + 1), 1e-14);
    }
  }
}

TEST(Basis, Dimensions) {
  const int n_dims[] = {6, 20, 45, 84};
  const int rt_dims[] = {4, 15, 36, 70};
  for (int q = 0; q <= 3; ++q) {
    EXPECT_EQ(BasisSet::get(Family::N, q).dim(), n_dims[q]);
    EXPECT_EQ(BasisSet::get(Family::RT, q).dim(), rt_dims[q]);
    EXPECT_EQ(BasisSet::get(Family::P, q).dim(), dim_p3(q));
  }
  EXPECT_THROW(BasisSet::get(Family::RT, 4), FemError);
}

TEST(Basis, SpanRankByGramMatrix) {
  // Brute-force span dimension of P_q x + P_q^3 (RT) and P_q^3 + P_q x x (N)
  // from the Gram matrix of the candidates sampled at many points.
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 0.33);
  const int n_dims[] = {6, 20, 45, 84};
  const int rt_dims[] = {4, 15, 36, 70};
  for (int q = 0; q <= 3; ++q) {
    std::vector<Vec3> pts(300);
    for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
    const MonomialSet& m = MonomialSet::get(q);
    auto rank_of = [&](bool rt) {
      std::vector<std::function<Vec3(const Vec3&)>> cand;
      for (int j = 0; j < m.size(); ++j)
        for (int c = 0; c < 3; ++c)
          cand.push_back([&, j, c](const Vec3& x) { return Vec3(m.eval(x)[j] * Vec3::Unit(c)); });
      for (int j = 0; j < m.size(); ++j)
        for (int c = 0; c < 3; ++c) {
          if (rt && c > 0) break;
          cand.push_back([&, j, c, rt](const Vec3& x) {
            return rt ? Vec3(m.eval(x)[j] * x) : Vec3((m.eval(x)[j] * Vec3::Unit(c)).cross(x));
          });
        }
      Eigen::MatrixXd S(3 * pts.size(), cand.size());
      for (std::size_t i = 0; i < cand.size(); ++i)
        for (std::size_t g = 0; g < pts.size(); ++g) S.block<3, 1>(3 * g, i) = cand[i](pts[g]);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(S.transpose() * S);
      const auto& s = svd.singularValues();
      int r = 0;
      while (r < s.size() && s[r] > 1e-11 * s[0]) ++r;
      return r;
    };
    EXPECT_EQ(rank_of(true), rt_dims[q]);
    EXPECT_EQ(rank_of(false), n_dims[q]);
  }
}

TEST(Basis, DualToDegreesOfFreedom) {
  for (Family f : {Family::P, Family::N, Family::RT})
    for (int q = 0; q <= 3; ++q) {
      const BasisSet& b = BasisSet::get(f, q);
      for (int j = 0; j < b.dim(); ++j) {
        const Eigen::VectorXd d = b.apply_dofs([&](const Vec3& x) -> Eigen::VectorXd { return b.values(x).col(j); });
        for (int i = 0; i < b.dim(); ++i) EXPECT_NEAR(d[i], i == j ? 1.0 : 0.0, 1e-11) << family_name(f) << q;
      }
    }
}

TEST(Basis, LowestOrderNedelecHasConstantCurl) {
  const BasisSet& b = BasisSet::get(Family::N, 0);
  const Eigen::MatrixXd c0 = b.diffs(Vec3(0.1, 0.2, 0.3));
  const Eigen::MatrixXd c1 = b.diffs(Vec3(0.4, 0.05, 0.25));
  EXPECT_LT((c0 - c1).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Element, PiolaCommutingProperty) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const TetMesh m = random_tet_mesh(rng);
    const ElementGeometry g = element_geometry(m, 0);
    const Vec3 xh(0.2, 0.3, 0.1);
    for (Family f : {Family::N, Family::RT}) {
      const BasisSet& b = BasisSet::get(f, 2);
      const auto mg = b.monomials().grad(xh);
      for (int j = 0; j < b.dim(); ++j) {
        // Reference Jacobian d u_c / d xhat_b from the coefficients directly.
        Mat3 dref;
        for (int c = 0; c < 3; ++c)
          for (int bb = 0; bb < 3; ++bb) dref(c, bb) = b.coefficients(c).row(j).dot(mg.row(bb));
        const Mat3 A = f == Family::N ? Mat3(g.Jinv.transpose()) : Mat3(g.J / g.detJ);
        const Mat3 dphys = A * dref * g.Jinv;
        const Eigen::MatrixXd pushed = push_diffs(g, f, b.diffs(xh).col(j));
        if (f == Family::RT) {
          EXPECT_NEAR(pushed(0, 0), dphys.trace(), 1e-12 * (1 + std::abs(dphys.trace())));
        } else {
          const Vec3 curl(dphys(2, 1) - dphys(1, 2), dphys(0, 2) - dphys(2, 0), dphys(1, 0) - dphys(0, 1));
          EXPECT_LT((pushed.col(0) - curl).norm(), 1e-12 * (1 + curl.norm()));
        }
      }
    }
  }
}

TEST(Element, MassMatricesSpdAndLinearInCoefficient) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const TetMesh m = random_tet_mesh(rng);
    const Mat3 mu = Mat3::Identity() + 0.3 * Mat3::Ones();
    for (int p = 0; p <= 1; ++p) {
      const auto lm = local_matrices(m, 0, p, mu);
      const auto lm2 = local_matrices(m, 0, p, 2.0 * mu);
      EXPECT_LT((lm.M_mu - lm.M_mu.transpose()).cwiseAbs().maxCoeff(), 1e-13 * lm.M_mu.norm());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lm.M_mu);
      EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(lm.M_chi);
      EXPECT_GT(es2.eigenvalues().minCoeff(), 0.0);
      EXPECT_EQ(lm2.M_mu, 2.0 * lm.M_mu);
    }
  }
  EXPECT_THROW(local_matrices(cube_mesh(1), 0, 0, -Mat3::Identity()), FemError);
}

TEST(Element, CurlCouplingKillsGradients) {
  std::mt19937 rng(13);
  const TetMesh m = random_tet_mesh(rng);
  const auto lm = local_matrices(m, 0, 0, Mat3::Identity());
  const auto grads = barycentric_gradients(m, 0);
  const auto s = m.sorted_tet(0);
  for (int a = 0; a < 4; ++a) {
    // N_0 coefficients of grad(lambda_a): difference of endpoint values.
    Eigen::VectorXd v(6);
    for (int e = 0; e < 6; ++e) v[e] = (local_edges()[e][1] == a) - (local_edges()[e][0] == a);
    EXPECT_LT((lm.C * v).norm(), 1e-13);
    const ElementGeometry g = element_geometry(m, 0);
    const Eigen::MatrixXd vals = push_values(g, Family::N, BasisSet::get(Family::N, 0).values(Vec3(0.1, 0.1, 0.1)));
    EXPECT_LT((vals * v - grads[a]).norm(), 1e-12);
  }
  (void)s;
}

TEST(Field, ConstantsReproducedAndCurlFree) {
  const TetMesh m = cube_mesh(1);
  auto rt = rt_space_free(m, 0);
  const auto f = interpolate(m, rt, [](const Vec3&) { return Vec3(1, 0, 0); });
  for (int k = 0; k < m.num_tets(); ++k) {
    Vec3 c = Vec3::Zero();
    for (int v : m.tet(k)) c += m.vertex(v) / 4;
    EXPECT_LT((evaluate(m, f, k, c) - Eigen::Vector3d(1, 0, 0)).norm(), 1e-13);
  }
  auto n0 = std::make_shared<DofMap>(m, Family::N, 0);
  const auto h = interpolate(m, n0, [](const Vec3&) { return Vec3(1, 0, 0); });
  for (int k = 0; k < m.num_tets(); ++k) {
    Vec3 c = Vec3::Zero();
    for (int v : m.tet(k)) c += m.vertex(v) / 4;
    EXPECT_LT(evaluate_diff(m, h, k, c).norm(), 1e-13);
  }
  EXPECT_THROW(evaluate(m, f, 0, Vec3(5, 5, 5)), FemError);
}

TEST(Field, TraceContinuityOfRandomFields) {
  const TetMesh m = cube_mesh(2);
  std::mt19937 rng(17);
  std::normal_distribution<double> nd;
  for (int q = 0; q <= 3; ++q) {
    for (Family fam : {Family::RT, Family::N}) {
      FieldCoefficients f(std::make_shared<DofMap>(m, fam, q));
      for (int i = 0; i < f.values.size(); ++i) f.values[i] = nd(rng);
      const auto& tr = triangle_rule(4);
      for (int fc = 0; fc < m.num_faces(); fc += 5) {
        const auto& ft = m.face_tets(fc);
        if (ft[1] < 0) continue;
        const auto& fv = m.face(fc);
        const Vec3 n = m.face_normal(fc);
        for (int g = 0; g < 6; ++g) {
          const Vec3 x = m.vertex(fv[0]) + tr.points[g][0] * (m.vertex(fv[1]) - m.vertex(fv[0])) +
                         tr.points[g][1] * (m.vertex(fv[2]) - m.vertex(fv[0]));
          const Vec3 a = evaluate(m, f, ft[0], x), b = evaluate(m, f, ft[1], x);
          if (fam == Family::RT)
            EXPECT_NEAR(a.dot(n), b.dot(n), 1e-12 * (1 + a.norm()));
          else
            EXPECT_LT((a - b).cross(n).norm(), 1e-12 * (1 + a.norm()));
        }
      }
    }
  }
}

TEST(Field, PolynomialsReproducedByInterpolation) {
  std::mt19937 rng(23);
  std::normal_distribution<double> nd;
  const TetMesh m = cube_mesh(1);
  for (int q = 0; q <= 3; ++q) {
    const MonomialSet& ms = MonomialSet::get(q);
    Eigen::MatrixXd coef(3, ms.size());
    for (int i = 0; i < coef.size(); ++i) coef(i) = nd(rng);
    auto poly = [&](const Vec3& x) -> Vec3 { return coef * ms.eval(x); };
    for (Family fam : {Family::RT, Family::N}) {
      const auto f = interpolate(m, std::make_shared<DofMap>(m, fam, q), poly);
      for (int k = 0; k < m.num_tets(); ++k) {
        const Vec3 x = random_point_in_tet(m, k, rng);
        EXPECT_LT((evaluate(m, f, k, x) - poly(x)).norm(), 1e-12 * (1 + poly(x).norm()));
      }
    }
  }
}

TEST(DofMap, LowestOrderCounts) {
  const TetMesh m = cube_mesh(2);
  const auto n = nedelec_space(m, 0);
  int interior_edges = 0;
  for (int e = 0; e < m.num_edges(); ++e) interior_edges += !m.edge_on(e, BoundaryKind::GammaT);
  EXPECT_EQ(n->num_free(), interior_edges);
  const auto rt = rt_space(m, 0);
  int interior_faces = 0;
  for (int f = 0; f < m.num_faces(); ++f) interior_faces += !m.is_boundary_face(f);
  EXPECT_EQ(rt->num_free(), interior_faces);
  EXPECT_EQ(broken_p_space(m, 0)->num_dofs(), m.num_tets());
}
