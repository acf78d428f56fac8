#include "eqmag/basis.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Dense>

#include "eqmag/quadrature.hpp"

namespace eqmag {

namespace {

constexpr int kMaxBasisDegree = 3;
constexpr int kMaxMonomialDegree = 8;

int monomial_index(const MonomialSet& m, const std::array<int, 3>& e) {
  for (int i = 0; i < m.size(); ++i)
    if (m.exponents[i] == e) return i;
  throw FemError("monomial outside the set");
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Rows: L2-orthogonal polynomials on the reference simplex of dimension `dim`
// (2 or 3) expressed in monomials of degree <= n; the first one is exactly 1.
Eigen::MatrixXd orthogonal_moments(int dim, int n) {
  std::vector<std::array<int, 3>> e;
  for (int d = 0; d <= n; ++d)
    for (int i = d; i >= 0; --i) {
      if (dim == 2) {
        e.push_back({i, d - i, 0});
      } else {
        for (int j = d - i; j >= 0; --j) e.push_back({i, j, d - i - j});
      }
    }
  const int m = static_cast<int>(e.size());
  Eigen::MatrixXd G(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const int x = e[a][0] + e[b][0], y = e[a][1] + e[b][1], z = e[a][2] + e[b][2];
      G(a, b) = factorial(x) * factorial(y) * factorial(z) / factorial(x + y + z + dim);
    }
  const Eigen::MatrixXd L = G.llt().matrixL();
  Eigen::MatrixXd R = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(m, m));
  R.row(0) *= L(0, 0);
  return R;
}

double poly2(const Eigen::MatrixXd& R, int row, double s, double t) {
  double v = 0.0;
  int col = 0;
  for (int d = 0; col < R.cols(); ++d)
    for (int i = d; i >= 0; --i) v += R(row, col++) * ipow(s, i) * ipow(t, d - i);
  return v;
}

}  // namespace

const MonomialSet& MonomialSet::get(int degree) {
  if (degree < 0 || degree > kMaxMonomialDegree) throw FemError("unsupported monomial degree");
  static std::array<MonomialSet, kMaxMonomialDegree + 1> sets;
  static std::array<std::once_flag, kMaxMonomialDegree + 1> flags;
  std::call_once(flags[degree], [degree] {
    MonomialSet& s = sets[degree];
    s.degree = degree;
    for (int d = 0; d <= degree; ++d)
      for (int i = d; i >= 0; --i)
        for (int j = d - i; j >= 0; --j) s.exponents.push_back({i, j, d - i - j});
  });
  return sets[degree];
}

Eigen::VectorXd MonomialSet::eval(const Vec3& x) const {
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) {
    const auto& e = exponents[i];
    v[i] = ipow(x[0], e[0]) * ipow(x[1], e[1]) * ipow(x[2], e[2]);
  }
  return v;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> MonomialSet::grad(const Vec3& x) const {
  Eigen::Matrix<double, 3, Eigen::Dynamic> g(3, size());
  for (int i = 0; i < size(); ++i) {
    const auto& e = exponents[i];
    const double px[3] = {ipow(x[0], e[0]), ipow(x[1], e[1]), ipow(x[2], e[2])};
    const double dx[3] = {e[0] ? e[0] * ipow(x[0], e[0] - 1) : 0.0, e[1] ? e[1] * ipow(x[1], e[1] - 1) : 0.0,
                          e[2] ? e[2] * ipow(x[2], e[2] - 1) : 0.0};
    g(0, i) = dx[0] * px[1] * px[2];
    g(1, i) = px[0] * dx[1] * px[2];
    g(2, i) = px[0] * px[1] * dx[2];
  }
  return g;
}

const char* family_name(Family f) {
  switch (f) {
    case Family::P: return "P";
    case Family::N: return "N";
    case Family::RT: return "RT";
  }
  return "?";
}

double legendre01(int k, double s) {
  const double x = 2.0 * s - 1.0;
  double p0 = 1.0, p1 = x;
  if (k == 0) return p0;
  for (int n = 1; n < k; ++n) {
    const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

const std::array<Vec3, 4>& reference_vertices() {
  static const std::array<Vec3, 4> v{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  return v;
}

const std::array<std::array<int, 2>, 6>& local_edges() {
  static const std::array<std::array<int, 2>, 6> e{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  return e;
}

const std::array<std::array<int, 3>, 4>& local_faces() {
  static const std::array<std::array<int, 3>, 4> f{{{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};
  return f;
}

const BasisSet& BasisSet::get(Family family, int degree) {
  if (degree < 0 || degree > kMaxBasisDegree)
    throw FemError(std::string("unsupported degree ") + std::to_string(degree) + " for " + family_name(family));
  static std::array<std::array<std::unique_ptr<BasisSet>, kMaxBasisDegree + 1>, 3> sets;
  static std::array<std::array<std::once_flag, kMaxBasisDegree + 1>, 3> flags;
  const int f = static_cast<int>(family);
  std::call_once(flags[f][degree], [&] { sets[f][degree].reset(new BasisSet(family, degree)); });
  return *sets[f][degree];
}

BasisSet::BasisSet(Family family, int q) : family_(family), degree_(q) {
  mono_ = &MonomialSet::get(family == Family::P ? q : q + 1);
  const MonomialSet& mono = *mono_;
  const int nm = mono.size();
  const int ncomp = value_dim();
  const auto& rv = reference_vertices();
  const int qdeg = std::min(2 * q + 2, kMaxQuadratureDegree);

  auto add = [&](DofEntity ent, Functional fn) {
    entity_.push_back(ent);
    dof_quad_.push_back(std::move(fn));
  };

  if (family == Family::P) {
    per_cell_ = dim_p3(q);
    const MonomialSet& lattice = MonomialSet::get(q);
    for (int i = 0; i < lattice.size(); ++i) {
      const auto& e = lattice.exponents[i];
      const Vec3 x = q == 0 ? Vec3(Vec3::Constant(0.25)) : Vec3(Vec3(e[0], e[1], e[2]) / q);
      add({3, 0, i}, {{x}, {Vec3(1, 0, 0)}});
    }
  } else if (family == Family::N) {
    per_edge_ = q + 1;
    per_face_ = q * (q + 1);
    per_cell_ = 3 * dim_p3(q - 2);
    const LineRule& lr = line_rule(qdeg);
    for (int le = 0; le < 6; ++le) {
      const Vec3 a = rv[local_edges()[le][0]], t = rv[local_edges()[le][1]] - a;
      for (int k = 0; k <= q; ++k) {
        Functional fn;
        for (int g = 0; g < lr.size(); ++g) {
          fn.points.push_back(a + lr.points[g] * t);
          fn.weights.push_back(lr.weights[g] * legendre01(k, lr.points[g]) * t);
        }
        add({1, le, k}, std::move(fn));
      }
    }
    const TriangleRule& tr = triangle_rule(qdeg);
    for (int lf = 0; lf < 4; ++lf) {
      const auto& fv = local_faces()[lf];
      const Vec3 a = rv[fv[0]], t1 = rv[fv[1]] - a, t2 = rv[fv[2]] - a;
      int moment = 0;
      if (q == 0) continue;
      const Eigen::MatrixXd R = orthogonal_moments(2, q - 1);
      for (int r = 0; r < R.rows(); ++r)
        for (const Vec3& tk : {t1, t2}) {
          Functional fn;
          for (int g = 0; g < tr.size(); ++g) {
            const double s = tr.points[g][0], t = tr.points[g][1];
            fn.points.push_back(a + s * t1 + t * t2);
            fn.weights.push_back(tr.weights[g] * poly2(R, r, s, t) * tk);
          }
          add({2, lf, moment++}, std::move(fn));
        }
    }
  } else {
    per_face_ = dim_p2(q);
    per_cell_ = 3 * dim_p3(q - 1);
    const TriangleRule& tr = triangle_rule(qdeg);
    for (int lf = 0; lf < 4; ++lf) {
      const auto& fv = local_faces()[lf];
      const Vec3 a = rv[fv[0]], t1 = rv[fv[1]] - a, t2 = rv[fv[2]] - a;
      const Vec3 nrm = t1.cross(t2);
      const Eigen::MatrixXd R = orthogonal_moments(2, q);
      for (int r = 0; r < R.rows(); ++r) {
        Functional fn;
        for (int g = 0; g < tr.size(); ++g) {
          const double s = tr.points[g][0], t = tr.points[g][1];
          fn.points.push_back(a + s * t1 + t * t2);
          fn.weights.push_back(tr.weights[g] * poly2(R, r, s, t) * nrm);
        }
        add({2, lf, r}, std::move(fn));
      }
    }
  }
  if (family != Family::P) {
    const int interior_degree = family == Family::N ? q - 2 : q - 1;
    if (interior_degree >= 0) {
      const QuadRule& qr = quadrature_rule(qdeg);
      const MonomialSet& im = MonomialSet::get(interior_degree);
      const Eigen::MatrixXd R = orthogonal_moments(3, interior_degree);
      int moment = 0;
      for (int j = 0; j < im.size(); ++j)
        for (int c = 0; c < 3; ++c) {
          Functional fn;
          for (int g = 0; g < qr.size(); ++g) {
            const double m = R.row(j).dot(im.eval(qr.points[g]));
            fn.points.push_back(qr.points[g]);
            fn.weights.push_back(qr.weights[g] * m * Vec3::Unit(c));
          }
          add({3, 0, moment++}, std::move(fn));
        }
    }
  }
  const int ndof = dim();

  // Functionals in coefficient space.
  functionals_ = Eigen::MatrixXd::Zero(ndof, ncomp * nm);
  for (int i = 0; i < ndof; ++i) {
    const auto& fn = dof_quad_[i];
    for (std::size_t g = 0; g < fn.points.size(); ++g) {
      const Eigen::VectorXd m = mono.eval(fn.points[g]);
      for (int c = 0; c < ncomp; ++c) functionals_.row(i).segment(c * nm, nm) += fn.weights[g][c] * m.transpose();
    }
  }

  // Candidate spanning set in coefficient space.
  std::vector<Eigen::VectorXd> cand;
  auto unit_shift = [&](const std::array<int, 3>& e, int d) {
    auto r = e;
    ++r[d];
    return monomial_index(mono, r);
  };
  const MonomialSet& low = MonomialSet::get(q);
  for (int c = 0; c < ncomp; ++c)
    for (int j = 0; j < low.size(); ++j) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(ncomp * nm);
      v[c * nm + j] = 1.0;
      cand.push_back(v);
    }
  if (family != Family::P) {
    for (int j = 0; j < low.size(); ++j) {
      const auto& e = low.exponents[j];
      if (e[0] + e[1] + e[2] != q) continue;
      if (family == Family::RT) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(3 * nm);
        for (int c = 0; c < 3; ++c) v[c * nm + unit_shift(e, c)] = 1.0;
        cand.push_back(v);
      } else {
        for (int k = 0; k < 3; ++k) {
          // (m e_k) x x
          Eigen::VectorXd v = Eigen::VectorXd::Zero(3 * nm);
          const int k1 = (k + 1) % 3, k2 = (k + 2) % 3;
          v[k2 * nm + unit_shift(e, k1)] += 1.0;
          v[k1 * nm + unit_shift(e, k2)] -= 1.0;
          cand.push_back(v);
        }
      }
    }
  }
  Eigen::MatrixXd C(ncomp * nm, static_cast<int>(cand.size()));
  for (int j = 0; j < C.cols(); ++j) C.col(j) = cand[j];

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  while (rank < sv.size() && sv[rank] > 1e-10 * sv[0]) ++rank;
  if (rank != ndof)
    throw FemError(std::string("span dimension mismatch for ") + family_name(family) + std::to_string(q));
  const Eigen::MatrixXd Q = svd.matrixU().leftCols(rank);
  const Eigen::MatrixXd A = functionals_ * Q;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (lu.rank() != ndof)
    throw FemError(std::string("degrees of freedom not unisolvent for ") + family_name(family) + std::to_string(q));
  const Eigen::MatrixXd B = Q * lu.inverse();
  for (int c = 0; c < ncomp; ++c) coef_[c] = B.middleRows(c * nm, nm).transpose();
}

Eigen::MatrixXd BasisSet::values(const Vec3& xhat) const {
  const Eigen::VectorXd m = mono_->eval(xhat);
  Eigen::MatrixXd v(value_dim(), dim());
  for (int c = 0; c < value_dim(); ++c) v.row(c) = (coef_[c] * m).transpose();
  return v;
}

Eigen::MatrixXd BasisSet::diffs(const Vec3& xhat) const {
  const auto g = mono_->grad(xhat);
  auto d = [&](int c, int b) -> Eigen::RowVectorXd { return (coef_[c] * g.row(b).transpose()).transpose(); };
  if (family_ == Family::P) {
    Eigen::MatrixXd out(3, dim());
    for (int b = 0; b < 3; ++b) out.row(b) = d(0, b);
    return out;
  }
  if (family_ == Family::RT) return d(0, 0) + d(1, 1) + d(2, 2);
  Eigen::MatrixXd out(3, dim());
  out.row(0) = d(2, 1) - d(1, 2);
  out.row(1) = d(0, 2) - d(2, 0);
  out.row(2) = d(1, 0) - d(0, 1);
  return out;
}

}  // namespace eqmag
