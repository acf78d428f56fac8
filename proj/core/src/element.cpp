#include "eqmag/element.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include <Eigen/Dense>

namespace eqmag {

ElementGeometry element_geometry(const TetMesh& mesh, int k) {
  const auto s = mesh.sorted_tet(k);
  ElementGeometry g;
  g.x0 = mesh.vertex(s[0]);
  for (int d = 0; d < 3; ++d) g.J.col(d) = mesh.vertex(s[d + 1]) - g.x0;
  g.detJ = g.J.determinant();
  g.Jinv = g.J.inverse();
  return g;
}

Eigen::MatrixXd push_values(const ElementGeometry& g, Family f, const Eigen::MatrixXd& ref) {
  switch (f) {
    case Family::P: return ref;
    case Family::N: return g.Jinv.transpose() * ref;
    case Family::RT: return (g.J * ref) / g.detJ;
  }
  return ref;
}

Eigen::MatrixXd push_diffs(const ElementGeometry& g, Family f, const Eigen::MatrixXd& ref) {
  switch (f) {
    case Family::P: return g.Jinv.transpose() * ref;
    case Family::N: return (g.J * ref) / g.detJ;
    case Family::RT: return ref / g.detJ;
  }
  return ref;
}

Vec3 pull_value(const ElementGeometry& g, Family f, const Vec3& phys) {
  switch (f) {
    case Family::P: return phys;
    case Family::N: return g.J.transpose() * phys;
    case Family::RT: return g.detJ * (g.Jinv * phys);
  }
  return phys;
}

namespace {

template <class Key, class Value, class Make>
const Value& cache_lookup(std::map<Key, std::unique_ptr<Value>>& cache, std::mutex& mtx, const Key& key,
                          Make&& make) {
  {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
  }
  auto value = std::make_unique<Value>(make());
  std::lock_guard<std::mutex> lock(mtx);
  auto [it, fresh] = cache.emplace(key, std::move(value));
  return *it->second;
}

RefTensor outer_tensor(const std::array<Eigen::MatrixXd, 3>& a, const std::array<Eigen::MatrixXd, 3>& b,
                       const QuadRule& rule) {
  const Eigen::Map<const Eigen::VectorXd> w(rule.weights.data(), rule.size());
  RefTensor t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[3 * i + j] = a[i].transpose() * w.asDiagonal() * b[j];
  return t;
}

Eigen::MatrixXd contract(const RefTensor& t, const Mat3& G) {
  Eigen::MatrixXd out = G(0, 0) * t[0];
  for (int ab = 1; ab < 9; ++ab) out += G(ab / 3, ab % 3) * t[ab];
  return out;
}

void require_spd(const Mat3& m) {
  const bool symmetric = (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + m.cwiseAbs().maxCoeff());
  Eigen::SelfAdjointEigenSolver<Mat3> es(m);
  if (!symmetric || es.eigenvalues().minCoeff() <= 0.0) throw FemError("material coefficient is not SPD");
}

}  // namespace

const Tabulation& tabulate(Family family, int degree, int quad_degree) {
  static std::map<std::tuple<int, int, int>, std::unique_ptr<Tabulation>> cache;
  static std::mutex mtx;
  return cache_lookup(cache, mtx, std::make_tuple(static_cast<int>(family), degree, quad_degree), [&] {
    Tabulation t;
    t.rule = &quadrature_rule(quad_degree);
    t.basis = &BasisSet::get(family, degree);
    const int nq = t.rule->size(), nb = t.basis->dim();
    for (int c = 0; c < 3; ++c) {
      t.val[c] = Eigen::MatrixXd::Zero(nq, nb);
      t.diff[c] = Eigen::MatrixXd::Zero(nq, nb);
    }
    for (int g = 0; g < nq; ++g) {
      const Eigen::MatrixXd v = t.basis->values(t.rule->points[g]);
      const Eigen::MatrixXd d = t.basis->diffs(t.rule->points[g]);
      for (int c = 0; c < v.rows(); ++c) t.val[c].row(g) = v.row(c);
      for (int c = 0; c < d.rows(); ++c) t.diff[c].row(g) = d.row(c);
    }
    return t;
  });
}

const RefTensor& value_tensor(Family fa, int qa, Family fb, int qb, int quad_degree) {
  static std::map<std::tuple<int, int, int, int, int>, std::unique_ptr<RefTensor>> cache;
  static std::mutex mtx;
  const auto key = std::make_tuple(static_cast<int>(fa), qa, static_cast<int>(fb), qb, quad_degree);
  return cache_lookup(cache, mtx, key, [&] {
    const Tabulation& a = tabulate(fa, qa, quad_degree);
    const Tabulation& b = tabulate(fb, qb, quad_degree);
    return outer_tensor(a.val, b.val, *a.rule);
  });
}

const RefTensor& value_curl_tensor(int qa, int qb, int quad_degree) {
  static std::map<std::tuple<int, int, int>, std::unique_ptr<RefTensor>> cache;
  static std::mutex mtx;
  return cache_lookup(cache, mtx, std::make_tuple(qa, qb, quad_degree), [&] {
    const Tabulation& a = tabulate(Family::RT, qa, quad_degree);
    const Tabulation& b = tabulate(Family::N, qb, quad_degree);
    return outer_tensor(a.val, b.diff, *a.rule);
  });
}

Eigen::MatrixXd nedelec_mass(const ElementGeometry& g, int q, const Mat3& mu) {
  const Mat3 G = g.Jinv * mu * g.Jinv.transpose();
  return g.abs_det() * contract(value_tensor(Family::N, q, Family::N, q, mass_quad_degree(q)), G);
}

Eigen::MatrixXd rt_mass(const ElementGeometry& g, int q, const Mat3& chi) {
  const Mat3 G = g.J.transpose() * chi * g.J / g.abs_det();
  return contract(value_tensor(Family::RT, q, Family::RT, q, mass_quad_degree(q)), G);
}

Eigen::MatrixXd curl_coupling(const ElementGeometry& g, int qa, int qb) {
  const Mat3 G = g.J.transpose() * g.J / g.abs_det();
  return contract(value_curl_tensor(qa, qb, mass_quad_degree(std::max(qa, qb))), G);
}

Eigen::MatrixXd div_coupling(const ElementGeometry& g, int qr, int qw) {
  const Tabulation& r = tabulate(Family::P, qr, mass_quad_degree(std::max(qr, qw)));
  const Tabulation& w = tabulate(Family::RT, qw, mass_quad_degree(std::max(qr, qw)));
  const Eigen::Map<const Eigen::VectorXd> wt(r.rule->weights.data(), r.rule->size());
  return g.sign() * (r.val[0].transpose() * wt.asDiagonal() * w.diff[0]);
}

Eigen::MatrixXd p_mass(const ElementGeometry& g, int q) {
  return g.abs_det() * value_tensor(Family::P, q, Family::P, q, mass_quad_degree(q))[0];
}

Eigen::VectorXd p_integrals(const ElementGeometry& g, int q) {
  const Tabulation& r = tabulate(Family::P, q, mass_quad_degree(q));
  const Eigen::Map<const Eigen::VectorXd> wt(r.rule->weights.data(), r.rule->size());
  return g.abs_det() * (r.val[0].transpose() * wt);
}

LocalMatrices local_matrices(const TetMesh& mesh, int k, int p, const Mat3& mu) {
  require_spd(mu);
  const ElementGeometry g = element_geometry(mesh, k);
  LocalMatrices lm;
  lm.M_mu = nedelec_mass(g, p, mu);
  lm.M_chi = rt_mass(g, p, mu.inverse());
  lm.C = curl_coupling(g, p, p);
  lm.D = div_coupling(g, p, p);
  return lm;
}

}  // namespace eqmag
