#include "eqmag/quadrature.hpp"

#include <array>
#include <cmath>
#include <mutex>

#include <Eigen/Eigenvalues>

namespace eqmag {

void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& x, std::vector<double>& w) {
  // Golub-Welsch on the Jacobi recurrence.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  const double ab = alpha + beta;
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + ab;
    T(k, k) = k == 0 ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double m = k + 1;
      const double t = 2.0 * m + ab;
      const double b = 4.0 * m * (m + alpha) * (m + beta) * (m + ab) / (t * t * (t + 1.0) * (t - 1.0));
      T(k, k + 1) = T(k + 1, k) = std::sqrt(b);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
                     std::tgamma(ab + 2.0);
  x.resize(n);
  w.resize(n);
  for (int k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()(k);
    const double v = es.eigenvectors()(0, k);
    w[k] = mu0 * v * v;
  }
}

namespace {

// Nodes on [0, 1] for the weight (1-u)^alpha.
void jacobi01(int n, double alpha, std::vector<double>& x, std::vector<double>& w) {
  gauss_jacobi(n, alpha, 0.0, x, w);
  const double scale = std::pow(2.0, -alpha - 1.0);
  for (int k = 0; k < n; ++k) {
    x[k] = 0.5 * (x[k] + 1.0);
    w[k] *= scale;
  }
}

void check_degree(int degree) {
  if (degree < 0 || degree > kMaxQuadratureDegree)
    throw FemError("unsupported quadrature degree " + std::to_string(degree));
}

QuadRule make_tet(int degree) {
  const int n = (degree + 2) / 2;
  std::vector<double> xu, wu, xv, wv, xw, ww;
  jacobi01(n, 2.0, xu, wu);
  jacobi01(n, 1.0, xv, wv);
  jacobi01(n, 0.0, xw, ww);
  QuadRule r;
  r.degree = degree;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double u = xu[i], v = xv[j], s = xw[k];
        r.points.emplace_back(u, (1.0 - u) * v, (1.0 - u) * (1.0 - v) * s);
        r.weights.push_back(wu[i] * wv[j] * ww[k]);
      }
  return r;
}

TriangleRule make_triangle(int degree) {
  const int n = (degree + 2) / 2;
  std::vector<double> xu, wu, xv, wv;
  jacobi01(n, 1.0, xu, wu);
  jacobi01(n, 0.0, xv, wv);
  TriangleRule r;
  r.degree = degree;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      r.points.emplace_back(xu[i], (1.0 - xu[i]) * xv[j]);
      r.weights.push_back(wu[i] * wv[j]);
    }
  return r;
}

LineRule make_line(int degree) {
  const int n = (degree + 2) / 2;
  LineRule r;
  r.degree = degree;
  jacobi01(n, 0.0, r.points, r.weights);
  return r;
}

template <class Rule, Rule (*Make)(int)>
const Rule& cached(int degree) {
  check_degree(degree);
  static std::array<Rule, kMaxQuadratureDegree + 1> rules;
  static std::array<std::once_flag, kMaxQuadratureDegree + 1> flags;
  std::call_once(flags[degree], [degree] { rules[degree] = Make(degree); });
  return rules[degree];
}

}  // namespace

const QuadRule& quadrature_rule(int degree) { return cached<QuadRule, make_tet>(degree); }
const TriangleRule& triangle_rule(int degree) { return cached<TriangleRule, make_triangle>(degree); }
const LineRule& line_rule(int degree) { return cached<LineRule, make_line>(degree); }

}  // namespace eqmag
