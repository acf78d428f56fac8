#pragma once

#include <vector>

#include <Eigen/Core>

#include "eqmag/types.hpp"

namespace eqmag {

/// Quadrature on the reference tetrahedron {x, y, z >= 0, x + y + z <= 1}.
/// Points are reference coordinates; weights sum to 1/6.
struct QuadRule {
  int degree = 0;
  std::vector<Vec3> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(weights.size()); }
};

/// Rule on the reference triangle {s, t >= 0, s + t <= 1}; weights sum to 1/2.
struct TriangleRule {
  int degree = 0;
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(weights.size()); }
};

/// Gauss-Legendre rule on [0, 1].
struct LineRule {
  int degree = 0;
  std::vector<double> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(weights.size()); }
};

inline constexpr int kMaxQuadratureDegree = 10;

/// Collapsed Gauss-Jacobi rule exact for polynomials of total degree
/// `degree` (0..10). The returned reference is cached and immutable.
const QuadRule& quadrature_rule(int degree);
const TriangleRule& triangle_rule(int degree);
const LineRule& line_rule(int degree);

/// Gauss-Jacobi nodes and weights on [-1, 1] for the weight (1-x)^alpha (1+x)^beta.
void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& x, std::vector<double>& w);

}  // namespace eqmag
