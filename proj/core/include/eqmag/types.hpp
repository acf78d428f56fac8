#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace eqmag {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Raised for malformed or invalid meshes (parse errors, inverted elements,
/// non-conforming topology, inconsistent tags).
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for unsupported finite element families or degrees.
class FemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a linear solve fails: singular factorization or residual
/// contract not met.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the patch-wise reconstruction (compatibility violations,
/// singular local systems, inconsistent half-patch splits).
class EquilibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eqmag
