#pragma once

#include <string>

#include "eqmag/mesh.hpp"

namespace eqmag {

/// Unit cube (0,1)^3, n^3 hexes, each split into 6 tets around its main
/// diagonal. Every boundary face gets `boundary`.
TetMesh cube_mesh(int n, BoundaryKind boundary = BoundaryKind::GammaT);

/// (-2,2)x(-1,1)x(-2,2) minus (-1,1)^3 with mesh size 1/n. Carries the disk
/// (1,2)x(-1,1)x{0} with normal +z: a LambdaConstraint surface when the
/// boundary is Gamma_T, a PeriodCheck surface when it is Gamma_N.
TetMesh torus_mesh(int n, BoundaryKind boundary = BoundaryKind::GammaT);

/// ((-2,2)^2 minus (0,2)x(-2,0)) x (0,2) with mesh size 1/n.
TetMesh lbrick_mesh(int n, BoundaryKind boundary = BoundaryKind::GammaT);

/// Parses "cube:3", "torus:1", "lbrick:2".
TetMesh builtin_mesh(const std::string& descriptor, BoundaryKind boundary = BoundaryKind::GammaT);

}  // namespace eqmag
