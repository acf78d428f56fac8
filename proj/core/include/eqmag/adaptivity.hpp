#pragma once

#include <string>
#include <vector>

#include "eqmag/verification.hpp"

namespace eqmag {

struct MarkResult {
  /// Marked elements in selection order (largest first, ties by index).
  std::vector<int> marked;
  double theta = 0.0;
  /// sum over marked eta^2 / sum eta^2.
  double fraction = 0.0;
  /// Dropping the last selected element breaks the bulk criterion.
  bool minimal = true;
  /// Set when every indicator vanishes; nothing is marked then.
  bool all_zero = false;
};

/// Smallest largest-first prefix with sum eta^2 >= theta^2 sum eta^2.
MarkResult doerfler_mark(const std::vector<double>& eta, double theta);

struct RefineResult {
  TetMesh mesh;
  /// Index of the input tet each new tet descends from.
  std::vector<int> parent;
  int bisections = 0;
  /// Bisections beyond the first one of each marked tet.
  int closure_bisections = 0;
  int passes = 0;
};

/// Longest-edge bisection of the marked tets followed by bisection of every
/// tet with a split edge until the mesh is conforming. Ties between edges of
/// equal length are broken by the sorted vertex pair, so the choice is a
/// property of the edge alone. Boundary faces and surface triangles are
/// split along with the tets.
RefineResult refine(const TetMesh& mesh, const std::vector<int>& marked, int max_passes = 10000);

enum class MarkingDriver { Estimator, Error };

struct AdaptOptions {
  int p = 0;
  double theta = 0.05;
  int max_iters = 25;
  long dof_budget = 100000;
  MarkingDriver driver = MarkingDriver::Estimator;
  bool oscillation = false;
  LinearSolveContract contract{};
};

struct AdaptIteration {
  StudyRow row;
  int tets = 0;
  int marked = 0;
  double kappa_max = 0.0;
  /// Share of marked tets whose centroid lies within 0.5
  /// of one of the case's features (source centre, reentrant edge).
  double localized_fraction = 0.0;
  InvariantReport invariants;
  /// Indicators and local errors, stored along with the meshes.
  std::vector<double> eta_K, errH_K;
};

struct AdaptResult {
  std::vector<AdaptIteration> iterations;
  std::vector<TetMesh> meshes;
};

/// Distance from x to the features the L-brick solution concentrates on.
double lbrick_feature_distance(const Vec3& x);

/// solve -> reconstruct -> estimate -> error -> mark -> refine until the
/// iteration cap or the DOF budget is reached. `keep_meshes` stores every
/// mesh of the sequence.
AdaptResult adapt_loop(const TetMesh& initial, const AnalyticCase& c, const AdaptOptions& opt,
                       bool keep_meshes = false);

}  // namespace eqmag
