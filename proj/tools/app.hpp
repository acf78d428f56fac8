#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eqmag/adaptivity.hpp"
#include "eqmag/msh_io.hpp"

namespace eqmag::app {

/// Everything one CLI invocation needs. Filled from an INI file and then
/// overridden by command-line flags.
struct RunConfig {
  std::string mesh_file;
  std::string builtin = "cube:2";
  BoundaryKind boundary = BoundaryKind::GammaT;
  MshTagMap tags;
  std::string case_name = "cube";
  int p = 0;
  int q = -1;
  bool oscillation = true;
  /// Builtin mesh sizes of an h-study; for mesh files, the number of
  /// rounds of bisecting every tet.
  std::vector<int> levels{2, 3, 4, 5};
  /// Solution degrees of a p-study; every q in [p + 2, 3] is run.
  std::vector<int> degrees{0, 1};
  double theta = 0.05;
  int max_iters = 25;
  long dof_budget = 100000;
  MarkingDriver driver = MarkingDriver::Estimator;
  bool vtk = false;
  double tol = 1e-10;
  int threads = 0;
  std::string out = "out";
};

/// INI grammar, all keys optional:
///   [mesh]      builtin, file, boundary (gamma_t|gamma_n), gamma_t_tags,
///               gamma_n_tags (space separated physical tags)
///   [surfaces]  <tag> = <name> <lambda|period>
///   [materials] <region> = 1, 3 or 9 numbers (scalar, diagonal, row-major)
///   [problem]   case, p, q, oscillation
///   [study]     levels, degrees
///   [adapt]     theta, max_iters, dof_budget, driver (estimator|error), vtk
///   [solver]    tol, threads
///   [output]    dir
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Throws ConfigError on p outside {0, 1}, non-SPD materials, bad theta or
/// budgets, or a case that does not fit the mesh.
void validate(const RunConfig& c);

TetMesh load_mesh(const RunConfig& c, int level = -1);

/// Same columns as the study CSVs, iter first when present.
std::string csv_header(bool with_iter);
std::string csv_line(const StudyRow& r, bool with_iter);
void write_csv(const std::string& path, const std::vector<StudyRow>& rows, bool with_iter);

/// Legacy ASCII unstructured grid with region and per-tet scalar and
/// vector cell data.
struct CellData {
  std::map<std::string, std::vector<double>> scalars;
  std::map<std::string, std::vector<Vec3>> vectors;
};
void write_vtk(const std::string& path, const TetMesh& mesh, const CellData& data);

/// Field values at tet centroids.
std::vector<Vec3> centroid_values(const TetMesh& mesh, const FieldCoefficients& f);

struct Outcome {
  bool invariants_ok = true;
  std::vector<StudyRow> rows;
};

Outcome run_solve(const RunConfig& c, std::ostream& report);
Outcome run_estimate(const RunConfig& c, std::ostream& report);
Outcome run_study_h(const RunConfig& c, std::ostream& report);
Outcome run_study_p(const RunConfig& c, std::ostream& report);
Outcome run_adapt(const RunConfig& c, std::ostream& report);
/// Pipeline on the configured mesh for every degree, including the
/// period identity of the reconstruction on PeriodCheck surfaces.
Outcome run_check(const RunConfig& c, std::ostream& report);

/// Entry point shared by main() and the tests. Exit codes: 0 success,
/// 1 invariant violation, 2 configuration error, 3 solver failure.
int run_cli(int argc, const char* const* argv);

}  // namespace eqmag::app
