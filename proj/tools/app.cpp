#include "app.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "eqmag/meshgen.hpp"
#include "eqmag/parallel.hpp"

namespace eqmag::app {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

template <class T>
std::vector<T> split_list(const std::string& s) {
  std::istringstream in(s);
  std::vector<T> out;
  T v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw ConfigError("cannot parse list '" + s + "'");
  return out;
}

BoundaryKind parse_boundary(const std::string& s) {
  if (s == "gamma_t") return BoundaryKind::GammaT;
  if (s == "gamma_n") return BoundaryKind::GammaN;
  throw ConfigError("boundary must be gamma_t or gamma_n, got '" + s + "'");
}

MarkingDriver parse_driver(const std::string& s) {
  if (s == "estimator") return MarkingDriver::Estimator;
  if (s == "error") return MarkingDriver::Error;
  throw ConfigError("driver must be estimator or error, got '" + s + "'");
}

Mat3 parse_material(const std::string& s) {
  const auto v = split_list<double>(s);
  if (v.size() == 1) return v[0] * Mat3::Identity();
  if (v.size() == 3) return Vec3(v[0], v[1], v[2]).asDiagonal();
  if (v.size() == 9) {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = v[i];
    return m;
  }
  throw ConfigError("material needs 1, 3 or 9 numbers, got '" + s + "'");
}

template <class T>
T get(const pt::ptree& t, const std::string& key, T fallback) {
  if (!t.get_optional<std::string>(key)) return fallback;
  try {
    return t.get<T>(key);
  } catch (const pt::ptree_error& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", x);
  return buf;
}

void ensure_dir(const std::string& d) {
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw ConfigError("cannot create output directory '" + d + "': " + ec.message());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PipelineOptions pipeline_options(const RunConfig& c, int q = -1) {
  PipelineOptions o;
  o.q = q;
  o.oscillation = c.oscillation;
  o.contract.tol = c.tol;
  return o;
}

void print_invariants(std::ostream& os, const InvariantReport& r) {
  os << "  div B " << fmt(r.div_B) << "  jump B " << fmt(r.jump_B) << "  div A " << fmt(r.div_A)
     << "  galerkin " << fmt(r.galerkin) << "  period A " << fmt(r.period_A) << "  period B " << fmt(r.period_B)
     << (r.ok() ? "  ok" : "  VIOLATED") << '\n';
}

void print_row(std::ostream& os, const StudyRow& r) {
  os << "  dofs " << r.dofs << "  errH " << fmt(r.errH) << "  errB " << fmt(r.errB) << "  est " << fmt(r.est)
     << "  eff " << fmt(r.effectivity) << "  osc " << fmt(r.osc) << '\n';
}

void write_pipeline_vtk(const std::string& path, const TetMesh& mesh, const PipelineResult& r) {
  CellData d;
  d.scalars["eta"] = r.errors.eta_K;
  d.scalars["errH"] = r.errors.errH_K;
  d.vectors["H"] = centroid_values(mesh, r.solution.H);
  d.vectors["B"] = centroid_values(mesh, r.reconstruction.B);
  write_vtk(path, mesh, d);
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  pt::ptree t;
  try {
    pt::read_ini(in, t);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig c;
  c.builtin = get<std::string>(t, "mesh.builtin", c.builtin);
  c.mesh_file = get<std::string>(t, "mesh.file", c.mesh_file);
  if (auto b = t.get_optional<std::string>("mesh.boundary")) {
    c.boundary = parse_boundary(*b);
    c.tags.default_boundary = c.boundary;
  }
  if (auto s = t.get_optional<std::string>("mesh.gamma_t_tags")) {
    const auto v = split_list<int>(*s);
    c.tags.gamma_t = {v.begin(), v.end()};
  }
  if (auto s = t.get_optional<std::string>("mesh.gamma_n_tags")) {
    const auto v = split_list<int>(*s);
    c.tags.gamma_n = {v.begin(), v.end()};
  }
  if (auto s = t.get_child_optional("surfaces")) {
    for (const auto& [key, node] : *s) {
      std::istringstream line(node.data());
      std::string name, role;
      if (!(line >> name >> role)) throw ConfigError("surface " + key + " needs '<name> <lambda|period>'");
      if (role != "lambda" && role != "period") throw ConfigError("surface role must be lambda or period");
      c.tags.surfaces[std::stoi(key)] = {name, role == "lambda" ? SurfaceRole::LambdaConstraint
                                                                : SurfaceRole::PeriodCheck};
    }
  }
  if (auto m = t.get_child_optional("materials"))
    for (const auto& [key, node] : *m) c.tags.materials[std::stoi(key)] = parse_material(node.data());
  c.case_name = get<std::string>(t, "problem.case", c.case_name);
  c.p = get<int>(t, "problem.p", c.p);
  c.q = get<int>(t, "problem.q", c.q);
  c.oscillation = get<bool>(t, "problem.oscillation", c.oscillation);
  if (auto s = t.get_optional<std::string>("study.levels")) c.levels = split_list<int>(*s);
  if (auto s = t.get_optional<std::string>("study.degrees")) c.degrees = split_list<int>(*s);
  c.theta = get<double>(t, "adapt.theta", c.theta);
  c.max_iters = get<int>(t, "adapt.max_iters", c.max_iters);
  c.dof_budget = get<long>(t, "adapt.dof_budget", c.dof_budget);
  if (auto s = t.get_optional<std::string>("adapt.driver")) c.driver = parse_driver(*s);
  c.vtk = get<bool>(t, "adapt.vtk", c.vtk);
  c.tol = get<double>(t, "solver.tol", c.tol);
  c.threads = get<int>(t, "solver.threads", c.threads);
  c.out = get<std::string>(t, "output.dir", c.out);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in);
}

void validate(const RunConfig& c) {
  if (c.p < 0 || c.p > 1) throw ConfigError("p must be 0 or 1");
  if (c.q >= 0 && (c.q < c.p + 2 || c.q > 3)) throw ConfigError("q must lie in [p + 2, 3]");
  for (int d : c.degrees)
    if (d < 0 || d > 1) throw ConfigError("p-study degrees must be 0 or 1");
  for (int n : c.levels)
    if (n < (c.mesh_file.empty() ? 1 : 0)) throw ConfigError("study level " + std::to_string(n) + " out of range");
  if (!(c.theta > 0.0 && c.theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
  if (c.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (c.dof_budget < 1) throw ConfigError("dof_budget must be >= 1");
  if (!(c.tol > 0.0)) throw ConfigError("tol must be positive");
  if (c.threads < 0) throw ConfigError("threads must be >= 0");
  for (const auto& [region, m] : c.tags.materials) {
    if ((m - m.transpose()).norm() > 1e-12 * m.norm())
      throw ConfigError("material of region " + std::to_string(region) + " is not symmetric");
    if (Eigen::SelfAdjointEigenSolver<Mat3>(m).eigenvalues().minCoeff() <= 0.0)
      throw ConfigError("material of region " + std::to_string(region) + " is not positive definite");
  }
  const AnalyticCase ac = analytic_case(c.case_name);
  if (c.mesh_file.empty()) {
    const std::string domain = c.builtin.substr(0, c.builtin.find(':'));
    if (domain != ac.domain)
      throw ConfigError("case '" + c.case_name + "' lives on the " + ac.domain + " domain, not " + domain);
  }
}

TetMesh load_mesh(const RunConfig& c, int level) {
  if (!c.mesh_file.empty()) {
    TetMesh mesh = parse_msh(c.mesh_file, c.tags);
    for (int i = 0; i < level; ++i) {
      std::vector<int> all(mesh.num_tets());
      for (int k = 0; k < mesh.num_tets(); ++k) all[k] = k;
      mesh = refine(mesh, all).mesh;
    }
    return mesh;
  }
  const BoundaryKind kind =
      c.case_name == "torus-neumann" ? BoundaryKind::GammaN : c.boundary;
  std::string descriptor = c.builtin;
  if (level >= 0) descriptor = descriptor.substr(0, descriptor.find(':')) + ":" + std::to_string(level);
  TetMesh mesh = builtin_mesh(descriptor, kind);
  if (c.tags.materials.empty()) return mesh;
  MeshInput in = mesh.to_input();
  in.materials = c.tags.materials;
  return TetMesh::build(std::move(in));
}

std::string csv_header(bool with_iter) {
  return std::string(with_iter ? "iter," : "") + "dofs,errH,errB,est,effectivity,osc";
}

std::string csv_line(const StudyRow& r, bool with_iter) {
  std::string s = with_iter ? std::to_string(r.iter) + "," : "";
  s += std::to_string(r.dofs);
  for (double x : {r.errH, r.errB, r.est, r.effectivity, r.osc}) s += "," + fmt(x);
  return s;
}

void write_csv(const std::string& path, const std::vector<StudyRow>& rows, bool with_iter) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << csv_header(with_iter) << '\n';
  for (const auto& r : rows) out << csv_line(r, with_iter) << '\n';
}

void write_vtk(const std::string& path, const TetMesh& mesh, const CellData& data) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "# vtk DataFile Version 3.0\neqmag\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Vec3& x : mesh.vertices()) out << fmt(x[0]) << ' ' << fmt(x[1]) << ' ' << fmt(x[2]) << '\n';
  const int nt = mesh.num_tets();
  out << "CELLS " << nt << ' ' << 5 * nt << '\n';
  for (int k = 0; k < nt; ++k) {
    const auto& t = mesh.tet(k);
    out << "4 " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  }
  out << "CELL_TYPES " << nt << '\n';
  for (int k = 0; k < nt; ++k) out << "10\n";
  out << "CELL_DATA " << nt << "\nSCALARS region int 1\nLOOKUP_TABLE default\n";
  for (int k = 0; k < nt; ++k) out << mesh.region(k) << '\n';
  for (const auto& [name, v] : data.scalars) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double x : v) out << fmt(x) << '\n';
  }
  for (const auto& [name, v] : data.vectors) {
    out << "VECTORS " << name << " double\n";
    for (const Vec3& x : v) out << fmt(x[0]) << ' ' << fmt(x[1]) << ' ' << fmt(x[2]) << '\n';
  }
}

std::vector<Vec3> centroid_values(const TetMesh& mesh, const FieldCoefficients& f) {
  std::vector<Vec3> out(mesh.num_tets());
  for (int k = 0; k < mesh.num_tets(); ++k) out[k] = evaluate_reference(mesh, f, k, Vec3::Constant(0.25));
  return out;
}

Outcome run_solve(const RunConfig& c, std::ostream& report) {
  const auto t0 = std::chrono::steady_clock::now();
  const TetMesh mesh = load_mesh(c);
  const AnalyticCase ac = analytic_case(c.case_name);
  LinearSolveContract contract;
  contract.tol = c.tol;
  const MixedSolution sol = solve_mixed(mesh, c.p, ac.J, contract);
  ensure_dir(c.out);
  CellData d;
  d.vectors["H"] = centroid_values(mesh, sol.H);
  d.vectors["A"] = centroid_values(mesh, sol.A);
  write_vtk(c.out + "/solve.vtk", mesh, d);

  Outcome o;
  const double div_rel = sol.norm_A > 0.0 ? sol.div_A / sol.norm_A : 0.0;
  double period_rel = 0.0;
  for (double pa : sol.periods_A) period_rel = std::max(period_rel, sol.norm_A > 0.0 ? std::abs(pa) / sol.norm_A : 0.0);
  o.invariants_ok = div_rel <= 1e-10 && period_rel <= 1e-10 && sol.report.relative_residual <= c.tol;
  report << "solve case=" << c.case_name << " p=" << c.p << " tets=" << mesh.num_tets() << " dofs=" << sol.num_dofs()
         << "\n  solver " << sol.report.method << "  residual " << fmt(sol.report.relative_residual)
         << "  refinement steps " << sol.report.refinement_steps << "\n  div A " << fmt(div_rel) << "  period A "
         << fmt(period_rel) << (o.invariants_ok ? "  ok" : "  VIOLATED") << "\n  time " << seconds_since(t0)
         << " s\n";
  return o;
}

Outcome run_estimate(const RunConfig& c, std::ostream& report) {
  const auto t0 = std::chrono::steady_clock::now();
  const TetMesh mesh = load_mesh(c);
  const PipelineResult r = run_pipeline(mesh, c.p, analytic_case(c.case_name), pipeline_options(c, c.q));
  ensure_dir(c.out);
  Outcome o;
  o.rows.push_back(make_row(r));
  o.invariants_ok = r.invariants.ok();
  write_csv(c.out + "/estimate.csv", o.rows, false);
  write_pipeline_vtk(c.out + "/estimate.vtk", mesh, r);
  report << "estimate case=" << c.case_name << " p=" << c.p << " q=" << r.reconstruction.q
         << " tets=" << mesh.num_tets() << '\n';
  print_row(report, o.rows.back());
  print_invariants(report, r.invariants);
  report << "  time " << seconds_since(t0) << " s\n";
  return o;
}

Outcome run_study_h(const RunConfig& c, std::ostream& report) {
  const AnalyticCase ac = analytic_case(c.case_name);
  ensure_dir(c.out);
  Outcome o;
  std::vector<double> dofs, err;
  report << "study-h case=" << c.case_name << " p=" << c.p << '\n';
  for (std::size_t i = 0; i < c.levels.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const TetMesh mesh = load_mesh(c, c.levels[i]);
    const PipelineResult r = run_pipeline(mesh, c.p, ac, pipeline_options(c, c.q));
    o.rows.push_back(make_row(r));
    o.invariants_ok = o.invariants_ok && r.invariants.ok();
    dofs.push_back(static_cast<double>(o.rows.back().dofs));
    err.push_back(o.rows.back().errH);
    report << " level " << c.levels[i] << " tets " << mesh.num_tets()
           << " time " << seconds_since(t0) << " s\n";
    print_row(report, o.rows.back());
    print_invariants(report, r.invariants);
  }
  write_csv(c.out + "/study_h.csv", o.rows, false);
  if (dofs.size() >= 2) report << "  slope errH vs dofs " << loglog_slope(dofs, err) << '\n';
  return o;
}

Outcome run_study_p(const RunConfig& c, std::ostream& report) {
  const AnalyticCase ac = analytic_case(c.case_name);
  const TetMesh mesh = load_mesh(c);
  ensure_dir(c.out);
  Outcome o;
  report << "study-p case=" << c.case_name << " tets=" << mesh.num_tets() << '\n';
  for (int p : c.degrees) {
    for (int q = p + 2; q <= 3; ++q) {
      const PipelineResult r = run_pipeline(mesh, p, ac, pipeline_options(c, q));
      o.rows.push_back(make_row(r));
      o.invariants_ok = o.invariants_ok && r.invariants.ok();
      report << " p " << p << " q " << q << '\n';
      print_row(report, o.rows.back());
      print_invariants(report, r.invariants);
    }
  }
  write_csv(c.out + "/study_p.csv", o.rows, false);
  return o;
}

Outcome run_adapt(const RunConfig& c, std::ostream& report) {
  const AnalyticCase ac = analytic_case(c.case_name);
  AdaptOptions opt;
  opt.p = c.p;
  opt.theta = c.theta;
  opt.max_iters = c.max_iters;
  opt.dof_budget = c.dof_budget;
  opt.driver = c.driver;
  opt.oscillation = c.oscillation;
  opt.contract.tol = c.tol;
  const auto t0 = std::chrono::steady_clock::now();
  const AdaptResult res = adapt_loop(load_mesh(c), ac, opt, c.vtk);
  ensure_dir(c.out);
  Outcome o;
  report << "adapt case=" << c.case_name << " p=" << c.p << " theta=" << c.theta
         << " driver=" << (c.driver == MarkingDriver::Estimator ? "estimator" : "error") << '\n';
  for (std::size_t i = 0; i < res.iterations.size(); ++i) {
    const auto& it = res.iterations[i];
    o.rows.push_back(it.row);
    o.invariants_ok = o.invariants_ok && it.invariants.ok();
    report << " iter " << it.row.iter << " tets " << it.tets << " marked " << it.marked << " kappa_max "
           << fmt(it.kappa_max) << " localized " << fmt(it.localized_fraction) << '\n';
    print_row(report, it.row);
    print_invariants(report, it.invariants);
    if (c.vtk) {
      CellData d;
      d.scalars["eta"] = it.eta_K;
      d.scalars["errH"] = it.errH_K;
      char name[32];
      std::snprintf(name, sizeof name, "/adapt_%03d.vtk", it.row.iter);
      write_vtk(c.out + name, res.meshes[i], d);
    }
  }
  write_csv(c.out + "/adapt.csv", o.rows, true);
  report << "  time " << seconds_since(t0) << " s\n";
  return o;
}

Outcome run_check(const RunConfig& c, std::ostream& report) {
  const AnalyticCase ac = analytic_case(c.case_name);
  const TetMesh mesh = load_mesh(c);
  Outcome o;
  report << "check case=" << c.case_name << " tets=" << mesh.num_tets() << '\n';
  for (int p : c.degrees) {
    PipelineOptions po = pipeline_options(c);
    po.oscillation = false;
    const PipelineResult r = run_pipeline(mesh, p, ac, po);
    bool ok = r.invariants.ok();
    report << " p " << p << '\n';
    print_invariants(report, r.invariants);
    const auto& surfaces = mesh.surfaces();
    for (std::size_t s = 0, j = 0; s < surfaces.size(); ++s) {
      if (surfaces[s].role != SurfaceRole::PeriodCheck) continue;
      const PeriodTestFunction lt = period_test_function(mesh, static_cast<int>(s));
      const double pairing = mu_inner(mesh, r.solution.H, lt.v);
      const double direct = r.reconstruction.periods.at(j++).value;
      const double scale = std::max(1.0, r.reconstruction.norm_B);
      const bool agree = std::abs(direct - pairing) <= 1e-10 * scale && std::abs(direct) <= 1e-10 * scale;
      ok = ok && agree;
      report << "  surface " << surfaces[s].name << " period " << fmt(direct) << " test-function pairing "
             << fmt(pairing) << (agree ? "  ok" : "  VIOLATED") << '\n';
    }
    o.invariants_ok = o.invariants_ok && ok;
  }
  report << (o.invariants_ok ? "all invariants hold\n" : "invariant violations found\n");
  return o;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App cli{"Mixed magnetostatics with equilibrated error estimation"};
  cli.require_subcommand(1);
  RunConfig c;
  std::string config_path;
  std::optional<std::string> mesh, builtin, case_name, out;
  std::optional<int> p, threads, max_iters;
  std::optional<double> theta, tol;
  std::optional<long> dof_budget;
  std::optional<std::string> driver;
  bool vtk = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI run configuration");
    sub->add_option("--mesh", mesh, "Gmsh v2.2 ASCII mesh");
    sub->add_option("--builtin", builtin, "cube:n, torus:n or lbrick:n");
    sub->add_option("--case", case_name, "cube, torus, torus-neumann, lbrick or zero");
    sub->add_option("--p", p, "solution degree (0 or 1)");
    sub->add_option("--tol", tol, "relative residual of the global solve");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", threads, "worker threads, 0 for all cores");
    sub->add_option("--theta", theta, "bulk marking parameter");
    sub->add_option("--max-iters", max_iters, "adaptive iteration cap");
    sub->add_option("--dof-budget", dof_budget, "adaptive DOF budget");
    sub->add_option("--driver", driver, "adaptive marking: estimator or error");
    sub->add_flag("--vtk", vtk, "write VTK snapshots of adaptive iterations");
  };
  std::map<std::string, Outcome (*)(const RunConfig&, std::ostream&)> commands{
      {"solve", run_solve},       {"estimate", run_estimate}, {"study-h", run_study_h},
      {"study-p", run_study_p},   {"adapt", run_adapt},       {"check", run_check}};
  const std::map<std::string, std::string> help{
      {"solve", "solve the mixed system"},
      {"estimate", "solve, reconstruct and estimate on one mesh"},
      {"study-h", "uniform refinement study"},
      {"study-p", "degree study on a fixed mesh"},
      {"adapt", "adaptive refinement loop"},
      {"check", "invariant suite"}};
  for (const auto& [name, fn] : commands) add_common(cli.add_subcommand(name, help.at(name)));

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e) == 0 ? 0 : 2;
  }

  std::string command;
  for (const auto* sub : cli.get_subcommands()) command = sub->get_name();
  try {
    if (!config_path.empty()) c = load_config(config_path);
    if (mesh) c.mesh_file = *mesh;
    if (builtin) c.builtin = *builtin;
    if (case_name) c.case_name = *case_name;
    if (p) c.p = *p;
    if (tol) c.tol = *tol;
    if (out) c.out = *out;
    if (threads) c.threads = *threads;
    if (theta) c.theta = *theta;
    if (max_iters) c.max_iters = *max_iters;
    if (dof_budget) c.dof_budget = *dof_budget;
    if (driver) c.driver = parse_driver(*driver);
    if (vtk) c.vtk = true;
    validate(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  set_num_threads(c.threads);

  std::ostringstream report;
  Outcome o;
  try {
    o = commands.at(command)(c, report);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  std::cout << report.str();
  std::string stem = command;
  for (char& ch : stem)
    if (ch == '-') ch = '_';
  std::ofstream(c.out + "/" + stem + "_report.txt") << report.str();
  return o.invariants_ok ? 0 : 1;
}

}  // namespace eqmag::app
