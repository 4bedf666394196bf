#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nematic/estimator.hpp"
#include "nematic/metrics.hpp"
#include "nematic/problems.hpp"
#include "nematic/solver.hpp"

namespace nematic {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Full description of one experiment run.
struct ExperimentConfig {
  std::string problem = "flexo-pulse";  // flexo-pulse | trivial | manufactured
  MaterialParams params;
  SolverConfig solver;
  double pulse_steepness = 50.0;
  double pulse_amplitude = 1.5;
  std::string output_dir = "out";
  bool emit_fields = true;
  unsigned seed = 0;  // reserved for test fixtures
};

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline double parse_number(const std::string& key, const std::string& value, int line) {
  double out = 0.0;
  const char* begin = value.data();
  const char* end = value.data() + value.size();
  const auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError("config line " + std::to_string(line) + ": field '" + key +
                      "': not a number: '" + value + "'");
  return out;
}

inline int parse_int(const std::string& key, const std::string& value, int line) {
  const double v = parse_number(key, value, line);
  const int i = static_cast<int>(v);
  if (double(i) != v)
    throw ConfigError("config line " + std::to_string(line) + ": field '" + key +
                      "': not an integer: '" + value + "'");
  return i;
}

inline bool parse_bool(const std::string& key, const std::string& value, int line) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config line " + std::to_string(line) + ": field '" + key +
                    "': expected true/false");
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Applies one key/value setting; `line` only feeds error messages.
inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value, int line = 0) {
  using detail::parse_bool;
  using detail::parse_int;
  using detail::parse_number;
  if (key == "problem") {
    if (value != "flexo-pulse" && value != "trivial" && value != "manufactured")
      throw ConfigError("config line " + std::to_string(line) + ": field 'problem': unknown problem '" +
                        value + "'");
    cfg.problem = value;
  } else if (key == "steepness") {
    cfg.pulse_steepness = parse_number(key, value, line);
  } else if (key == "amplitude") {
    cfg.pulse_amplitude = parse_number(key, value, line);
  } else if (key == "mode") {
    if (value == "uniform")
      cfg.solver.mode = RefinementMode::Uniform;
    else if (value == "amr")
      cfg.solver.mode = RefinementMode::Amr;
    else
      throw ConfigError("config line " + std::to_string(line) +
                        ": field 'mode': expected uniform or amr");
  } else if (key == "levels") {
    cfg.solver.levels = parse_int(key, value, line);
  } else if (key == "nu") {
    cfg.solver.dorfler_nu = parse_number(key, value, line);
  } else if (key == "zeta") {
    cfg.params.zeta = parse_number(key, value, line);
  } else if (key == "K1") {
    cfg.params.K1 = parse_number(key, value, line);
  } else if (key == "K2") {
    cfg.params.K2 = parse_number(key, value, line);
  } else if (key == "K3") {
    cfg.params.K3 = parse_number(key, value, line);
  } else if (key == "eps0") {
    cfg.params.eps0 = parse_number(key, value, line);
  } else if (key == "eps_perp") {
    cfg.params.eps_perp = parse_number(key, value, line);
  } else if (key == "eps_a") {
    cfg.params.eps_a = parse_number(key, value, line);
  } else if (key == "es") {
    cfg.params.es = parse_number(key, value, line);
  } else if (key == "eb") {
    cfg.params.eb = parse_number(key, value, line);
  } else if (key == "tolerance") {
    cfg.solver.tolerance = parse_number(key, value, line);
  } else if (key == "max_newton") {
    cfg.solver.max_newton_iterations = parse_int(key, value, line);
  } else if (key == "damping_start") {
    cfg.solver.damping_start = parse_number(key, value, line);
  } else if (key == "damping_increment") {
    cfg.solver.damping_increment = parse_number(key, value, line);
  } else if (key == "damping_cap") {
    cfg.solver.damping_cap = parse_number(key, value, line);
  } else if (key == "linear_solver") {
    if (value == "lu")
      cfg.solver.linear_solver = LinearSolverKind::LU;
    else if (value == "bicgstab")
      cfg.solver.linear_solver = LinearSolverKind::BiCGStab;
    else
      throw ConfigError("config line " + std::to_string(line) +
                        ": field 'linear_solver': expected lu or bicgstab");
  } else if (key == "root_cells") {
    cfg.solver.root_cells_per_side = parse_int(key, value, line);
  } else if (key == "quad_points") {
    cfg.solver.quadrature_points = parse_int(key, value, line);
  } else if (key == "out_dir") {
    cfg.output_dir = value;
  } else if (key == "emit_fields") {
    cfg.emit_fields = parse_bool(key, value, line);
  } else if (key == "seed") {
    cfg.seed = static_cast<unsigned>(parse_int(key, value, line));
  } else {
    throw ConfigError("config line " + std::to_string(line) + ": unknown field '" + key + "'");
  }
}

/// Flat key = value format; '#' starts a comment, blank lines are skipped.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = detail::trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line) + ": expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line) + ": empty key");
    apply_config_entry(cfg, key, value, line);
  }
  cfg.solver.validate();
  cfg.params.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

inline BoundaryData make_problem(const ExperimentConfig& cfg) {
  if (cfg.problem == "trivial") return trivial_problem();
  if (cfg.problem == "manufactured") return manufactured_potential_problem().boundary;
  return flexo_pulse_problem(cfg.pulse_steepness, cfg.pulse_amplitude);
}

namespace detail {

/// Writes through a temporary file and renames into place.
class AtomicFile {
 public:
  explicit AtomicFile(const std::string& path)
      : path_(path), tmp_(path + ".tmp"), out_(tmp_, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open output file: " + tmp_);
  }
  std::ostream& stream() { return out_; }
  void commit() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + tmp_);
    out_.close();
    std::filesystem::rename(tmp_, path_);
  }

 private:
  std::string path_, tmp_;
  std::ofstream out_;
};

}  // namespace detail

/// Legacy-format unstructured-grid file: quadrilateral cells over the cell
/// corner vertices, point data n1, n2, n3, phi and cell data theta.  The Q2
/// mid-edge and center values are not exported.
inline void write_fields(const State& state, const EstimatorResult& est,
                         const std::string& path) {
  const DofSystem& dofs = state.dofs();
  const QuadMesh& mesh = dofs.mesh();

  std::vector<int> point_of_node(static_cast<std::size_t>(dofs.num_nodes()), -1);
  std::vector<int> points;  // node ids in ascending order
  for (int cell = 0; cell < mesh.num_cells(); ++cell)
    for (int corner : {0, 2, 8, 6}) {
      const int node = dofs.cell_nodes(cell)[static_cast<std::size_t>(corner)];
      point_of_node[static_cast<std::size_t>(node)] = 0;
    }
  for (int node = 0; node < dofs.num_nodes(); ++node)
    if (point_of_node[static_cast<std::size_t>(node)] == 0) {
      point_of_node[static_cast<std::size_t>(node)] = static_cast<int>(points.size());
      points.push_back(node);
    }

  detail::AtomicFile file(path);
  std::ostream& os = file.stream();
  os << "# vtk DataFile Version 3.0\n";
  os << "nematic fields\n";
  os << "ASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << points.size() << " double\n";
  for (int node : points) {
    const Eigen::Vector2d& p = dofs.node_position(node);
    os << format_double(p.x()) << ' ' << format_double(p.y()) << " 0\n";
  }
  os << "CELLS " << mesh.num_cells() << ' ' << mesh.num_cells() * 5 << '\n';
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    os << 4;
    for (int corner : {0, 2, 8, 6})
      os << ' '
         << point_of_node[static_cast<std::size_t>(
                dofs.cell_nodes(cell)[static_cast<std::size_t>(corner)])];
    os << '\n';
  }
  os << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (int cell = 0; cell < mesh.num_cells(); ++cell) os << "9\n";
  os << "POINT_DATA " << points.size() << '\n';
  const char* names[kNumFields] = {"n1", "n2", "n3", "phi"};
  for (int f = 0; f < kNumFields; ++f) {
    os << "SCALARS " << names[f] << " double 1\n";
    os << "LOOKUP_TABLE default\n";
    for (int node : points) os << format_double(state.coefficient(node, f)) << '\n';
  }
  os << "CELL_DATA " << mesh.num_cells() << '\n';
  os << "SCALARS theta double 1\n";
  os << "LOOKUP_TABLE default\n";
  for (int cell = 0; cell < mesh.num_cells(); ++cell)
    os << format_double(est.cells[static_cast<std::size_t>(cell)].theta) << '\n';
  file.commit();
}

/// Per-cell estimator dump: cell id, Theta_T, and its four squared
/// components.
inline void write_estimator_csv(const EstimatorResult& est, const QuadMesh& mesh,
                                const std::string& path) {
  detail::AtomicFile file(path);
  std::ostream& os = file.stream();
  os << "cell,level,ix,iy,theta,theta_mark,vol_p2,vol_q2,edge_p2,edge_q2\n";
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const CellIndex& c = mesh.cell(cell);
    const CellEstimate& e = est.cells[static_cast<std::size_t>(cell)];
    os << cell << ',' << c.level << ',' << c.ix << ',' << c.iy << ','
       << format_double(e.theta) << ',' << format_double(e.theta_mark) << ','
       << format_double(e.vol_p2) << ',' << format_double(e.vol_q2) << ','
       << format_double(e.edge_p2) << ',' << format_double(e.edge_q2) << '\n';
  }
  file.commit();
}

inline const char* kReportHeader =
    "kind,level,cells,dofs,free_dofs,newton_iterations,final_residual,alpha,"
    "global_estimate,marked_cells,max_unit_deviation,gauss_conformance,"
    "free_energy,penalty_energy,work_units,wall_seconds";

/// Machine-readable run report: one row per level plus a summary row.
inline void write_report_csv(const RunReport& report, const std::string& path) {
  detail::AtomicFile file(path);
  std::ostream& os = file.stream();
  os << kReportHeader << '\n';
  for (const LevelStats& ls : report.levels) {
    os << "level," << ls.level << ',' << ls.cells << ',' << ls.dofs << ','
       << ls.free_dofs << ',' << ls.newton_iterations << ','
       << format_double(ls.final_residual) << ',' << format_double(ls.alpha) << ','
       << format_double(ls.global_estimate) << ',' << ls.marks.cells.size()
       << ",,,,,," << format_double(ls.wall_seconds) << '\n';
  }
  os << "summary,,," << report.final_dofs << ",,,,,,,"
     << format_double(report.max_deviation) << ',' << format_double(report.gauss) << ','
     << format_double(report.free_energy_coupled) << ','
     << format_double(report.penalty_energy) << ','
     << format_double(report.total_work_units) << ','
     << format_double(report.wall_seconds) << '\n';
  file.commit();
}

/// Raw full-resolution dump of a state (mesh cells as integers plus every
/// nodal coefficient) for exact restart.
inline void save_state(const State& state, const std::string& path) {
  detail::AtomicFile file(path);
  std::ostream& os = file.stream();
  const QuadMesh& mesh = state.mesh();
  os << "nematic-state 1\n";
  os << mesh.root_size() << ' ' << mesh.num_cells() << ' ' << state.dofs().num_nodes()
     << '\n';
  for (const CellIndex& c : mesh.cells())
    os << c.level << ' ' << c.ix << ' ' << c.iy << '\n';
  for (int node = 0; node < state.dofs().num_nodes(); ++node) {
    for (int f = 0; f < kNumFields; ++f)
      os << (f ? " " : "") << format_double(state.coefficient(node, f));
    os << '\n';
  }
  file.commit();
}

/// Rebuilds a state saved by save_state; the boundary data must be the one
/// the run used.
inline State load_state(std::istream& in, const BoundaryData& boundary) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "nematic-state" || version != 1)
    throw std::runtime_error("load_state: not a state dump");
  int root = 0, ncells = 0, nnodes = 0;
  in >> root >> ncells >> nnodes;
  std::vector<CellIndex> cells(static_cast<std::size_t>(ncells));
  for (auto& c : cells) in >> c.level >> c.ix >> c.iy;
  if (!in) throw std::runtime_error("load_state: truncated dump");

  // Replay refinements: split ancestors of stored cells until all are active.
  QuadMesh mesh(root);
  for (;;) {
    MarkSet marks;
    for (const CellIndex& c : cells) {
      if (mesh.is_active(c)) continue;
      CellIndex a = c;
      while (a.level > 0 && !mesh.is_active(a))
        a = CellIndex{a.level - 1, a.ix >> 1, a.iy >> 1};
      if (!mesh.is_active(a))
        throw std::runtime_error("load_state: stored cell list is not a valid mesh");
      marks.cells.push_back(mesh.find_cell(a));
    }
    if (marks.cells.empty()) break;
    std::sort(marks.cells.begin(), marks.cells.end());
    marks.cells.erase(std::unique(marks.cells.begin(), marks.cells.end()),
                      marks.cells.end());
    mesh = mesh.refined(marks);
  }
  if (mesh.num_cells() != ncells)
    throw std::runtime_error("load_state: stored cell list is not a valid mesh");

  auto dofs = std::make_shared<const DofSystem>(
      std::make_shared<const QuadMesh>(std::move(mesh)), boundary);
  if (dofs->num_nodes() != nnodes)
    throw std::runtime_error("load_state: node count mismatch");
  State state(dofs);
  for (int node = 0; node < nnodes; ++node)
    for (int f = 0; f < kNumFields; ++f) {
      double v = 0.0;
      in >> v;
      state.set_coefficient(node, f, v);
    }
  if (!in) throw std::runtime_error("load_state: truncated dump");
  return state;
}

/// Table-1 style summary.
inline std::string summary_table(const RunReport& report) {
  std::ostringstream os;
  os << "Refinement  Max |n.n-1|   Gauss Law     Free Energy   DOFs      WUs       Timing\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-10s  %-12.3e  %-12.6g  %-12.6g  %-8ld  %-8.4g  %.1fs\n",
                to_string(report.mode).c_str(), report.max_deviation, report.gauss,
                report.free_energy_coupled, report.final_dofs, report.total_work_units,
                report.wall_seconds);
  os << buf;
  return os.str();
}

/// Runs the configured experiment, writing report.csv, per-level
/// estimator_<L>.csv and fields_<L>.vtk into the output directory.  Returns 0
/// on success, 2 on solver nonconvergence.
inline int run_experiment(const ExperimentConfig& cfg, std::ostream& out = std::cout) {
  ExperimentConfig run = cfg;
  if (run.problem == "manufactured") {
    // The manufactured fixture is exact only for the decoupled model.
    run.params.eps_a = 0.0;
    run.params.es = 0.0;
    run.params.eb = 0.0;
  }
  const BoundaryData problem = make_problem(run);
  std::filesystem::create_directories(run.output_dir);
  const std::string dir = run.output_dir + "/";

  LevelObserver observer = [&](int level, const State& s, const LevelStats&,
                               const EstimatorResult& est) {
    write_estimator_csv(est, s.mesh(), dir + "estimator_" + std::to_string(level) + ".csv");
    if (run.emit_fields)
      write_fields(s, est, dir + "fields_" + std::to_string(level) + ".vtk");
  };

  try {
    auto [state, report] = nested_iteration(run.solver, run.params, problem, observer);
    write_report_csv(report, dir + "report.csv");
    save_state(state, dir + "state.dat");
    out << summary_table(report);
    return 0;
  } catch (const SolveError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace nematic
