#include "nematic/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"

namespace nematic {
namespace {

using testing::make_dofs;
using testing::set_field;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("nematic_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

TEST(Config, ParsesFullFile) {
  std::istringstream in(
      "# experiment\n"
      "problem = flexo-pulse\n"
      "steepness = 40\n"
      "amplitude = 1.25\n"
      "mode = uniform\n"
      "levels = 3\n"
      "nu = 0.8\n"
      "zeta = 1e4\n"
      "K1 = 1.1\n"
      "K2 = 0.6\n"
      "K3 = 1.3\n"
      "eps0 = 1.4\n"
      "eps_perp = 7.5\n"
      "eps_a = 11\n"
      "es = 1.25   # splay flexo\n"
      "eb = -1.25\n"
      "tolerance = 1e-5\n"
      "max_newton = 50\n"
      "damping_start = 0.4\n"
      "damping_increment = 0.3\n"
      "damping_cap = 1\n"
      "linear_solver = bicgstab\n"
      "root_cells = 8\n"
      "quad_points = 5\n"
      "out_dir = /tmp/somewhere\n"
      "emit_fields = false\n"
      "seed = 7\n");
  const ExperimentConfig cfg = parse_config(in);
  EXPECT_EQ(cfg.problem, "flexo-pulse");
  EXPECT_DOUBLE_EQ(cfg.pulse_steepness, 40.0);
  EXPECT_DOUBLE_EQ(cfg.pulse_amplitude, 1.25);
  EXPECT_EQ(cfg.solver.mode, RefinementMode::Uniform);
  EXPECT_EQ(cfg.solver.levels, 3);
  EXPECT_DOUBLE_EQ(cfg.solver.dorfler_nu, 0.8);
  EXPECT_DOUBLE_EQ(cfg.params.zeta, 1e4);
  EXPECT_DOUBLE_EQ(cfg.params.K1, 1.1);
  EXPECT_DOUBLE_EQ(cfg.params.es, 1.25);
  EXPECT_EQ(cfg.solver.max_newton_iterations, 50);
  EXPECT_EQ(cfg.solver.linear_solver, LinearSolverKind::BiCGStab);
  EXPECT_EQ(cfg.solver.root_cells_per_side, 8);
  EXPECT_EQ(cfg.solver.quadrature_points, 5);
  EXPECT_EQ(cfg.output_dir, "/tmp/somewhere");
  EXPECT_FALSE(cfg.emit_fields);
  EXPECT_EQ(cfg.seed, 7u);
}

TEST(Config, ErrorsNameFieldAndLine) {
  {
    std::istringstream in("problem = flexo-pulse\nbogus_key = 3\n");
    try {
      parse_config(in);
      FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
      EXPECT_NE(std::string(e.what()).find("bogus_key"), std::string::npos);
    }
  }
  {
    std::istringstream in("levels = three\n");
    try {
      parse_config(in);
      FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("levels"), std::string::npos);
      EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    }
  }
  {
    std::istringstream in("no equals sign here\n");
    EXPECT_THROW(parse_config(in), ConfigError);
  }
  {
    std::istringstream in("mode = sideways\n");
    EXPECT_THROW(parse_config(in), ConfigError);
  }
  {
    std::istringstream in("levels = 0\n");
    EXPECT_THROW(parse_config(in), std::invalid_argument);
  }
}

TEST(FormatDouble, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-20, 123456.789, -0.0625}) {
    const std::string s = format_double(v);
    EXPECT_EQ(std::stod(s), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(1.0), "1");
}

TEST(WriteFields, TwoByTwoCounts) {
  auto dofs = make_dofs(2, trivial_problem());
  State state(dofs);
  state.fill_director({0, 0, 1});
  const EstimatorResult est = estimate(state, MaterialParams{});

  const auto dir = temp_dir("vtk");
  const std::string path = (dir / "fields.vtk").string();
  write_fields(state, est, path);
  const std::string text = slurp(path);

  EXPECT_NE(text.find("POINTS 9 double"), std::string::npos);
  EXPECT_NE(text.find("CELLS 4 20"), std::string::npos);
  EXPECT_NE(text.find("CELL_TYPES 4"), std::string::npos);
  EXPECT_NE(text.find("POINT_DATA 9"), std::string::npos);
  EXPECT_NE(text.find("SCALARS phi double 1"), std::string::npos);
  EXPECT_NE(text.find("SCALARS theta double 1"), std::string::npos);

  // Trivial state: all theta values are zero.
  std::istringstream in(text);
  std::string line;
  bool in_theta = false;
  int theta_zeros = 0;
  while (std::getline(in, line)) {
    if (line.rfind("SCALARS theta", 0) == 0) {
      std::getline(in, line);  // LOOKUP_TABLE
      in_theta = true;
      continue;
    }
    if (in_theta && !line.empty()) {
      EXPECT_EQ(std::stod(line), 0.0);
      ++theta_zeros;
    }
  }
  EXPECT_EQ(theta_zeros, 4);
}

TEST(WriteFields, RoundTripAndByteStability) {
  QuadMesh mesh(2);
  const QuadMesh refined = mesh.refined(MarkSet{{0}});
  auto dofs = make_dofs(refined, trivial_problem());
  const State state = testing::random_admissible_state(dofs, 7, 0.05);
  const EstimatorResult est = estimate(state, MaterialParams{});

  const auto dir = temp_dir("vtk_rt");
  const std::string p1 = (dir / "a.vtk").string();
  const std::string p2 = (dir / "b.vtk").string();
  write_fields(state, est, p1);
  write_fields(state, est, p2);
  EXPECT_EQ(slurp(p1), slurp(p2));

  // Self-parse: recover the cell count and the vertex coordinates exactly.
  std::ifstream in(p1);
  std::string tok;
  int npoints = 0;
  while (in >> tok)
    if (tok == "POINTS") {
      in >> npoints;
      break;
    }
  in >> tok;  // "double"
  ASSERT_GT(npoints, 0);
  std::vector<Eigen::Vector2d> coords;
  for (int i = 0; i < npoints; ++i) {
    double x = 0, y = 0, z = 0;
    in >> x >> y >> z;
    coords.emplace_back(x, y);
  }
  int ncells = 0, listlen = 0;
  in >> tok >> ncells >> listlen;
  EXPECT_EQ(tok, "CELLS");
  EXPECT_EQ(ncells, refined.num_cells());
  EXPECT_EQ(listlen, 5 * refined.num_cells());

  // Every vertex written must be an exact node position.
  int matched = 0;
  for (const auto& c : coords)
    for (int node = 0; node < dofs->num_nodes(); ++node)
      if (dofs->node_position(node) == c) {
        ++matched;
        break;
      }
  EXPECT_EQ(matched, npoints);
}

TEST(ReportCsv, StableHeaderAndShape) {
  RunReport report;
  report.mode = RefinementMode::Amr;
  LevelStats ls;
  ls.level = 0;
  ls.cells = 256;
  ls.dofs = 4356;
  ls.free_dofs = 3844;
  ls.newton_iterations = 5;
  ls.linearization_steps = 5;
  ls.final_residual = 5e-5;
  ls.alpha = 0.2;
  ls.global_estimate = 12.5;
  ls.marks.cells = {1, 2, 3};
  report.levels.push_back(ls);
  report.max_deviation = 0.01;
  report.gauss = 42.0;
  report.free_energy_coupled = -30.0;
  report.penalty_energy = 0.5;
  report.final_dofs = 4356;
  report.total_work_units = 1.5;

  const auto dir = temp_dir("report");
  const std::string path = (dir / "report.csv").string();
  write_report_csv(report, path);
  std::ifstream in(path);
  std::string header, row, summary;
  std::getline(in, header);
  std::getline(in, row);
  std::getline(in, summary);
  EXPECT_EQ(header, kReportHeader);
  EXPECT_EQ(row.rfind("level,0,256,4356,3844,5,5e-05,0.2,12.5,3,", 0), 0u);
  EXPECT_EQ(summary.rfind("summary,,,4356,,,,,,,0.01,42,-30,0.5,1.5,", 0), 0u);
}

TEST(StateDump, RoundTripOnAdaptiveMesh) {
  QuadMesh mesh(4);
  const QuadMesh refined = mesh.refined(MarkSet{{5, 9}});
  auto dofs = make_dofs(refined, trivial_problem());
  const State state = testing::random_admissible_state(dofs, 99, 0.2);

  const auto dir = temp_dir("dump");
  const std::string path = (dir / "state.dat").string();
  save_state(state, path);

  std::ifstream in(path);
  const State loaded = load_state(in, trivial_problem());
  ASSERT_EQ(loaded.dofs().num_nodes(), state.dofs().num_nodes());
  EXPECT_EQ((loaded.coefficients() - state.coefficients()).norm(), 0.0);
  EXPECT_EQ(loaded.mesh().num_cells(), refined.num_cells());
}

TEST(RunExperiment, TrivialProblemEndToEnd) {
  ExperimentConfig cfg;
  cfg.problem = "trivial";
  cfg.solver.levels = 2;
  cfg.solver.root_cells_per_side = 4;
  cfg.solver.mode = RefinementMode::Amr;
  const auto dir = temp_dir("run_trivial");
  cfg.output_dir = dir.string();

  std::ostringstream out;
  EXPECT_EQ(run_experiment(cfg, out), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "estimator_0.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "estimator_1.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "fields_0.vtk"));
  EXPECT_TRUE(std::filesystem::exists(dir / "fields_1.vtk"));
  EXPECT_TRUE(std::filesystem::exists(dir / "state.dat"));
  EXPECT_NE(out.str().find("Refinement"), std::string::npos);

  const std::string report = slurp((dir / "report.csv").string());
  EXPECT_EQ(report.rfind(kReportHeader, 0), 0u);

  // The trivial problem's summary row carries exact zeros for the deviation,
  // Gauss-law, and energy metrics.
  const auto spos = report.find("\nsummary,");
  ASSERT_NE(spos, std::string::npos);
  std::istringstream srow(report.substr(spos + 1));
  std::string field;
  std::vector<std::string> fields;
  while (std::getline(srow, field, ',')) fields.push_back(field);
  ASSERT_GE(fields.size(), 15u);
  EXPECT_EQ(fields[10], "0");  // max_unit_deviation
  EXPECT_EQ(fields[11], "0");  // gauss_conformance
  EXPECT_EQ(fields[12], "0");  // free_energy
  EXPECT_EQ(fields[13], "0");  // penalty_energy
}

TEST(RunExperiment, NonconvergenceExitStatus) {
  ExperimentConfig cfg;
  cfg.problem = "manufactured";
  cfg.solver.levels = 1;
  cfg.solver.root_cells_per_side = 4;
  cfg.solver.max_newton_iterations = 1;
  cfg.solver.tolerance = 1e-15;  // below the attainable rounding floor
  const auto dir = temp_dir("run_fail");
  cfg.output_dir = dir.string();
  std::ostringstream out;
  EXPECT_EQ(run_experiment(cfg, out), 2);
}

}  // namespace
}  // namespace nematic
