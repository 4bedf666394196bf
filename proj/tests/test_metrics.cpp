#include "nematic/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "nematic/solver.hpp"
#include "test_support.hpp"

namespace nematic {
namespace {

using testing::make_dofs;
using testing::set_director;
using testing::set_field;

TEST(UnitLengthDeviation, TrivialAndStretchedDirector) {
  auto dofs = make_dofs(4, trivial_problem());
  State state(dofs);
  state.fill_director({0, 0, 1});
  EXPECT_NEAR(max_unit_length_deviation(state), 0.0, 1e-14);

  const double root2 = std::sqrt(2.0);
  set_director(state, [root2](const Eigen::Vector2d&) {
    return Eigen::Vector3d(0, 0, root2);
  });
  EXPECT_NEAR(max_unit_length_deviation(state), 1.0, 1e-12);
}

TEST(GaussConformance, TrivialAndQuadraticPotential) {
  {
    auto dofs = make_dofs(4, trivial_problem());
    State state(dofs);
    state.fill_director({0, 0, 1});
    EXPECT_NEAR(gauss_conformance(state, MaterialParams{}), 0.0, 1e-12);
  }
  {
    auto dofs = make_dofs(1, trivial_problem());
    State state(dofs);
    state.fill_director({0, 0, 1});
    set_field(state, 3, [](const Eigen::Vector2d& p) { return p.x() * p.x(); });
    MaterialParams params;
    const double expected = std::pow(2.0 * params.eps0 * params.eps_perp, 2);  // 399.73
    EXPECT_NEAR(gauss_conformance(state, params), expected, expected * 1e-12);
  }
}

TEST(GaussConformance, MatchesEstimatorQComponent) {
  QuadMesh mesh(4);
  const QuadMesh refined = mesh.refined(MarkSet{{3, 7}});
  auto dofs = make_dofs(refined, trivial_problem());
  const State state = testing::random_admissible_state(dofs, 2718, 0.15);
  const MaterialParams params;

  const double gauss = gauss_conformance(state, params);
  const EstimatorResult est = estimate(state, params);
  double sum = 0.0;
  for (int cell = 0; cell < refined.num_cells(); ++cell) {
    const double h = refined.side_length(refined.cell(cell));
    sum += est.cells[static_cast<std::size_t>(cell)].vol_q2 / (h * h);
  }
  EXPECT_NEAR(gauss, sum, gauss * 1e-11);
}

TEST(WorkUnits, DefinitionExamples) {
  RunReport report;
  LevelStats ls;
  ls.linearization_steps = 1;
  ls.dofs = 66564;
  report.levels.push_back(ls);
  EXPECT_DOUBLE_EQ(work_units(report, 66564.0), 1.0);

  RunReport two;
  LevelStats a, b;
  a.linearization_steps = 2;
  a.dofs = 1000;
  b.linearization_steps = 3;
  b.dofs = 4000;
  two.levels = {a, b};
  EXPECT_DOUBLE_EQ(work_units(two, 4000.0), 2.0 * 0.25 + 3.0 * 1.0);

  EXPECT_THROW(work_units(two, 0.0), std::invalid_argument);
}

TEST(WorkUnits, MonotoneInStepsAndDofs) {
  RunReport base;
  LevelStats a, b;
  a.linearization_steps = 2;
  a.dofs = 1000;
  b.linearization_steps = 3;
  b.dofs = 4000;
  base.levels = {a, b};
  const double w0 = work_units(base, 4000.0);

  RunReport more_steps = base;
  more_steps.levels[0].linearization_steps += 1;
  EXPECT_GT(work_units(more_steps, 4000.0), w0);

  RunReport more_dofs = base;
  more_dofs.levels[1].dofs += 500;
  EXPECT_GT(work_units(more_dofs, 4000.0), w0);
}

TEST(WorkUnits, UniformHierarchyReference) {
  // 16x16 root refined twice: 64x64 mesh, (129^2)*4 scalar DOFs.
  EXPECT_DOUBLE_EQ(uniform_hierarchy_reference_dofs(16, 3), 66564.0);
  EXPECT_DOUBLE_EQ(uniform_hierarchy_reference_dofs(16, 1), 4356.0);
}

TEST(PenaltyBehavior, DeviationNonIncreasingInZeta) {
  // Deviation of the deformed solution branch at increasing penalty weights;
  // tighter penalties must not loosen unit-length conformance (5% slack for
  // solver tolerance).  The branch is traced by warm starts: the coupled
  // system has several critical-point families at desk scale, and only
  // within one family is the zeta comparison well posed.
  const BoundaryData problem = flexo_pulse_problem();
  SolverConfig config;
  config.root_cells_per_side = 16;
  config.max_newton_iterations = 400;
  auto dofs = testing::make_dofs(16, problem);

  MaterialParams params;
  params.zeta = 1.0e5;
  State state = initial_guess(dofs, problem, params, config);
  escape_unstable_initial_state(state, params);
  std::vector<double> deviations;
  State branch = newton_solve(state, params, config, 0.2).state;
  deviations.push_back(max_unit_length_deviation(branch));
  for (double zeta : {1.0e4, 1.0e3}) {
    MaterialParams weaker;
    weaker.zeta = zeta;
    branch = newton_solve(branch, weaker, config, 0.2).state;
    deviations.push_back(max_unit_length_deviation(branch));
  }
  // deviations are ordered zeta = {1e5, 1e4, 1e3}; larger zeta, smaller
  // deviation.
  EXPECT_LE(deviations[0], deviations[1] * 1.05);
  EXPECT_LE(deviations[1], deviations[2] * 1.05);
  EXPECT_GT(deviations[2], 0.0);
}

}  // namespace
}  // namespace nematic
