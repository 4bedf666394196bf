#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "nematic/estimator.hpp"
#include "nematic/physics.hpp"
#include "nematic/quadrature.hpp"
#include "nematic/solver_config.hpp"
#include "nematic/state.hpp"

namespace nematic {

/// max over the volume quadrature nodes of |n.n - 1|.
inline double max_unit_length_deviation(const State& state,
                                        const QuadratureRule& rule = QuadratureRule()) {
  const QuadMesh& mesh = state.mesh();
  std::vector<Eigen::Vector2d> ref;
  for (int q = 0; q < rule.num_volume_points(); ++q)
    ref.emplace_back(rule.xi(q), rule.eta(q));
  double dev = 0.0;
  for (int cell = 0; cell < mesh.num_cells(); ++cell)
    for (const FieldSample& s : state.evaluate(cell, ref))
      dev = std::max(dev, std::abs(s.director().squaredNorm() - 1.0));
  return dev;
}

/// sum_T int_T (div D)^2, evaluated through the identity div D == -q.
inline double gauss_conformance(const State& state, const MaterialParams& params,
                                const QuadratureRule& rule = QuadratureRule()) {
  const QuadMesh& mesh = state.mesh();
  std::vector<Eigen::Vector2d> ref;
  for (int q = 0; q < rule.num_volume_points(); ++q)
    ref.emplace_back(rule.xi(q), rule.eta(q));
  double total = 0.0;
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const double h = mesh.side_length(mesh.cell(cell));
    const auto samples = state.evaluate(cell, ref);
    for (int q = 0; q < rule.num_volume_points(); ++q) {
      const double qv = volume_residual_q(samples[static_cast<std::size_t>(q)], params);
      total += rule.weight(q) * h * h * qv * qv;
    }
  }
  return total;
}

/// Solver statistics and solution-quality metrics of a full nested-iteration
/// run.
struct RunReport {
  RefinementMode mode = RefinementMode::Uniform;
  std::vector<LevelStats> levels;
  double max_deviation = 0.0;
  double gauss = 0.0;
  double free_energy_coupled = 0.0;  // G, without the penalty term
  double penalty_energy = 0.0;
  long final_dofs = 0;
  double wu_reference_dofs = 0.0;  // finest uniform mesh of the hierarchy
  double total_work_units = 0.0;
  double wall_seconds = 0.0;
};

/// WU = sum over levels of (linearization steps) * (level DOFs) / reference.
inline double work_units(const RunReport& report, double reference_dofs) {
  if (!(reference_dofs > 0.0))
    throw std::invalid_argument("work_units: reference DOF count must be positive");
  double wu = 0.0;
  for (const LevelStats& ls : report.levels)
    wu += double(ls.linearization_steps) * double(ls.dofs) / reference_dofs;
  return wu;
}

/// DOF count of the uniform mesh reached from `root` cells per side after
/// `levels - 1` uniform refinements: ((2N+1)^2 per node) * 4 fields.
inline double uniform_hierarchy_reference_dofs(int root_cells_per_side, int levels) {
  const long n = static_cast<long>(root_cells_per_side) << (levels - 1);
  return double((2 * n + 1) * (2 * n + 1)) * kNumFields;
}

}  // namespace nematic
