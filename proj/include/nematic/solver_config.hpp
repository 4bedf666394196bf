#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nematic/mesh.hpp"

namespace nematic {

enum class RefinementMode { Uniform, Amr };

inline std::string to_string(RefinementMode m) {
  return m == RefinementMode::Uniform ? "uniform" : "amr";
}

enum class LinearSolverKind { LU, BiCGStab };

/// Knobs of the damped-Newton / nested-iteration driver.
struct SolverConfig {
  double tolerance = 1.0e-4;          // l2 norm of the constrained residual
  int max_newton_iterations = 200;    // per level
  double damping_start = 0.2;
  double damping_increment = 0.2;
  double damping_cap = 1.0;
  RefinementMode mode = RefinementMode::Amr;
  int levels = 6;                     // meshes solved (root counts as one)
  double dorfler_nu = 0.9;
  LinearSolverKind linear_solver = LinearSolverKind::LU;
  int root_cells_per_side = 16;
  int quadrature_points = 4;          // per direction; edge rule matches

  double damping_at_level(int level) const {
    const double a = damping_start + level * damping_increment;
    return a < damping_cap ? a : damping_cap;
  }

  void validate() const {
    if (tolerance <= 0.0) throw std::invalid_argument("SolverConfig: tolerance must be positive");
    if (!(damping_start > 0.0) || damping_start > damping_cap || damping_cap > 1.0)
      throw std::invalid_argument("SolverConfig: need 0 < damping start <= cap <= 1");
    if (levels < 1) throw std::invalid_argument("SolverConfig: need at least one level");
    if (max_newton_iterations < 1)
      throw std::invalid_argument("SolverConfig: need at least one Newton iteration");
    if (!(dorfler_nu > 0.0) || dorfler_nu > 1.0)
      throw std::invalid_argument("SolverConfig: Dorfler nu must lie in (0, 1]");
    if (root_cells_per_side < 1)
      throw std::invalid_argument("SolverConfig: root mesh must have at least one cell");
  }
};

/// Per-level solver statistics.
struct LevelStats {
  int level = 0;
  int cells = 0;
  long dofs = 0;            // free + constrained
  long free_dofs = 0;
  int newton_iterations = 0;
  int linearization_steps = 0;  // assemble+solve count, for WU accounting
  double final_residual = 0.0;
  double alpha = 0.0;
  double wall_seconds = 0.0;
  std::vector<double> residual_history;  // includes the initial residual
  double global_estimate = -1.0;         // -1 when not computed
  MarkSet marks;                         // cells marked on this level (amr)
};

}  // namespace nematic
