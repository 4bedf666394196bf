#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <utility>

#include "nematic/boundary_data.hpp"
#include "nematic/estimator.hpp"
#include "nematic/metrics.hpp"
#include "nematic/physics.hpp"
#include "nematic/solver_config.hpp"
#include "nematic/state.hpp"

namespace nematic {

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonconvergenceError : SolveError {
  NonconvergenceError(const std::string& what, int level_, double residual_)
      : SolveError(what), level(level_), last_residual(residual_) {}
  int level;
  double last_residual;
};

struct FactorizationError : SolveError {
  using SolveError::SolveError;
};

namespace detail {

inline int log_level() {
  static const int level = [] {
    const char* env = std::getenv("NEMATIC_LOG");
    return env ? std::atoi(env) : 0;
  }();
  return level;
}

/// Direct or iterative solve of the symmetric indefinite Newton system.
/// Contract: backward error below 1e-10 or an exception.
class LinearSolver {
 public:
  explicit LinearSolver(LinearSolverKind kind) : kind_(kind) {}

  Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b) {
    if (kind_ == LinearSolverKind::LU) {
      if (!analyzed_) {
        lu_.analyzePattern(a);
        analyzed_ = true;
      }
      lu_.factorize(a);
      if (lu_.info() != Eigen::Success)
        throw FactorizationError("linear solve: sparse LU factorization failed");
      const Eigen::VectorXd x = lu_.solve(b);
      if (lu_.info() != Eigen::Success)
        throw FactorizationError("linear solve: sparse LU backsolve failed");
      return x;
    }
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
    it.setTolerance(1e-13);
    it.setMaxIterations(10 * a.rows());
    it.compute(a);
    const Eigen::VectorXd x = it.solve(b);
    if (it.info() != Eigen::Success)
      throw FactorizationError("linear solve: BiCGSTAB did not converge");
    return x;
  }

 private:
  LinearSolverKind kind_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

}  // namespace detail

struct NewtonResult {
  State state;
  LevelStats stats;
};

/// Damped Newton iteration on the discrete optimality system:
/// x <- x + alpha * delta with Hessian(x) delta = -residual(x), stopping on
/// ||residual||_l2 < tolerance.  An accepted step may not grow the residual
/// by more than 10x; such a step aborts the run.
inline NewtonResult newton_solve(State state, const MaterialParams& params,
                                 const SolverConfig& config, double alpha,
                                 int level = 0) {
  const auto t0 = std::chrono::steady_clock::now();
  const QuadratureRule rule(config.quadrature_points, config.quadrature_points);
  detail::LinearSolver linear(config.linear_solver);

  LevelStats stats;
  stats.level = level;
  stats.cells = state.mesh().num_cells();
  stats.dofs = state.dofs().num_dofs();
  stats.free_dofs = state.dofs().num_free_dofs();
  stats.alpha = alpha;

  Eigen::VectorXd r = assemble_residual(state, params, rule);
  double rnorm = r.norm();
  stats.residual_history.push_back(rnorm);
  if (detail::log_level() >= 1)
    std::cerr << "newton: level " << level << " iter 0 residual " << rnorm
              << " alpha " << alpha << '\n';

  while (rnorm >= config.tolerance) {
    if (stats.newton_iterations >= config.max_newton_iterations) {
      throw NonconvergenceError("newton_solve: iteration limit reached at level " +
                                    std::to_string(level) + ", residual " +
                                    std::to_string(rnorm),
                                level, rnorm);
    }
    const Eigen::SparseMatrix<double> h = assemble_hessian(state, params, rule);
    const Eigen::VectorXd delta = linear.solve(h, Eigen::VectorXd(-r));
    state.add_to_free(delta, alpha);
    ++stats.newton_iterations;
    ++stats.linearization_steps;

    r = assemble_residual(state, params, rule);
    const double next = r.norm();
    if (rnorm > 0.0 && next > 10.0 * rnorm)
      throw SolveError("newton_solve: residual grew more than 10x in one step (level " +
                       std::to_string(level) + ": " + std::to_string(rnorm) + " -> " +
                       std::to_string(next) + ")");
    rnorm = next;
    stats.residual_history.push_back(rnorm);
    if (detail::log_level() >= 1)
      std::cerr << "newton: level " << level << " iter " << stats.newton_iterations
                << " residual " << rnorm << " alpha " << alpha << '\n';
  }

  stats.final_residual = rnorm;
  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(state), std::move(stats)};
}

/// Initial state on a mesh: director (0,0,1) in the interior with boundary
/// interpolation of g1, and the potential from one linear solve of the
/// decoupled phi block (eps_a, es, eb frozen to zero).
inline State initial_guess(std::shared_ptr<const DofSystem> dofs,
                           const BoundaryData& problem, const MaterialParams& params,
                           const SolverConfig& config = SolverConfig()) {
  (void)problem;  // boundary values already interpolated into the DofSystem
  State state(std::move(dofs));
  state.fill_director({0.0, 0.0, 1.0});

  MaterialParams frozen = params;
  frozen.eps_a = 0.0;
  frozen.es = 0.0;
  frozen.eb = 0.0;

  const QuadratureRule rule(config.quadrature_points, config.quadrature_points);
  const Eigen::VectorXd r = assemble_residual(state, frozen, rule);
  const Eigen::SparseMatrix<double> h = assemble_hessian(state, frozen, rule);

  // Extract the phi sub-block of the free system.
  const DofSystem& d = state.dofs();
  std::vector<int> phi_of_free(static_cast<std::size_t>(d.num_free_dofs()), -1);
  std::vector<int> free_of_phi;
  for (int node = 0; node < d.num_nodes(); ++node) {
    const int fi = d.free_index(node, 3);
    if (fi >= 0) {
      phi_of_free[static_cast<std::size_t>(fi)] = static_cast<int>(free_of_phi.size());
      free_of_phi.push_back(fi);
    }
  }
  const int np = static_cast<int>(free_of_phi.size());
  if (np == 0) return state;

  std::vector<Eigen::Triplet<double>> trip;
  for (int col = 0; col < h.outerSize(); ++col) {
    const int pj = phi_of_free[static_cast<std::size_t>(col)];
    if (pj < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(h, col); it; ++it) {
      const int pi = phi_of_free[static_cast<std::size_t>(it.row())];
      if (pi >= 0) trip.emplace_back(pi, pj, it.value());
    }
  }
  Eigen::SparseMatrix<double> hpp(np, np);
  hpp.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd rp(np);
  for (int i = 0; i < np; ++i) rp[i] = r[free_of_phi[static_cast<std::size_t>(i)]];

  detail::LinearSolver linear(config.linear_solver);
  const Eigen::VectorXd dp = linear.solve(hpp, Eigen::VectorXd(-rp));

  Eigen::VectorXd full = Eigen::VectorXd::Zero(d.num_free_dofs());
  for (int i = 0; i < np; ++i) full[free_of_phi[static_cast<std::size_t>(i)]] = dp[i];
  state.add_to_free(full);
  return state;
}

/// Nodal renormalization of the director at interior nodes.  Prolongation
/// can push |n| off unit length where the fine mesh resolves new structure;
/// projecting back keeps the penalty Hessian away from its degenerate
/// directions.  Nodes already at unit length are left bitwise unchanged.
inline void renormalize_director(State& state) {
  const DofSystem& dofs = state.dofs();
  for (int node = 0; node < dofs.num_nodes(); ++node) {
    if (dofs.node_kind(node) != NodeKind::Interior) continue;
    Eigen::Vector3d n(state.coefficient(node, 0), state.coefficient(node, 1),
                      state.coefficient(node, 2));
    const double len = n.norm();
    if (len < 0.5 || len == 1.0) continue;
    n /= len;
    for (int f = 0; f < 3; ++f) state.set_coefficient(node, f, n[f]);
  }
  state.apply_hanging();
}

/// Deterministic symmetry breaking for a level's initial state.  The trivial
/// director with a matching potential solves the optimality system exactly,
/// but for strong electric or flexoelectric coupling that state is an
/// unstable saddle of the penalized energy, and a damped Newton correction
/// cannot leave it; prolonged states lack the deformation of newly resolved
/// field structure for the same reason.  Probe tilts of the director along
/// the local field direction and keep the lowest-energy one; when no tilt
/// lowers the energy the state is left untouched.  Returns true when the
/// state moved.
inline bool escape_unstable_initial_state(State& state, const MaterialParams& params,
                                          const QuadratureRule& rule = QuadratureRule()) {
  const DofSystem& dofs = state.dofs();
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(dofs.num_free_dofs());
  double max_component = 0.0;
  for (int node = 0; node < dofs.num_nodes(); ++node) {
    if (dofs.node_kind(node) != NodeKind::Interior) continue;
    const FieldSample s = state.evaluate_at(dofs.node_position(node));
    dir[dofs.free_index(node, 0)] = s.grad(3, 0);
    dir[dofs.free_index(node, 1)] = s.grad(3, 1);
    max_component = std::max(
        {max_component, std::abs(s.grad(3, 0)), std::abs(s.grad(3, 1))});
  }
  if (max_component < 1e-12) return false;
  dir /= max_component;

  // Each probe is a rotation: tilt then renormalize, so the candidates stay
  // on the unit-length manifold regardless of the penalty weight.
  const auto tilted = [&](double gamma) {
    State probe = state;
    probe.add_to_free(dir, gamma);
    renormalize_director(probe);
    return probe;
  };

  double best_gamma = 0.0;
  double best_energy = free_energy(state, params, rule).total();
  for (double mag = 0.01; mag < 2.6; mag *= 2.0)
    for (double gamma : {mag, -mag}) {
      const double e = free_energy(tilted(gamma), params, rule).total();
      if (e < best_energy) {
        best_energy = e;
        best_gamma = gamma;
      }
    }
  if (best_gamma == 0.0) return false;
  state = tilted(best_gamma);
  return true;
}

/// Observer invoked after each level's solve, before refinement.
using LevelObserver =
    std::function<void(int level, const State&, const LevelStats&, const EstimatorResult&)>;

/// Nested iteration over a uniform or adaptively refined mesh hierarchy.
/// Each level solves with the scheduled damping, estimates, and (amr mode)
/// refines the Dorfler-marked cells; the solution is prolonged as the next
/// initial guess.
inline std::pair<State, RunReport> nested_iteration(const SolverConfig& config,
                                                    const MaterialParams& params,
                                                    const BoundaryData& problem,
                                                    const LevelObserver& observer = {}) {
  config.validate();
  params.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const QuadratureRule rule(config.quadrature_points, config.quadrature_points);

  RunReport report;
  report.mode = config.mode;

  auto mesh = std::make_shared<const QuadMesh>(config.root_cells_per_side);
  auto dofs = std::make_shared<const DofSystem>(mesh, problem);
  State state = initial_guess(dofs, problem, params, config);

  for (int level = 0; level < config.levels; ++level) {
    if (escape_unstable_initial_state(state, params, rule) && detail::log_level() >= 1)
      std::cerr << "nested: level " << level << " tilted off an unstable initial state\n";

    NewtonResult res = newton_solve(std::move(state), params, config,
                                    config.damping_at_level(level), level);
    state = std::move(res.state);
    LevelStats stats = std::move(res.stats);
    if (level == 0) stats.linearization_steps += 1;  // initial_guess potential solve

    const EstimatorResult est = estimate(state, params, rule);
    stats.global_estimate = est.global_estimate;

    const bool last = (level + 1 == config.levels);
    std::shared_ptr<const QuadMesh> next_mesh;
    if (!last) {
      if (config.mode == RefinementMode::Amr && est.global_estimate > 0.0) {
        stats.marks = dorfler_mark(est.marking_estimates(), config.dorfler_nu);
        next_mesh = std::make_shared<const QuadMesh>(mesh->refined(stats.marks));
      } else {
        // Uniform mode, or a zero estimate with nothing to mark.
        next_mesh = std::make_shared<const QuadMesh>(mesh->uniform_refined());
      }
    }

    if (observer) observer(level, state, stats, est);
    report.levels.push_back(std::move(stats));

    if (!last) {
      mesh = next_mesh;
      dofs = std::make_shared<const DofSystem>(mesh, problem);
      state = prolong(state, dofs);
      renormalize_director(state);
    }
  }

  const EnergyBreakdown e = free_energy(state, params, rule);
  report.max_deviation = max_unit_length_deviation(state, rule);
  report.gauss = gauss_conformance(state, params, rule);
  report.free_energy_coupled = e.coupled;
  report.penalty_energy = e.penalty;
  report.final_dofs = state.dofs().num_dofs();
  report.wu_reference_dofs =
      uniform_hierarchy_reference_dofs(config.root_cells_per_side, config.levels);
  report.total_work_units = work_units(report, report.wu_reference_dofs);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(state), std::move(report)};
}

}  // namespace nematic
