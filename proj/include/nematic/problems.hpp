#pragma once

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <stdexcept>

#include "nematic/boundary_data.hpp"

namespace nematic {

/// g1 = (0,0,1) and g2 = 0 everywhere; the exact critical point is the
/// constant state.
inline BoundaryData trivial_problem() {
  BoundaryData b;
  b.name = "trivial";
  b.director = [](const Eigen::Vector2d&) { return Eigen::Vector3d(0.0, 0.0, 1.0); };
  b.potential = [](const Eigen::Vector2d&) { return 0.0; };
  return b;
}

/// The flexoelectric experiment: uniform director boundary and a smooth
/// square-like potential pulse along y = 1 rising to `amplitude` over roughly
/// the middle third of the edge.
inline BoundaryData flexo_pulse_problem(double steepness = 50.0, double amplitude = 1.5) {
  if (!(steepness > 0.0))
    throw std::invalid_argument("flexo_pulse_problem: steepness must be positive");
  BoundaryData b;
  b.name = "flexo-pulse";
  b.director = [](const Eigen::Vector2d&) { return Eigen::Vector3d(0.0, 0.0, 1.0); };
  b.potential = [steepness, amplitude](const Eigen::Vector2d& p) {
    if (p.y() < 1.0) return 0.0;
    return 0.5 * amplitude *
           (std::tanh(steepness * (p.x() - 1.0 / 3.0)) -
            std::tanh(steepness * (p.x() - 2.0 / 3.0)));
  };
  return b;
}

/// Verification fixture: with eps_a = es = eb = 0 and n = (0,0,1) the
/// potential block decouples into the Laplace problem, whose exact solution
/// is phi* = sin(pi x) sinh(pi y) / sinh(pi).
struct ManufacturedPotential {
  BoundaryData boundary;
  std::function<double(const Eigen::Vector2d&)> phi;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> grad_phi;
};

inline ManufacturedPotential manufactured_potential_problem() {
  ManufacturedPotential m;
  m.phi = [](const Eigen::Vector2d& p) {
    return std::sin(M_PI * p.x()) * std::sinh(M_PI * p.y()) / std::sinh(M_PI);
  };
  m.grad_phi = [](const Eigen::Vector2d& p) {
    const double s = M_PI / std::sinh(M_PI);
    return Eigen::Vector2d(
        s * std::cos(M_PI * p.x()) * std::sinh(M_PI * p.y()),
        s * std::sin(M_PI * p.x()) * std::cosh(M_PI * p.y()));
  };
  m.boundary.name = "manufactured-potential";
  m.boundary.director = [](const Eigen::Vector2d&) {
    return Eigen::Vector3d(0.0, 0.0, 1.0);
  };
  m.boundary.potential = m.phi;
  return m;
}

}  // namespace nematic
