#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>

namespace nematic {

/// Dirichlet boundary data: director g1 and electric potential g2 on the
/// boundary of the unit square.
struct BoundaryData {
  std::function<Eigen::Vector3d(const Eigen::Vector2d&)> director;
  std::function<double(const Eigen::Vector2d&)> potential;
  std::string name;
};

}  // namespace nematic
