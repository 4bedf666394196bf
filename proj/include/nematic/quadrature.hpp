#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace nematic {

/// Gauss-Legendre nodes and weights on [0, 1]; exact for polynomials of
/// degree 2n-1.
struct GaussRule1d {
  std::vector<double> points;
  std::vector<double> weights;

  explicit GaussRule1d(int n) {
    if (n < 1) throw std::invalid_argument("GaussRule1d: need at least one point");
    points.resize(static_cast<std::size_t>(n));
    weights.resize(static_cast<std::size_t>(n));
    // Roots of the Legendre polynomial P_n on [-1, 1] by Newton iteration,
    // then mapped to [0, 1].
    for (int i = 0; i < n; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      const std::size_t j = static_cast<std::size_t>(n - 1 - i);  // ascending in x
      points[j] = 0.5 * (1.0 + x);
      weights[j] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  int size() const { return static_cast<int>(points.size()); }
};

/// Tensor-product volume rule on the reference square [0,1]^2 plus the edge
/// rule on [0,1].  Weights sum to the reference measures.
class QuadratureRule {
 public:
  explicit QuadratureRule(int points_per_direction = 4, int edge_points = 4)
      : line_(points_per_direction), edge_(edge_points) {
    for (int j = 0; j < line_.size(); ++j)
      for (int i = 0; i < line_.size(); ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        const std::size_t sj = static_cast<std::size_t>(j);
        xi_.push_back(line_.points[si]);
        eta_.push_back(line_.points[sj]);
        w_.push_back(line_.weights[si] * line_.weights[sj]);
      }
  }

  int num_volume_points() const { return static_cast<int>(w_.size()); }
  double xi(int q) const { return xi_[static_cast<std::size_t>(q)]; }
  double eta(int q) const { return eta_[static_cast<std::size_t>(q)]; }
  double weight(int q) const { return w_[static_cast<std::size_t>(q)]; }

  const GaussRule1d& edge_rule() const { return edge_; }

 private:
  GaussRule1d line_;
  GaussRule1d edge_;
  std::vector<double> xi_, eta_, w_;
};

}  // namespace nematic
