#pragma once

#include <array>

namespace nematic {

/// The nine tensor-product biquadratic shape functions on the reference
/// square [0,1]^2.  Local node (a, b), a,b in {0,1,2}, sits at (a/2, b/2) and
/// is numbered 3*b + a (x-fastest).
struct ReferenceQ2 {
  static constexpr int kNodesPerCell = 9;

  /// 1D quadratic Lagrange basis on [0,1] with nodes {0, 1/2, 1}.
  static std::array<double, 3> line_values(double t) {
    return {(2.0 * t - 1.0) * (t - 1.0), 4.0 * t * (1.0 - t), t * (2.0 * t - 1.0)};
  }
  static std::array<double, 3> line_derivatives(double t) {
    return {4.0 * t - 3.0, 4.0 - 8.0 * t, 4.0 * t - 1.0};
  }
  static std::array<double, 3> line_second_derivatives(double) {
    return {4.0, -8.0, 4.0};
  }

  static std::array<double, 2> node(int i) {
    return {0.5 * (i % 3), 0.5 * (i / 3)};
  }

  static std::array<double, 9> values(double xi, double eta) {
    const auto lx = line_values(xi);
    const auto ly = line_values(eta);
    std::array<double, 9> v;
    for (int b = 0; b < 3; ++b)
      for (int a = 0; a < 3; ++a)
        v[static_cast<std::size_t>(3 * b + a)] =
            lx[static_cast<std::size_t>(a)] * ly[static_cast<std::size_t>(b)];
    return v;
  }

  /// Gradients in reference coordinates, laid out as {d/dxi, d/deta} per node.
  static std::array<std::array<double, 2>, 9> gradients(double xi, double eta) {
    const auto lx = line_values(xi);
    const auto ly = line_values(eta);
    const auto dx = line_derivatives(xi);
    const auto dy = line_derivatives(eta);
    std::array<std::array<double, 2>, 9> g;
    for (int b = 0; b < 3; ++b)
      for (int a = 0; a < 3; ++a) {
        const std::size_t i = static_cast<std::size_t>(3 * b + a);
        g[i][0] = dx[static_cast<std::size_t>(a)] * ly[static_cast<std::size_t>(b)];
        g[i][1] = lx[static_cast<std::size_t>(a)] * dy[static_cast<std::size_t>(b)];
      }
    return g;
  }

  /// Reference second derivatives per node: {d2/dxi2, d2/dxideta, d2/deta2}.
  static std::array<std::array<double, 3>, 9> second_derivatives(double xi, double eta) {
    const auto lx = line_values(xi);
    const auto ly = line_values(eta);
    const auto dx = line_derivatives(xi);
    const auto dy = line_derivatives(eta);
    const auto d2x = line_second_derivatives(xi);
    const auto d2y = line_second_derivatives(eta);
    std::array<std::array<double, 3>, 9> h;
    for (int b = 0; b < 3; ++b)
      for (int a = 0; a < 3; ++a) {
        const std::size_t i = static_cast<std::size_t>(3 * b + a);
        const std::size_t sa = static_cast<std::size_t>(a);
        const std::size_t sb = static_cast<std::size_t>(b);
        h[i][0] = d2x[sa] * ly[sb];
        h[i][1] = dx[sa] * dy[sb];
        h[i][2] = lx[sa] * d2y[sb];
      }
    return h;
  }
};

}  // namespace nematic
