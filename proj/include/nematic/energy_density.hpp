#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>

#include "nematic/material.hpp"

namespace nematic {

/// Pointwise arguments of the energy density: value and spatial gradient of
/// each field, packed as u[3*f + (0,1,2)] = (value, d/dx, d/dy) for
/// f in {n1, n2, n3, phi}.
using PointValues = Eigen::Matrix<double, 12, 1>;
using PointGradient = Eigen::Matrix<double, 12, 1>;
using PointHessian = Eigen::Matrix<double, 12, 12>;

/// Free-energy density of the penalized coupled model with its first and
/// second derivatives in the twelve point values, derived term by term.  The
/// director stays a 3-vector while every differential operator is reduced
/// under d/dz == 0:
///   div n    = n1_x + n2_y
///   curl n   = (n3_y, -n3_x, n2_x - n1_y)
///   grad phi = (phi_x, phi_y, 0)
class EnergyDensity {
 public:
  static constexpr int kN1 = 0, kN1x = 1, kN1y = 2;
  static constexpr int kN2 = 3, kN2x = 4, kN2y = 5;
  static constexpr int kN3 = 6, kN3x = 7, kN3y = 8;
  static constexpr int kPhi = 9, kPhix = 10, kPhiy = 11;

  /// G density: elastic, electric and flexoelectric terms without the
  /// penalty.
  static double coupled_value(const PointValues& u, const MaterialParams& p) {
    const Derived q(u);
    return 0.5 * p.K1 * q.d * q.d + 0.5 * p.K3 * q.c.squaredNorm() -
           0.5 * (p.K3 - p.K2) * q.nc * q.nc -
           0.5 * p.eps0 * p.eps_perp * q.g.squaredNorm() -
           0.5 * p.eps0 * p.eps_a * q.ng * q.ng + p.es * q.d * q.ng +
           p.eb * q.n.cross(q.c).dot(q.g);
  }

  /// (1/2)(n.n - 1)^2; the penalty is zeta times this.
  static double penalty_unit(const PointValues& u) {
    const double nn1 = u[kN1] * u[kN1] + u[kN2] * u[kN2] + u[kN3] * u[kN3] - 1.0;
    return 0.5 * nn1 * nn1;
  }

  static double value(const PointValues& u, const MaterialParams& p) {
    return coupled_value(u, p) + p.zeta * penalty_unit(u);
  }

  static PointGradient gradient(const PointValues& u, const MaterialParams& p) {
    const Derived q(u);
    PointGradient grad = PointGradient::Zero();

    grad += (p.K1 * q.d) * kGradD;                                   // (1/2) K1 d^2
    for (int i = 0; i < 3; ++i) grad += (p.K3 * q.c[i]) * kGradC[i]; // (1/2) K3 |c|^2
    grad += (-(p.K3 - p.K2) * q.nc) * q.grad_nc;                     // -(1/2)(K3-K2)(n.c)^2
    for (int i = 0; i < 2; ++i)
      grad += (-p.eps0 * p.eps_perp * q.g[i]) * kGradG[i];           // -(1/2) e0 ep |g|^2
    grad += (-p.eps0 * p.eps_a * q.ng) * q.grad_ng;                  // -(1/2) e0 ea (n.g)^2
    grad += (p.es * q.ng) * kGradD + (p.es * q.d) * q.grad_ng;       // es d (n.g)
    grad += p.eb * q.grad_triple;                                    // eb (n x c).g
    grad += (p.zeta * q.nn1) * q.grad_nn;                            // (zeta/2)(n.n-1)^2

    return grad;
  }

  static PointHessian hessian(const PointValues& u, const MaterialParams& p) {
    const Derived q(u);
    PointHessian h = PointHessian::Zero();

    outer(h, p.K1, kGradD, kGradD);
    for (int i = 0; i < 3; ++i) outer(h, p.K3, kGradC[i], kGradC[i]);

    outer(h, -(p.K3 - p.K2), q.grad_nc, q.grad_nc);
    for (int i = 0; i < 3; ++i)
      outer_sym(h, -(p.K3 - p.K2) * q.nc, kGradN[i], kGradC[i]);

    for (int i = 0; i < 2; ++i) outer(h, -p.eps0 * p.eps_perp, kGradG[i], kGradG[i]);

    outer(h, -p.eps0 * p.eps_a, q.grad_ng, q.grad_ng);
    for (int i = 0; i < 2; ++i)
      outer_sym(h, -p.eps0 * p.eps_a * q.ng, kGradN[i], kGradG[i]);

    outer_sym(h, p.es, kGradD, q.grad_ng);
    for (int i = 0; i < 2; ++i) outer_sym(h, p.es * q.d, kGradN[i], kGradG[i]);

    // eb (n x c).g = eb * eps_ijk n_i c_j g_k; g_3 == 0 removes every k = 3
    // pairing.
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int k = 3 - i - j;  // the only index with eps_ijk != 0
        if (i == j || k < 0 || k > 2) continue;
        const double s = levi_civita(i, j, k);
        if (k < 2) {
          outer_sym(h, p.eb * s * q.g[k], kGradN[i], kGradC[j]);
          outer_sym(h, p.eb * s * q.c[j], kGradN[i], kGradG[k]);
          outer_sym(h, p.eb * s * q.n[i], kGradC[j], kGradG[k]);
        }
      }

    outer(h, p.zeta, q.grad_nn, q.grad_nn);
    for (int i = 0; i < 3; ++i) outer(h, 2.0 * p.zeta * q.nn1, kGradN[i], kGradN[i]);

    return h;
  }

 private:
  struct Derived {
    Eigen::Vector3d n, c, g;
    double d, nc, ng, nn1;
    PointGradient grad_nc, grad_ng, grad_nn, grad_triple;

    explicit Derived(const PointValues& u) {
      n = {u[kN1], u[kN2], u[kN3]};
      c = {u[kN3y], -u[kN3x], u[kN2x] - u[kN1y]};
      g = {u[kPhix], u[kPhiy], 0.0};
      d = u[kN1x] + u[kN2y];
      nc = n.dot(c);
      ng = n.dot(g);
      nn1 = n.squaredNorm() - 1.0;

      grad_nc.setZero();
      grad_ng.setZero();
      grad_nn.setZero();
      grad_triple.setZero();
      for (int i = 0; i < 3; ++i) {
        grad_nc += c[i] * kGradN[i] + n[i] * kGradC[i];
        grad_nn += 2.0 * n[i] * kGradN[i];
      }
      for (int i = 0; i < 2; ++i) grad_ng += g[i] * kGradN[i] + n[i] * kGradG[i];

      const Eigen::Vector3d cxg = c.cross(g);
      const Eigen::Vector3d gxn = g.cross(n);
      const Eigen::Vector3d nxc = n.cross(c);
      for (int i = 0; i < 3; ++i) {
        grad_triple += cxg[i] * kGradN[i] + gxn[i] * kGradC[i];
        if (i < 2) grad_triple += nxc[i] * kGradG[i];
      }
    }
  };

  static double levi_civita(int i, int j, int k) {
    if (i == j || j == k || i == k) return 0.0;
    return ((j - i + 3) % 3 == 1) ? 1.0 : -1.0;
  }

  static void outer(PointHessian& h, double s, const PointGradient& a,
                    const PointGradient& b) {
    h.noalias() += s * a * b.transpose();
  }
  /// a b^T + b a^T, for cross terms of products of distinct factors.
  static void outer_sym(PointHessian& h, double s, const PointGradient& a,
                        const PointGradient& b) {
    h.noalias() += s * a * b.transpose();
    h.noalias() += s * b * a.transpose();
  }

  static PointGradient unit(int i) {
    PointGradient e = PointGradient::Zero();
    e[i] = 1.0;
    return e;
  }

  static inline const std::array<PointGradient, 3> kGradN = {unit(kN1), unit(kN2),
                                                             unit(kN3)};
  static inline const std::array<PointGradient, 3> kGradC = {
      unit(kN3y), -unit(kN3x), PointGradient(unit(kN2x) - unit(kN1y))};
  static inline const std::array<PointGradient, 2> kGradG = {unit(kPhix), unit(kPhiy)};
  static inline const PointGradient kGradD = unit(kN1x) + unit(kN2y);
};

}  // namespace nematic
