#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SparseCore>

#include "nematic/assembly.hpp"
#include "nematic/energy_density.hpp"
#include "nematic/material.hpp"
#include "nematic/quadrature.hpp"
#include "nematic/state.hpp"

namespace nematic {

/// The 2D-domain / 3D-director differential operators at one sample point.
struct DirectorCalculus {
  double div_n;
  Eigen::Vector3d curl_n;
  Eigen::Vector3d grad_phi;
  Eigen::Matrix3d Z;

  DirectorCalculus(const FieldSample& s, const MaterialParams& p) {
    div_n = s.grad(0, 0) + s.grad(1, 1);
    curl_n = {s.grad(2, 1), -s.grad(2, 0), s.grad(1, 0) - s.grad(0, 1)};
    grad_phi = {s.grad(3, 0), s.grad(3, 1), 0.0};
    const Eigen::Vector3d n = s.director();
    Z = Eigen::Matrix3d::Identity() - (1.0 - p.kappa()) * n * n.transpose();
  }
};

/// D = -e0*ep grad(phi) - e0*ea (n.grad phi) n + es n div(n) + eb n x curl(n).
inline Eigen::Vector3d electric_displacement(const FieldSample& s,
                                             const MaterialParams& p) {
  const DirectorCalculus dc(s, p);
  const Eigen::Vector3d n = s.director();
  return -p.eps0 * p.eps_perp * dc.grad_phi -
         p.eps0 * p.eps_a * n.dot(dc.grad_phi) * n + p.es * dc.div_n * n +
         p.eb * n.cross(dc.curl_n);
}

namespace detail {

/// Point values (value, d/dx, d/dy per field) at a tabulated quadrature point
/// from the local 9x4 coefficient block.  Summed as offsets against one nodal
/// value so constant fields reproduce exactly.
inline PointValues point_values(const Q2Tables::Point& pt,
                                const Eigen::Matrix<double, 9, 4>& coeff,
                                double inv_h) {
  PointValues u = PointValues::Zero();
  for (int f = 0; f < kNumFields; ++f) {
    const double ref = coeff(0, f);
    double v = 0.0, gx = 0.0, gy = 0.0;
    for (int a = 0; a < 9; ++a) {
      const double c = coeff(a, f) - ref;
      v += c * pt.val[a];
      gx += c * pt.gx[a];
      gy += c * pt.gy[a];
    }
    u[3 * f + 0] = ref + v;
    u[3 * f + 1] = gx * inv_h;
    u[3 * f + 2] = gy * inv_h;
  }
  return u;
}

}  // namespace detail

struct EnergyBreakdown {
  double coupled = 0.0;  // G: elastic + electric + flexoelectric
  double penalty = 0.0;  // (zeta/2) || n.n - 1 ||^2

  double total() const { return coupled + penalty; }
};

/// Cellwise quadrature of the free energy; returns G and the penalty term
/// separately.
inline EnergyBreakdown free_energy(const State& state, const MaterialParams& params,
                                   const QuadratureRule& rule = QuadratureRule()) {
  const Q2Tables tab(rule);
  const QuadMesh& mesh = state.mesh();
  EnergyBreakdown e;
  double penalty_unit = 0.0;  // zeta applied once at the end
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const double h = mesh.side_length(mesh.cell(cell));
    const double area = h * h;
    const Eigen::Matrix<double, 9, 4> coeff = state.cell_coefficients(cell);
    for (const auto& pt : tab.points) {
      const PointValues u = detail::point_values(pt, coeff, 1.0 / h);
      e.coupled += pt.weight * area * EnergyDensity::coupled_value(u, params);
      penalty_unit += pt.weight * area * EnergyDensity::penalty_unit(u);
    }
  }
  e.penalty = params.zeta * penalty_unit;
  return e;
}

/// First variation of the penalized energy over the free DOFs (Dirichlet rows
/// removed, hanging constraints condensed).
inline Eigen::VectorXd assemble_residual(const State& state, const MaterialParams& params,
                                         const QuadratureRule& rule = QuadratureRule()) {
  const Q2Tables tab(rule);
  const QuadMesh& mesh = state.mesh();
  Assembler assembler(state.dofs());
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const double h = mesh.side_length(mesh.cell(cell));
    const double area = h * h;
    const double inv_h = 1.0 / h;
    const Eigen::Matrix<double, 9, 4> coeff = state.cell_coefficients(cell);
    Eigen::Matrix<double, kLocalDofs, 1> local = Eigen::Matrix<double, kLocalDofs, 1>::Zero();
    for (const auto& pt : tab.points) {
      const PointValues u = detail::point_values(pt, coeff, inv_h);
      const PointGradient m = EnergyDensity::gradient(u, params);
      const double scale = pt.weight * area;
      for (int a = 0; a < 9; ++a) {
        const double v = pt.val[a];
        const double gx = pt.gx[a] * inv_h;
        const double gy = pt.gy[a] * inv_h;
        for (int f = 0; f < kNumFields; ++f)
          local[a * kNumFields + f] +=
              scale * (m[3 * f] * v + m[3 * f + 1] * gx + m[3 * f + 2] * gy);
      }
    }
    assembler.add_element_vector(cell, local);
  }
  return assembler.vector();
}

/// Second variation (Gateaux derivative of the residual) over the free DOFs.
/// Exactly symmetric: the lower triangle is computed and mirrored.
inline Eigen::SparseMatrix<double> assemble_hessian(
    const State& state, const MaterialParams& params,
    const QuadratureRule& rule = QuadratureRule()) {
  const Q2Tables tab(rule);
  const QuadMesh& mesh = state.mesh();
  Assembler assembler(state.dofs());
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const double h = mesh.side_length(mesh.cell(cell));
    const double area = h * h;
    const double inv_h = 1.0 / h;
    const Eigen::Matrix<double, 9, 4> coeff = state.cell_coefficients(cell);
    Eigen::Matrix<double, kLocalDofs, kLocalDofs> local =
        Eigen::Matrix<double, kLocalDofs, kLocalDofs>::Zero();
    for (const auto& pt : tab.points) {
      const PointValues u = detail::point_values(pt, coeff, inv_h);
      const PointHessian M = EnergyDensity::hessian(u, params);
      const double scale = pt.weight * area;
      double comp[9][3];
      for (int a = 0; a < 9; ++a) {
        comp[a][0] = pt.val[a];
        comp[a][1] = pt.gx[a] * inv_h;
        comp[a][2] = pt.gy[a] * inv_h;
      }
      for (int i = 0; i < kLocalDofs; ++i) {
        const int ai = i / kNumFields;
        const int fi = i % kNumFields;
        for (int j = 0; j <= i; ++j) {
          const int aj = j / kNumFields;
          const int fj = j % kNumFields;
          double acc = 0.0;
          for (int r = 0; r < 3; ++r)
            for (int s = 0; s < 3; ++s)
              acc += comp[ai][r] * M(3 * fi + r, 3 * fj + s) * comp[aj][s];
          local(i, j) += scale * acc;
        }
      }
    }
    for (int i = 0; i < kLocalDofs; ++i)
      for (int j = i + 1; j < kLocalDofs; ++j) local(i, j) = local(j, i);
    assembler.add_element_matrix(cell, local);
  }
  return assembler.matrix();
}

}  // namespace nematic
