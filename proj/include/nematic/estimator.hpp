#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nematic/material.hpp"
#include "nematic/mesh.hpp"
#include "nematic/physics.hpp"
#include "nematic/quadrature.hpp"
#include "nematic/state.hpp"

namespace nematic {

/// Strong-form volume residual p of the director block, with every 3D
/// operator reduced under d/dz == 0 and product rules expanded through the
/// sample's first and second derivatives.
inline Eigen::Vector3d volume_residual_p(const FieldSample& s, const MaterialParams& mp) {
  const Eigen::Vector3d n = s.director();
  // First derivatives.
  const Eigen::Vector3d nx(s.grad(0, 0), s.grad(1, 0), s.grad(2, 0));
  const Eigen::Vector3d ny(s.grad(0, 1), s.grad(1, 1), s.grad(2, 1));
  const double phix = s.grad(3, 0), phiy = s.grad(3, 1);
  // Second derivatives.
  const Eigen::Vector3d nxx(s.hess[0](0, 0), s.hess[1](0, 0), s.hess[2](0, 0));
  const Eigen::Vector3d nxy(s.hess[0](0, 1), s.hess[1](0, 1), s.hess[2](0, 1));
  const Eigen::Vector3d nyy(s.hess[0](1, 1), s.hess[1](1, 1), s.hess[2](1, 1));
  const double phixx = s.hess[3](0, 0), phixy = s.hess[3](0, 1), phiyy = s.hess[3](1, 1);

  const double d = nx[0] + ny[1];
  const Eigen::Vector3d c(ny[2], -nx[2], nx[1] - ny[0]);
  const Eigen::Vector3d g(phix, phiy, 0.0);

  const Eigen::Vector3d grad_d(nxx[0] + nxy[1], nxy[0] + nyy[1], 0.0);
  const Eigen::Vector3d cx(nxy[2], -nxx[2], nxx[1] - nxy[0]);
  const Eigen::Vector3d cy(nyy[2], -nxy[2], nxy[1] - nyy[0]);

  // curl(Z c) with Z = I - (1-kappa) n (x) n.
  const double om = 1.0 - mp.kappa();
  const double nc = n.dot(c);
  const double nc_x = nx.dot(c) + n.dot(cx);
  const double nc_y = ny.dot(c) + n.dot(cy);
  const Eigen::Vector3d mx = cx - om * (nc_x * n + nc * nx);
  const Eigen::Vector3d my = cy - om * (nc_y * n + nc * ny);
  const Eigen::Vector3d curl_Zc(my[2], -mx[2], mx[1] - my[0]);

  // grad(n . grad phi).
  const double ngx = nx[0] * phix + nx[1] * phiy + n[0] * phixx + n[1] * phixy;
  const double ngy = ny[0] * phix + ny[1] * phiy + n[0] * phixy + n[1] * phiyy;
  const Eigen::Vector3d grad_ng(ngx, ngy, 0.0);

  // curl(grad phi x n); w = g x n.
  const double w3x = phixx * n[1] + phix * nx[1] - phixy * n[0] - phiy * nx[0];
  const double w3y = phixy * n[1] + phix * ny[1] - phiyy * n[0] - phiy * ny[0];
  const double w2x = -(phixx * n[2] + phix * nx[2]);
  const double w1y = phiyy * n[2] + phiy * ny[2];
  const Eigen::Vector3d curl_gxn(w3y, -w3x, w2x - w1y);

  const double ng = n[0] * phix + n[1] * phiy;
  const double nn1 = n.squaredNorm() - 1.0;

  return -mp.K1 * grad_d + mp.K3 * curl_Zc + (mp.K2 - mp.K3) * nc * c +
         2.0 * mp.zeta * nn1 * n - mp.eps0 * mp.eps_a * ng * g + mp.es * d * g -
         mp.es * grad_ng + mp.eb * c.cross(g) + mp.eb * curl_gxn;
}

/// Strong-form scalar residual q of the potential block; pointwise
/// q == -div(D).
inline double volume_residual_q(const FieldSample& s, const MaterialParams& mp) {
  const Eigen::Vector3d n = s.director();
  const Eigen::Vector3d nx(s.grad(0, 0), s.grad(1, 0), s.grad(2, 0));
  const Eigen::Vector3d ny(s.grad(0, 1), s.grad(1, 1), s.grad(2, 1));
  const double phix = s.grad(3, 0), phiy = s.grad(3, 1);
  const Eigen::Vector3d nxx(s.hess[0](0, 0), s.hess[1](0, 0), s.hess[2](0, 0));
  const Eigen::Vector3d nxy(s.hess[0](0, 1), s.hess[1](0, 1), s.hess[2](0, 1));
  const Eigen::Vector3d nyy(s.hess[0](1, 1), s.hess[1](1, 1), s.hess[2](1, 1));
  const double phixx = s.hess[3](0, 0), phixy = s.hess[3](0, 1), phiyy = s.hess[3](1, 1);

  const double d = nx[0] + ny[1];
  const Eigen::Vector3d c(ny[2], -nx[2], nx[1] - ny[0]);
  const Eigen::Vector3d cx(nxy[2], -nxx[2], nxx[1] - nxy[0]);
  const Eigen::Vector3d cy(nyy[2], -nxy[2], nxy[1] - nyy[0]);

  const double lap_phi = phixx + phiyy;

  const double ng = n[0] * phix + n[1] * phiy;
  const double ngx = nx[0] * phix + nx[1] * phiy + n[0] * phixx + n[1] * phixy;
  const double ngy = ny[0] * phix + ny[1] * phiy + n[0] * phixy + n[1] * phiyy;
  const double div_ngn = ngx * n[0] + ng * nx[0] + ngy * n[1] + ng * ny[1];

  const double dx = nxx[0] + nxy[1];
  const double dy = nxy[0] + nyy[1];
  const double div_dn = dx * n[0] + d * nx[0] + dy * n[1] + d * ny[1];

  const double du1x = nx[1] * c[2] + n[1] * cx[2] - nx[2] * c[1] - n[2] * cx[1];
  const double du2y = ny[2] * c[0] + n[2] * cy[0] - ny[0] * c[2] - n[0] * cy[2];
  const double div_nxc = du1x + du2y;

  return mp.eps0 * mp.eps_perp * lap_phi + mp.eps0 * mp.eps_a * div_ngn -
         mp.es * div_dn - mp.eb * div_nxc;
}

namespace detail {

/// One-sided edge kernels from first derivatives; eta is the edge normal
/// lifted to (eta1, eta2, 0).
inline void edge_kernels(const FieldSample& s, const MaterialParams& mp,
                         const Eigen::Vector3d& eta, Eigen::Vector3d& p_hat,
                         double& q_hat) {
  const Eigen::Vector3d n = s.director();
  const double d = s.grad(0, 0) + s.grad(1, 1);
  const Eigen::Vector3d c(s.grad(2, 1), -s.grad(2, 0), s.grad(1, 0) - s.grad(0, 1));
  const Eigen::Vector3d g(s.grad(3, 0), s.grad(3, 1), 0.0);
  const double ng = n.dot(g);
  const Eigen::Vector3d Zc = c - (1.0 - mp.kappa()) * n.dot(c) * n;

  p_hat = mp.K1 * d * eta + mp.K3 * Zc.cross(eta) + mp.es * ng * eta +
          mp.eb * (g.cross(n)).cross(eta);
  q_hat = -mp.eps0 * mp.eps_perp * g.dot(eta) - mp.eps0 * mp.eps_a * ng * n.dot(eta) +
          mp.es * d * n.dot(eta) + mp.eb * n.cross(c).dot(eta);
}

inline Eigen::Vector2d reference_point(const QuadMesh& mesh, int cell,
                                       const Eigen::Vector2d& x) {
  const CellIndex& ci = mesh.cell(cell);
  return (x - mesh.lower_left(ci)) / mesh.side_length(ci);
}

}  // namespace detail

/// Jumps of the edge kernels across one interior edge, evaluated at the edge
/// quadrature points.  The jump is (trace from cell_a) - (trace from cell_b)
/// along the stored normal.
struct EdgeJumps {
  std::vector<Eigen::Vector3d> p_hat;
  std::vector<double> q_hat;
};

inline EdgeJumps edge_jumps(const InteriorEdge& edge, const State& state,
                            const MaterialParams& params,
                            const GaussRule1d& rule = GaussRule1d(4)) {
  const QuadMesh& mesh = state.mesh();
  if (edge.cell_a < 0 || edge.cell_b < 0 || edge.cell_a == edge.cell_b)
    throw std::invalid_argument("edge_jumps: not an interior edge");

  std::vector<Eigen::Vector2d> ref_a, ref_b;
  for (double t : rule.points) {
    const Eigen::Vector2d x = edge.p0 + t * (edge.p1 - edge.p0);
    ref_a.push_back(detail::reference_point(mesh, edge.cell_a, x));
    ref_b.push_back(detail::reference_point(mesh, edge.cell_b, x));
  }
  const auto sa = state.evaluate(edge.cell_a, ref_a);
  const auto sb = state.evaluate(edge.cell_b, ref_b);

  const Eigen::Vector3d eta(edge.normal.x(), edge.normal.y(), 0.0);
  EdgeJumps jumps;
  jumps.p_hat.resize(sa.size());
  jumps.q_hat.resize(sa.size());
  for (std::size_t q = 0; q < sa.size(); ++q) {
    Eigen::Vector3d pa, pb;
    double qa, qb;
    detail::edge_kernels(sa[q], params, eta, pa, qa);
    detail::edge_kernels(sb[q], params, eta, pb, qb);
    jumps.p_hat[q] = pa - pb;
    jumps.q_hat[q] = qa - qb;
  }
  return jumps;
}

/// Local estimator values for every active cell.  The four squared components
/// split each edge term half/half between its two cells, so that
/// global^2 == sum of theta^2.  theta_mark carries the full edge attribution
/// used for marking.
struct CellEstimate {
  double vol_p2 = 0.0;   // h_T^2 ||p||_{0,T}^2
  double vol_q2 = 0.0;   // h_T^2 ||q||_{0,T}^2
  double edge_p2 = 0.0;  // (1/2) sum_E h_E ||p_hat||_{0,E}^2
  double edge_q2 = 0.0;  // (1/2) sum_E h_E ||q_hat||_{0,E}^2
  double theta = 0.0;
  double theta_mark = 0.0;
};

struct EstimatorResult {
  std::vector<CellEstimate> cells;
  double global_estimate = 0.0;

  std::vector<std::pair<int, double>> marking_estimates() const {
    std::vector<std::pair<int, double>> out;
    out.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
      out.emplace_back(static_cast<int>(i), cells[i].theta_mark);
    return out;
  }
};

inline EstimatorResult estimate(const State& state, const MaterialParams& params,
                                const QuadratureRule& rule = QuadratureRule()) {
  const QuadMesh& mesh = state.mesh();
  EstimatorResult result;
  result.cells.resize(static_cast<std::size_t>(mesh.num_cells()));
  std::vector<double> edge_p2_full(result.cells.size(), 0.0);
  std::vector<double> edge_q2_full(result.cells.size(), 0.0);

  std::vector<Eigen::Vector2d> ref;
  for (int q = 0; q < rule.num_volume_points(); ++q)
    ref.emplace_back(rule.xi(q), rule.eta(q));

  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const double h = mesh.side_length(mesh.cell(cell));
    const double area = h * h;
    const auto samples = state.evaluate(cell, ref);
    double ip = 0.0, iq = 0.0;
    for (int q = 0; q < rule.num_volume_points(); ++q) {
      const double w = rule.weight(q) * area;
      ip += w * volume_residual_p(samples[static_cast<std::size_t>(q)], params).squaredNorm();
      const double qv = volume_residual_q(samples[static_cast<std::size_t>(q)], params);
      iq += w * qv * qv;
    }
    auto& ce = result.cells[static_cast<std::size_t>(cell)];
    ce.vol_p2 = h * h * ip;
    ce.vol_q2 = h * h * iq;
  }

  const GaussRule1d& erule = rule.edge_rule();
  for (const InteriorEdge& edge : mesh.interior_edges()) {
    const EdgeJumps jumps = edge_jumps(edge, state, params, erule);
    double ip = 0.0, iq = 0.0;
    for (int q = 0; q < erule.size(); ++q) {
      const double w = erule.weights[static_cast<std::size_t>(q)] * edge.length;
      ip += w * jumps.p_hat[static_cast<std::size_t>(q)].squaredNorm();
      iq += w * jumps.q_hat[static_cast<std::size_t>(q)] *
            jumps.q_hat[static_cast<std::size_t>(q)];
    }
    const double wp = edge.length * ip;  // h_E ||p_hat||^2
    const double wq = edge.length * iq;
    for (int cell : {edge.cell_a, edge.cell_b}) {
      auto& ce = result.cells[static_cast<std::size_t>(cell)];
      ce.edge_p2 += 0.5 * wp;
      ce.edge_q2 += 0.5 * wq;
      edge_p2_full[static_cast<std::size_t>(cell)] += wp;
      edge_q2_full[static_cast<std::size_t>(cell)] += wq;
    }
  }

  double total = 0.0;
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    auto& ce = result.cells[i];
    const double t2 = ce.vol_p2 + ce.vol_q2 + ce.edge_p2 + ce.edge_q2;
    ce.theta = std::sqrt(t2);
    ce.theta_mark = std::sqrt(ce.vol_p2 + ce.vol_q2 + edge_p2_full[i] + edge_q2_full[i]);
    total += t2;
  }
  result.global_estimate = std::sqrt(total);
  return result;
}

}  // namespace nematic
