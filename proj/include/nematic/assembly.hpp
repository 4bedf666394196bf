#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <vector>

#include "nematic/dof_system.hpp"
#include "nematic/quadrature.hpp"
#include "nematic/reference_q2.hpp"

namespace nematic {

constexpr int kLocalDofs = 9 * kNumFields;  // 36 per cell, node-major

/// Reference shape data tabulated at the volume quadrature points.
struct Q2Tables {
  struct Point {
    double weight;
    double val[9];
    double gx[9];
    double gy[9];
  };
  std::vector<Point> points;

  explicit Q2Tables(const QuadratureRule& rule) {
    points.resize(static_cast<std::size_t>(rule.num_volume_points()));
    for (int q = 0; q < rule.num_volume_points(); ++q) {
      Point& pt = points[static_cast<std::size_t>(q)];
      pt.weight = rule.weight(q);
      const auto v = ReferenceQ2::values(rule.xi(q), rule.eta(q));
      const auto g = ReferenceQ2::gradients(rule.xi(q), rule.eta(q));
      for (int a = 0; a < 9; ++a) {
        const std::size_t sa = static_cast<std::size_t>(a);
        pt.val[a] = v[sa];
        pt.gx[a] = g[sa][0];
        pt.gy[a] = g[sa][1];
      }
    }
  }
};

/// Scatters raw element vectors/matrices into the free-DOF system: hanging
/// rows and columns are substituted by their master combinations, Dirichlet
/// rows and columns are eliminated.
class Assembler {
 public:
  explicit Assembler(const DofSystem& dofs)
      : dofs_(dofs), rhs_(Eigen::VectorXd::Zero(dofs.num_free_dofs())) {}

  void add_element_vector(int cell, const Eigen::Matrix<double, kLocalDofs, 1>& local) {
    const auto& nodes = dofs_.cell_nodes(cell);
    for (int a = 0; a < 9; ++a) {
      const auto& exp = dofs_.node_expansion(nodes[static_cast<std::size_t>(a)]);
      for (int f = 0; f < kNumFields; ++f) {
        const double v = local[a * kNumFields + f];
        if (v == 0.0) continue;
        for (const auto& [master, w] : exp) rhs_[dofs_.free_index(master, f)] += w * v;
      }
    }
  }

  void add_element_matrix(int cell,
                          const Eigen::Matrix<double, kLocalDofs, kLocalDofs>& local) {
    const auto& nodes = dofs_.cell_nodes(cell);
    for (int ai = 0; ai < 9; ++ai) {
      const auto& expi = dofs_.node_expansion(nodes[static_cast<std::size_t>(ai)]);
      if (expi.empty()) continue;
      for (int aj = 0; aj < 9; ++aj) {
        const auto& expj = dofs_.node_expansion(nodes[static_cast<std::size_t>(aj)]);
        if (expj.empty()) continue;
        for (int fi = 0; fi < kNumFields; ++fi)
          for (int fj = 0; fj < kNumFields; ++fj) {
            const double v = local(ai * kNumFields + fi, aj * kNumFields + fj);
            if (v == 0.0) continue;
            for (const auto& [mi, wi] : expi)
              for (const auto& [mj, wj] : expj)
                triplets_.emplace_back(dofs_.free_index(mi, fi),
                                       dofs_.free_index(mj, fj), wi * wj * v);
          }
      }
    }
  }

  const Eigen::VectorXd& vector() const { return rhs_; }

  Eigen::SparseMatrix<double> matrix() const {
    Eigen::SparseMatrix<double> m(dofs_.num_free_dofs(), dofs_.num_free_dofs());
    m.setFromTriplets(triplets_.begin(), triplets_.end());
    return m;
  }

 private:
  const DofSystem& dofs_;
  Eigen::VectorXd rhs_;
  std::vector<Eigen::Triplet<double>> triplets_;
};

}  // namespace nematic
