#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nematic/boundary_data.hpp"
#include "nematic/mesh.hpp"
#include "nematic/reference_q2.hpp"

namespace nematic {

constexpr int kNumFields = 4;  // n1, n2, n3, phi

enum class NodeKind { Interior, Dirichlet, Hanging };

/// A hanging node's value is a fixed linear combination of the three coarse
/// edge nodes it sits between.
struct HangingConstraint {
  std::array<int, 3> masters{-1, -1, -1};
  std::array<double, 3> weights{0.0, 0.0, 0.0};
};

/// Q2 degree-of-freedom numbering for the four scalar fields on a QuadMesh,
/// with Dirichlet values at boundary nodes and hanging-node constraints on
/// nonconforming edges.  Immutable after construction.
class DofSystem {
 public:
  DofSystem(std::shared_ptr<const QuadMesh> mesh, const BoundaryData& boundary)
      : mesh_(std::move(mesh)) {
    build_nodes();
    classify_nodes(boundary);
    number_free_dofs();
  }

  const QuadMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const QuadMesh> mesh_ptr() const { return mesh_; }

  int num_nodes() const { return static_cast<int>(positions_.size()); }
  int num_dofs() const { return num_nodes() * kNumFields; }
  int num_free_dofs() const { return num_free_; }
  int num_constrained_dofs() const { return num_dofs() - num_free_; }

  const Eigen::Vector2d& node_position(int node) const {
    return positions_[static_cast<std::size_t>(node)];
  }
  NodeKind node_kind(int node) const { return kinds_[static_cast<std::size_t>(node)]; }

  double dirichlet_value(int node, int field) const {
    return dirichlet_[static_cast<std::size_t>(node * kNumFields + field)];
  }
  const HangingConstraint& hanging_constraint(int node) const {
    return hanging_.at(node);
  }

  /// Compact index of a free scalar DOF, or -1 when (node, field) is
  /// constrained.
  int free_index(int node, int field) const {
    return free_index_[static_cast<std::size_t>(node * kNumFields + field)];
  }

  const std::array<int, 9>& cell_nodes(int cell) const {
    return cell_nodes_[static_cast<std::size_t>(cell)];
  }

  /// Row/column expansion of one node under the hanging-node substitution:
  /// list of (non-hanging node, weight) pairs.  Dirichlet nodes expand to
  /// nothing, interior nodes to themselves.
  const std::vector<std::pair<int, double>>& node_expansion(int node) const {
    return expansion_[static_cast<std::size_t>(node)];
  }

 private:
  void build_nodes() {
    const QuadMesh& m = *mesh_;
    const int shift = m.max_level() + 1;
    units_per_side_ = static_cast<std::int64_t>(m.root_size()) << shift;

    std::map<std::int64_t, int> index_of;  // packed (uy, ux) -> node id
    cell_nodes_.resize(static_cast<std::size_t>(m.num_cells()));
    std::vector<std::pair<std::int64_t, std::int64_t>> units;

    for (int cid = 0; cid < m.num_cells(); ++cid) {
      const CellIndex& c = m.cell(cid);
      const std::int64_t step = std::int64_t(1) << (m.max_level() - c.level);
      const std::int64_t ox = 2 * step * c.ix;
      const std::int64_t oy = 2 * step * c.iy;
      for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) {
          const std::int64_t ux = ox + a * step;
          const std::int64_t uy = oy + b * step;
          const std::int64_t key = (uy << 32) | ux;
          auto [it, inserted] = index_of.emplace(key, static_cast<int>(units.size()));
          if (inserted) units.emplace_back(ux, uy);
          cell_nodes_[static_cast<std::size_t>(cid)][static_cast<std::size_t>(3 * b + a)] =
              it->second;
        }
    }

    // Renumber nodes in (uy, ux) order so ids are independent of cell order.
    std::vector<int> rank(units.size());
    {
      int r = 0;
      for (const auto& [key, old_id] : index_of) rank[static_cast<std::size_t>(old_id)] = r++;
    }
    positions_.resize(units.size());
    node_units_.resize(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
      const auto [ux, uy] = units[i];
      const std::size_t r = static_cast<std::size_t>(rank[i]);
      node_units_[r] = {ux, uy};
      positions_[r] = {double(ux) / double(units_per_side_),
                       double(uy) / double(units_per_side_)};
    }
    for (auto& nodes : cell_nodes_)
      for (int& n : nodes) n = rank[static_cast<std::size_t>(n)];
  }

  void classify_nodes(const BoundaryData& boundary) {
    const int nn = num_nodes();
    kinds_.assign(static_cast<std::size_t>(nn), NodeKind::Interior);
    dirichlet_.assign(static_cast<std::size_t>(nn * kNumFields), 0.0);

    for (int i = 0; i < nn; ++i) {
      const auto [ux, uy] = node_units_[static_cast<std::size_t>(i)];
      if (ux == 0 || uy == 0 || ux == units_per_side_ || uy == units_per_side_) {
        kinds_[static_cast<std::size_t>(i)] = NodeKind::Dirichlet;
        const Eigen::Vector2d& p = positions_[static_cast<std::size_t>(i)];
        const Eigen::Vector3d g1 = boundary.director(p);
        const double g2 = boundary.potential(p);
        for (int f = 0; f < 3; ++f)
          dirichlet_[static_cast<std::size_t>(i * kNumFields + f)] = g1[f];
        dirichlet_[static_cast<std::size_t>(i * kNumFields + 3)] = g2;
      }
    }

    // Hanging nodes: the mid-edge node of every fine sub-edge on a
    // nonconforming interface, tied to the three coarse edge nodes.
    // A Dirichlet node keeps its boundary value instead.
    for (const InteriorEdge& e : mesh_->interior_edges()) {
      if (!e.nonconforming) continue;
      const Eigen::Vector2d mid = 0.5 * (e.p0 + e.p1);
      const int hang = node_at(mid);
      if (kinds_[static_cast<std::size_t>(hang)] == NodeKind::Dirichlet) continue;
      if (kinds_[static_cast<std::size_t>(hang)] == NodeKind::Hanging) continue;

      const CellIndex& coarse = mesh_->cell(e.cell_a);
      const double hc = mesh_->side_length(coarse);
      const Eigen::Vector2d ll = mesh_->lower_left(coarse);
      const bool vertical = std::abs(e.normal.x()) > 0.5;  // edge runs along y
      // The normal points from the coarse cell into the fine one, so a
      // positive component selects the coarse cell's far face.
      Eigen::Vector2d start, dir;
      if (vertical) {
        const double x = e.normal.x() > 0 ? ll.x() + hc : ll.x();
        start = {x, ll.y()};
        dir = {0.0, 1.0};
      } else {
        const double y = e.normal.y() > 0 ? ll.y() + hc : ll.y();
        start = {ll.x(), y};
        dir = {1.0, 0.0};
      }
      const double t = (mid - start).dot(dir) / hc;
      const auto w = ReferenceQ2::line_values(t);

      HangingConstraint hc_rec;
      for (int k = 0; k < 3; ++k) {
        const Eigen::Vector2d mp = start + (0.5 * k * hc) * dir;
        hc_rec.masters[static_cast<std::size_t>(k)] = node_at(mp);
        hc_rec.weights[static_cast<std::size_t>(k)] = w[static_cast<std::size_t>(k)];
      }
      kinds_[static_cast<std::size_t>(hang)] = NodeKind::Hanging;
      hanging_[hang] = hc_rec;
    }

    for (const auto& [node, hc] : hanging_)
      for (int m : hc.masters)
        if (kinds_[static_cast<std::size_t>(m)] == NodeKind::Hanging)
          throw std::runtime_error("DofSystem: hanging node constrained to a hanging master");
  }

  void number_free_dofs() {
    free_index_.assign(static_cast<std::size_t>(num_dofs()), -1);
    num_free_ = 0;
    for (int i = 0; i < num_nodes(); ++i) {
      if (kinds_[static_cast<std::size_t>(i)] != NodeKind::Interior) continue;
      for (int f = 0; f < kNumFields; ++f)
        free_index_[static_cast<std::size_t>(i * kNumFields + f)] = num_free_++;
    }

    expansion_.resize(static_cast<std::size_t>(num_nodes()));
    for (int i = 0; i < num_nodes(); ++i) {
      auto& exp = expansion_[static_cast<std::size_t>(i)];
      switch (kinds_[static_cast<std::size_t>(i)]) {
        case NodeKind::Interior:
          exp.emplace_back(i, 1.0);
          break;
        case NodeKind::Dirichlet:
          break;
        case NodeKind::Hanging: {
          const HangingConstraint& hc = hanging_.at(i);
          for (int k = 0; k < 3; ++k) {
            const int m = hc.masters[static_cast<std::size_t>(k)];
            if (kinds_[static_cast<std::size_t>(m)] == NodeKind::Interior)
              exp.emplace_back(m, hc.weights[static_cast<std::size_t>(k)]);
          }
          break;
        }
      }
    }
  }

  int node_at(const Eigen::Vector2d& p) const {
    const std::int64_t ux = std::llround(p.x() * double(units_per_side_));
    const std::int64_t uy = std::llround(p.y() * double(units_per_side_));
    // Binary search over the (uy, ux)-sorted node list.
    int lo = 0, hi = num_nodes() - 1;
    while (lo <= hi) {
      const int midi = (lo + hi) / 2;
      const auto [mx, my] = node_units_[static_cast<std::size_t>(midi)];
      if (my == uy && mx == ux) return midi;
      if (my < uy || (my == uy && mx < ux))
        lo = midi + 1;
      else
        hi = midi - 1;
    }
    throw std::runtime_error("DofSystem: no node at requested position");
  }

  std::shared_ptr<const QuadMesh> mesh_;
  std::int64_t units_per_side_ = 0;
  std::vector<Eigen::Vector2d> positions_;
  std::vector<std::pair<std::int64_t, std::int64_t>> node_units_;
  std::vector<std::array<int, 9>> cell_nodes_;
  std::vector<NodeKind> kinds_;
  std::vector<double> dirichlet_;
  std::map<int, HangingConstraint> hanging_;
  std::vector<int> free_index_;
  std::vector<std::vector<std::pair<int, double>>> expansion_;
  int num_free_ = 0;
};

}  // namespace nematic
