#pragma once

#include <Eigen/Core>

#include <array>
#include <memory>
#include <stdexcept>
#include <vector>

#include "nematic/boundary_data.hpp"
#include "nematic/dof_system.hpp"
#include "nematic/reference_q2.hpp"

namespace nematic {

/// Field data at one physical point: values, spatial gradients, and spatial
/// second derivatives of (n1, n2, n3, phi).
struct FieldSample {
  Eigen::Vector2d point;
  Eigen::Vector4d value;
  Eigen::Matrix<double, 4, 2> grad;        // row f: (d/dx, d/dy)
  std::array<Eigen::Matrix2d, 4> hess;     // per field

  Eigen::Vector3d director() const { return value.head<3>(); }
  double potential() const { return value[3]; }
};

/// Discrete pair (n_h, phi_h): the full coefficient vector over all nodes of
/// a DofSystem, kept consistent with the Dirichlet and hanging constraints.
class State {
 public:
  explicit State(std::shared_ptr<const DofSystem> dofs)
      : dofs_(std::move(dofs)),
        coeff_(Eigen::VectorXd::Zero(dofs_->num_dofs())) {
    apply_dirichlet();
    apply_hanging();
  }

  const DofSystem& dofs() const { return *dofs_; }
  std::shared_ptr<const DofSystem> dofs_ptr() const { return dofs_; }
  const QuadMesh& mesh() const { return dofs_->mesh(); }

  const Eigen::VectorXd& coefficients() const { return coeff_; }
  double coefficient(int node, int field) const {
    return coeff_[node * kNumFields + field];
  }

  /// Raw coefficient write; call apply_hanging() afterwards when setting
  /// master values so dependent nodes follow.
  void set_coefficient(int node, int field, double v) {
    coeff_[node * kNumFields + field] = v;
  }

  void fill_director(const Eigen::Vector3d& n) {
    for (int i = 0; i < dofs_->num_nodes(); ++i)
      for (int f = 0; f < 3; ++f) coeff_[i * kNumFields + f] = n[f];
    apply_dirichlet();
    apply_hanging();
  }

  Eigen::VectorXd free_vector() const {
    Eigen::VectorXd x(dofs_->num_free_dofs());
    for (int i = 0; i < dofs_->num_nodes(); ++i)
      for (int f = 0; f < kNumFields; ++f) {
        const int fi = dofs_->free_index(i, f);
        if (fi >= 0) x[fi] = coeff_[i * kNumFields + f];
      }
    return x;
  }

  void set_free_vector(const Eigen::VectorXd& x) {
    if (x.size() != dofs_->num_free_dofs())
      throw std::invalid_argument("State::set_free_vector: size mismatch");
    for (int i = 0; i < dofs_->num_nodes(); ++i)
      for (int f = 0; f < kNumFields; ++f) {
        const int fi = dofs_->free_index(i, f);
        if (fi >= 0) coeff_[i * kNumFields + f] = x[fi];
      }
    apply_hanging();
  }

  void add_to_free(const Eigen::VectorXd& dx, double scale = 1.0) {
    if (dx.size() != dofs_->num_free_dofs())
      throw std::invalid_argument("State::add_to_free: size mismatch");
    for (int i = 0; i < dofs_->num_nodes(); ++i)
      for (int f = 0; f < kNumFields; ++f) {
        const int fi = dofs_->free_index(i, f);
        if (fi >= 0) coeff_[i * kNumFields + f] += scale * dx[fi];
      }
    apply_hanging();
  }

  void apply_dirichlet() {
    for (int i = 0; i < dofs_->num_nodes(); ++i)
      if (dofs_->node_kind(i) == NodeKind::Dirichlet)
        for (int f = 0; f < kNumFields; ++f)
          coeff_[i * kNumFields + f] = dofs_->dirichlet_value(i, f);
  }

  void apply_hanging() {
    for (int i = 0; i < dofs_->num_nodes(); ++i) {
      if (dofs_->node_kind(i) != NodeKind::Hanging) continue;
      const HangingConstraint& hc = dofs_->hanging_constraint(i);
      for (int f = 0; f < kNumFields; ++f) {
        double v = 0.0;
        for (int k = 0; k < 3; ++k)
          v += hc.weights[static_cast<std::size_t>(k)] *
               coeff_[hc.masters[static_cast<std::size_t>(k)] * kNumFields + f];
        coeff_[i * kNumFields + f] = v;
      }
    }
  }

  /// Local 9x4 coefficient block of one cell (node-major).
  Eigen::Matrix<double, 9, 4> cell_coefficients(int cell) const {
    const auto& nodes = dofs_->cell_nodes(cell);
    Eigen::Matrix<double, 9, 4> c;
    for (int a = 0; a < 9; ++a)
      for (int f = 0; f < kNumFields; ++f)
        c(a, f) = coeff_[nodes[static_cast<std::size_t>(a)] * kNumFields + f];
    return c;
  }

  /// Values, gradients and second derivatives at reference points of an
  /// active cell, mapped through the affine cell map.
  std::vector<FieldSample> evaluate(int cell,
                                    const std::vector<Eigen::Vector2d>& ref_points) const {
    const QuadMesh& m = dofs_->mesh();
    if (cell < 0 || cell >= m.num_cells())
      throw std::invalid_argument("State::evaluate: cell not active");
    const CellIndex& ci = m.cell(cell);
    const double h = m.side_length(ci);
    const Eigen::Vector2d ll = m.lower_left(ci);
    const Eigen::Matrix<double, 9, 4> c = cell_coefficients(cell);

    std::vector<FieldSample> out;
    out.reserve(ref_points.size());
    for (const Eigen::Vector2d& xr : ref_points) {
      const auto v = ReferenceQ2::values(xr.x(), xr.y());
      const auto g = ReferenceQ2::gradients(xr.x(), xr.y());
      const auto s = ReferenceQ2::second_derivatives(xr.x(), xr.y());
      FieldSample fs;
      fs.point = ll + h * xr;
      const double inv_h = 1.0 / h;
      const double inv_h2 = inv_h * inv_h;
      // Offsets against one nodal value keep constant fields exact.
      for (int f = 0; f < kNumFields; ++f) {
        const double ref = c(0, f);
        double val = 0.0, gx = 0.0, gy = 0.0, hxx = 0.0, hxy = 0.0, hyy = 0.0;
        for (int a = 0; a < 9; ++a) {
          const std::size_t sa = static_cast<std::size_t>(a);
          const double ca = c(a, f) - ref;
          val += ca * v[sa];
          gx += ca * g[sa][0];
          gy += ca * g[sa][1];
          hxx += ca * s[sa][0];
          hxy += ca * s[sa][1];
          hyy += ca * s[sa][2];
        }
        fs.value[f] = ref + val;
        fs.grad(f, 0) = gx * inv_h;
        fs.grad(f, 1) = gy * inv_h;
        auto& hm = fs.hess[static_cast<std::size_t>(f)];
        hm(0, 0) = hxx * inv_h2;
        hm(0, 1) = hm(1, 0) = hxy * inv_h2;
        hm(1, 1) = hyy * inv_h2;
      }
      out.push_back(fs);
    }
    return out;
  }

  /// Evaluate at a physical point (locates the containing cell).
  FieldSample evaluate_at(const Eigen::Vector2d& p) const {
    const QuadMesh& m = dofs_->mesh();
    const int cell = m.locate(p);
    const CellIndex& ci = m.cell(cell);
    const double h = m.side_length(ci);
    const Eigen::Vector2d ref = (p - m.lower_left(ci)) / h;
    return evaluate(cell, {ref}).front();
  }

 private:
  std::shared_ptr<const DofSystem> dofs_;
  Eigen::VectorXd coeff_;
};

/// Transfers a coarse state to a refined mesh by Q2 nodal interpolation.
/// Dirichlet values are re-interpolated from the boundary data on the fine
/// mesh, not carried over from the coarse field.
inline State prolong(const State& coarse, std::shared_ptr<const DofSystem> fine_dofs) {
  const QuadMesh& cm = coarse.mesh();
  const QuadMesh& fm = fine_dofs->mesh();
  if (fm.root_size() != cm.root_size())
    throw std::invalid_argument("prolong: meshes not nested");
  for (const CellIndex& fc : fm.cells()) {
    const int cid = cm.locate(fm.cell_center(fc));
    if (cm.cell(cid).level > fc.level)
      throw std::invalid_argument("prolong: meshes not nested");
  }

  State fine(std::move(fine_dofs));
  for (int i = 0; i < fine.dofs().num_nodes(); ++i) {
    if (fine.dofs().node_kind(i) == NodeKind::Dirichlet) continue;
    const FieldSample fs = coarse.evaluate_at(fine.dofs().node_position(i));
    for (int f = 0; f < kNumFields; ++f) fine.set_coefficient(i, f, fs.value[f]);
  }
  fine.apply_dirichlet();
  fine.apply_hanging();
  return fine;
}

}  // namespace nematic
