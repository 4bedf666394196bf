#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace nematic {

/// Index of a quadtree cell.  At refinement level `level` the unit square is
/// covered by an (n0*2^level) x (n0*2^level) grid of squares, where n0 is the
/// root grid size; (ix, iy) addresses one of them.
struct CellIndex {
  int level = 0;
  int ix = 0;
  int iy = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

inline std::uint64_t pack_cell(const CellIndex& c) {
  return (std::uint64_t(c.level) << 58) | (std::uint64_t(c.ix) << 29) |
         std::uint64_t(c.iy);
}

/// Set of active cells selected for refinement (by cell id, ascending).
struct MarkSet {
  std::vector<int> cells;

  bool empty() const { return cells.empty(); }
};

/// One interior mesh interface.  For a conforming edge both cells have equal
/// level and `cell_a` is the west/south one.  For a coarse-fine interface the
/// record covers one fine sub-edge: `cell_a` is the coarse cell, `cell_b` the
/// fine one, and h_E equals the fine cell's side length.  The normal is a unit
/// vector pointing from cell_a into cell_b; jumps are taken as
/// (value on a) - (value on b).
struct InteriorEdge {
  int cell_a = -1;
  int cell_b = -1;
  Eigen::Vector2d p0;
  Eigen::Vector2d p1;
  double length = 0.0;
  Eigen::Vector2d normal;
  bool nonconforming = false;
};

/// Quadtree mesh of axis-aligned squares tiling the unit square.  Meshes are
/// immutable; refinement returns a new mesh.  Active cells are kept sorted by
/// (level, iy, ix), and a cell id is the position in that ordering.
class QuadMesh {
 public:
  explicit QuadMesh(int root_cells_per_side = 16)
      : n0_(root_cells_per_side) {
    if (n0_ < 1) throw std::invalid_argument("QuadMesh: root size must be >= 1");
    cells_.reserve(static_cast<std::size_t>(n0_) * n0_);
    for (int iy = 0; iy < n0_; ++iy)
      for (int ix = 0; ix < n0_; ++ix) cells_.push_back({0, ix, iy});
    rebuild_index();
  }

  int root_size() const { return n0_; }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  const std::vector<CellIndex>& cells() const { return cells_; }
  const CellIndex& cell(int id) const { return cells_.at(static_cast<std::size_t>(id)); }
  int max_level() const { return max_level_; }

  double side_length(int level) const { return 1.0 / double(n0_ << level); }
  double side_length(const CellIndex& c) const { return side_length(c.level); }

  Eigen::Vector2d lower_left(const CellIndex& c) const {
    const double h = side_length(c.level);
    return {c.ix * h, c.iy * h};
  }
  Eigen::Vector2d cell_center(const CellIndex& c) const {
    const double h = side_length(c.level);
    return {(c.ix + 0.5) * h, (c.iy + 0.5) * h};
  }

  bool is_active(const CellIndex& c) const { return id_of_.count(pack_cell(c)) > 0; }

  /// Cell id for an active cell index, or -1.
  int find_cell(const CellIndex& c) const {
    auto it = id_of_.find(pack_cell(c));
    return it == id_of_.end() ? -1 : it->second;
  }

  /// Active cell containing the point (points on internal boundaries resolve
  /// toward the cell on the +x/+y side, deterministically).
  int locate(const Eigen::Vector2d& p) const {
    CellIndex c{0, clamp_root(p.x()), clamp_root(p.y())};
    for (;;) {
      const int id = find_cell(c);
      if (id >= 0) return id;
      if (c.level > max_level_)
        throw std::runtime_error("QuadMesh::locate: point not covered by an active cell");
      const Eigen::Vector2d mid = cell_center(c);
      c = CellIndex{c.level + 1, 2 * c.ix + (p.x() >= mid.x() ? 1 : 0),
                    2 * c.iy + (p.y() >= mid.y() ? 1 : 0)};
    }
  }

  /// Every active cell replaced by its four children.
  QuadMesh uniform_refined() const {
    std::vector<CellIndex> next;
    next.reserve(cells_.size() * 4);
    for (const CellIndex& c : cells_)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx)
          next.push_back({c.level + 1, 2 * c.ix + dx, 2 * c.iy + dy});
    return QuadMesh(n0_, std::move(next));
  }

  /// Splits every marked cell into four children and cascades additional
  /// splits until the 1-irregularity invariant holds again.
  QuadMesh refined(const MarkSet& marks) const {
    std::unordered_set<std::uint64_t> active;
    active.reserve(cells_.size() * 2);
    for (const CellIndex& c : cells_) active.insert(pack_cell(c));

    std::vector<CellIndex> work;
    for (int id : marks.cells) {
      if (id < 0 || id >= num_cells())
        throw std::invalid_argument("QuadMesh::refined: mark is not an active cell");
      work.push_back(cells_[static_cast<std::size_t>(id)]);
    }

    while (!work.empty()) {
      const CellIndex c = work.back();
      work.pop_back();
      auto it = active.find(pack_cell(c));
      if (it == active.end()) continue;  // already split by an earlier cascade
      active.erase(it);
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx)
          active.insert(pack_cell({c.level + 1, 2 * c.ix + dx, 2 * c.iy + dy}));

      // Any strictly coarser edge-neighbor would now differ by two levels.
      const int grid = n0_ << c.level;
      for (int dir = 0; dir < 4; ++dir) {
        const int nx = c.ix + kDx[dir];
        const int ny = c.iy + kDy[dir];
        if (nx < 0 || ny < 0 || nx >= grid || ny >= grid) continue;
        CellIndex a{c.level, nx, ny};
        for (int k = 1; k <= c.level; ++k) {
          a = CellIndex{a.level - 1, a.ix >> 1, a.iy >> 1};
          if (active.count(pack_cell(a))) {
            work.push_back(a);
            break;
          }
        }
      }
    }

    std::vector<CellIndex> next;
    next.reserve(active.size());
    for (std::uint64_t key : active) next.push_back(unpack_cell(key));
    return QuadMesh(n0_, std::move(next));
  }

  /// All interior interfaces, each exactly once.  Coarse-fine interfaces are
  /// emitted per fine sub-edge (two records for a full coarse edge).
  std::vector<InteriorEdge> interior_edges() const {
    std::vector<InteriorEdge> edges;
    edges.reserve(cells_.size() * 2);
    for (int id = 0; id < num_cells(); ++id) {
      const CellIndex& c = cells_[static_cast<std::size_t>(id)];
      const int grid = n0_ << c.level;
      const double h = side_length(c.level);
      const Eigen::Vector2d ll = lower_left(c);
      for (int dir = 0; dir < 4; ++dir) {
        const int nx = c.ix + kDx[dir];
        const int ny = c.iy + kDy[dir];
        if (nx < 0 || ny < 0 || nx >= grid || ny >= grid) continue;
        const int same = find_cell({c.level, nx, ny});
        if (same >= 0) {
          if (dir > 1) continue;  // the west/south twin emits this edge
          InteriorEdge e;
          e.cell_a = id;
          e.cell_b = same;
          edge_geometry(ll, h, dir, e);
          e.length = h;
          e.nonconforming = false;
          edges.push_back(e);
          continue;
        }
        const int coarse = find_active_ancestor({c.level, nx, ny});
        if (coarse >= 0) {
          // This cell is the fine side; it is the sole emitter of its sub-edge.
          InteriorEdge e;
          e.cell_a = coarse;
          e.cell_b = id;
          edge_geometry(ll, h, dir, e);
          e.normal = -e.normal;  // from the coarse cell into this one
          e.length = h;
          e.nonconforming = true;
          edges.push_back(e);
        }
        // Finer neighbors emit from their side.
      }
    }
    return edges;
  }

  /// True if every interior interface separates cells differing by at most
  /// one level.
  bool is_one_irregular() const {
    for (const CellIndex& c : cells_) {
      const int grid = n0_ << c.level;
      for (int dir = 0; dir < 4; ++dir) {
        const int nx = c.ix + kDx[dir];
        const int ny = c.iy + kDy[dir];
        if (nx < 0 || ny < 0 || nx >= grid || ny >= grid) continue;
        if (find_cell({c.level, nx, ny}) >= 0) continue;
        const int coarse = find_active_ancestor({c.level, nx, ny});
        if (coarse >= 0) {
          if (c.level - cells_[static_cast<std::size_t>(coarse)].level > 1) return false;
          continue;
        }
        // Finer neighbors: all active descendants along the shared edge must
        // be within one level.
        if (!descendants_within_one_level({c.level, nx, ny}, dir, c.level)) return false;
      }
    }
    return true;
  }

  double total_area() const {
    double area = 0.0;
    for (const CellIndex& c : cells_) {
      const double h = side_length(c.level);
      area += h * h;
    }
    return area;
  }

  /// Plain-text cell list: one line per active cell with
  /// "level llx lly side".
  void write_cell_list(std::ostream& os) const {
    for (const CellIndex& c : cells_) {
      const Eigen::Vector2d ll = lower_left(c);
      os << c.level << ' ' << format_double(ll.x()) << ' ' << format_double(ll.y())
         << ' ' << format_double(side_length(c.level)) << '\n';
    }
  }

  static std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
  }

 private:
  static constexpr int kDx[4] = {1, 0, -1, 0};
  static constexpr int kDy[4] = {0, 1, 0, -1};

  QuadMesh(int n0, std::vector<CellIndex> cells) : n0_(n0), cells_(std::move(cells)) {
    std::sort(cells_.begin(), cells_.end(), [](const CellIndex& a, const CellIndex& b) {
      if (a.level != b.level) return a.level < b.level;
      if (a.iy != b.iy) return a.iy < b.iy;
      return a.ix < b.ix;
    });
    rebuild_index();
  }

  static CellIndex unpack_cell(std::uint64_t key) {
    return {static_cast<int>(key >> 58), static_cast<int>((key >> 29) & ((1u << 29) - 1)),
            static_cast<int>(key & ((1u << 29) - 1))};
  }

  void rebuild_index() {
    id_of_.clear();
    id_of_.reserve(cells_.size() * 2);
    max_level_ = 0;
    for (int i = 0; i < num_cells(); ++i) {
      id_of_.emplace(pack_cell(cells_[static_cast<std::size_t>(i)]), i);
      max_level_ = std::max(max_level_, cells_[static_cast<std::size_t>(i)].level);
    }
  }

  int clamp_root(double x) const {
    int i = static_cast<int>(x * n0_);
    return std::clamp(i, 0, n0_ - 1);
  }

  /// Id of the strict active ancestor of `c`, or -1.
  int find_active_ancestor(CellIndex c) const {
    while (c.level > 0) {
      c = CellIndex{c.level - 1, c.ix >> 1, c.iy >> 1};
      const int id = find_cell(c);
      if (id >= 0) return id;
    }
    return -1;
  }

  void edge_geometry(const Eigen::Vector2d& ll, double h, int dir, InteriorEdge& e) const {
    switch (dir) {
      case 0:  // east
        e.p0 = {ll.x() + h, ll.y()};
        e.p1 = {ll.x() + h, ll.y() + h};
        e.normal = {1.0, 0.0};
        break;
      case 1:  // north
        e.p0 = {ll.x(), ll.y() + h};
        e.p1 = {ll.x() + h, ll.y() + h};
        e.normal = {0.0, 1.0};
        break;
      case 2:  // west
        e.p0 = {ll.x(), ll.y()};
        e.p1 = {ll.x(), ll.y() + h};
        e.normal = {-1.0, 0.0};
        break;
      default:  // south
        e.p0 = {ll.x(), ll.y()};
        e.p1 = {ll.x() + h, ll.y()};
        e.normal = {0.0, -1.0};
        break;
    }
  }

  bool descendants_within_one_level(const CellIndex& base, int dir, int ref_level) const {
    // `base` is the (inactive, finer-populated) same-level neighbor; walk the
    // children adjacent to the shared edge.
    const int cx = (dir == 0) ? 0 : (dir == 2) ? 1 : -1;  // fixed child column
    const int cy = (dir == 1) ? 0 : (dir == 3) ? 1 : -1;  // fixed child row
    for (int t = 0; t < 2; ++t) {
      CellIndex child{base.level + 1, 2 * base.ix + (cx >= 0 ? cx : t),
                      2 * base.iy + (cy >= 0 ? cy : t)};
      if (find_cell(child) >= 0) {
        if (child.level - ref_level > 1) return false;
        continue;
      }
      if (child.level > max_level_) return false;  // hole in the tiling
      if (!descendants_within_one_level(child, dir, ref_level)) return false;
    }
    return true;
  }

  int n0_;
  std::vector<CellIndex> cells_;
  std::unordered_map<std::uint64_t, int> id_of_;
  int max_level_ = 0;
};

/// Dorfler bulk marking: the minimal-cardinality set of cells whose squared
/// estimates reach the fraction nu of the squared total, realized by greedy
/// descending selection with ties broken by cell id.
inline MarkSet dorfler_mark(const std::vector<std::pair<int, double>>& estimates, double nu) {
  if (!(nu > 0.0) || nu > 1.0)
    throw std::invalid_argument("dorfler_mark: nu must lie in (0, 1]");
  double total = 0.0;
  for (const auto& [id, theta] : estimates) {
    if (theta < 0.0) throw std::invalid_argument("dorfler_mark: negative estimate");
    total += theta * theta;
  }
  if (total == 0.0) throw std::invalid_argument("dorfler_mark: nothing to mark");

  std::vector<std::pair<int, double>> order(estimates);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  MarkSet marks;
  const double target = nu * total;
  double acc = 0.0;
  for (const auto& [id, theta] : order) {
    if (acc >= target) break;
    marks.cells.push_back(id);
    acc += theta * theta;
  }
  std::sort(marks.cells.begin(), marks.cells.end());
  return marks;
}

}  // namespace nematic
