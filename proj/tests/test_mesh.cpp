#include "nematic/mesh.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

namespace nematic {
namespace {

// Counts interior interfaces by geometric overlap of cell boundaries: every
// unordered pair of active cells sharing a positive-length segment is one
// interface record.
int brute_force_interface_count(const QuadMesh& mesh) {
  int count = 0;
  const int n = mesh.num_cells();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const auto ca = mesh.cell(a);
      const auto cb = mesh.cell(b);
      const double ha = mesh.side_length(ca), hb = mesh.side_length(cb);
      const Eigen::Vector2d la = mesh.lower_left(ca), lb = mesh.lower_left(cb);
      const double tol = 1e-12;
      // Vertical contact: a's east edge on b's west edge or vice versa.
      const bool x_touch = std::abs(la.x() + ha - lb.x()) < tol ||
                           std::abs(lb.x() + hb - la.x()) < tol;
      const bool y_touch = std::abs(la.y() + ha - lb.y()) < tol ||
                           std::abs(lb.y() + hb - la.y()) < tol;
      const double y_overlap =
          std::min(la.y() + ha, lb.y() + hb) - std::max(la.y(), lb.y());
      const double x_overlap =
          std::min(la.x() + ha, lb.x() + hb) - std::max(la.x(), lb.x());
      if ((x_touch && y_overlap > tol) || (y_touch && x_overlap > tol)) ++count;
    }
  return count;
}

// Minimal cardinality over all subsets reaching nu * total squared estimate.
int brute_force_dorfler_cardinality(const std::vector<double>& thetas, double nu) {
  const int n = static_cast<int>(thetas.size());
  double total = 0.0;
  for (double t : thetas) total += t * t;
  int best = n + 1;
  for (int mask = 1; mask < (1 << n); ++mask) {
    double sum = 0.0;
    int size = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) {
        sum += thetas[static_cast<std::size_t>(i)] * thetas[static_cast<std::size_t>(i)];
        ++size;
      }
    if (sum >= nu * total) best = std::min(best, size);
  }
  return best;
}

TEST(UniformRefine, CellCountsQuadruple) {
  QuadMesh mesh(16);
  EXPECT_EQ(mesh.num_cells(), 256);
  const QuadMesh fine = mesh.uniform_refined();
  EXPECT_EQ(fine.num_cells(), 1024);
  EXPECT_EQ(fine.uniform_refined().num_cells(), 4096);
}

TEST(UniformRefine, SideLengthsHalve) {
  QuadMesh mesh(16);
  EXPECT_DOUBLE_EQ(mesh.side_length(mesh.cell(0)), 1.0 / 16.0);
  const QuadMesh fine = mesh.uniform_refined();
  for (const CellIndex& c : fine.cells()) EXPECT_DOUBLE_EQ(fine.side_length(c), 1.0 / 32.0);
}

TEST(AdaptiveRefine, EmptyMarksLeaveMeshUnchanged) {
  QuadMesh mesh(4);
  const QuadMesh same = mesh.refined(MarkSet{});
  EXPECT_EQ(same.num_cells(), mesh.num_cells());
  for (int i = 0; i < mesh.num_cells(); ++i) EXPECT_EQ(same.cell(i), mesh.cell(i));
}

TEST(AdaptiveRefine, SingleInteriorCellSplitsAlone) {
  QuadMesh mesh(4);
  const int id = mesh.find_cell({0, 1, 1});
  ASSERT_GE(id, 0);
  const QuadMesh next = mesh.refined(MarkSet{{id}});
  EXPECT_EQ(next.num_cells(), 16 - 1 + 4);
  EXPECT_TRUE(next.is_one_irregular());
  // Neighbors stayed at level 0.
  EXPECT_GE(next.find_cell({0, 0, 1}), 0);
  EXPECT_GE(next.find_cell({0, 2, 1}), 0);
  EXPECT_GE(next.find_cell({0, 1, 0}), 0);
  EXPECT_GE(next.find_cell({0, 1, 2}), 0);
}

TEST(AdaptiveRefine, ClosureCascadeRestoresOneIrregularity) {
  QuadMesh mesh(4);
  QuadMesh step1 = mesh.refined(MarkSet{{mesh.find_cell({0, 1, 1})}});
  // Splitting a level-1 child next to level-0 neighbors would create a
  // two-level gap; closure must also split those neighbors.
  const int child = step1.find_cell({1, 2, 2});
  ASSERT_GE(child, 0);
  const QuadMesh step2 = step1.refined(MarkSet{{child}});
  EXPECT_TRUE(step2.is_one_irregular());
  // The west and south level-0 neighbors were split by the cascade.
  EXPECT_EQ(step2.find_cell({0, 0, 1}), -1);
  EXPECT_EQ(step2.find_cell({0, 1, 0}), -1);
  // Exhaustive post-check: every emitted edge joins cells within one level.
  for (const InteriorEdge& e : step2.interior_edges()) {
    const int la = step2.cell(e.cell_a).level;
    const int lb = step2.cell(e.cell_b).level;
    EXPECT_LE(std::abs(la - lb), 1);
  }
}

TEST(InteriorEdges, UniformCounts) {
  EXPECT_EQ(QuadMesh(2).interior_edges().size(), 4u);
  EXPECT_EQ(QuadMesh(16).interior_edges().size(), 480u);  // 2*16*15
}

TEST(InteriorEdges, MatchesBruteForceOnNonconformingMesh) {
  QuadMesh mesh(4);
  const QuadMesh next = mesh.refined(MarkSet{{mesh.find_cell({0, 1, 1})}});
  const auto edges = next.interior_edges();
  EXPECT_EQ(static_cast<int>(edges.size()), brute_force_interface_count(next));
  int nonconforming = 0;
  for (const auto& e : edges) {
    if (e.nonconforming) {
      ++nonconforming;
      EXPECT_DOUBLE_EQ(e.length, next.side_length(next.cell(e.cell_b)));
      EXPECT_LT(next.cell(e.cell_a).level, next.cell(e.cell_b).level);
    } else {
      EXPECT_EQ(next.cell(e.cell_a).level, next.cell(e.cell_b).level);
    }
    EXPECT_NEAR((e.p1 - e.p0).norm(), e.length, 1e-15);
  }
  EXPECT_EQ(nonconforming, 8);  // two sub-edges on each of the four sides
}

TEST(InteriorEdges, NormalsPointFromFirstToSecond) {
  QuadMesh mesh(2);
  for (const auto& e : mesh.interior_edges()) {
    const Eigen::Vector2d dir =
        mesh.cell_center(mesh.cell(e.cell_b)) - mesh.cell_center(mesh.cell(e.cell_a));
    EXPECT_GT(dir.dot(e.normal), 0.0);
  }
}

TEST(MeshInvariants, AreaSumsToOneUnderRandomRefinement) {
  std::mt19937 rng(2024);
  QuadMesh mesh(4);
  for (int round = 0; round < 5; ++round) {
    MarkSet marks;
    std::uniform_int_distribution<int> pick(0, mesh.num_cells() - 1);
    for (int k = 0; k < mesh.num_cells() / 3 + 1; ++k) marks.cells.push_back(pick(rng));
    std::sort(marks.cells.begin(), marks.cells.end());
    marks.cells.erase(std::unique(marks.cells.begin(), marks.cells.end()),
                      marks.cells.end());
    mesh = mesh.refined(marks);
    EXPECT_NEAR(mesh.total_area(), 1.0, 1e-14);
    EXPECT_TRUE(mesh.is_one_irregular());
    EXPECT_EQ(static_cast<int>(mesh.interior_edges().size()),
              brute_force_interface_count(mesh));
  }
}

TEST(MeshInvariants, UniformEdgeCountFormula) {
  for (int n : {2, 4, 8}) {
    QuadMesh mesh(n);
    const QuadMesh fine = mesh.uniform_refined();
    const int m = 2 * n;
    EXPECT_EQ(static_cast<int>(fine.interior_edges().size()), 2 * m * (m - 1));
  }
}

TEST(Locate, FindsContainingCell) {
  QuadMesh mesh(4);
  const QuadMesh next = mesh.refined(MarkSet{{mesh.find_cell({0, 1, 1})}});
  const int id = next.locate({0.3, 0.3});
  const CellIndex c = next.cell(id);
  const Eigen::Vector2d ll = next.lower_left(c);
  const double h = next.side_length(c);
  EXPECT_LE(ll.x(), 0.3);
  EXPECT_LE(ll.y(), 0.3);
  EXPECT_GE(ll.x() + h, 0.3);
  EXPECT_GE(ll.y() + h, 0.3);
  EXPECT_EQ(c.level, 1);
}

TEST(DorflerMark, WorkedExamples) {
  // thetas {4,2,1,1}, nu 0.9: greedy reaches 20 >= 19.8 with two cells.
  const MarkSet m1 = dorfler_mark({{0, 4.0}, {1, 2.0}, {2, 1.0}, {3, 1.0}}, 0.9);
  EXPECT_EQ(m1.cells, (std::vector<int>{0, 1}));

  const MarkSet m2 = dorfler_mark({{0, 5.0}, {1, 0.0}, {2, 0.0}}, 0.9);
  EXPECT_EQ(m2.cells, (std::vector<int>{0}));

  const MarkSet m3 = dorfler_mark({{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}}, 1.0);
  EXPECT_EQ(m3.cells, (std::vector<int>{0, 1, 2, 3}));
}

TEST(DorflerMark, AllZeroThrows) {
  EXPECT_THROW(dorfler_mark({{0, 0.0}, {1, 0.0}}, 0.9), std::invalid_argument);
  EXPECT_THROW(dorfler_mark({{0, 1.0}}, 0.0), std::invalid_argument);
  EXPECT_THROW(dorfler_mark({{0, -1.0}}, 0.9), std::invalid_argument);
}

TEST(AdaptiveRefine, RejectsInvalidMarks) {
  QuadMesh mesh(2);
  EXPECT_THROW(mesh.refined(MarkSet{{99}}), std::invalid_argument);
  EXPECT_THROW(mesh.refined(MarkSet{{-1}}), std::invalid_argument);
}

TEST(DorflerMark, MatchesBruteForceMinimalCardinality) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> theta(0.0, 10.0);
  std::uniform_real_distribution<double> nu_dist(0.05, 1.0);
  std::uniform_int_distribution<int> size(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(rng);
    std::vector<double> thetas(static_cast<std::size_t>(n));
    std::vector<std::pair<int, double>> est;
    bool any = false;
    for (int i = 0; i < n; ++i) {
      thetas[static_cast<std::size_t>(i)] = theta(rng);
      any = any || thetas[static_cast<std::size_t>(i)] > 0.0;
      est.emplace_back(i, thetas[static_cast<std::size_t>(i)]);
    }
    if (!any) continue;
    const double nu = nu_dist(rng);
    const MarkSet marks = dorfler_mark(est, nu);
    EXPECT_EQ(static_cast<int>(marks.cells.size()),
              brute_force_dorfler_cardinality(thetas, nu));
    double sum = 0.0, total = 0.0;
    for (double t : thetas) total += t * t;
    for (int id : marks.cells)
      sum += thetas[static_cast<std::size_t>(id)] * thetas[static_cast<std::size_t>(id)];
    EXPECT_GE(sum, nu * total - 1e-12 * total);
  }
}

TEST(Serialization, CellListFormat) {
  QuadMesh mesh(2);
  std::ostringstream os;
  mesh.write_cell_list(os);
  EXPECT_EQ(os.str(), "0 0 0 0.5\n0 0.5 0 0.5\n0 0 0.5 0.5\n0 0.5 0.5 0.5\n");
}

}  // namespace
}  // namespace nematic
