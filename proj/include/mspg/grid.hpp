#pragma once

/// @file grid.hpp
/// @brief Structured fine mesh on the unit square and the nested coarse topology.
///
/// Fine nodes are the lattice points (i/n, j/n), 0 <= i, j <= n, numbered
/// row-major: node = j * (n + 1) + i. Homogeneous Dirichlet data removes the
/// nodes on the domain boundary; the remaining (n - 1)^2 interior nodes are the
/// degrees of freedom, again numbered row-major.
///
/// All index sets in the coarse topology are stored as *node* indices so that
/// local problems can carry inhomogeneous traces on the domain boundary. Use
/// FineMesh::dofs_of() to map them onto DOF numbering.

#include <algorithm>
#include <cmath>
#include <array>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace mspg {

class FineMesh {
 public:
  explicit FineMesh(int n) : n_(n)
  {
    if (n < 2)
      throw Error(ErrorCategory::invalid_mesh, "fine mesh needs n >= 2, got " + std::to_string(n));
    const Index nodes = Index(n + 1) * (n + 1);
    dof_of_node_.assign(nodes, -1);
    node_of_dof_.reserve(Index(n - 1) * (n - 1));
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n; ++i) {
        dof_of_node_[node(i, j)] = Index(node_of_dof_.size());
        node_of_dof_.push_back(node(i, j));
      }
  }

  int subdivisions() const noexcept { return n_; }
  double h() const noexcept { return 1.0 / n_; }
  Index num_nodes() const noexcept { return Index(dof_of_node_.size()); }
  Index num_dofs() const noexcept { return Index(node_of_dof_.size()); }

  Index node(int i, int j) const noexcept { return Index(j) * (n_ + 1) + i; }
  int node_i(Index node) const noexcept { return int(node % (n_ + 1)); }
  int node_j(Index node) const noexcept { return int(node / (n_ + 1)); }
  std::array<double, 2> coords(Index node) const noexcept
  {
    return {double(node_i(node)) / n_, double(node_j(node)) / n_};
  }
  bool on_boundary(Index node) const noexcept { return dof_of_node_[node] < 0; }

  /// DOF index of a node, or -1 for a Dirichlet (boundary) node.
  Index dof_of_node(Index node) const noexcept { return dof_of_node_[node]; }
  Index node_of_dof(Index dof) const noexcept { return node_of_dof_[dof]; }

  /// Drops Dirichlet nodes and renumbers; order is preserved.
  IndexSet dofs_of(const IndexSet& nodes) const
  {
    IndexSet out;
    out.reserve(nodes.size());
    for (Index v : nodes)
      if (dof_of_node_[v] >= 0)
        out.push_back(dof_of_node_[v]);
    return out;
  }

  /// Restricts a node vector to DOF numbering.
  Vector node_to_dof(const Vector& node_values) const
  {
    Vector out(num_dofs());
    for (Index d = 0; d < num_dofs(); ++d)
      out[d] = node_values[node_of_dof_[d]];
    return out;
  }

 private:
  int n_;
  std::vector<Index> dof_of_node_;
  IndexSet node_of_dof_;
};

inline FineMesh build_fine_mesh(int n) { return FineMesh(n); }

/// Inclusive rectangle of lattice nodes [i0, i1] x [j0, j1].
struct NodeRect {
  int i0 = 0, j0 = 0, i1 = 0, j1 = 0;

  bool contains(int i, int j) const noexcept { return i >= i0 && i <= i1 && j >= j0 && j <= j1; }
  bool strictly_contains(int i, int j) const noexcept { return i > i0 && i < i1 && j > j0 && j < j1; }

  IndexSet interior_nodes(const FineMesh& mesh) const
  {
    IndexSet out;
    for (int j = j0 + 1; j < j1; ++j)
      for (int i = i0 + 1; i < i1; ++i)
        out.push_back(mesh.node(i, j));
    return out;
  }

  IndexSet boundary_nodes(const FineMesh& mesh) const
  {
    IndexSet out;
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        if (!strictly_contains(i, j))
          out.push_back(mesh.node(i, j));
    return out;
  }

  IndexSet closure_nodes(const FineMesh& mesh) const
  {
    IndexSet out;
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        out.push_back(mesh.node(i, j));
    return out;
  }
};

struct CoarseBlock {
  int bx = 0, by = 0;
  NodeRect rect;
  IndexSet interior_nodes;
  IndexSet boundary_nodes;
  std::array<int, 4> corners{};  // coarse-node ids: (bx,by), (bx+1,by), (bx,by+1), (bx+1,by+1)
};

/// Coarse node x_l together with its neighbourhood omega_l (1, 2 or 4 blocks).
struct CoarseNeighborhood {
  int cx = 0, cy = 0;
  bool interior = false;
  std::vector<int> blocks;
  NodeRect rect;
  IndexSet interior_nodes;  // open interior of omega_l
  IndexSet boundary_nodes;  // every lattice node on the boundary of omega_l
  IndexSet snapshot_nodes;  // boundary nodes of omega_l that are not on the domain boundary
};

enum class EdgeOrientation { vertical, horizontal };

/// Interior coarse edge E_k shared by exactly two blocks.
struct CoarseEdge {
  EdgeOrientation orientation = EdgeOrientation::vertical;
  int cx = 0, cy = 0;  // coarse node at the lower/left end
  std::array<int, 2> blocks{};
  std::array<int, 2> end_nodes{};  // coarse-node ids of both endpoints
  IndexSet interior_nodes;          // fine nodes strictly inside E_k, ordered along the edge
  NodeRect region;                  // closure of K(E_k)
  IndexSet region_nodes;            // D_k = interior(K1) u interior(K2) u interior(E_k)
};

class CoarseTopology {
 public:
  CoarseTopology(const FineMesh& mesh, int coarse) : nc_(coarse), n_(mesh.subdivisions())
  {
    if (coarse < 2)
      throw Error(ErrorCategory::incompatible_grid, "coarse grid needs Nc >= 2, got " + std::to_string(coarse));
    if (n_ % coarse != 0)
      throw Error(ErrorCategory::incompatible_grid,
                  "coarse subdivisions " + std::to_string(coarse) + " do not divide fine subdivisions " +
                      std::to_string(n_));
    r_ = n_ / coarse;

    for (int by = 0; by < nc_; ++by)
      for (int bx = 0; bx < nc_; ++bx) {
        CoarseBlock b;
        b.bx = bx;
        b.by = by;
        b.rect = {bx * r_, by * r_, (bx + 1) * r_, (by + 1) * r_};
        b.interior_nodes = b.rect.interior_nodes(mesh);
        b.boundary_nodes = b.rect.boundary_nodes(mesh);
        b.corners = {coarse_node_id(bx, by), coarse_node_id(bx + 1, by), coarse_node_id(bx, by + 1),
                     coarse_node_id(bx + 1, by + 1)};
        blocks_.push_back(std::move(b));
      }

    for (int cy = 0; cy <= nc_; ++cy)
      for (int cx = 0; cx <= nc_; ++cx) {
        CoarseNeighborhood w;
        w.cx = cx;
        w.cy = cy;
        w.interior = cx > 0 && cx < nc_ && cy > 0 && cy < nc_;
        for (int by = std::max(cy - 1, 0); by <= std::min(cy, nc_ - 1); ++by)
          for (int bx = std::max(cx - 1, 0); bx <= std::min(cx, nc_ - 1); ++bx)
            w.blocks.push_back(block_id(bx, by));
        w.rect = {std::max(cx - 1, 0) * r_, std::max(cy - 1, 0) * r_, std::min(cx + 1, nc_) * r_,
                  std::min(cy + 1, nc_) * r_};
        w.interior_nodes = w.rect.interior_nodes(mesh);
        w.boundary_nodes = w.rect.boundary_nodes(mesh);
        for (Index v : w.boundary_nodes)
          if (!mesh.on_boundary(v))
            w.snapshot_nodes.push_back(v);
        neighborhoods_.push_back(std::move(w));
      }

    // vertical interior edges x = cx * H, then horizontal ones y = cy * H
    for (int cy = 0; cy < nc_; ++cy)
      for (int cx = 1; cx < nc_; ++cx) {
        CoarseEdge e;
        e.orientation = EdgeOrientation::vertical;
        e.cx = cx;
        e.cy = cy;
        e.blocks = {block_id(cx - 1, cy), block_id(cx, cy)};
        e.end_nodes = {coarse_node_id(cx, cy), coarse_node_id(cx, cy + 1)};
        for (int t = 1; t < r_; ++t)
          e.interior_nodes.push_back(mesh.node(cx * r_, cy * r_ + t));
        e.region = {(cx - 1) * r_, cy * r_, (cx + 1) * r_, (cy + 1) * r_};
        e.region_nodes = e.region.interior_nodes(mesh);
        edges_.push_back(std::move(e));
      }
    for (int cy = 1; cy < nc_; ++cy)
      for (int cx = 0; cx < nc_; ++cx) {
        CoarseEdge e;
        e.orientation = EdgeOrientation::horizontal;
        e.cx = cx;
        e.cy = cy;
        e.blocks = {block_id(cx, cy - 1), block_id(cx, cy)};
        e.end_nodes = {coarse_node_id(cx, cy), coarse_node_id(cx + 1, cy)};
        for (int t = 1; t < r_; ++t)
          e.interior_nodes.push_back(mesh.node(cx * r_ + t, cy * r_));
        e.region = {cx * r_, (cy - 1) * r_, (cx + 1) * r_, (cy + 1) * r_};
        e.region_nodes = e.region.interior_nodes(mesh);
        edges_.push_back(std::move(e));
      }
  }

  int coarse_subdivisions() const noexcept { return nc_; }
  int ratio() const noexcept { return r_; }
  double H() const noexcept { return 1.0 / nc_; }

  int block_id(int bx, int by) const noexcept { return by * nc_ + bx; }
  int coarse_node_id(int cx, int cy) const noexcept { return cy * (nc_ + 1) + cx; }

  const std::vector<CoarseBlock>& blocks() const noexcept { return blocks_; }
  const std::vector<CoarseNeighborhood>& neighborhoods() const noexcept { return neighborhoods_; }
  const std::vector<CoarseEdge>& edges() const noexcept { return edges_; }

  std::vector<int> interior_coarse_nodes() const
  {
    std::vector<int> out;
    for (int l = 0; l < int(neighborhoods_.size()); ++l)
      if (neighborhoods_[l].interior)
        out.push_back(l);
    return out;
  }

  /// Value at fine node (i, j) of the bilinear coarse hat attached to coarse node l.
  double hat(int l, int i, int j) const noexcept
  {
    const auto& w = neighborhoods_[l];
    const double dx = std::abs(double(i) / r_ - w.cx);
    const double dy = std::abs(double(j) / r_ - w.cy);
    if (dx >= 1.0 || dy >= 1.0)
      return 0.0;
    return (1.0 - dx) * (1.0 - dy);
  }

 private:
  int nc_;
  int n_;
  int r_ = 0;
  std::vector<CoarseBlock> blocks_;
  std::vector<CoarseNeighborhood> neighborhoods_;
  std::vector<CoarseEdge> edges_;
};

inline CoarseTopology build_coarse_topology(const FineMesh& mesh, int coarse) { return CoarseTopology(mesh, coarse); }

/// Interior coarse nodes split into parity classes (cx mod 2, cy mod 2). Within
/// one class the neighbourhood interiors are pairwise disjoint. Empty classes
/// are omitted; class order is (0,0), (1,0), (0,1), (1,1).
inline std::vector<std::vector<int>> coloring(const CoarseTopology& topo)
{
  std::array<std::vector<int>, 4> classes;
  for (int l : topo.interior_coarse_nodes()) {
    const auto& w = topo.neighborhoods()[l];
    classes[(w.cx % 2) + 2 * (w.cy % 2)].push_back(l);
  }
  std::vector<std::vector<int>> out;
  for (auto& c : classes)
    if (!c.empty())
      out.push_back(std::move(c));
  return out;
}

}  // namespace mspg
