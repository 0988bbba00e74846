#pragma once

/// @file trial_space.hpp
/// @brief Offline trial space: neighbourhood snapshots, spectral reduction,
/// multiscale partition of unity and the trial matrix Xi.

#include <algorithm>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "grid.hpp"
#include "numerics.hpp"

namespace mspg {

/// Columns over an explicit list of DOFs (local support of global vectors).
struct LocalColumns {
  IndexSet dofs;
  DenseMatrix values;  // dofs.size() x count
};

struct TrialSnapshotSet {
  int neighborhood = 0;
  IndexSet interior_dofs;
  IndexSet boundary_dofs;  // one snapshot per entry, in this order
  IndexSet closure_dofs;   // interior_dofs u boundary_dofs, sorted
  DenseMatrix snapshots;   // closure_dofs.size() x boundary_dofs.size()
};

struct TrialEigenBasis {
  Vector eigenvalues;   // every eigenvalue, ascending
  DenseMatrix reduced;  // xi_{l,j} = Phi_l v_j over closure_dofs, first m columns
};

/// Nodal values of chi_l on the closure of omega_l.
struct PartitionFunction {
  IndexSet nodes;
  Vector values;
};

enum class PouMode { msfem, bilinear };

/// How A and M are restricted to omega_l in the trial eigenproblem:
/// entries of the global matrices over closure(omega_l) DOFs, or re-assembly
/// from the fine elements of omega_l (constants then have zero image).
enum class TrialOperator { submatrix, element };

namespace detail {

inline IndexSet merge_sorted(const IndexSet& a, const IndexSet& b)
{
  IndexSet out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline std::vector<Index> positions_in(const IndexSet& subset, const IndexSet& sorted_superset)
{
  std::vector<Index> pos;
  pos.reserve(subset.size());
  for (Index v : subset) {
    auto it = std::lower_bound(sorted_superset.begin(), sorted_superset.end(), v);
    pos.push_back(Index(it - sorted_superset.begin()));
  }
  return pos;
}

inline std::string neighborhood_label(const CoarseNeighborhood& w)
{
  return "neighborhood (" + std::to_string(w.cx) + "," + std::to_string(w.cy) + ")";
}

}  // namespace detail

/// Snapshots A phi = 0 in omega_l with delta data on each boundary fine node
/// of omega_l that is not on the domain boundary.
inline TrialSnapshotSet trial_snapshots(const FineMesh& mesh, const CoarseTopology& topo, const SparseOperator& op,
                                        int l)
{
  const auto& w = topo.neighborhoods().at(l);
  TrialSnapshotSet s;
  s.neighborhood = l;
  s.interior_dofs = mesh.dofs_of(w.interior_nodes);
  s.boundary_dofs = mesh.dofs_of(w.snapshot_nodes);
  s.closure_dofs = detail::merge_sorted(s.interior_dofs, s.boundary_dofs);

  const Index nb = Index(s.boundary_dofs.size());
  const LocalSolver solver(local_submatrix(op.A, s.interior_dofs, s.interior_dofs), detail::neighborhood_label(w));
  const DenseMatrix coupling = DenseMatrix(local_submatrix(op.A, s.interior_dofs, s.boundary_dofs));
  const DenseMatrix interior = solver.solve(DenseMatrix(-coupling));

  s.snapshots = DenseMatrix::Zero(Index(s.closure_dofs.size()), nb);
  const auto ipos = detail::positions_in(s.interior_dofs, s.closure_dofs);
  const auto bpos = detail::positions_in(s.boundary_dofs, s.closure_dofs);
  for (Index k = 0; k < Index(ipos.size()); ++k)
    s.snapshots.row(ipos[k]) = interior.row(k);
  for (Index j = 0; j < nb; ++j)
    s.snapshots(bpos[j], j) = 1.0;
  return s;
}

/// Solves (A_snap^T A_snap) v = lambda M_snap v and keeps the m lowest modes.
inline TrialEigenBasis trial_eigenbasis(const FineMesh& mesh, const CoarseTopology& topo, const TrialSnapshotSet& s,
                                        const SparseOperator& op, Index m,
                                        TrialOperator restriction = TrialOperator::submatrix)
{
  const Index count = s.snapshots.cols();
  if (m < 0 || m > count)
    throw Error(ErrorCategory::config, "requested " + std::to_string(m) + " trial modes but only " +
                                           std::to_string(count) + " snapshots exist");
  SparseMatrix a_loc, m_loc;
  if (restriction == TrialOperator::submatrix) {
    a_loc = local_submatrix(op.A, s.closure_dofs, s.closure_dofs);
    m_loc = local_submatrix(op.M, s.closure_dofs, s.closure_dofs);
  }
  else {
    IndexSet nodes(s.closure_dofs.size());
    for (std::size_t k = 0; k < nodes.size(); ++k)
      nodes[k] = mesh.node_of_dof(s.closure_dofs[k]);
    const NodeRect& rect = topo.neighborhoods()[s.neighborhood].rect;
    a_loc = assemble_on_elements(mesh, op, rect, nodes, ElementMatrix::stiffness);
    m_loc = assemble_on_elements(mesh, op, rect, nodes, ElementMatrix::mass);
  }
  const DenseMatrix a_snap = s.snapshots.transpose() * (a_loc * s.snapshots);
  const DenseMatrix m_snap = s.snapshots.transpose() * (m_loc * s.snapshots);
  EigenPairs ep;
  try {
    ep = generalized_sym_eig(a_snap.transpose() * a_snap, m_snap);
  }
  catch (const Error& e) {
    throw Error(e.category(), std::string(e.what()) + " (trial snapshots of neighborhood " +
                                  std::to_string(s.neighborhood) + ")");
  }
  TrialEigenBasis out;
  out.eigenvalues = ep.values;
  out.reduced = s.snapshots * ep.vectors.leftCols(m);
  return out;
}

/// Multiscale partition of unity: chi_l is A-harmonic inside every block of
/// omega_l and equals the bilinear hat of x_l on block boundaries.
inline std::vector<PartitionFunction> partition_of_unity(const FineMesh& mesh, const CoarseTopology& topo,
                                                         const SparseOperator& op, PouMode mode = PouMode::msfem)
{
  const auto& hoods = topo.neighborhoods();
  std::vector<PartitionFunction> chi(hoods.size());
  for (std::size_t l = 0; l < hoods.size(); ++l) {
    chi[l].nodes = hoods[l].rect.closure_nodes(mesh);
    chi[l].values.resize(Index(chi[l].nodes.size()));
    for (Index k = 0; k < Index(chi[l].nodes.size()); ++k) {
      const Index v = chi[l].nodes[k];
      chi[l].values[k] = topo.hat(int(l), mesh.node_i(v), mesh.node_j(v));
    }
  }
  if (mode == PouMode::bilinear)
    return chi;

  for (const auto& block : topo.blocks()) {
    const LocalSolver solver(local_submatrix(op.A_nodes, block.interior_nodes, block.interior_nodes),
                             "block (" + std::to_string(block.bx) + "," + std::to_string(block.by) + ")");
    const SparseMatrix coupling = local_submatrix(op.A_nodes, block.interior_nodes, block.boundary_nodes);
    DenseMatrix traces(Index(block.boundary_nodes.size()), 4);
    for (int c = 0; c < 4; ++c)
      for (Index k = 0; k < traces.rows(); ++k) {
        const Index v = block.boundary_nodes[k];
        traces(k, c) = topo.hat(block.corners[c], mesh.node_i(v), mesh.node_j(v));
      }
    const DenseMatrix values = solver.solve(DenseMatrix(-(coupling * traces)));
    for (int c = 0; c < 4; ++c) {
      auto& fn = chi[block.corners[c]];
      const auto pos = detail::positions_in(block.interior_nodes, fn.nodes);
      for (Index k = 0; k < Index(pos.size()); ++k)
        fn.values[pos[k]] = values(k, c);
    }
  }
  return chi;
}

struct TrialBasis {
  SparseMatrix xi;                             // DOFs x columns
  std::vector<std::pair<int, int>> owners;     // (neighborhood, mode) per column
  std::vector<Vector> eigenvalues;             // per neighborhood
};

/// Column (l, j) = nodal product chi_l * xi_{l,j}; ordered l-major, j-minor.
/// Each neighbourhood contributes min(m, available modes) columns.
inline SparseMatrix assemble_trial_matrix(const FineMesh& mesh, const std::vector<TrialSnapshotSet>& snapshots,
                                          const std::vector<TrialEigenBasis>& bases,
                                          const std::vector<PartitionFunction>& chi, Index m,
                                          std::vector<std::pair<int, int>>* owners = nullptr)
{
  std::vector<Triplet> t;
  Index col = 0;
  if (owners)
    owners->clear();
  std::vector<double> chi_at_node(mesh.num_nodes(), 0.0);
  for (std::size_t l = 0; l < bases.size(); ++l) {
    const auto& fn = chi[snapshots[l].neighborhood];
    for (Index k = 0; k < Index(fn.nodes.size()); ++k)
      chi_at_node[fn.nodes[k]] = fn.values[k];
    const Index ml = std::min<Index>(m, bases[l].reduced.cols());
    const auto& dofs = snapshots[l].closure_dofs;
    for (Index j = 0; j < ml; ++j, ++col) {
      for (Index k = 0; k < Index(dofs.size()); ++k) {
        const double v = chi_at_node[mesh.node_of_dof(dofs[k])] * bases[l].reduced(k, j);
        if (v != 0.0)
          t.emplace_back(dofs[k], col, v);
      }
      if (owners)
        owners->emplace_back(snapshots[l].neighborhood, int(j));
    }
    for (Index v : fn.nodes)
      chi_at_node[v] = 0.0;
  }
  SparseMatrix xi(mesh.num_dofs(), col);
  xi.setFromTriplets(t.begin(), t.end());
  return xi;
}

/// Offline trial space for every coarse node; eigenvectors are kept up to
/// `max_modes` so that smaller m reuse the same data (prefix property).
class TrialSpace {
 public:
  TrialSpace(const FineMesh& mesh, const CoarseTopology& topo, const SparseOperator& op, Index max_modes,
             PouMode mode = PouMode::msfem, TrialOperator restriction = TrialOperator::submatrix)
      : mesh_(&mesh)
  {
    const int count = int(topo.neighborhoods().size());
    snapshots_.reserve(count);
    bases_.reserve(count);
    for (int l = 0; l < count; ++l) {
      snapshots_.push_back(trial_snapshots(mesh, topo, op, l));
      const Index ml = std::min<Index>(max_modes, snapshots_.back().snapshots.cols());
      bases_.push_back(trial_eigenbasis(mesh, topo, snapshots_.back(), op, ml, restriction));
    }
    chi_ = partition_of_unity(mesh, topo, op, mode);
  }

  const std::vector<TrialSnapshotSet>& snapshots() const noexcept { return snapshots_; }
  const std::vector<TrialEigenBasis>& bases() const noexcept { return bases_; }
  const std::vector<PartitionFunction>& partition() const noexcept { return chi_; }

  TrialBasis basis(Index m) const
  {
    TrialBasis out;
    out.xi = assemble_trial_matrix(*mesh_, snapshots_, bases_, chi_, m, &out.owners);
    for (const auto& b : bases_)
      out.eigenvalues.push_back(b.eigenvalues);
    return out;
  }

 private:
  const FineMesh* mesh_;
  std::vector<TrialSnapshotSet> snapshots_;
  std::vector<TrialEigenBasis> bases_;
  std::vector<PartitionFunction> chi_;
};

}  // namespace mspg
