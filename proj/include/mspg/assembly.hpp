#pragma once

/// @file assembly.hpp
/// @brief Q1 assembly of the convection-diffusion operator, mass matrix and load.
///
/// (A)_ij = a(phi_j, phi_i) = int kappa grad phi_j . grad phi_i + (b . grad phi_j) phi_i,
/// integrated with 2x2 Gauss quadrature per fine element. Dirichlet nodes are
/// eliminated (rows and columns removed) so that A^T is the discrete adjoint.
/// The un-eliminated all-node matrices are kept alongside for local problems
/// whose traces touch the domain boundary.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "linalg.hpp"

namespace mspg {

struct CoefficientField {
  std::function<double(double, double)> kappa;
  std::function<std::array<double, 2>(double, double)> velocity;
  std::function<double(double, double)> source;
};

struct SparseOperator {
  SparseMatrix A;        // stiffness over DOFs
  SparseMatrix M;        // mass over DOFs
  Vector f;              // load over DOFs
  SparseMatrix A_nodes;  // stiffness over all lattice nodes (no Dirichlet elimination)
  SparseMatrix M_nodes;
  Vector f_nodes;
  // per-element 4x4 blocks (row-major, local node order of q1_shape), element ey*n+ex
  std::vector<std::array<double, 16>> element_A;
  std::vector<std::array<double, 16>> element_M;
};

namespace detail {

struct GaussQ1 {
  // points on [0,1] and equal weights 1/2 per direction
  static constexpr double lo = 0.5 - 0.28867513459481288225;  // 0.5 - 1/(2 sqrt 3)
  static constexpr double hi = 0.5 + 0.28867513459481288225;
  static constexpr std::array<double, 2> pts{lo, hi};
};

/// Bilinear shape values / reference gradients at (s, t) in [0,1]^2.
/// Local order: (0,0), (1,0), (0,1), (1,1).
inline void q1_shape(double s, double t, std::array<double, 4>& phi, std::array<double, 4>& ds,
                     std::array<double, 4>& dt)
{
  phi = {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
  ds = {-(1 - t), (1 - t), -t, t};
  dt = {-(1 - s), -s, (1 - s), s};
}

/// Selection matrix P (dofs x nodes) with P(d, node_of_dof(d)) = 1.
inline SparseMatrix dof_selection(const FineMesh& mesh)
{
  SparseMatrix P(mesh.num_dofs(), mesh.num_nodes());
  std::vector<Triplet> t;
  t.reserve(mesh.num_dofs());
  for (Index d = 0; d < mesh.num_dofs(); ++d)
    t.emplace_back(d, mesh.node_of_dof(d), 1.0);
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

}  // namespace detail

/// Assembles over all lattice nodes; the DOF operators are the interior restriction.
inline SparseOperator assemble(const FineMesh& mesh, const CoefficientField& field)
{
  const int n = mesh.subdivisions();
  const double h = mesh.h();
  const double w = 0.25 * h * h;  // quadrature weight per point
  std::vector<Triplet> ta, tm;
  ta.reserve(std::size_t(16) * n * n);
  tm.reserve(std::size_t(16) * n * n);
  Vector f_nodes = Vector::Zero(mesh.num_nodes());
  std::vector<std::array<double, 16>> element_A(std::size_t(n) * n), element_M(std::size_t(n) * n);

  std::array<double, 4> phi{}, ds{}, dt{};
  for (int ey = 0; ey < n; ++ey)
    for (int ex = 0; ex < n; ++ex) {
      const std::array<Index, 4> nodes{mesh.node(ex, ey), mesh.node(ex + 1, ey), mesh.node(ex, ey + 1),
                                       mesh.node(ex + 1, ey + 1)};
      double ka[4][4] = {};
      double ma[4][4] = {};
      double fa[4] = {};
      for (double s : detail::GaussQ1::pts)
        for (double t : detail::GaussQ1::pts) {
          const double x = (ex + s) * h, y = (ey + t) * h;
          const double kappa = field.kappa(x, y);
          if (!(kappa > 0.0))
            throw Error(ErrorCategory::invalid_coefficient, "kappa must be positive, got " +
                                                                std::to_string(kappa) + " at (" +
                                                                std::to_string(x) + ", " + std::to_string(y) + ")");
          const auto b = field.velocity(x, y);
          const double src = field.source(x, y);
          detail::q1_shape(s, t, phi, ds, dt);
          for (int a = 0; a < 4; ++a) {
            const double gax = ds[a] / h, gay = dt[a] / h;
            fa[a] += w * src * phi[a];
            for (int c = 0; c < 4; ++c) {
              const double gcx = ds[c] / h, gcy = dt[c] / h;
              ka[a][c] += w * (kappa * (gcx * gax + gcy * gay) + (b[0] * gcx + b[1] * gcy) * phi[a]);
              ma[a][c] += w * phi[c] * phi[a];
            }
          }
        }
      auto& eA = element_A[std::size_t(ey) * n + ex];
      auto& eM = element_M[std::size_t(ey) * n + ex];
      for (int a = 0; a < 4; ++a) {
        f_nodes[nodes[a]] += fa[a];
        for (int c = 0; c < 4; ++c) {
          eA[4 * a + c] = ka[a][c];
          eM[4 * a + c] = ma[a][c];
          ta.emplace_back(nodes[a], nodes[c], ka[a][c]);
          tm.emplace_back(nodes[a], nodes[c], ma[a][c]);
        }
      }
    }

  SparseOperator op;
  op.A_nodes.resize(mesh.num_nodes(), mesh.num_nodes());
  op.A_nodes.setFromTriplets(ta.begin(), ta.end());
  op.M_nodes.resize(mesh.num_nodes(), mesh.num_nodes());
  op.M_nodes.setFromTriplets(tm.begin(), tm.end());
  op.f_nodes = std::move(f_nodes);
  op.element_A = std::move(element_A);
  op.element_M = std::move(element_M);

  const SparseMatrix P = detail::dof_selection(mesh);
  op.A = P * op.A_nodes * P.transpose();
  op.M = P * op.M_nodes * P.transpose();
  op.A.makeCompressed();
  op.M.makeCompressed();
  op.f = P * op.f_nodes;
  return op;
}

/// Entrywise extraction mat(rows, cols); no re-assembly.
inline SparseMatrix local_submatrix(const SparseMatrix& mat, const IndexSet& rows, const IndexSet& cols)
{
  std::vector<Index> row_pos(mat.rows(), -1);
  for (Index k = 0; k < Index(rows.size()); ++k) {
    if (rows[k] < 0 || rows[k] >= mat.rows())
      throw Error(ErrorCategory::index, "row index " + std::to_string(rows[k]) + " outside [0, " +
                                            std::to_string(mat.rows()) + ")");
    row_pos[rows[k]] = k;
  }
  std::vector<Triplet> t;
  for (Index c = 0; c < Index(cols.size()); ++c) {
    if (cols[c] < 0 || cols[c] >= mat.cols())
      throw Error(ErrorCategory::index, "column index " + std::to_string(cols[c]) + " outside [0, " +
                                            std::to_string(mat.cols()) + ")");
    for (SparseMatrix::InnerIterator it(mat, cols[c]); it; ++it)
      if (row_pos[it.row()] >= 0)
        t.emplace_back(row_pos[it.row()], c, it.value());
  }
  SparseMatrix out(Index(rows.size()), Index(cols.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

enum class ElementMatrix { stiffness, mass };

/// Matrix assembled only from the fine elements inside `elements` (node
/// rectangle), restricted to the listed lattice nodes. Unlike local_submatrix
/// this drops the contributions of elements outside the rectangle.
inline SparseMatrix assemble_on_elements(const FineMesh& mesh, const SparseOperator& op, const NodeRect& elements,
                                         const IndexSet& nodes, ElementMatrix which = ElementMatrix::stiffness)
{
  const int n = mesh.subdivisions();
  if (elements.i0 < 0 || elements.j0 < 0 || elements.i1 > n || elements.j1 > n)
    throw Error(ErrorCategory::index, "element rectangle outside the mesh");
  const auto& blocks = which == ElementMatrix::stiffness ? op.element_A : op.element_M;
  std::vector<Index> pos(mesh.num_nodes(), -1);
  for (Index k = 0; k < Index(nodes.size()); ++k)
    pos[nodes[k]] = k;
  std::vector<Triplet> t;
  for (int ey = elements.j0; ey < elements.j1; ++ey)
    for (int ex = elements.i0; ex < elements.i1; ++ex) {
      const std::array<Index, 4> en{mesh.node(ex, ey), mesh.node(ex + 1, ey), mesh.node(ex, ey + 1),
                                    mesh.node(ex + 1, ey + 1)};
      const auto& e = blocks[std::size_t(ey) * n + ex];
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 4; ++c)
          if (pos[en[a]] >= 0 && pos[en[c]] >= 0)
            t.emplace_back(pos[en[a]], pos[en[c]], e[4 * a + c]);
    }
  SparseMatrix out(Index(nodes.size()), Index(nodes.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

/// Fine reference solve A u = f with a sparse LU factorization plus a few
/// steps of iterative refinement; throws SolverFailure when the relative
/// residual stays above tol.
inline Vector solve_fine_reference(const SparseOperator& op, double tol = 1e-10)
{
  const double fnorm = op.f.norm();
  if (fnorm == 0.0)
    return Vector::Zero(op.A.rows());

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<Index>> lu;
  lu.compute(op.A);
  if (lu.info() != Eigen::Success)
    throw SolverFailure("sparse LU factorization of the fine operator failed", 1.0);

  Vector u = lu.solve(op.f);
  double res = (op.f - op.A * u).norm() / fnorm;
  for (int step = 0; step < 3 && res > tol; ++step) {
    u += lu.solve(op.f - op.A * u);
    res = (op.f - op.A * u).norm() / fnorm;
  }
  if (!(res <= tol))
    throw SolverFailure("fine reference solve did not reach tolerance " + std::to_string(tol), res);
  return u;
}

}  // namespace mspg
