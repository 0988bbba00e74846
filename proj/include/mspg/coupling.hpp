#pragma once

/// @file coupling.hpp
/// @brief Reduced mixed (saddle-point) system, error reporting, inf-sup
/// estimation and residual-driven online enrichment of the test space.
///
/// The reduced system is
///
///   [ Theta^T A A^T Theta   Theta^T A Xi ] [ w ]   [ Theta^T f ]
///   [ Xi^T A^T Theta        0            ] [ u ] = [ 0         ]
///
/// All products with A A^T go through two sparse products; the global
/// A A^T is never formed densely.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "grid.hpp"
#include "numerics.hpp"

namespace mspg {

struct SaddleState {
  DenseMatrix theta;  // test matrix (orthonormal columns)
  SparseMatrix xi;    // trial matrix
  DenseMatrix lifted; // A^T Theta
  DenseMatrix g_ww;   // Theta^T A A^T Theta
  DenseMatrix g_wu;   // Theta^T A Xi
  Vector rhs;         // Theta^T f
  Vector w, u;        // reduced coefficients
  Vector theta_w, xi_u;
  double rcond = 0.0;
};

namespace detail {

inline void solve_reduced(SaddleState& s)
{
  const Index nw = s.g_ww.rows(), nu = s.g_wu.cols();
  DenseMatrix k = DenseMatrix::Zero(nw + nu, nw + nu);
  k.topLeftCorner(nw, nw) = s.g_ww;
  k.topRightCorner(nw, nu) = s.g_wu;
  k.bottomLeftCorner(nu, nw) = s.g_wu.transpose();
  Vector b = Vector::Zero(nw + nu);
  b.head(nw) = s.rhs;

  Eigen::PartialPivLU<DenseMatrix> lu(k);
  // the rcond estimate can miss an exactly zero pivot, so check the pivots too
  const Vector pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double tiny = 1e3 * std::numeric_limits<double>::epsilon();
  s.rcond = std::min(lu.rcond(), pivots.minCoeff() / pivots.maxCoeff());
  if (!(s.rcond > tiny)) {
    Eigen::FullPivLU<DenseMatrix> full(k);
    throw Error(ErrorCategory::singular_system,
                "reduced saddle system is singular: rank " + std::to_string(full.rank()) + " of " +
                    std::to_string(nw + nu) + " (test block " + std::to_string(nw) + ", trial block " +
                    std::to_string(nu) + ")");
  }
  Vector x = lu.solve(b);
  x += lu.solve(b - k * x);
  s.w = x.head(nw);
  s.u = x.tail(nu);
}

inline void expand(const SparseOperator& op, SaddleState& s)
{
  (void)op;
  s.theta_w = s.theta * s.w;
  s.xi_u = s.xi * s.u;
}

}  // namespace detail

/// Builds the reduced blocks and solves the dense saddle system.
inline SaddleState solve_coupled(const SparseOperator& op, DenseMatrix theta, SparseMatrix xi)
{
  SaddleState s;
  s.theta = std::move(theta);
  s.xi = std::move(xi);
  const SparseMatrix at = op.A.transpose();
  s.lifted = at * s.theta;
  s.g_ww = s.lifted.transpose() * s.lifted;
  s.g_ww = 0.5 * (s.g_ww + s.g_ww.transpose()).eval();
  const SparseMatrix a_xi = op.A * s.xi;
  s.g_wu = (a_xi.transpose() * s.theta).transpose();
  s.rhs = s.theta.transpose() * op.f;
  detail::solve_reduced(s);
  detail::expand(op, s);
  return s;
}

/// Appends columns (already orthonormal to the current Theta) and re-solves,
/// extending the Gram blocks incrementally.
inline void append_test_columns(const SparseOperator& op, SaddleState& s, const DenseMatrix& columns)
{
  if (columns.cols() == 0)
    return;
  const Index k0 = s.theta.cols(), add = columns.cols();
  const SparseMatrix at = op.A.transpose();
  const DenseMatrix lifted_new = at * columns;

  DenseMatrix theta(s.theta.rows(), k0 + add);
  theta.leftCols(k0) = s.theta;
  theta.rightCols(add) = columns;
  s.theta.swap(theta);
  theta.resize(0, 0);

  DenseMatrix lifted(s.lifted.rows(), k0 + add);
  lifted.leftCols(k0) = s.lifted;
  lifted.rightCols(add) = lifted_new;
  s.lifted.swap(lifted);
  lifted.resize(0, 0);

  DenseMatrix g(k0 + add, k0 + add);
  g.topLeftCorner(k0, k0) = s.g_ww;
  g.topRightCorner(k0, add) = s.lifted.leftCols(k0).transpose() * lifted_new;
  g.bottomLeftCorner(add, k0) = g.topRightCorner(k0, add).transpose();
  g.bottomRightCorner(add, add) = lifted_new.transpose() * lifted_new;
  g.bottomRightCorner(add, add) = 0.5 * (g.bottomRightCorner(add, add) + g.bottomRightCorner(add, add).transpose()).eval();
  s.g_ww.swap(g);

  const SparseMatrix a_xi = op.A * s.xi;
  DenseMatrix gwu(k0 + add, s.g_wu.cols());
  gwu.topRows(k0) = s.g_wu;
  gwu.bottomRows(add) = (a_xi.transpose() * columns).transpose();
  s.g_wu.swap(gwu);

  Vector rhs(k0 + add);
  rhs.head(k0) = s.rhs;
  rhs.tail(add) = columns.transpose() * op.f;
  s.rhs.swap(rhs);

  detail::solve_reduced(s);
  detail::expand(op, s);
}

/// Full-space mode: the fine mixed system [[A A^T, A], [A^T, 0]] solved with
/// a sparse LU. Returns (w, u).
inline std::pair<Vector, Vector> solve_full_space(const SparseOperator& op)
{
  const Index n = op.A.rows();
  const SparseMatrix aat = op.A * SparseMatrix(op.A.transpose());
  std::vector<Triplet> t;
  t.reserve(std::size_t(aat.nonZeros() + 2 * op.A.nonZeros()));
  for (Index c = 0; c < n; ++c) {
    for (SparseMatrix::InnerIterator it(aat, c); it; ++it)
      t.emplace_back(it.row(), c, it.value());
    for (SparseMatrix::InnerIterator it(op.A, c); it; ++it) {
      t.emplace_back(it.row(), n + c, it.value());
      t.emplace_back(n + c, it.row(), it.value());
    }
  }
  SparseMatrix k(2 * n, 2 * n);
  k.setFromTriplets(t.begin(), t.end());
  Vector b = Vector::Zero(2 * n);
  b.head(n) = op.f;
  if (op.f.norm() == 0.0)
    return {Vector::Zero(n), Vector::Zero(n)};

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<Index>> lu;
  lu.compute(k);
  if (lu.info() != Eigen::Success)
    throw Error(ErrorCategory::singular_system, "full-space mixed system factorization failed");
  Vector x = lu.solve(b);
  for (int step = 0; step < 3; ++step)
    x += lu.solve(b - k * x);
  return {x.head(n), x.tail(n)};
}

enum class ProjectionMode { euclidean, mass };

struct ErrorReport {
  double err_ms_pct = 0.0;
  double err_proj_pct = 0.0;
  double w_norm = 0.0;
  double min_lambda_excluded = std::numeric_limits<double>::infinity();
  double infsup = std::numeric_limits<double>::quiet_NaN();
  int online_iter = 0;
};

/// Best approximation of u_h in range(Xi).
class TrialProjector {
 public:
  TrialProjector(const SparseMatrix& xi, const SparseMatrix* mass = nullptr, ProjectionMode mode = ProjectionMode::euclidean)
      : mode_(mode)
  {
    if (mode_ == ProjectionMode::euclidean) {
      q_ = orthonormalize_columns(xi, 1e-12);
    }
    else {
      xi_ = xi;
      mass_ = *mass;
      const DenseMatrix g = DenseMatrix(xi.transpose() * (*mass * xi));
      ldlt_.compute(g);
    }
  }

  Vector project(const Vector& u) const
  {
    if (mode_ == ProjectionMode::euclidean)
      return q_ * (q_.transpose() * u);
    const Vector c = ldlt_.solve(Vector(xi_.transpose() * (mass_ * u)));
    return xi_ * c;
  }

 private:
  ProjectionMode mode_;
  DenseMatrix q_;
  SparseMatrix xi_, mass_;
  Eigen::LDLT<DenseMatrix> ldlt_;
};

inline ErrorReport error_report(const SaddleState& s, const Vector& u_h, const TrialProjector& projector)
{
  ErrorReport r;
  const double un = u_h.norm();
  const double scale = un > 0.0 ? 100.0 / un : 0.0;
  r.err_ms_pct = scale * (u_h - s.xi_u).norm();
  r.err_proj_pct = scale * (u_h - projector.project(u_h)).norm();
  r.w_norm = s.theta_w.norm();
  return r;
}

/// Discrete inf-sup constant: with A^T z_q = Xi e_q,
/// G1 = Z^T (A A^T) Z, G2 = Z^T (A A^T) Theta G_ww^{-1} Theta^T (A A^T) Z and the
/// estimate is sqrt(lambda_min(G2, G1)).
inline double infsup_estimate(const SparseOperator& op, const DenseMatrix& theta, const SparseMatrix& xi)
{
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<Index>> lu;
  const SparseMatrix at = op.A.transpose();
  lu.compute(at);
  if (lu.info() != Eigen::Success)
    throw SolverFailure("adjoint factorization for the inf-sup estimate failed", 1.0);
  const DenseMatrix rhs = DenseMatrix(xi);
  DenseMatrix z = lu.solve(rhs);
  for (Index q = 0; q < z.cols(); ++q) {
    const double bn = rhs.col(q).norm();
    if (bn == 0.0)
      continue;
    z.col(q) += lu.solve(Vector(rhs.col(q) - at * z.col(q)));
    const double res = (rhs.col(q) - at * z.col(q)).norm() / bn;
    if (!(res <= 1e-8))
      throw SolverFailure("adjoint solve for trial column " + std::to_string(q), res);
  }
  const DenseMatrix lifted_z = at * z;
  const DenseMatrix lifted_theta = at * theta;
  DenseMatrix g1 = lifted_z.transpose() * lifted_z;
  DenseMatrix gww = lifted_theta.transpose() * lifted_theta;
  const DenseMatrix cross = lifted_theta.transpose() * lifted_z;
  Eigen::LDLT<DenseMatrix> ldlt(0.5 * (gww + gww.transpose()));
  DenseMatrix g2 = cross.transpose() * ldlt.solve(cross);
  g2 = 0.5 * (g2 + g2.transpose()).eval();
  const EigenPairs ep = generalized_sym_eig(g2, g1);
  if (ep.values.size() == 0)
    return 1.0;
  return std::sqrt(std::max(0.0, ep.values[0]));
}

/// Global residual (A A^T) Theta w + A Xi u - f.
inline Vector global_residual(const SparseOperator& op, const SaddleState& s)
{
  const Vector lifted = op.A.transpose() * s.theta_w;
  return Vector(op.A * lifted) + Vector(op.A * s.xi_u) - op.f;
}

/// Residual restricted to interior(omega_i) DOFs.
inline Vector residual_local(const FineMesh& mesh, const CoarseTopology& topo, const SparseOperator& op,
                             const SaddleState& s, int coarse_node)
{
  const Vector r = global_residual(op, s);
  const IndexSet dofs = mesh.dofs_of(topo.neighborhoods().at(coarse_node).interior_nodes);
  Vector out(Index(dofs.size()));
  for (Index k = 0; k < Index(dofs.size()); ++k)
    out[k] = r[dofs[k]];
  return out;
}

struct OnlineOptions {
  double droptol = 1e-10;
  double residual_tol = 1e-12;    // relative to ||f||; smaller local residuals add no column
  bool residual_per_class = true; // recompute the residual before every colour class
};

struct OnlineSweepReport {
  Index added = 0;
  double residual_norm = 0.0;  // global residual after the sweep
};

/// Residual-driven test enrichment over non-overlapping neighbourhood classes.
class OnlineEnricher {
 public:
  OnlineEnricher(const FineMesh& mesh, const CoarseTopology& topo, const SparseOperator& op,
                 OnlineOptions options = {})
      : mesh_(&mesh), topo_(&topo), op_(&op), options_(options), classes_(coloring(topo))
  {
  }

  /// One iteration: every colour class in order, re-solving after each class.
  OnlineSweepReport sweep(SaddleState& s)
  {
    OnlineSweepReport rep;
    const double fnorm = op_->f.norm();
    Vector r = global_residual(*op_, s);
    bool first = true;
    for (const auto& cls : classes_) {
      if (options_.residual_per_class && !first)
        r = global_residual(*op_, s);
      first = false;
      std::vector<Triplet> t;
      Index col = 0;
      for (int l : cls) {
        const Local& loc = local(l);
        Vector rl(Index(loc.dofs.size()));
        for (Index k = 0; k < rl.size(); ++k)
          rl[k] = r[loc.dofs[k]];
        if (rl.norm() <= options_.residual_tol * fnorm)
          continue;
        const Vector phi = loc.solver.solve(rl);
        for (Index k = 0; k < phi.size(); ++k)
          if (phi[k] != 0.0)
            t.emplace_back(loc.dofs[k], col, phi[k]);
        ++col;
      }
      if (col == 0)
        continue;
      SparseMatrix cand(op_->A.rows(), col);
      cand.setFromTriplets(t.begin(), t.end());
      const DenseMatrix fresh = orthonormal_complement(s.theta, cand, options_.droptol);
      const Index kept = fresh.cols();
      append_test_columns(*op_, s, fresh);
      rep.added += kept;
    }
    rep.residual_norm = global_residual(*op_, s).norm();
    return rep;
  }

 private:
  struct Local {
    IndexSet dofs;
    LocalSolver solver;
  };

  const Local& local(int l)
  {
    auto it = cache_.find(l);
    if (it != cache_.end())
      return it->second;
    Local loc;
    loc.dofs = mesh_->dofs_of(topo_->neighborhoods()[l].interior_nodes);
    // principal submatrix of A A^T on interior(omega_l): rows of A times their transpose
    IndexSet all(op_->A.cols());
    for (Index k = 0; k < Index(all.size()); ++k)
      all[k] = k;
    const SparseMatrix rows = local_submatrix(op_->A, loc.dofs, all);
    const SparseMatrix energy = rows * SparseMatrix(rows.transpose());
    loc.solver.compute(energy, "online neighborhood " + std::to_string(l));
    return cache_.emplace(l, std::move(loc)).first->second;
  }

  const FineMesh* mesh_;
  const CoarseTopology* topo_;
  const SparseOperator* op_;
  OnlineOptions options_;
  std::vector<std::vector<int>> classes_;
  std::map<int, Local> cache_;
};

}  // namespace mspg
