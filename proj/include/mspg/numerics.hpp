#pragma once

/// @file numerics.hpp
/// @brief Shared kernels: dense generalized symmetric eigenproblems, local
/// sparse solves, column orthonormalization and minimum-energy extension.
///
/// All kernels are stateless and reentrant.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "errors.hpp"
#include "linalg.hpp"

namespace mspg {

struct EigenPairs {
  Vector values;        // ascending
  DenseMatrix vectors;  // T-orthonormal columns matching values
};

/// Solves S v = lambda T v for symmetric S and SPD T.
inline EigenPairs generalized_sym_eig(DenseMatrix S, DenseMatrix T)
{
  if (S.rows() != S.cols() || T.rows() != T.cols() || S.rows() != T.rows())
    throw Error(ErrorCategory::index, "generalized eigenproblem needs square matrices of equal size");
  EigenPairs out;
  if (S.rows() == 0) {
    out.values.resize(0);
    out.vectors.resize(0, 0);
    return out;
  }
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 0.0)
    S = 0.5 * (S + S.transpose()).eval();
  if ((T - T.transpose()).cwiseAbs().maxCoeff() > 0.0)
    T = 0.5 * (T + T.transpose()).eval();

  Eigen::LLT<DenseMatrix> llt(T);
  const double scale = T.diagonal().cwiseAbs().maxCoeff();
  if (llt.info() != Eigen::Success || !(scale > 0.0) ||
      llt.matrixLLT().diagonal().minCoeff() <= std::sqrt(scale) * 1e-8)
    throw Error(ErrorCategory::singular_metric, "metric matrix of size " + std::to_string(T.rows()) +
                                                    " is not numerically positive definite");

  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(S, T, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success)
    throw Error(ErrorCategory::singular_metric, "generalized eigensolver did not converge");
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  return out;
}

/// Sparse LU wrapper with a residual contract, reused across right-hand sides.
class LocalSolver {
 public:
  LocalSolver() = default;
  LocalSolver(const SparseMatrix& matrix, std::string region, double tol = 1e-10) { compute(matrix, std::move(region), tol); }

  void compute(const SparseMatrix& matrix, std::string region, double tol = 1e-10)
  {
    region_ = std::move(region);
    tol_ = tol;
    matrix_ = matrix;
    matrix_.makeCompressed();
    if (matrix_.rows() != matrix_.cols())
      throw Error(ErrorCategory::local_solver, "non-square local matrix on " + region_);
    if (matrix_.rows() == 0)
      return;
    lu_ = std::make_unique<Lu>();
    lu_->compute(matrix_);
    if (lu_->info() != Eigen::Success)
      throw Error(ErrorCategory::local_solver, "singular local matrix on " + region_);
  }

  Index size() const noexcept { return matrix_.rows(); }

  DenseMatrix solve(const DenseMatrix& rhs) const
  {
    if (matrix_.rows() == 0)
      return DenseMatrix(0, rhs.cols());
    DenseMatrix x = lu_->solve(rhs);
    for (Index c = 0; c < rhs.cols(); ++c) {
      const double bnorm = rhs.col(c).norm();
      if (bnorm == 0.0) {
        x.col(c).setZero();
        continue;
      }
      Vector r = rhs.col(c) - matrix_ * x.col(c);
      double res = r.norm() / bnorm;
      for (int step = 0; step < 2 && res > tol_; ++step) {
        x.col(c) += lu_->solve(r);
        r = rhs.col(c) - matrix_ * x.col(c);
        res = r.norm() / bnorm;
      }
      if (!(res <= tol_))
        throw Error(ErrorCategory::local_solver, "local solve on " + region_ + " reached relative residual " +
                                                     std::to_string(res));
    }
    return x;
  }

  Vector solve(const Vector& rhs) const { return solve(DenseMatrix(rhs)).col(0); }

 private:
  std::string region_;
  double tol_ = 1e-10;
  SparseMatrix matrix_;
  using Lu = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<Index>>;
  std::unique_ptr<Lu> lu_;
};

inline Vector local_dirichlet_solve(const SparseMatrix& a_local, const Vector& rhs,
                                    const std::string& region = "local region")
{
  return LocalSolver(a_local, region).solve(rhs);
}

/// Growing Euclidean-orthonormal column set (block classical Gram-Schmidt,
/// applied twice). A candidate is dropped when its residual after projection
/// has norm <= droptol * (its original norm).
class OrthonormalBasis {
 public:
  OrthonormalBasis(Index rows, double droptol) : rows_(rows), droptol_(droptol) {}

  OrthonormalBasis(DenseMatrix existing, double droptol)
      : rows_(existing.rows()), size_(existing.cols()), droptol_(droptol), q_(std::move(existing))
  {
  }

  Index rows() const noexcept { return rows_; }
  Index size() const noexcept { return size_; }
  auto matrix() const { return q_.leftCols(size_); }

  void reserve(Index columns)
  {
    if (columns <= q_.cols())
      return;
    DenseMatrix grown(rows_, columns);
    if (size_ > 0)
      grown.leftCols(size_) = q_.leftCols(size_);
    q_.swap(grown);
  }

  /// Appends the accepted part of `candidates`; returns the number retained.
  template <class Mat>
  Index append(const Mat& candidates, Index block = 64)
  {
    Index kept = 0;
    for (Index c0 = 0; c0 < candidates.cols(); c0 += block) {
      const Index nb = std::min(block, candidates.cols() - c0);
      DenseMatrix v = DenseMatrix(candidates.middleCols(c0, nb));
      const Vector norms = v.colwise().norm().transpose();
      for (int pass = 0; pass < 2 && size_ > 0; ++pass) {
        const DenseMatrix coeff = q_.leftCols(size_).transpose() * v;
        v.noalias() -= q_.leftCols(size_) * coeff;
      }
      const Index start = size_;
      for (Index j = 0; j < nb; ++j) {
        if (norms[j] == 0.0)
          continue;
        Vector x = v.col(j);
        for (int pass = 0; pass < 2 && size_ > start; ++pass) {
          const Vector coeff = q_.middleCols(start, size_ - start).transpose() * x;
          x.noalias() -= q_.middleCols(start, size_ - start) * coeff;
        }
        const double rnorm = x.norm();
        if (rnorm <= droptol_ * norms[j])
          continue;
        x /= rnorm;
        if (size_ == q_.cols())
          reserve(std::max<Index>(2 * q_.cols(), size_ + nb));
        q_.col(size_++) = x;
        ++kept;
      }
    }
    return kept;
  }

  DenseMatrix release()
  {
    if (q_.cols() != size_)
      q_.conservativeResize(Eigen::NoChange, size_);
    size_ = 0;
    return std::move(q_);
  }

 private:
  Index rows_;
  Index size_ = 0;
  double droptol_;
  DenseMatrix q_;
};

/// Orthonormal columns spanning the part of `candidates` outside range(existing);
/// `existing` must have orthonormal columns.
template <class Mat>
DenseMatrix orthonormal_complement(const DenseMatrix& existing, const Mat& candidates, double droptol = 1e-10)
{
  DenseMatrix v = DenseMatrix(candidates);
  const Vector norms = v.colwise().norm().transpose();
  for (int pass = 0; pass < 2 && existing.cols() > 0; ++pass) {
    const DenseMatrix coeff = existing.transpose() * v;
    v.noalias() -= existing * coeff;
  }
  OrthonormalBasis local(v.rows(), 0.0);
  local.reserve(v.cols());
  Index kept = 0;
  for (Index j = 0; j < v.cols(); ++j) {
    const double before = v.col(j).norm();
    if (norms[j] == 0.0 || before <= droptol * norms[j])
      continue;
    // drop test relative to the original norm, after removing the new directions
    Vector x = v.col(j);
    for (int pass = 0; pass < 2 && local.size() > 0; ++pass)
      x -= local.matrix() * (local.matrix().transpose() * x).eval();
    if (x.norm() <= droptol * norms[j])
      continue;
    kept += local.append(x);
  }
  (void)kept;
  return local.release();
}

template <class Mat>
DenseMatrix orthonormalize_columns(const Mat& columns, double droptol = 1e-10)
{
  OrthonormalBasis basis(columns.rows(), droptol);
  basis.reserve(columns.cols());
  basis.append(columns);
  return basis.release();
}

struct ExtensionResult {
  DenseMatrix values;  // one column per trace, over the region's DOFs
  bool ridge_applied = false;
};

/// Minimum-energy extension: for each trace column t, returns v with
/// v[constrained] = t minimizing v^T B v, i.e. B_ff v_f = -B_fc t.
/// `constrained` holds positions inside the region numbering of B.
inline ExtensionResult min_energy_extension(const SparseMatrix& energy, const IndexSet& constrained,
                                            const DenseMatrix& traces, const std::string& region = "region")
{
  const Index dim = energy.rows();
  if (Index(constrained.size()) != traces.rows())
    throw Error(ErrorCategory::index, "trace rows do not match constrained DOF count");
  std::vector<char> is_constrained(dim, 0);
  for (Index c : constrained) {
    if (c < 0 || c >= dim)
      throw Error(ErrorCategory::index, "constrained position " + std::to_string(c) + " outside region");
    is_constrained[c] = 1;
  }
  IndexSet free;
  for (Index k = 0; k < dim; ++k)
    if (!is_constrained[k])
      free.push_back(k);

  auto extract = [&](const IndexSet& rows, const IndexSet& cols) {
    std::vector<Index> rp(dim, -1);
    for (Index k = 0; k < Index(rows.size()); ++k)
      rp[rows[k]] = k;
    std::vector<Triplet> t;
    for (Index c = 0; c < Index(cols.size()); ++c)
      for (SparseMatrix::InnerIterator it(energy, cols[c]); it; ++it)
        if (rp[it.row()] >= 0)
          t.emplace_back(rp[it.row()], c, it.value());
    SparseMatrix out(Index(rows.size()), Index(cols.size()));
    out.setFromTriplets(t.begin(), t.end());
    return out;
  };

  ExtensionResult result;
  result.values = DenseMatrix::Zero(dim, traces.cols());
  for (Index k = 0; k < Index(constrained.size()); ++k)
    result.values.row(constrained[k]) = traces.row(k);
  if (free.empty() || traces.cols() == 0)
    return result;

  SparseMatrix bff = extract(free, free);
  const SparseMatrix bfc = extract(free, constrained);
  const DenseMatrix rhs = -(bfc * traces);

  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  auto factor_ok = [&]() {
    ldlt.compute(bff);
    if (ldlt.info() != Eigen::Success)
      return false;
    const Vector d = ldlt.vectorD();
    return d.minCoeff() > 1e-14 * std::max(d.maxCoeff(), 0.0);
  };
  if (!factor_ok()) {
    double trace = 0.0;
    for (Index k = 0; k < bff.rows(); ++k)
      trace += bff.coeff(k, k);
    const double ridge = 1e-12 * trace / double(bff.rows());
    SparseMatrix id(bff.rows(), bff.cols());
    id.setIdentity();
    bff += ridge * id;
    result.ridge_applied = true;
    if (!(ridge > 0.0) || !factor_ok())
      throw Error(ErrorCategory::regularization,
                  "unconstrained energy block on " + region + " is singular even after ridge regularization");
  }
  const DenseMatrix vf = ldlt.solve(rhs);
  for (Index k = 0; k < Index(free.size()); ++k)
    result.values.row(free[k]) = vf.row(k);
  return result;
}

}  // namespace mspg
