#include <random>

#include <gtest/gtest.h>

#include "mspg/numerics.hpp"
#include "oracles.hpp"

using namespace mspg;

namespace {

DenseMatrix random_matrix(Index rows, Index cols, unsigned seed)
{
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      m(i, j) = dist(gen);
  return m;
}

DenseMatrix random_spd(Index n, unsigned seed)
{
  const DenseMatrix g = random_matrix(n, n, seed);
  return g * g.transpose() + 0.5 * DenseMatrix::Identity(n, n);
}

SparseMatrix tridiagonal(Index n, double diag, double off)
{
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, diag);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, off);
      t.emplace_back(i + 1, i, off);
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

TEST(GeneralizedEig, MatchesJacobiOracle)
{
  const DenseMatrix s0 = random_matrix(7, 7, 3);
  const DenseMatrix s = s0 + s0.transpose();
  const DenseMatrix t = random_spd(7, 4);
  const EigenPairs ep = generalized_sym_eig(s, t);
  const auto ref = oracle::generalized_eigenvalues(oracle::to_mat(s), oracle::to_mat(t));
  ASSERT_EQ(ep.values.size(), 7);
  for (int k = 0; k < 7; ++k)
    EXPECT_NEAR(ep.values[k], ref[k], 1e-10 * (1.0 + std::abs(ref[k])));
  // T-orthonormal eigenvectors satisfying S v = lambda T v
  const DenseMatrix vtv = ep.vectors.transpose() * t * ep.vectors;
  EXPECT_LT((vtv - DenseMatrix::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-10);
  for (int k = 0; k < 7; ++k)
    EXPECT_LT((s * ep.vectors.col(k) - ep.values[k] * t * ep.vectors.col(k)).norm(), 1e-9);
}

TEST(GeneralizedEig, SingularMetricRejected)
{
  DenseMatrix t = DenseMatrix::Identity(3, 3);
  t(2, 2) = 0.0;
  try {
    generalized_sym_eig(DenseMatrix::Identity(3, 3), t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::singular_metric);
  }
}

TEST(LocalSolver, TridiagonalInverseColumn)
{
  // (T^-1)_{i,1} = (n + 1 - i) / (n + 1) for T = tridiag(-1, 2, -1), 1-based
  const Index n = 9;
  const LocalSolver solver(tridiagonal(n, 2.0, -1.0), "line");
  Vector e1 = Vector::Zero(n);
  e1[0] = 1.0;
  const Vector x = solver.solve(e1);
  for (Index i = 0; i < n; ++i)
    EXPECT_NEAR(x[i], double(n - i) / double(n + 1), 1e-13);
}

TEST(LocalSolver, SingularMatrixRejected)
{
  SparseMatrix m = tridiagonal(4, 2.0, -1.0);
  m.coeffRef(0, 0) = 1.0;
  m.coeffRef(3, 3) = 1.0;  // graph Laplacian of a path: constants in the kernel
  try {
    LocalSolver s(m, "path");
    const Vector x = s.solve(Vector(Vector::Ones(4)));
    FAIL() << "solved a singular system, |x| = " << x.norm();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::local_solver);
  }
}

TEST(LocalSolver, EmptyRegion)
{
  const LocalSolver s(SparseMatrix(0, 0), "empty");
  EXPECT_EQ(s.solve(DenseMatrix(0, 3)).cols(), 3);
}

TEST(Orthonormalize, RankAndSpan)
{
  DenseMatrix c(30, 8);
  c.leftCols(5) = random_matrix(30, 5, 11);
  c.col(5) = c.col(0) - 2.0 * c.col(3);
  c.col(6) = Vector::Zero(30);
  c.col(7) = 0.5 * c.col(1) + c.col(2) + c.col(4);
  const DenseMatrix q = orthonormalize_columns(c);
  EXPECT_EQ(q.cols(), oracle::rank(oracle::to_mat(c)));
  EXPECT_EQ(q.cols(), 5);
  EXPECT_LT((q.transpose() * q - DenseMatrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((c - q * (q.transpose() * c)).norm(), 1e-12 * c.norm());
}

TEST(Orthonormalize, IllConditionedColumnsStayOrthogonal)
{
  DenseMatrix c = random_matrix(50, 12, 5);
  for (Index j = 1; j < 12; ++j)
    c.col(j) = c.col(0) + 1e-7 * c.col(j);
  const DenseMatrix q = orthonormalize_columns(c);
  EXPECT_EQ(q.cols(), 12);
  EXPECT_LT((q.transpose() * q - DenseMatrix::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Orthonormalize, IncrementalAppendMatchesBatch)
{
  const DenseMatrix c = random_matrix(40, 10, 17);
  OrthonormalBasis inc(40, 1e-10);
  inc.append(c.leftCols(4));
  inc.append(c.rightCols(6));
  const DenseMatrix q1 = inc.release();
  const DenseMatrix q2 = orthonormalize_columns(c);
  // same nested spans: the projectors coincide
  EXPECT_LT((q1 * q1.transpose() - q2 * q2.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Orthonormalize, ComplementIsOrthogonalToExisting)
{
  const DenseMatrix existing = orthonormalize_columns(random_matrix(25, 6, 1));
  DenseMatrix cand(25, 4);
  cand.leftCols(2) = random_matrix(25, 2, 2);
  cand.col(2) = existing.col(1) * 3.0;         // inside the existing range
  cand.col(3) = existing.col(0) + cand.col(0);  // depends on an earlier candidate
  const DenseMatrix fresh = orthonormal_complement(existing, cand);
  EXPECT_EQ(fresh.cols(), 2);
  EXPECT_LT((existing.transpose() * fresh).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((fresh.transpose() * fresh - DenseMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MinEnergyExtension, MatchesKktOracle)
{
  const Index n = 9;
  const DenseMatrix b = random_spd(n, 21);
  const IndexSet fixed{1, 4, 7};
  const DenseMatrix traces = random_matrix(3, 2, 22);
  const ExtensionResult ext = min_energy_extension(b.sparseView(), fixed, traces);
  EXPECT_FALSE(ext.ridge_applied);
  for (Index c = 0; c < 2; ++c) {
    const auto ref = oracle::constrained_minimizer(oracle::to_mat(b), {1, 4, 7},
                                                   {traces(0, c), traces(1, c), traces(2, c)});
    for (Index i = 0; i < n; ++i)
      EXPECT_NEAR(ext.values(i, c), ref[i], 1e-11);
  }
}

TEST(MinEnergyExtension, HarmonicOnAPath)
{
  // B = 1D Dirichlet Laplacian pattern, endpoints fixed: minimiser is linear
  const Index n = 6;
  const SparseMatrix b = tridiagonal(n, 2.0, -1.0);
  DenseMatrix trace(2, 1);
  trace << 0.0, 5.0;
  SparseMatrix path = b;
  path.coeffRef(0, 0) = 1.0;
  path.coeffRef(n - 1, n - 1) = 1.0;
  const ExtensionResult ext = min_energy_extension(path, {0, n - 1}, trace);
  for (Index i = 0; i < n; ++i)
    EXPECT_NEAR(ext.values(i, 0), double(i), 1e-12);
}

TEST(MinEnergyExtension, RidgeForSingularFreeBlock)
{
  // free block has a zero row/column: needs the ridge fallback
  DenseMatrix b = DenseMatrix::Zero(4, 4);
  b(0, 0) = 2.0;
  b(1, 1) = 1.0;
  b(0, 1) = b(1, 0) = -1.0;
  const ExtensionResult ext = min_energy_extension(b.sparseView(), {0}, DenseMatrix::Ones(1, 1));
  EXPECT_TRUE(ext.ridge_applied);
  EXPECT_NEAR(ext.values(1, 0), 1.0, 1e-8);
  EXPECT_TRUE(ext.values.allFinite());
}

TEST(MinEnergyExtension, TraceSizeMismatch)
{
  try {
    min_energy_extension(random_spd(3, 1).sparseView(), {0}, DenseMatrix::Ones(2, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::index);
  }
}
