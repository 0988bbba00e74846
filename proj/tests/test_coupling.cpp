#include <cmath>

#include <gtest/gtest.h>

#include "mspg/assembly.hpp"
#include "mspg/coupling.hpp"
#include "mspg/test_space.hpp"
#include "mspg/trial_space.hpp"
#include "oracles.hpp"

using namespace mspg;

namespace {

CoefficientField vortex(double alpha, double kappa = 0.05)
{
  const double pi = 3.14159265358979323846;
  return {[=](double, double) { return kappa; },
          [=](double x, double y) {
            return std::array<double, 2>{alpha * std::sin(4 * pi * x) * std::cos(4 * pi * y),
                                         -alpha * std::cos(4 * pi * x) * std::sin(4 * pi * y)};
          },
          [](double, double) { return 1.0; }};
}

/// Small pipeline with every piece exposed.
struct Pipeline {
  FineMesh mesh;
  CoarseTopology topo;
  SparseOperator op;
  Vector u_h;
  TrialSpace trial;
  TrialBasis tb;
  BlockAdjointProblems adj;
  std::vector<TestSnapshotW1> w1;
  std::vector<TestSnapshotW2> w2;
  std::vector<TestSnapshotW3> w3;
  std::vector<EdgeSpectralResult> edge_spectra;

  Pipeline(int n, int nc, int m, const CoefficientField& f, Eigenproblem p = Eigenproblem::edge_mass)
      : mesh(n), topo(mesh, nc), op(assemble(mesh, f)), u_h(solve_fine_reference(op)), trial(mesh, topo, op, m),
        tb(trial.basis(m)), adj(mesh, topo, op)
  {
    w1 = build_W1(topo, op, adj, tb.xi, tb.owners);
    w2 = build_W2(mesh, topo, adj);
    for (int e = 0; e < int(topo.edges().size()); ++e) {
      w3.push_back(build_W3_snapshots(mesh, topo, adj, e));
      edge_spectra.push_back(edge_spectral(mesh, op, w3.back(), p));
    }
  }

  DenseMatrix theta(Index L) const { return assemble_test_matrix(mesh.num_dofs(), w1, w2, w3, edge_spectra, L).theta; }
};

SparseMatrix identity(Index n)
{
  SparseMatrix i(n, n);
  i.setIdentity();
  return i;
}

}  // namespace

TEST(Coupled, IdentityBasesRecoverFineSolution)
{
  const FineMesh mesh(12);
  const SparseOperator op = assemble(mesh, vortex(2.0));
  const Vector u_h = solve_fine_reference(op);
  const Index n = mesh.num_dofs();
  const SaddleState s = solve_coupled(op, DenseMatrix::Identity(n, n), identity(n));
  EXPECT_LT((s.xi_u - u_h).norm(), 1e-8 * u_h.norm());
  EXPECT_LT(s.theta_w.norm(), 1e-8 * u_h.norm());

  const auto [w, u] = solve_full_space(op);
  EXPECT_LT((u - u_h).norm(), 1e-8 * u_h.norm());
  EXPECT_LT(w.norm(), 1e-8 * u_h.norm());
}

TEST(Coupled, ReducedBlocksSymmetricAndConstraintHolds)
{
  const Pipeline p(16, 4, 2, vortex(2.0));
  const SaddleState s = solve_coupled(p.op, p.theta(1), p.tb.xi);
  EXPECT_LE((s.g_ww - s.g_ww.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  const Vector constraint = p.tb.xi.transpose() * (p.op.A.transpose() * s.theta_w);
  EXPECT_LT(constraint.norm(), 1e-10 * p.op.f.norm());
  // first block row: (A A^T) Theta w + A Xi u - f is orthogonal to Theta
  const Vector r = global_residual(p.op, s);
  EXPECT_LT((s.theta.transpose() * r).norm(), 1e-10 * p.op.f.norm());
}

TEST(Coupled, FullSnapshotTestSpaceGivesProjection)
{
  for (int m : {1, 3}) {
    const Pipeline p(16, 4, m, vortex(2.0));
    const SaddleState s = solve_coupled(p.op, p.theta(p.topo.ratio() - 1), p.tb.xi);
    // oracle projection through the normal equations, solved by the test oracle
    const oracle::Mat x = oracle::to_mat(DenseMatrix(p.tb.xi));
    const oracle::Mat xtx = oracle::multiply(oracle::transpose(x), x);
    oracle::Mat xtu = oracle::multiply(oracle::transpose(x), oracle::to_mat(DenseMatrix(p.u_h)));
    const oracle::Mat c = oracle::solve(xtx, xtu);
    Vector proj = Vector::Zero(p.u_h.size());
    for (std::size_t k = 0; k < c.size(); ++k)
      proj += c[k][0] * DenseMatrix(p.tb.xi).col(Index(k));
    EXPECT_LT((s.xi_u - proj).norm(), 1e-8 * p.u_h.norm()) << "m = " << m;
    // A^T Theta w is the projection of u_h - P u_h onto range(A^T Theta)
    const DenseMatrix q = orthonormalize_columns(DenseMatrix(p.op.A.transpose() * s.theta));
    const Vector gap = p.u_h - proj;
    const Vector lifted = p.op.A.transpose() * s.theta_w;
    EXPECT_LT((lifted - q * (q.transpose() * gap)).norm(), 1e-8 * p.u_h.norm());

    const ErrorReport er = error_report(s, p.u_h, TrialProjector(p.tb.xi));
    EXPECT_NEAR(er.err_ms_pct, er.err_proj_pct, 1e-6 * er.err_proj_pct);
  }
}

TEST(Coupled, ProjectionOptimality)
{
  const Pipeline p(16, 4, 1, vortex(3.0));
  const TrialProjector proj(p.tb.xi);
  for (Index L = 0; L < p.topo.ratio(); ++L) {
    const SaddleState s = solve_coupled(p.op, p.theta(L), p.tb.xi);
    const ErrorReport er = error_report(s, p.u_h, proj);
    EXPECT_GE(er.err_ms_pct, er.err_proj_pct - 1e-8) << "L = " << L;
  }
}

TEST(Coupled, MassProjectionIsMassOrthogonal)
{
  const Pipeline p(12, 3, 2, vortex(1.0));
  const TrialProjector proj(p.tb.xi, &p.op.M, ProjectionMode::mass);
  const Vector r = p.u_h - proj.project(p.u_h);
  EXPECT_LT((p.tb.xi.transpose() * (p.op.M * r)).norm(), 1e-12 * p.u_h.norm());
}

TEST(Coupled, IncrementalAppendMatchesFreshSolve)
{
  const Pipeline p(16, 4, 1, vortex(2.0));
  const DenseMatrix full = p.theta(2);
  const Index k = full.cols() - 7;
  SaddleState inc = solve_coupled(p.op, full.leftCols(k), p.tb.xi);
  append_test_columns(p.op, inc, full.rightCols(7));
  const SaddleState fresh = solve_coupled(p.op, full, p.tb.xi);
  EXPECT_LT((inc.xi_u - fresh.xi_u).norm(), 1e-10 * fresh.xi_u.norm());
  EXPECT_LT((inc.g_ww - fresh.g_ww).cwiseAbs().maxCoeff(), 1e-10 * fresh.g_ww.cwiseAbs().maxCoeff());
}

TEST(Coupled, SingularTrialBlockReported)
{
  const Pipeline p(12, 3, 1, vortex(1.0));
  SparseMatrix dup(p.tb.xi.rows(), p.tb.xi.cols() + 1);
  std::vector<Triplet> t;
  for (Index c = 0; c < p.tb.xi.cols(); ++c)
    for (SparseMatrix::InnerIterator it(p.tb.xi, c); it; ++it)
      t.emplace_back(it.row(), c, it.value());
  for (SparseMatrix::InnerIterator it(p.tb.xi, 0); it; ++it)
    t.emplace_back(it.row(), p.tb.xi.cols(), it.value());
  dup.setFromTriplets(t.begin(), t.end());
  try {
    const SaddleState s = solve_coupled(p.op, p.theta(1), dup);
    FAIL() << "rcond " << s.rcond;
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::singular_system);
    EXPECT_NE(std::string(e.what()).find("trial block"), std::string::npos);
  }
}

TEST(InfSup, MatchesAlgebraicShortcut)
{
  // Z = A^-T Xi gives Z^T (A A^T) Z = Xi^T Xi and Theta^T (A A^T) Z = G_wu
  const Pipeline p(16, 4, 1, vortex(2.0));
  for (Index L : {1, 2}) {
    const DenseMatrix theta = p.theta(L);
    const double est = infsup_estimate(p.op, theta, p.tb.xi);
    const SaddleState s = solve_coupled(p.op, theta, p.tb.xi);
    const oracle::Mat gwu = oracle::to_mat(s.g_wu);
    const oracle::Mat g1 = oracle::to_mat(DenseMatrix(DenseMatrix(p.tb.xi).transpose() * DenseMatrix(p.tb.xi)));
    const oracle::Mat g2 = oracle::multiply(oracle::transpose(gwu), oracle::solve(oracle::to_mat(s.g_ww), gwu));
    const auto ev = oracle::generalized_eigenvalues(g2, g1);
    EXPECT_NEAR(est, std::sqrt(std::max(ev.front(), 0.0)), 1e-7) << "L = " << L;
    EXPECT_GT(est, 0.0);
    EXPECT_LE(est, 1.0 + 1e-10);
  }
}

TEST(InfSup, FullAndOrthogonalTestSpaces)
{
  const FineMesh mesh(10);
  const CoarseTopology topo(mesh, 2);
  const SparseOperator op = assemble(mesh, vortex(1.0));
  const TrialSpace trial(mesh, topo, op, 1);
  const TrialBasis tb = trial.basis(1);
  const Index n = mesh.num_dofs();
  EXPECT_NEAR(infsup_estimate(op, DenseMatrix::Identity(n, n), tb.xi), 1.0, 1e-8);

  // Theta orthogonal to range(A Xi) makes G_wu vanish
  const DenseMatrix axi = DenseMatrix(op.A * tb.xi);
  const DenseMatrix q = orthonormalize_columns(axi);
  const DenseMatrix seeds = DenseMatrix::Identity(n, n).leftCols(6);
  const DenseMatrix theta = orthonormal_complement(q, seeds);
  ASSERT_GT(theta.cols(), 0);
  EXPECT_NEAR(infsup_estimate(op, theta, tb.xi), 0.0, 1e-6);
}

TEST(Online, ResidualDecreasesAndApproachesProjection)
{
  const Pipeline p(16, 4, 1, vortex(2.0));
  SaddleState s = solve_coupled(p.op, p.theta(1), p.tb.xi);
  const TrialProjector proj(p.tb.xi);
  double prev = global_residual(p.op, s).norm();
  OnlineEnricher enricher(p.mesh, p.topo, p.op);
  for (int it = 0; it < 2; ++it) {
    const OnlineSweepReport rep = enricher.sweep(s);
    EXPECT_GT(rep.added, 0);
    EXPECT_LE(rep.residual_norm, prev * (1.0 + 1e-12));
    prev = rep.residual_norm;
  }
  const double nt = double(s.theta.cols());
  EXPECT_LT((s.theta.transpose() * s.theta - DenseMatrix::Identity(s.theta.cols(), s.theta.cols())).cwiseAbs().maxCoeff(),
            1e-10 * nt);
  const ErrorReport er = error_report(s, p.u_h, proj);
  EXPECT_LE(er.err_ms_pct, 1.05 * er.err_proj_pct);
}

TEST(Online, ExactStateAddsNothing)
{
  const FineMesh mesh(12);
  const CoarseTopology topo(mesh, 3);
  const SparseOperator op = assemble(mesh, vortex(1.0));
  const Index n = mesh.num_dofs();
  SaddleState s = solve_coupled(op, DenseMatrix::Identity(n, n), identity(n));
  OnlineEnricher enricher(mesh, topo, op);
  const OnlineSweepReport rep = enricher.sweep(s);
  EXPECT_EQ(rep.added, 0);
}

TEST(Online, LocalResidualRestriction)
{
  const Pipeline p(12, 3, 1, vortex(1.0));
  const SaddleState s = solve_coupled(p.op, p.theta(1), p.tb.xi);
  const int l = p.topo.coarse_node_id(1, 1);
  const Vector rl = residual_local(p.mesh, p.topo, p.op, s, l);
  const Vector r = global_residual(p.op, s);
  const IndexSet dofs = p.mesh.dofs_of(p.topo.neighborhoods()[l].interior_nodes);
  ASSERT_EQ(rl.size(), Index(dofs.size()));
  for (Index k = 0; k < rl.size(); ++k)
    EXPECT_EQ(rl[k], r[dofs[k]]);
}
