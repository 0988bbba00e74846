#pragma once

/// @file validation.hpp
/// @brief Invariant checks behind the `validate` subcommand.

#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "experiment.hpp"

namespace mspg {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline std::vector<CheckResult> validate_invariants(Experiment& ex)
{
  std::vector<CheckResult> out;
  const auto& cfg = ex.config();
  const int full = ex.topology().ratio() - 1;

  {
    double worst = 0.0;
    const Index nodes = ex.mesh().num_nodes();
    Vector sum = Vector::Zero(nodes);
    for (const auto& fn : ex.trial_space(cfg.trial).partition())
      for (Index k = 0; k < Index(fn.nodes.size()); ++k)
        sum[fn.nodes[k]] += fn.values[k];
    worst = (sum.array() - 1.0).abs().maxCoeff();
    out.push_back({"partition_of_unity", worst <= 1e-9, fmt::format("max |sum chi - 1| = {:.3e}", worst)});
  }

  {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& e : ex.spectral(2)) {
      if (e.eigenvalues.size() == 0)
        continue;
      lo = first ? e.eigenvalues.minCoeff() : std::min(lo, e.eigenvalues.minCoeff());
      hi = first ? e.eigenvalues.maxCoeff() : std::max(hi, e.eigenvalues.maxCoeff());
      first = false;
    }
    out.push_back({"eigenproblem2_spectrum", lo >= -1e-10 && hi <= 1.0 + 1e-10,
                   fmt::format("eigenvalues in [{:.6g}, {:.12g}]", lo, hi)});
  }

  for (int eig : {1, 2}) {
    CellState c = ex.solve_cell(cfg.trial, full, eig);
    const double diff = std::abs(c.errors.err_ms_pct - c.errors.err_proj_pct);
    const double rel = diff / std::max(c.errors.err_proj_pct, 1e-300);
    out.push_back({fmt::format("full_snapshot_exactness_eig{}", eig), rel <= 1e-6,
                   fmt::format("err_ms {:.10g}% err_proj {:.10g}% rel diff {:.3e}", c.errors.err_ms_pct,
                               c.errors.err_proj_pct, rel)});
    const Vector constraint = c.saddle.xi.transpose() * (ex.op().A.transpose() * c.saddle.theta_w);
    const double cn = constraint.norm() / ex.op().f.norm();
    out.push_back({fmt::format("trial_orthogonality_eig{}", eig), cn <= 1e-8,
                   fmt::format("|Xi^T A^T Theta w| / |f| = {:.3e}", cn)});
  }

  {
    CellState c = ex.solve_cell(cfg.trial, cfg.test, cfg.eigenproblem);
    const bool optimal = c.errors.err_ms_pct >= c.errors.err_proj_pct - 1e-8;
    out.push_back({"projection_optimality", optimal,
                   fmt::format("err_ms {:.6g}% >= err_proj {:.6g}%", c.errors.err_ms_pct, c.errors.err_proj_pct)});
    const double asym = (c.saddle.g_ww - c.saddle.g_ww.transpose()).cwiseAbs().maxCoeff();
    out.push_back({"reduced_symmetry", asym <= 1e-10, fmt::format("max |G_ww - G_ww^T| = {:.3e}", asym)});
    const double orth = (c.test.theta.transpose() * c.test.theta - DenseMatrix::Identity(c.test.theta.cols(), c.test.theta.cols()))
                            .cwiseAbs()
                            .maxCoeff();
    out.push_back({"test_orthonormality", orth <= 1e-10, fmt::format("max |Theta^T Theta - I| = {:.3e}", orth)});
  }
  return out;
}

}  // namespace mspg
