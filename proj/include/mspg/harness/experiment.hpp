#pragma once

/// @file experiment.hpp
/// @brief Experiment configuration and the offline/online pipeline driver.
///
/// An Experiment owns one fine problem (example, alpha, grids) and caches every
/// offline artefact that does not depend on the cell parameters, so that a
/// sweep over (m, L, eigenproblem, online iterations) reuses them.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <tuple>
#include <string>
#include <vector>

#include "../assembly.hpp"
#include "../coupling.hpp"
#include "../grid.hpp"
#include "../test_space.hpp"
#include "../trial_space.hpp"
#include "darcy.hpp"
#include "fields.hpp"
#include "raster.hpp"

namespace mspg {

struct ExperimentConfig {
  int example = 1;
  double alpha = 2.0;
  int coarse = 8;
  int fine = 64;
  int trial = 1;         // m, trial modes per neighbourhood
  int test = 1;          // L, test modes per coarse edge
  int eigenproblem = 1;  // 1 or 2
  int online_iters = 0;
  PouMode pou = PouMode::msfem;
  TrialOperator trial_operator = TrialOperator::submatrix;
  ProjectionMode projection = ProjectionMode::euclidean;
  BubbleSource bubble = BubbleSource::euclidean;
  bool infsup = false;
  bool residual_per_class = true;
  double delta = std::numbers::sqrt2 / 4.0;
  std::string raster;       // example 5; empty selects the built-in synthetic channels
  double darcy_sign = 1.0;  // example 5: b = sign * k grad p
  std::string out;
  std::string format = "csv";

  void validate() const
  {
    auto bad = [](const std::string& m) { throw Error(ErrorCategory::config, m); };
    if (example < 1 || example > 5)
      bad("example must be in 1..5, got " + std::to_string(example));
    if (fine < 2)
      throw Error(ErrorCategory::invalid_mesh, "fine subdivisions must be >= 2");
    if (coarse < 2 || fine % coarse != 0)
      throw Error(ErrorCategory::incompatible_grid, "coarse subdivisions " + std::to_string(coarse) +
                                                        " must be >= 2 and divide fine subdivisions " +
                                                        std::to_string(fine));
    if (trial < 1)
      bad("trial modes per neighbourhood must be >= 1");
    if (test < 0 || test > fine / coarse - 1)
      bad("test modes per edge must be in [0, " + std::to_string(fine / coarse - 1) + "]");
    if (eigenproblem != 1 && eigenproblem != 2)
      bad("eigenproblem must be 1 or 2");
    if (online_iters < 0)
      bad("online iterations must be >= 0");
    if (!(alpha > 0.0) && example != 4)
      bad("alpha must be positive");
  }
};

struct ReportRow {
  int example = 1;
  double alpha = 0.0;
  double H = 0.0;
  double h = 0.0;
  int m_trial = 0;
  int L_test = 0;
  int eigenproblem = 1;
  int online_iter = 0;
  double err_ms_pct = 0.0;
  double err_proj_pct = 0.0;
  double w_norm = 0.0;
  double min_lambda_excluded = 0.0;
  double infsup_est = std::numeric_limits<double>::quiet_NaN();
};

/// Everything computed for one (m, L, eigenproblem) cell before online sweeps.
struct CellState {
  TestMatrix test;
  SaddleState saddle;
  ErrorReport errors;
};

class Experiment {
 public:
  explicit Experiment(const ExperimentConfig& cfg)
      : cfg_(cfg), mesh_(cfg.fine), topo_(mesh_, cfg.coarse)
  {
    FieldParameters p;
    p.example = cfg.example;
    p.alpha = cfg.alpha;
    p.delta = cfg.delta;
    if (cfg.example == 5) {
      const PermeabilityRaster raster =
          cfg.raster.empty() ? synthetic_channel_raster(cfg.fine) : load_permeability_raster(cfg.raster);
      p.darcy = std::make_shared<const DarcyVelocity>(darcy_velocity(raster, mesh_, cfg.darcy_sign));
    }
    field_ = field_for_example(p);
    op_ = assemble(mesh_, field_);
    u_h_ = solve_fine_reference(op_);
  }

  const ExperimentConfig& config() const noexcept { return cfg_; }
  const FineMesh& mesh() const noexcept { return mesh_; }
  const CoarseTopology& topology() const noexcept { return topo_; }
  const CoefficientField& field() const noexcept { return field_; }
  const SparseOperator& op() const noexcept { return op_; }
  const Vector& reference() const noexcept { return u_h_; }
  double peclet() const { return cell_peclet(field_, mesh_.subdivisions()); }

  const TrialSpace& trial_space(Index m)
  {
    if (!trial_ || trial_modes_ < m) {
      trial_modes_ = std::max<Index>(m, 5);
      trial_ = std::make_unique<TrialSpace>(mesh_, topo_, op_, trial_modes_, cfg_.pou, cfg_.trial_operator);
      trial_cache_.clear();
    }
    return *trial_;
  }

  struct TrialData {
    TrialBasis basis;
    std::unique_ptr<TrialProjector> projector;
    std::vector<TestSnapshotW1> w1;
  };

  const TrialData& trial(Index m)
  {
    const TrialSpace& space = trial_space(m);
    auto it = trial_cache_.find(m);
    if (it != trial_cache_.end())
      return it->second;
    TrialData d;
    d.basis = space.basis(m);
    d.projector = std::make_unique<TrialProjector>(d.basis.xi, &op_.M, cfg_.projection);
    d.w1 = build_W1(topo_, op_, adjoint(), d.basis.xi, d.basis.owners, cfg_.bubble);
    return trial_cache_.emplace(m, std::move(d)).first->second;
  }

  const BlockAdjointProblems& adjoint()
  {
    if (!adjoint_)
      adjoint_ = std::make_unique<BlockAdjointProblems>(mesh_, topo_, op_);
    return *adjoint_;
  }

  const std::vector<TestSnapshotW2>& w2()
  {
    if (!w2_)
      w2_ = build_W2(mesh_, topo_, adjoint());
    return *w2_;
  }

  const std::vector<TestSnapshotW3>& w3()
  {
    if (!w3_) {
      std::vector<TestSnapshotW3> s;
      for (int e = 0; e < int(topo_.edges().size()); ++e)
        s.push_back(build_W3_snapshots(mesh_, topo_, adjoint(), e));
      w3_ = std::move(s);
    }
    return *w3_;
  }

  const std::vector<EdgeSpectralResult>& spectral(int eigenproblem)
  {
    auto it = spectral_.find(eigenproblem);
    if (it != spectral_.end())
      return it->second;
    std::vector<EdgeSpectralResult> out;
    for (const auto& s : w3())
      out.push_back(edge_spectral(mesh_, op_, s, Eigenproblem(eigenproblem)));
    return spectral_.emplace(eigenproblem, std::move(out)).first->second;
  }

  TestMatrix test_matrix(Index m, Index L, int eigenproblem, double droptol = 1e-10)
  {
    const auto& d = trial(m);
    return assemble_test_matrix(mesh_.num_dofs(), d.w1, w2(), w3(), spectral(eigenproblem), L, droptol);
  }

  CellState solve_cell(Index m, Index L, int eigenproblem)
  {
    CellState c;
    c.test = test_matrix(m, L, eigenproblem);
    const auto& d = trial(m);
    c.saddle = solve_coupled(op_, c.test.theta, d.basis.xi);
    c.errors = error_report(c.saddle, u_h_, *d.projector);
    c.errors.min_lambda_excluded = c.test.report.min_excluded;
    return c;
  }

  /// One row per online iteration 0..online_iters.
  std::vector<ReportRow> run_cell(int m, int L, int eigenproblem, int online_iters, bool infsup)
  {
    std::vector<ReportRow> rows;
    CellState c = solve_cell(m, L, eigenproblem);
    const auto& d = trial(m);
    auto emit = [&](int iter) {
      ReportRow r = identity_row(m, L, eigenproblem);
      r.online_iter = iter;
      ErrorReport e = error_report(c.saddle, u_h_, *d.projector);
      r.err_ms_pct = e.err_ms_pct;
      r.err_proj_pct = e.err_proj_pct;
      r.w_norm = e.w_norm;
      r.min_lambda_excluded = c.test.report.min_excluded;
      if (infsup)
        r.infsup_est = infsup_estimate(op_, c.saddle.theta, c.saddle.xi);
      rows.push_back(r);
    };
    emit(0);
    if (online_iters > 0) {
      OnlineOptions opts;
      opts.residual_per_class = cfg_.residual_per_class;
      OnlineEnricher enricher(mesh_, topo_, op_, opts);
      for (int it = 1; it <= online_iters; ++it) {
        enricher.sweep(c.saddle);
        emit(it);
      }
    }
    return rows;
  }

  ReportRow identity_row(int m, int L, int eigenproblem) const
  {
    ReportRow r;
    r.example = cfg_.example;
    r.alpha = cfg_.alpha;
    r.H = topo_.H();
    r.h = mesh_.h();
    r.m_trial = m;
    r.L_test = L;
    r.eigenproblem = eigenproblem;
    return r;
  }

 private:
  ExperimentConfig cfg_;
  FineMesh mesh_;
  CoarseTopology topo_;
  CoefficientField field_;
  SparseOperator op_;
  Vector u_h_;

  Index trial_modes_ = 0;
  std::unique_ptr<TrialSpace> trial_;
  std::map<Index, TrialData> trial_cache_;
  std::unique_ptr<BlockAdjointProblems> adjoint_;
  std::optional<std::vector<TestSnapshotW2>> w2_;
  std::optional<std::vector<TestSnapshotW3>> w3_;
  std::map<int, std::vector<EdgeSpectralResult>> spectral_;
};

inline std::vector<ReportRow> run_experiment(const ExperimentConfig& cfg)
{
  cfg.validate();
  Experiment ex(cfg);
  return ex.run_cell(cfg.trial, cfg.test, cfg.eigenproblem, cfg.online_iters, cfg.infsup);
}

/// Cartesian grid over (m, L, eigenproblem, online iteration) for one problem.
struct SweepGrid {
  std::vector<int> trial{1};
  std::vector<int> test{1};
  std::vector<int> eigenproblem{1};
  std::vector<int> online{0};
};

inline std::vector<ReportRow> run_sweep(const ExperimentConfig& base, const SweepGrid& grid)
{
  ExperimentConfig probe = base;
  for (int m : grid.trial)
    for (int L : grid.test)
      for (int e : grid.eigenproblem) {
        probe.trial = m;
        probe.test = L;
        probe.eigenproblem = e;
        probe.validate();
      }
  if (grid.trial.empty() || grid.test.empty() || grid.eigenproblem.empty() || grid.online.empty())
    throw Error(ErrorCategory::config, "sweep lists must be non-empty");
  for (int k : grid.online)
    if (k < 0)
      throw Error(ErrorCategory::config, "online iterations must be >= 0");

  Experiment ex(base);
  const int max_online = *std::max_element(grid.online.begin(), grid.online.end());
  std::vector<ReportRow> rows;
  for (int m : grid.trial)
    for (int L : grid.test)
      for (int e : grid.eigenproblem)
        for (const ReportRow& r : ex.run_cell(m, L, e, max_online, base.infsup))
          if (std::find(grid.online.begin(), grid.online.end(), r.online_iter) != grid.online.end())
            rows.push_back(r);
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.m_trial, a.L_test, a.eigenproblem, a.online_iter) <
           std::tie(b.m_trial, b.L_test, b.eigenproblem, b.online_iter);
  });
  rows.erase(std::unique(rows.begin(), rows.end(),
                         [](const ReportRow& a, const ReportRow& b) {
                           return std::tie(a.m_trial, a.L_test, a.eigenproblem, a.online_iter) ==
                                  std::tie(b.m_trial, b.L_test, b.eigenproblem, b.online_iter);
                         }),
             rows.end());
  return rows;
}

}  // namespace mspg
