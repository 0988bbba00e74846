#pragma once

/// @file darcy.hpp
/// @brief Darcy pre-solve for the transport velocity of the channelized example:
/// -div(k grad p) = 0, p = xy on the boundary, b = +k grad p.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "../assembly.hpp"
#include "../errors.hpp"
#include "../grid.hpp"
#include "../numerics.hpp"
#include "raster.hpp"

namespace mspg {

/// Element-wise velocity k_e * grad p_h (Q1 gradient inside each element).
class DarcyVelocity {
 public:
  DarcyVelocity(int n, std::vector<double> kappa, Vector pressure, double sign)
      : n_(n), kappa_(std::move(kappa)), p_(std::move(pressure)), sign_(sign)
  {
  }

  std::array<double, 2> operator()(double x, double y) const
  {
    const int ex = std::clamp(int(std::floor(x * n_)), 0, n_ - 1);
    const int ey = std::clamp(int(std::floor(y * n_)), 0, n_ - 1);
    const double s = x * n_ - ex, t = y * n_ - ey;
    const auto node = [&](int i, int j) { return p_[Index(j) * (n_ + 1) + i]; };
    const double p00 = node(ex, ey), p10 = node(ex + 1, ey), p01 = node(ex, ey + 1), p11 = node(ex + 1, ey + 1);
    const double dpdx = ((p10 - p00) * (1 - t) + (p11 - p01) * t) * n_;
    const double dpdy = ((p01 - p00) * (1 - s) + (p11 - p10) * s) * n_;
    const double k = sign_ * kappa_[std::size_t(ey) * n_ + ex];
    return {k * dpdx, k * dpdy};
  }

  const Vector& pressure() const noexcept { return p_; }
  int subdivisions() const noexcept { return n_; }

  /// Velocity at the 2x2 Gauss points of every element, element-major.
  std::vector<std::array<double, 2>> quadrature_samples() const
  {
    std::vector<std::array<double, 2>> out;
    out.reserve(std::size_t(4) * n_ * n_);
    const double h = 1.0 / n_;
    for (int ey = 0; ey < n_; ++ey)
      for (int ex = 0; ex < n_; ++ex)
        for (double s : detail::GaussQ1::pts)
          for (double t : detail::GaussQ1::pts)
            out.push_back((*this)((ex + s) * h, (ey + t) * h));
    return out;
  }

 private:
  int n_;
  std::vector<double> kappa_;
  Vector p_;  // nodal pressure on all lattice nodes
  double sign_;
};

inline DarcyVelocity darcy_velocity(const PermeabilityRaster& raster, const FineMesh& mesh, double sign = 1.0)
{
  const int n = mesh.subdivisions();
  if (raster.width != n || raster.height != n)
    throw Error(ErrorCategory::config, "permeability raster is " + std::to_string(raster.width) + "x" +
                                           std::to_string(raster.height) + " but the fine grid has " +
                                           std::to_string(n) + "x" + std::to_string(n) + " elements");
  for (std::size_t k = 0; k < raster.values.size(); ++k)
    if (!(raster.values[k] > 0.0))
      throw Error(ErrorCategory::invalid_coefficient, "permeability raster entry " + std::to_string(k) +
                                                          " is not positive (" + std::to_string(raster.values[k]) + ")");

  CoefficientField field;
  field.kappa = [&](double x, double y) {
    const int ex = std::clamp(int(std::floor(x * n)), 0, n - 1);
    const int ey = std::clamp(int(std::floor(y * n)), 0, n - 1);
    return raster.at(ex, ey);
  };
  field.velocity = [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
  field.source = [](double, double) { return 0.0; };
  const SparseOperator op = assemble(mesh, field);

  IndexSet interior, boundary;
  for (Index v = 0; v < mesh.num_nodes(); ++v)
    (mesh.on_boundary(v) ? boundary : interior).push_back(v);
  Vector g(Index(boundary.size()));
  for (Index k = 0; k < g.size(); ++k) {
    const auto c = mesh.coords(boundary[k]);
    g[k] = c[0] * c[1];
  }
  const Vector rhs = -(local_submatrix(op.A_nodes, interior, boundary) * g);
  Vector p_int;
  try {
    p_int = LocalSolver(local_submatrix(op.A_nodes, interior, interior), "Darcy pressure").solve(rhs);
  }
  catch (const Error& e) {
    throw SolverFailure(std::string("Darcy pre-solve failed: ") + e.what(), 1.0);
  }

  Vector p(mesh.num_nodes());
  for (Index k = 0; k < Index(interior.size()); ++k)
    p[interior[k]] = p_int[k];
  for (Index k = 0; k < Index(boundary.size()); ++k)
    p[boundary[k]] = g[k];
  return DarcyVelocity(n, raster.values, std::move(p), sign);
}

}  // namespace mspg
