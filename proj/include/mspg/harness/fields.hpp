#pragma once

/// @file fields.hpp
/// @brief Coefficient fields of the five benchmark transport problems.

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "../assembly.hpp"
#include "../errors.hpp"
#include "darcy.hpp"

namespace mspg {

struct FieldParameters {
  int example = 1;
  double alpha = 2.0;
  double delta = std::numbers::sqrt2 / 4.0;          // example 2 only
  std::shared_ptr<const DarcyVelocity> darcy;        // example 5 only
};

namespace fields {

constexpr double pi = std::numbers::pi;

/// Cellular flow alpha (sin(18 pi x) cos(18 pi y), -cos(18 pi x) sin(18 pi y)).
inline std::array<double, 2> cellular(double alpha, double x, double y)
{
  return {alpha * std::sin(18 * pi * x) * std::cos(18 * pi * y), -alpha * std::cos(18 * pi * x) * std::sin(18 * pi * y)};
}

/// Cellular flow perturbed by a second incommensurate cell pattern.
inline std::array<double, 2> cellular_channels(double alpha, double delta, double x, double y)
{
  const double k = 18 * std::numbers::sqrt2 * pi;
  return {alpha * (std::sin(18 * pi * x) * std::cos(18 * pi * y) + delta * std::cos(k * x) * std::sin(k * y)),
          alpha * (-std::cos(18 * pi * x) * std::sin(18 * pi * y) - delta * std::sin(k * x) * std::sin(k * y))};
}

/// Stream function sin(5 pi x) sin(6 pi y) / (60 pi) + 0.005 (x + y).
inline double stream_function(double x, double y)
{
  return std::sin(5 * pi * x) * std::sin(6 * pi * y) / (60 * pi) + 0.005 * (x + y);
}

/// (-dH/dy, +dH/dx) of stream_function, differentiated analytically.
inline std::array<double, 2> stream_velocity(double x, double y)
{
  const double dhdx = std::cos(5 * pi * x) * std::sin(6 * pi * y) / 12.0 + 0.005;
  const double dhdy = std::sin(5 * pi * x) * std::cos(6 * pi * y) / 10.0 + 0.005;
  return {-dhdy, dhdx};
}

inline std::array<double, 2> layered(double, double y)
{
  return {200.0 * std::sin(18 * std::numbers::sqrt2 * pi * y), 0.0};
}

}  // namespace fields

inline CoefficientField field_for_example(const FieldParameters& p)
{
  CoefficientField f;
  f.source = [](double, double) { return 1.0; };
  const double alpha = p.alpha;
  switch (p.example) {
    case 1:
      f.kappa = [](double, double) { return 0.01; };
      f.velocity = [alpha](double x, double y) { return fields::cellular(alpha, x, y); };
      break;
    case 2: {
      const double delta = p.delta;
      f.kappa = [](double, double) { return 0.01; };
      f.velocity = [alpha, delta](double x, double y) { return fields::cellular_channels(alpha, delta, x, y); };
      break;
    }
    case 3:
      f.kappa = [alpha](double, double) { return alpha; };
      f.velocity = [](double x, double y) { return fields::stream_velocity(x, y); };
      break;
    case 4:
      f.kappa = [](double, double) { return 1.0; };
      f.velocity = [](double x, double y) { return fields::layered(x, y); };
      break;
    case 5: {
      if (!p.darcy)
        throw Error(ErrorCategory::config, "example 5 needs a Darcy velocity field");
      auto darcy = p.darcy;
      f.kappa = [alpha](double, double) { return alpha; };
      f.velocity = [darcy](double x, double y) { return (*darcy)(x, y); };
      break;
    }
    default:
      throw Error(ErrorCategory::config, "unknown example id " + std::to_string(p.example));
  }
  return f;
}

/// Largest fine-cell Peclet number max |b| h / (2 kappa), sampled at the Gauss points.
inline double cell_peclet(const CoefficientField& field, int n)
{
  const double h = 1.0 / n;
  double worst = 0.0;
  for (int ey = 0; ey < n; ++ey)
    for (int ex = 0; ex < n; ++ex)
      for (double s : detail::GaussQ1::pts)
        for (double t : detail::GaussQ1::pts) {
          const double x = (ex + s) * h, y = (ey + t) * h;
          const auto b = field.velocity(x, y);
          worst = std::max(worst, std::hypot(b[0], b[1]) * h / (2.0 * field.kappa(x, y)));
        }
  return worst;
}

}  // namespace mspg
