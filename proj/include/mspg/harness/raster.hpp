#pragma once

/// @file raster.hpp
/// @brief Permeability raster text format.
///
/// Format: a header line "width height" followed by width*height
/// whitespace-separated values in row-major order. Row r holds the fine
/// elements of the r-th element row counted from y = 0 upwards.

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "../errors.hpp"

namespace mspg {

struct PermeabilityRaster {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major, values[row * width + col]

  double at(int col, int row) const { return values[std::size_t(row) * width + col]; }
};

inline PermeabilityRaster parse_permeability_raster(std::istream& in, const std::string& source = "<stream>")
{
  PermeabilityRaster r;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCategory::parse, source + ":" + std::to_string(lineno) + ": " + msg);
  };

  // header: first non-empty line
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::istringstream hs(line);
    std::string extra;
    if (!(hs >> r.width >> r.height) || (hs >> extra))
      fail("expected header 'width height'");
    if (r.width <= 0 || r.height <= 0)
      fail("raster dimensions must be positive");
    break;
  }
  if (r.width == 0)
    fail("missing header");

  const std::size_t expected = std::size_t(r.width) * r.height;
  r.values.reserve(expected);
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      }
      catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size())
        fail("malformed value '" + tok + "'");
      if (r.values.size() == expected)
        fail("more than " + std::to_string(expected) + " values");
      r.values.push_back(v);
    }
  }
  if (r.values.size() != expected)
    fail("expected " + std::to_string(expected) + " values, found " + std::to_string(r.values.size()));
  return r;
}

inline PermeabilityRaster load_permeability_raster(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCategory::io, "cannot open permeability raster '" + path + "'");
  return parse_permeability_raster(in, path);
}

inline void write_permeability_raster(const PermeabilityRaster& r, std::ostream& out)
{
  out << r.width << ' ' << r.height << '\n';
  for (int row = 0; row < r.height; ++row) {
    for (int col = 0; col < r.width; ++col)
      out << (col ? " " : "") << r.at(col, row);
    out << '\n';
  }
}

/// Synthetic channelized medium: sinuous high-permeability channels (500) in a
/// background of 1, sampled at fine element centres of an n x n grid.
inline PermeabilityRaster synthetic_channel_raster(int n)
{
  constexpr double high = 500.0, low = 1.0;
  constexpr double centres[] = {0.17, 0.41, 0.63, 0.86};
  constexpr double phases[] = {0.0, 0.35, 0.7, 0.15};
  constexpr double amplitude = 0.055, half_width = 0.03;
  PermeabilityRaster r;
  r.width = r.height = n;
  r.values.assign(std::size_t(n) * n, low);
  for (int row = 0; row < n; ++row)
    for (int col = 0; col < n; ++col) {
      const double x = (col + 0.5) / n, y = (row + 0.5) / n;
      for (int c = 0; c < 4; ++c) {
        const double yc = centres[c] + amplitude * std::sin(2.0 * std::numbers::pi * (1.5 * x + phases[c]));
        if (std::abs(y - yc) < half_width)
          r.values[std::size_t(row) * n + col] = high;
      }
      // one transverse connector between the middle channels
      if (std::abs(x - 0.52) < half_width && y > 0.41 && y < 0.63)
        r.values[std::size_t(row) * n + col] = high;
    }
  return r;
}

}  // namespace mspg
