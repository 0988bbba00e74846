// Command-line driver: run, sweep, validate, make-raster.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mspg/mspg.hpp"

namespace {

using mspg::Error;
using mspg::ErrorCategory;
using mspg::ExperimentConfig;

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> read_config_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCategory::io, "cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCategory::parse, fmt::format("{}:{}: expected key = value", path, lineno));
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

int to_int(const std::string& key, const std::string& v)
{
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos == v.size())
      return x;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCategory::config, fmt::format("{}: expected an integer, got '{}'", key, v));
}

double to_real(const std::string& key, const std::string& v)
{
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos == v.size())
      return x;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCategory::config, fmt::format("{}: expected a number, got '{}'", key, v));
}

bool to_bool(const std::string& key, const std::string& v)
{
  if (v == "1" || v == "true" || v == "yes" || v == "on")
    return true;
  if (v == "0" || v == "false" || v == "no" || v == "off")
    return false;
  throw Error(ErrorCategory::config, fmt::format("{}: expected a boolean, got '{}'", key, v));
}

std::vector<int> to_int_list(const std::string& key, const std::string& v)
{
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto dots = item.find("..");
    if (dots != std::string::npos) {
      const int a = to_int(key, item.substr(0, dots)), b = to_int(key, item.substr(dots + 2));
      for (int k = a; k <= b; ++k)
        out.push_back(k);
    } else if (!item.empty()) {
      out.push_back(to_int(key, item));
    }
  }
  if (out.empty())
    throw Error(ErrorCategory::config, key + ": empty list");
  return out;
}

mspg::PouMode to_pou(const std::string& v)
{
  if (v == "msfem")
    return mspg::PouMode::msfem;
  if (v == "bilinear")
    return mspg::PouMode::bilinear;
  throw Error(ErrorCategory::config, "pou must be msfem or bilinear, got '" + v + "'");
}

mspg::ProjectionMode to_projection(const std::string& v)
{
  if (v == "euclidean")
    return mspg::ProjectionMode::euclidean;
  if (v == "mass")
    return mspg::ProjectionMode::mass;
  throw Error(ErrorCategory::config, "projection must be euclidean or mass, got '" + v + "'");
}

mspg::BubbleSource to_bubble(const std::string& v)
{
  if (v == "euclidean")
    return mspg::BubbleSource::euclidean;
  if (v == "mass")
    return mspg::BubbleSource::mass;
  throw Error(ErrorCategory::config, "bubble must be euclidean or mass, got '" + v + "'");
}

// Every option is collected as a string so that a config file and the command
// line share one parser; command-line values win.
struct RawOptions {
  std::string config;
  std::map<std::string, std::string> values;
};

const std::vector<std::string> kKeys = {"example", "alpha",  "coarse",     "fine",       "trial",  "test",
                                        "eig",     "online", "pou",        "projection", "bubble", "infsup",
                                        "raster",  "delta",  "darcy-sign", "residual-per-class", "trial-operator", "out", "format"};

void add_common(CLI::App* app, RawOptions& raw)
{
  app->add_option("--config", raw.config, "key = value file applied before command-line flags");
  static const std::map<std::string, std::string> help = {
      {"example", "problem 1..5"},
      {"alpha", "velocity amplitude (examples 1-2), diffusion (3, 5)"},
      {"coarse", "coarse blocks per side"},
      {"fine", "fine cells per side, a multiple of --coarse"},
      {"trial", "trial modes per neighbourhood"},
      {"test", "test modes per coarse edge, 0..r-1"},
      {"eig", "edge eigenproblem: 1 edge mass, 2 minimum energy"},
      {"online", "online enrichment iterations"},
      {"pou", "partition of unity: msfem or bilinear"},
      {"projection", "projection norm: euclidean or mass"},
      {"bubble", "bubble source: euclidean or mass"},
      {"infsup", "report the inf-sup estimate (true/false)"},
      {"raster", "permeability raster for example 5"},
      {"delta", "channel offset for example 2"},
      {"darcy-sign", "sign of k grad p in example 5"},
      {"residual-per-class", "recompute the residual before every colour class (true/false)"},
      {"trial-operator", "local operator for trial eigenproblems: submatrix or element"},
      {"out", "write the report here instead of stdout"},
      {"format", "csv or json"},
  };
  for (const auto& k : kKeys)
    app->add_option("--" + k, raw.values[k], help.at(k));
}

void apply(ExperimentConfig& cfg, mspg::SweepGrid* grid, const std::map<std::string, std::string>& kv)
{
  for (const auto& [key_in, v] : kv) {
    if (v.empty())
      continue;
    std::string key = key_in;
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "example")
      cfg.example = to_int(key, v);
    else if (key == "alpha")
      cfg.alpha = to_real(key, v);
    else if (key == "coarse")
      cfg.coarse = to_int(key, v);
    else if (key == "fine")
      cfg.fine = to_int(key, v);
    else if (key == "trial" || key == "test" || key == "eig" || key == "eigenproblem" || key == "online") {
      const auto list = to_int_list(key, v);
      if (grid) {
        auto& dst = key == "trial" ? grid->trial : key == "test" ? grid->test : key == "online" ? grid->online : grid->eigenproblem;
        dst = list;
      } else if (list.size() != 1) {
        throw Error(ErrorCategory::config, key + ": a list is only accepted by the sweep command");
      }
      int& dst = key == "trial" ? cfg.trial : key == "test" ? cfg.test : key == "online" ? cfg.online_iters : cfg.eigenproblem;
      dst = list.front();
    } else if (key == "pou")
      cfg.pou = to_pou(v);
    else if (key == "trial-operator") {
      if (v != "submatrix" && v != "element")
        throw Error(ErrorCategory::config, "trial-operator must be submatrix or element, got '" + v + "'");
      cfg.trial_operator = v == "element" ? mspg::TrialOperator::element : mspg::TrialOperator::submatrix;
    }
    else if (key == "projection")
      cfg.projection = to_projection(v);
    else if (key == "bubble")
      cfg.bubble = to_bubble(v);
    else if (key == "infsup")
      cfg.infsup = to_bool(key, v);
    else if (key == "raster")
      cfg.raster = v;
    else if (key == "delta")
      cfg.delta = to_real(key, v);
    else if (key == "darcy-sign")
      cfg.darcy_sign = to_real(key, v) < 0 ? -1.0 : 1.0;
    else if (key == "residual-per-class")
      cfg.residual_per_class = to_bool(key, v);
    else if (key == "out")
      cfg.out = v;
    else if (key == "format")
      cfg.format = v;
    else
      throw Error(ErrorCategory::config, "unknown configuration key '" + key_in + "'");
  }
}

ExperimentConfig resolve(const RawOptions& raw, mspg::SweepGrid* grid)
{
  ExperimentConfig cfg;
  if (grid)
    *grid = mspg::SweepGrid{{cfg.trial}, {cfg.test}, {cfg.eigenproblem}, {cfg.online_iters}};
  if (!raw.config.empty())
    apply(cfg, grid, read_config_file(raw.config));
  apply(cfg, grid, raw.values);
  cfg.validate();
  return cfg;
}

void warn_peclet(mspg::Experiment& ex)
{
  const double pe = ex.peclet();
  if (pe > 2.0)
    std::cerr << fmt::format("warning: fine-grid cell Peclet number {:.3g} exceeds 2; the Galerkin reference may oscillate\n", pe);
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Multiscale Petrov-Galerkin solver for 2D convection-diffusion"};
  app.require_subcommand(1);

  RawOptions run_opts, sweep_opts, validate_opts;
  auto* run = app.add_subcommand("run", "solve one configuration and print a report row per online iteration");
  add_common(run, run_opts);
  auto* sweep = app.add_subcommand("sweep", "Cartesian sweep; --trial/--test/--eig/--online take comma lists or a..b ranges");
  add_common(sweep, sweep_opts);
  auto* validate = app.add_subcommand("validate", "check structural invariants for one configuration");
  add_common(validate, validate_opts);

  int raster_n = 64;
  std::string raster_out;
  auto* raster = app.add_subcommand("make-raster", "write the built-in channelized permeability raster");
  raster->add_option("-n,--size", raster_n, "cells per side")->check(CLI::PositiveNumber);
  raster->add_option("-o,--out", raster_out, "output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const ExperimentConfig cfg = resolve(run_opts, nullptr);
      mspg::Experiment ex(cfg);
      warn_peclet(ex);
      auto rows = ex.run_cell(cfg.trial, cfg.test, cfg.eigenproblem, cfg.online_iters, cfg.infsup);
      mspg::emit_report(rows, cfg.format, cfg.out);
    } else if (*sweep) {
      mspg::SweepGrid grid;
      const ExperimentConfig cfg = resolve(sweep_opts, &grid);
      auto rows = mspg::run_sweep(cfg, grid);
      mspg::emit_report(rows, cfg.format, cfg.out);
    } else if (*validate) {
      const ExperimentConfig cfg = resolve(validate_opts, nullptr);
      mspg::Experiment ex(cfg);
      warn_peclet(ex);
      bool ok = true;
      for (const auto& c : mspg::validate_invariants(ex)) {
        std::cout << fmt::format("{} {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
        ok = ok && c.passed;
      }
      return ok ? 0 : 1;
    } else if (*raster) {
      std::ofstream out(raster_out);
      if (!out)
        throw Error(ErrorCategory::io, "cannot write " + raster_out);
      mspg::write_permeability_raster(mspg::synthetic_channel_raster(raster_n), out);
    }
  } catch (const mspg::SolverFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const Error& e) {
    std::cerr << "error [" << mspg::category_name(e.category()) << "]: " << e.what() << '\n';
    return e.exit_code();
  }
  return 0;
}
