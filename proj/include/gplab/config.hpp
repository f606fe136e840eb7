#pragma once

#include <optional>
#include <string>

#include "json.hpp"

#include "gplab/fgr.hpp"
#include "gplab/linear_spectrum.hpp"

namespace gplab {

using Json = nlohmann::json;

struct GridConfig {
  std::string geometry = "radial";  // "radial" or "box"
  double r_max = 40.0;
  int n = 4096;
  double L = 10.0;
  int box_n = 64;
  int angular_nodes = 8;
};

// Ranges are absolute, or relative to the bifurcation point -e0 when `relative` is set.
struct BranchConfig {
  std::array<double, 2> range{0.01, 0.5};
  bool relative = true;
  int steps = 50;
  double newton_tol = 1e-10;
  int max_newton = 40;
};

struct NormalFormConfig {
  double T = 1e6;
  double dt = 0.01;
  int samples = 200;
  CVec z0;
  double coupling = 0.25;
};

struct SimulateConfig {
  double lambda = 0.5;
  bool relative = true;
  CVec z0;
  double gamma0 = 0.0;
  double T = 100.0;
  double dt = 5e-3;
  int samples = 200;
  double nu = 4.0;
  double eps0 = 0.1;
  double guard_fraction = 0.1;
  double guard_tol = 1e-8;
  int checkpoint_every = 0;
  std::string resume;
};

struct Seeds {
  unsigned spectrum = 1;
  unsigned identities = 7;
  unsigned fgr = 3;
};

struct RunConfig {
  Json source;
  Potential potential;
  Nonlinearity nl;
  GridConfig grid;
  SpectrumOptions spectrum;
  BranchConfig branch;
  FgrOptions fgr;
  NormalFormConfig normal_form;
  SimulateConfig simulate;
  Seeds seeds;
  std::string output = "out";

  bool radial() const { return grid.geometry == "radial"; }
};

// Schema checked; unknown keys, wrong types and out-of-range values throw ConfigError.
RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::string& path);

}  // namespace gplab
