#pragma once

#include <vector>

#include "gplab/discretization.hpp"
#include "gplab/lobpcg.hpp"

namespace gplab {

struct Level {
  double energy = 0.0;
  int multiplicity = 1;
  int ell = -1;               // radial channel, -1 on a box
  std::vector<int> members;   // indices into SpectrumResult::eigenvalues
};

struct SpectrumResult {
  std::vector<double> eigenvalues;
  std::vector<int> channel;   // ell per eigenvalue (radial), -1 on a box
  std::vector<Vec> vectors;   // reduced radial functions or box fields, unit L2 norm
  std::vector<Level> levels;  // ascending
  std::vector<double> residuals;

  // 2 e1 - e0 where e0 < e1 are the two lowest levels; NaN when fewer than two exist.
  double resonance_gap() const;
  // True when e0 < e1 < 0 and 2 e1 - e0 > 0.
  bool hypothesis_holds() const;
};

struct SpectrumOptions {
  int k_eigs = 4;
  double gap_tol = 1e-6;  // relative cluster threshold
  int max_ell = 2;        // radial channels 0..max_ell
  double tol = 1e-9;      // box eigensolver relative residual
  int max_iter = 400;
  unsigned seed = 1;
};

SpectrumResult radial_spectrum(const RadialGrid& grid, const Potential& V, const SpectrumOptions& opts = {});
// Even-subspace spectrum on the box; restrict_even is applied inside the iteration.
SpectrumResult box_spectrum(const BoxOps& ops, const SpectrumOptions& opts = {});

// Groups sorted eigenvalues whose relative separation is below gap_tol.
std::vector<Level> cluster_levels(const std::vector<double>& sorted, const std::vector<int>& channel, double gap_tol);

}  // namespace gplab
