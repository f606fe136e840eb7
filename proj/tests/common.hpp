#pragma once

#include "gplab/bound_state.hpp"
#include "gplab/linearization.hpp"

namespace gplab::testing {

inline const Potential& gaussian() {
  static const Potential V(GaussianWell{14.0, 1.0});
  return V;
}

// Gaussian well ground-state branch and neutral pair at lambda = -e0 + offset on a modest grid.
struct RadialFixture {
  RadialGrid grid{30.0, 2048};
  SpectrumResult spectrum;
  RadialModel model{grid, gaussian(), Nonlinearity(-1.0)};
  BranchPoint point;

  explicit RadialFixture(double offset = 0.5) {
    SpectrumOptions so;
    so.k_eigs = 3;
    spectrum = radial_spectrum(grid, gaussian(), so);
    BranchOptions bo;
    bo.lambda_range = {-e0() + 0.01, -e0() + offset};
    bo.steps = 5;
    point = continue_radial_branch(model, bo).back();
  }
  double e0() const { return spectrum.levels[0].energy; }
  double e_gap() const { return spectrum.levels[1].energy - e0(); }
  RadialLinearization linearization() const {
    RadialLinearization lin(model, point);
    lin.set_basis(lin.neutral_modes(e_gap()));
    return lin;
  }
};

inline const RadialFixture& radial_fixture() {
  static const RadialFixture f;
  return f;
}

}  // namespace gplab::testing
