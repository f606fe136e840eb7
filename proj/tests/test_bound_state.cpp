#include "doctest.h"

#include "common.hpp"

using namespace gplab;

TEST_CASE("branch points solve the stationary equation and satisfy the slope condition") {
  const auto& f = testing::radial_fixture();
  BranchOptions bo;
  bo.lambda_range = {-f.e0() + 0.01, -f.e0() + 0.5};
  bo.steps = 8;
  const auto br = continue_radial_branch(f.model, bo);
  REQUIRE(br.size() == 8);
  for (std::size_t i = 0; i < br.size(); ++i) {
    CHECK(br[i].residual <= 1e-10);
    CHECK(br[i].dmass > 0.0);
    CHECK(br[i].phi.minCoeff() > -1e-12);
    if (i) CHECK(br[i].mass > br[i - 1].mass);
  }
}

TEST_CASE("small amplitude matches the bifurcation expansion") {
  const auto& f = testing::radial_fixture();
  const Vec& lin = f.spectrum.vectors[f.spectrum.levels[0].members[0]];
  const Vec prof = profile_from_reduced(f.grid, lin);
  const Vec u4 = (lin.array().square() * prof.array().square()).matrix();
  const double norm2 = radial_inner(f.grid, lin, lin, 0);
  const double quartic = kFourPi * f.grid.h() * u4.sum() / (norm2 * norm2);
  const double offset = 0.01;
  const BranchPoint bp = solve_radial_bound_state(f.model, -f.e0() + offset, lin * 0.05, 1e-11, 40);
  const double delta = bifurcation_amplitude(bp.lambda, f.e0(), -1.0, quartic);
  const double mass_pred = delta * delta;
  CHECK(std::sqrt(bp.mass) == doctest::Approx(std::sqrt(mass_pred)).epsilon(0.05));
  CHECK(std::isnan(bifurcation_amplitude(-f.e0() - offset, f.e0(), -1.0, quartic)));
}

TEST_CASE("lambda derivative agrees with a finite difference along the branch") {
  const auto& f = testing::radial_fixture();
  const double lam = f.point.lambda, h = 1e-4;
  const auto a = solve_radial_bound_state(f.model, lam + h, f.point.phi, 1e-12, 40);
  const auto b = solve_radial_bound_state(f.model, lam - h, f.point.phi, 1e-12, 40);
  const Vec fd = (a.phi - b.phi) / (2 * h);
  CHECK((fd - f.point.dphi).norm() / f.point.dphi.norm() < 1e-6);
  CHECK((radial_lambda_derivative(f.model, lam, f.point.phi) - f.point.dphi).norm() < 1e-10 * f.point.dphi.norm());
}
