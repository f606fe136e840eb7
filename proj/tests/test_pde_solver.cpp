#include "doctest.h"

#include "common.hpp"
#include "gplab/pde_solver.hpp"

using namespace gplab;

namespace {

struct PdeFixture {
  const testing::RadialFixture& f = testing::radial_fixture();
  AxisymmetricPropagator prop{f.grid, 6, testing::gaussian(), Nonlinearity(-1.0)};
  double lambda = f.point.lambda;
  Decomposer dec{make_table(), prop.weights(), prop.radius()};

  ManifoldTable make_table() {
    std::vector<double> ls;
    for (int k = -3; k <= 3; ++k) ls.push_back(lambda + 0.01 * k);
    return radial_manifold(f.model, prop, ls, f.point.phi, f.e_gap());
  }
};

PdeFixture& pde() {
  static PdeFixture p;
  return p;
}

}  // namespace

TEST_CASE("standing wave rotates at its frequency") {
  auto& p = pde();
  const CVec phi = p.dec.table().at(p.lambda).phi.cast<cplx>();
  CVec psi = phi;
  const double dt = 5e-4, T = 0.5;
  for (int i = 0; i < static_cast<int>(T / dt); ++i) p.prop.step(psi, dt);
  const cplx overlap = p.dec.inner(psi, phi) / p.dec.inner(phi, phi);
  CHECK(std::abs(overlap) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::arg(overlap) == doctest::Approx(p.lambda * T).epsilon(1e-5));
}

TEST_CASE("mass and energy are conserved by the splitting") {
  auto& p = pde();
  CVec z0(1);
  z0[0] = 0.05;
  CVec psi = prepare_initial_data(p.dec.table().at(p.lambda), z0, 0.0);
  const double m0 = p.prop.mass(psi), e0 = p.prop.energy(psi);
  for (int i = 0; i < 400; ++i) p.prop.step(psi, 5e-3);
  CHECK(std::abs(p.prop.mass(psi) - m0) <= 1e-11 * m0);
  CHECK(std::abs(p.prop.energy(psi) - e0) <= 1e-6 * std::abs(e0));
}

TEST_CASE("decomposition recovers prepared parameters") {
  auto& p = pde();
  CVec z0(1);
  z0[0] = cplx(0.04, 0.01);
  const double lam = p.lambda + 0.004;
  const CVec psi = prepare_initial_data(p.dec.table().at(lam), z0, 0.3);
  const ModulationState st = p.dec.decompose(psi, p.lambda, 0.25, CVec::Constant(1, cplx(0.03, 0.0)));
  REQUIRE(st.ok);
  CHECK(st.lambda == doctest::Approx(lam).epsilon(1e-9));
  CHECK(st.theta == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(std::abs(st.z[0] - z0[0]) < 1e-9);
  CHECK(st.r_norm < 1e-8);
}

TEST_CASE("out-of-regime amplitudes and table ends are rejected") {
  auto& p = pde();
  CVec big(1);
  big[0] = 0.5;
  CHECK_THROWS_AS(prepare_initial_data(p.dec.table().at(p.lambda), big, 0.0), InvalidParameter);
  CHECK_THROWS_AS(p.dec.table().at(p.lambda + 1.0), NumericalError);
}

TEST_CASE("short evolution tracks the modulation parameters") {
  auto& p = pde();
  CVec z0(1);
  z0[0] = 0.03;
  EvolveOptions eo;
  eo.T = 2.0;
  eo.samples = 10;
  const PdeRun run = evolve_and_measure(p.prop, p.dec, prepare_initial_data(p.dec.table().at(p.lambda), z0, 0.0),
                                        p.lambda, z0, 0.0, eo);
  CHECK(run.failed_frames == 0);
  CHECK(run.mass_drift < 1e-10);
  for (const auto& f : run.frames) {
    CHECK(std::abs(f.lambda - p.lambda) < 1e-3);
    CHECK(f.z.norm() == doctest::Approx(0.03).epsilon(0.05));
  }
}

TEST_CASE("box propagator conserves mass and shares the standing-wave phase") {
  const BoxGrid g(8.0, 32);
  const BoxModel model(g, Potential(HarmonicWell{1.0}), Nonlinearity(0.0));
  BoxPropagator prop(model);
  CVec psi(g.size());
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.n(); ++k)
        psi[g.index(i, j, k)] = std::exp(-0.5 * (g.x(i) * g.x(i) + g.x(j) * g.x(j) + g.x(k) * g.x(k)));
  const CVec start = psi;
  const double m0 = prop.mass(psi);
  for (int s = 0; s < 200; ++s) prop.step(psi, 1e-3);
  CHECK(prop.mass(psi) == doctest::Approx(m0).epsilon(1e-12));
  // ground state of -Lap + |x|^2 has energy 3: psi = e^{-3 i t} psi0
  const cplx ov = start.dot(psi) / start.squaredNorm();
  CHECK(std::arg(ov) == doctest::Approx(-0.6).epsilon(1e-4));
}
