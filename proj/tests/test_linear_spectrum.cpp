#include "doctest.h"

#include "common.hpp"

using namespace gplab;

TEST_CASE("harmonic oscillator levels and multiplicities") {
  SpectrumOptions so;
  so.k_eigs = 4;
  so.max_ell = 2;
  const auto s = radial_spectrum(RadialGrid(12.0, 2048), Potential(HarmonicWell{1.0}), so);
  REQUIRE(s.levels.size() >= 3);
  CHECK(s.levels[0].energy == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(s.levels[0].multiplicity == 1);
  CHECK(s.levels[1].energy == doctest::Approx(5.0).epsilon(1e-4));
  CHECK(s.levels[1].multiplicity == 3);
  // 7 = 2s (l = 0) and 1d (l = 2): six states, split by the channel-dependent discretisation error
  int at_seven = 0;
  for (const auto& l : s.levels)
    if (std::abs(l.energy - 7.0) < 1e-3) at_seven += l.multiplicity;
  CHECK(at_seven == 6);
}

TEST_CASE("gaussian well: two bound levels, nodeless ground state, resonance above threshold") {
  const auto& f = testing::radial_fixture();
  const auto& s = f.spectrum;
  CHECK(s.hypothesis_holds());
  CHECK(s.levels[0].energy == doctest::Approx(-4.7769).epsilon(1e-3));
  CHECK(s.levels[1].energy == doctest::Approx(-0.431).epsilon(1e-2));
  CHECK(s.levels[1].multiplicity == 3);
  CHECK(s.levels[1].ell == 1);
  CHECK(s.resonance_gap() > 0.0);
  const Vec& g = s.vectors[s.levels[0].members[0]];
  CHECK((g.array() * g[g.size() / 20]).minCoeff() > -1e-12);
  for (double r : s.residuals) CHECK(r < 1e-8);
}

TEST_CASE("grid doubling moves levels at second order") {
  SpectrumOptions so;
  so.k_eigs = 2;
  so.max_ell = 1;
  std::vector<double> e;
  for (int n : {500, 1000, 2000}) e.push_back(radial_spectrum(RadialGrid(20.0, n), testing::gaussian(), so).levels[0].energy);
  CHECK((e[0] - e[1]) / (e[1] - e[2]) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("clustering groups near-equal values") {
  const auto lv = cluster_levels({-2.0, -1.0, -1.0 + 1e-9, -0.5}, {-1, -1, -1, -1}, 1e-6);
  REQUIRE(lv.size() == 3);
  CHECK(lv[1].multiplicity == 2);
  CHECK(lv[1].members == std::vector<int>{1, 2});
}

TEST_CASE("box spectrum of a separable oscillator") {
  // V = |x|^2 on a coarse box: even levels 3 and 7 (x5 on the even sector: 2 in one axis)
  const BoxOps ops(BoxGrid(6.0, 32), Potential(HarmonicWell{1.0}));
  SpectrumOptions so;
  so.k_eigs = 2;
  const auto s = box_spectrum(ops, so);
  CHECK(s.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(s.eigenvalues[1] == doctest::Approx(7.0).epsilon(1e-6));
}
