#include "doctest.h"

#include <cmath>

#include "gplab/error.hpp"
#include "gplab/model.hpp"

using namespace gplab;

TEST_CASE("nonlinearity sign convention and primitive") {
  const Nonlinearity nl(-1.0);
  CHECK(nl.f(2.0) == doctest::Approx(2.0));
  CHECK(nl.df(0.3) == doctest::Approx(1.0));
  CHECK(nl.d2f(0.3) == 0.0);
  // F' = f / 2
  const double h = 1e-6;
  CHECK((nl.primitive(0.7 + h) - nl.primitive(0.7 - h)) / (2 * h) == doctest::Approx(0.5 * nl.f(0.7)));
}

TEST_CASE("potential values") {
  const Potential harmonic(HarmonicWell{2.0});
  CHECK(harmonic.at({1.0, 0.0, 1.0}) == doctest::Approx(8.0));
  CHECK(harmonic.radial(0.5) == doctest::Approx(1.0));
  const Potential gauss(GaussianWell{14.0, 1.0});
  CHECK(gauss.radial(0.0) == doctest::Approx(-14.0));
  CHECK(gauss.at({1.0, 0.0, 0.0}) == doctest::Approx(-14.0 * std::exp(-1.0)));
  CHECK(Potential(ZeroPotential{}).at({3.0, 1.0, 2.0}) == 0.0);
}

TEST_CASE("tabulated profile interpolates linearly and vanishes outside") {
  const Potential p(RadialProfile{{0.0, 1.0, 2.0}, {-2.0, -1.0, 0.0}});
  CHECK(p.radial(0.5) == doctest::Approx(-1.5));
  CHECK(p.radial(1.5) == doctest::Approx(-0.5));
  CHECK(p.radial(5.0) == 0.0);
}

TEST_CASE("double well is even, not radial, and matches the single well when m = 0") {
  const Potential dw = Potential::double_well(1.75, 36.0, 1.0);
  CHECK_FALSE(dw.is_radial());
  CHECK_THROWS_AS(dw.radial(1.0), GeometryMismatch);
  CHECK(dw.at({0.3, -0.2, 0.5}) == doctest::Approx(dw.at({-0.3, 0.2, -0.5})));
  CHECK(dw.at({0.3, 0.0, 0.0}) == doctest::Approx(dw.at({0.0, 0.3, 0.0})));
  const Potential single = Potential::double_well(0.0, 36.0, 1.0);
  CHECK(single.at({0.4, 0.1, 0.0}) == doctest::Approx(single.at({0.0, 0.0, std::hypot(0.4, 0.1)})));
}
