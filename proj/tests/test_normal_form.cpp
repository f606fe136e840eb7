#include "doctest.h"

#include "gplab/fit.hpp"
#include "gplab/lemmas.hpp"
#include "gplab/normal_form.hpp"

using namespace gplab;

TEST_CASE("isotropic tensor reproduces the closed form") {
  const NormalFormModel model{3.0, isotropic_tensor(2, 0.05), 0.25, Mat()};
  CVec z0(2);
  z0 << cplx(0.2, 0.1), cplx(-0.1, 0.3);
  const Trajectory tr = integrate_normal_form(model, z0, 0.0, 2000.0, 0.01, 50);
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const double expect = z0.norm() / std::sqrt(1.0 + 2.0 * 0.25 * 0.05 * z0.squaredNorm() * tr.t[i]);
    CHECK(tr.norm[i] == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("skew part conserves the norm") {
  FgrTensor T = isotropic_tensor(2, 0.0);
  T.at(0, 1, 0, 1) = cplx(0.0, 0.3);
  T.at(1, 0, 1, 0) = cplx(0.0, 0.3);
  const NormalFormModel model{2.0, T, 0.25, Mat()};
  CVec z0(2);
  z0 << cplx(0.3, 0.0), cplx(0.0, 0.2);
  const Trajectory tr = integrate_normal_form(model, z0, 0.0, 100.0, 0.01, 20);
  CHECK(tr.norm.back() == doctest::Approx(z0.norm()).epsilon(1e-8));
}

TEST_CASE("phase equation integrates Upsilon") {
  Mat A = Mat::Identity(1, 1) * 0.7;
  const NormalFormModel model{1.0, isotropic_tensor(1, 0.0), 0.25, A};
  CVec z0(1);
  z0 << cplx(0.5, 0.0);
  const Trajectory tr = integrate_normal_form(model, z0, 0.1, 10.0, 0.01, 10);
  CHECK(tr.gamma.back() == doctest::Approx(0.1 + 0.7 * 0.25 * 10.0));
  CHECK(upsilon11(A, z0) == doctest::Approx(0.175));
}

TEST_CASE("decay fit recovers a power law") {
  std::vector<double> t, v;
  for (int i = 1; i <= 40; ++i) {
    t.push_back(std::pow(10.0, i / 10.0));
    v.push_back(3.0 * std::pow(t.back(), -0.5));
  }
  const DecayFit f = fit_decay(t, v, 10.0, 1e4);
  CHECK(f.exponent == doctest::Approx(0.5));
  CHECK(f.amplitude == doctest::Approx(3.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  v[3] = -1.0;
  CHECK_THROWS(fit_decay(t, v, 1.0, 1e4));
}

TEST_CASE("Riccati and convolution lemmas") {
  const RiccatiReport r = verify_riccati_bound(10.0, 0.1, 0.4, 0.3, 1e4);
  CHECK(r.holds);
  CHECK(r.k_fit < 2.0);
  const RiccatiReport free = verify_riccati_bound(10.0, 0.0, 0.4, 0.3, 1e4);
  CHECK(free.sup_ratio <= 1.0 + 1e-9);
  const ConvolutionReport c = verify_convolution_bound(2.0, 1.0, 1e3);
  CHECK(c.stable);
  CHECK(c.c_observed > 0.0);
  // sigma = 0: the integral tends to 2
  CHECK(convolution_integral(2.0, 0.0, 1e6) == doctest::Approx(2.0).epsilon(1e-2));
}
