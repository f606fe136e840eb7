#include "doctest.h"

#include <random>

#include <Eigen/Eigenvalues>

#include "common.hpp"
#include "gplab/fgr.hpp"

using namespace gplab;

namespace {

const RadialFgr& fixture_fgr() {
  static const RadialLinearization lin = testing::radial_fixture().linearization();
  static const RadialFgr fgr(lin, testing::gaussian());
  return fgr;
}

}  // namespace

TEST_CASE("extrapolation to zero is exact on polynomials") {
  const std::vector<double> eps{0.04, 0.02, 0.01};
  std::vector<cplx> v;
  for (double e : eps) v.push_back(cplx(1.5 - 2.0 * e + 3.0 * e * e, 0.5 * e));
  const Extrapolated x = extrapolate_to_zero(eps, v);
  CHECK(std::abs(x.value - cplx(1.5, 0.0)) < 1e-12);
}

TEST_CASE("gamma is Hermitian and non-negative on random directions") {
  const FgrTensor T = fixture_fgr().tensor();
  std::mt19937 rng(5);
  std::normal_distribution<double> gauss;
  for (int s = 0; s < 50; ++s) {
    CVec z(T.N);
    for (auto& x : z) x = cplx(gauss(rng), gauss(rng));
    const CMat G = T.Gamma(z);
    CHECK((G - G.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * G.norm());
    CHECK(Eigen::SelfAdjointEigenSolver<CMat>(G).eigenvalues().minCoeff() >= -1e-8 * G.norm());
  }
  CHECK(T.confident);
}

TEST_CASE("radial reduction and full tensor agree") {
  const auto& fgr = fixture_fgr();
  const RadialConstants c = fgr.constants();
  const FgrTensor T = fgr.tensor();
  CHECK(c.re_z11 > 0.0);
  CHECK(c.re_z22 > 0.0);
  CVec e1 = CVec::Zero(3);
  e1[0] = 1.0;
  const CMat G = T.Gamma(e1);
  CHECK(G(0, 0).real() == doctest::Approx(c.re_z11).epsilon(1e-2));
  CHECK(G(1, 1).real() == doctest::Approx(c.re_z22).epsilon(1e-2));
  CHECK(std::abs(G(0, 1)) <= 1e-8 * c.re_z11);
  // FGR constant of a positive tensor is positive and rotation invariant for the radial model
  const FgrMinimum K = fgr_constant(T, 3, 100);
  CHECK(K.K > 0.0);
  CHECK(K.z.norm() == doctest::Approx(1.0));
}

TEST_CASE("working-point constant: Re Z11 of the Gaussian well") {
  CHECK(fixture_fgr().constants().re_z11 == doctest::Approx(1.658e-2).epsilon(0.02));
}

TEST_CASE("weak-coupling surrogate is positive definite") {
  const WeakCoupling wc = radial_weak_coupling(30.0, testing::gaussian());
  CHECK(wc.mu > 0.0);
  CHECK(wc.min_eig > 0.0);
  CHECK(wc.K0(0, 0) > 0.0);
}

TEST_CASE("scalar outgoing resolvent solves its equation") {
  const RadialGrid g(20.0, 800);
  const Vec w = Vec::Zero(g.size());
  CVec f(g.size());
  for (int i = 0; i < g.size(); ++i) f[i] = g.r(i) * std::exp(-g.r(i) * g.r(i));
  const double mu = 1.0, eps = 0.05;
  const CVec u = scalar_resolvent(g, 0, w, mu, eps, f);
  const Tridiag T = radial_operator(g, 0, w);
  const CVec res = T.apply(u) - cplx(mu, eps) * u - f;
  CHECK(res.norm() <= 1e-10 * f.norm());
}
