#include "doctest.h"

#include <Eigen/Eigenvalues>

#include "gplab/discretization.hpp"
#include "gplab/linalg.hpp"

using namespace gplab;

TEST_CASE("radial grid layout") {
  const RadialGrid g(10.0, 99);
  CHECK(g.h() == doctest::Approx(0.1));
  CHECK(g.r(0) == doctest::Approx(0.1));
  CHECK(g.r(98) == doctest::Approx(9.9));
  const RadialGrid e = g.extended(20.0);
  CHECK(e.h() == doctest::Approx(g.h()));
  CHECK(e.r_max() >= 20.0 - 1e-12);
}

TEST_CASE("radial operator is second order on a smooth reduced function") {
  // u = r e^{-r^2} against the exact -u'' in the l = 0 channel
  double prev = 0.0;
  for (int n : {400, 800}) {
    const RadialGrid g(8.0, n);
    const Tridiag T = radial_operator(g, 0, Vec::Zero(n));
    Vec u(n), exact(n);
    for (int i = 0; i < n; ++i) {
      const double r = g.r(i);
      u[i] = r * std::exp(-r * r);
      exact[i] = -(4 * r * r * r - 6 * r) * std::exp(-r * r);
    }
    const double err = (T.apply(u) - exact).cwiseAbs().maxCoeff();
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
    prev = err;
  }
}

TEST_CASE("radial inner product integrates 3D Gaussians") {
  const RadialGrid g(12.0, 4000);
  Vec u(g.size());
  for (int i = 0; i < g.size(); ++i) u[i] = g.r(i) * std::exp(-0.5 * g.r(i) * g.r(i));
  // int e^{-|x|^2} d^3x = pi^{3/2}
  CHECK(radial_inner(g, u, u, 0) == doctest::Approx(std::pow(M_PI, 1.5)).epsilon(1e-8));
  CHECK(angular_weight(0) == doctest::Approx(4 * M_PI));
  CHECK(angular_weight(1) == doctest::Approx(4 * M_PI / 3));
  const Vec f = profile_from_reduced(g, u);
  CHECK((reduced_from_profile(g, f) - u).norm() < 1e-13);
}

TEST_CASE("tridiagonal eigenpairs agree with a dense solver") {
  const int n = 60;
  Vec d(n), o(n - 1);
  for (int i = 0; i < n; ++i) d[i] = 2.0 + 0.1 * std::sin(i);
  o.setConstant(-1.0);
  const EigenPairs ep = tridiagonal_lowest(d, o, 3);
  Mat A = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) A(i, i) = d[i];
  for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = A(i + 1, i) = o[i];
  const Eigen::SelfAdjointEigenSolver<Mat> es(A);
  for (int k = 0; k < 3; ++k) CHECK(ep.values[k] == doctest::Approx(es.eigenvalues()[k]).epsilon(1e-12));
  CHECK((A * ep.vectors.col(0) - ep.values[0] * ep.vectors.col(0)).norm() < 1e-10);
}

TEST_CASE("banded LU and GMRES solve the same system") {
  const int n = 50;
  BandedLU<double> lu(n, 1, 1);
  Mat A = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 4.0 + i * 0.01;
    if (i > 0) A(i, i - 1) = -1.0;
    if (i + 1 < n) A(i, i + 1) = -1.5;
  }
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - 1); j <= std::min(n - 1, i + 1); ++j) lu.set(i, j, A(i, j));
  lu.factor();
  const Vec b = Vec::LinSpaced(n, -1.0, 2.0);
  const Vec x = lu.solve(b);
  CHECK((A * x - b).norm() < 1e-12);
  Vec y;
  const auto res = gmres<Vec>([&](const Vec& v) { return Vec(A * v); }, b, y, [](const Vec& v) { return v; }, 1e-12, 20, 200);
  CHECK(res.converged);
  CHECK((y - x).norm() < 1e-9);
}

TEST_CASE("box Laplacian is spectral on plane waves and shifted inverse undoes it") {
  const BoxGrid g(M_PI, 16);
  const BoxOps ops(g, Potential(ZeroPotential{}));
  Vec u(g.size());
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.n(); ++k) u[g.index(i, j, k)] = std::cos(2 * g.x(i)) * std::cos(g.x(k));
  CHECK((ops.laplacian_neg(u) - 5.0 * u).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((ops.shifted_inverse(ops.laplacian_neg(u) + 0.5 * u, 0.5) - u).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((ops.restrict_even(u) - u).norm() < 1e-12);
}
