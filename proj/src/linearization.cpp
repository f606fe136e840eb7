#include "gplab/linearization.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Cholesky>

#include "gplab/linalg.hpp"
#include "gplab/lobpcg.hpp"

namespace gplab {

double IdentityReport::worst() const {
  return std::max({kernel_minus, kernel_plus, eigen, biorthogonality, orthogonality, antisymmetry, idempotence,
                   symplectic});
}

namespace {

// Rows of U L U^T for upper bidiagonal U (diag d, super e) and symmetric tridiagonal L, bandwidth 2,
// LAPACK upper band storage with kd = 2.
std::vector<double> congruence_band(const Vec& d, const Vec& e, const Tridiag& L) {
  const int n = static_cast<int>(d.size());
  auto U = [&](int i, int k) -> double {
    if (k == i) return d[i];
    if (k == i + 1 && i + 1 < n) return e[i];
    return 0.0;
  };
  auto P = [&](int k, int l) -> double {
    if (k < 0 || l < 0 || k >= n || l >= n) return 0.0;
    if (k == l) return L.diag[k];
    if (std::abs(k - l) == 1) return L.off[std::min(k, l)];
    return 0.0;
  };
  std::vector<double> ab(static_cast<std::size_t>(3) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j <= std::min(n - 1, i + 2); ++j) {
      double s = 0.0;
      for (int k = i; k <= std::min(n - 1, i + 1); ++k)
        for (int l = j; l <= std::min(n - 1, j + 1); ++l) s += U(i, k) * P(k, l) * U(j, l);
      ab[static_cast<std::size_t>(j) * 3 + (2 + i - j)] = s;
    }
  }
  return ab;
}

struct CongruenceProblem {
  Vec d, e;                 // Cholesky factor of L_-
  std::vector<double> band; // U L_+ U^T
};

CongruenceProblem congruence(const Tridiag& minus, const Tridiag& plus) {
  const int n = minus.size();
  BandCholesky ch(n, 1);
  for (int i = 0; i < n; ++i) {
    ch.set(i, i, minus.diag[i]);
    if (i + 1 < n) ch.set(i, i + 1, minus.off[i]);
  }
  try {
    ch.factor();
  } catch (const NumericalError&) {
    throw HypothesisViolated("L_- is not positive definite in a channel l >= 1");
  }
  CongruenceProblem cp;
  cp.d.resize(n);
  cp.e.resize(n - 1);
  for (int i = 0; i < n; ++i) {
    cp.d[i] = ch.factor_entry(i, i);
    if (i + 1 < n) cp.e[i] = ch.factor_entry(i, i + 1);
  }
  cp.band = congruence_band(cp.d, cp.e, plus);
  return cp;
}

Vec band_lowest_values(std::vector<double> band, int n, int count) {
  lapack_int m = 0;
  Vec w(n);
  std::vector<lapack_int> ifail(n);
  double q = 0.0, z = 0.0;
  const lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', 'I', 'U', n, 2, band.data(), 3, &q, 1, 0.0, 0.0, 1,
                                         count, 0.0, &m, w.data(), &z, 1, ifail.data());
  if (info != 0 || m != count) throw NumericalError("dsbevx failed");
  return w.head(count);
}

Vec band_inverse_iteration(const std::vector<double>& band, int n, double mu) {
  BandedLU<double> lu(n, 2, 2);
  const double shift = mu - 1e-10 * std::max(1.0, std::abs(mu));
  for (int j = 0; j < n; ++j)
    for (int i = std::max(0, j - 2); i <= j; ++i) {
      const double v = band[static_cast<std::size_t>(j) * 3 + (2 + i - j)] - (i == j ? shift : 0.0);
      lu.set(i, j, v);
      lu.set(j, i, v);
    }
  lu.factor();
  Vec y = Vec::Ones(n);
  for (int it = 0; it < 4; ++it) {
    y = lu.solve(y);
    y.normalize();
  }
  return y;
}

// Inverse iteration on the unsquared system [[-E, L_-], [L_+, -E]] with interleaved unknowns, updating E by the
// two-sided Rayleigh quotient (the left eigenvector of [[0, L_-], [L_+, 0]] is (eta, xi)).
void refine_pair(const Tridiag& lm, const Tridiag& lp, double& E, Vec& xi, Vec& eta) {
  const int n = lm.size();
  for (int it = 0; it < 3; ++it) {
    BandedLU<double> lu(2 * n, 3, 3);
    const double shift = E * (1.0 - 1e-13);
    for (int i = 0; i < n; ++i) {
      lu.set(2 * i, 2 * i, -shift);
      lu.set(2 * i + 1, 2 * i + 1, -shift);
      lu.set(2 * i, 2 * i + 1, lm.diag[i]);
      lu.set(2 * i + 1, 2 * i, lp.diag[i]);
      if (i + 1 < n) {
        lu.set(2 * i, 2 * i + 3, lm.off[i]);
        lu.set(2 * i + 2, 2 * i + 1, lm.off[i]);
        lu.set(2 * i + 1, 2 * i + 2, lp.off[i]);
        lu.set(2 * i + 3, 2 * i, lp.off[i]);
      }
    }
    lu.factor();
    Vec x(2 * n);
    for (int i = 0; i < n; ++i) {
      x[2 * i] = xi[i];
      x[2 * i + 1] = eta[i];
    }
    x = lu.solve(x);
    for (int i = 0; i < n; ++i) {
      xi[i] = x[2 * i];
      eta[i] = x[2 * i + 1];
    }
    const double s = 1.0 / xi.norm();
    xi *= s;
    eta *= s;
    E = (eta.dot(lm.apply(eta)) + xi.dot(lp.apply(xi))) / (2.0 * xi.dot(eta));
  }
}

Vec upper_transpose_apply(const Vec& d, const Vec& e, const Vec& y) {
  // U^T y with U upper bidiagonal
  Vec out = d.cwiseProduct(y);
  out.tail(y.size() - 1) += e.cwiseProduct(y.head(y.size() - 1));
  return out;
}

CVec first(const Pair& u) { return u.head(u.size() / 2); }
CVec second(const Pair& u) { return u.tail(u.size() / 2); }
Pair join(const CVec& a, const CVec& b) {
  Pair p(a.size() + b.size());
  p << a, b;
  return p;
}

Pair random_pair(std::mt19937_64& rng, long n) {
  std::normal_distribution<double> nd;
  Pair p(2 * n);
  for (long i = 0; i < 2 * n; ++i) p[i] = cplx(nd(rng), nd(rng));
  return p;
}

Pair apply_J(const Pair& u) { return join(second(u), -first(u)); }

}  // namespace

RadialLinearization::RadialLinearization(const RadialModel& model, const BranchPoint& bp)
    : model_(&model), bp_(bp), wm_(model.w_minus(bp.lambda, bp.phi)), wp_(model.w_plus(bp.lambda, bp.phi)) {}

Tridiag RadialLinearization::minus(int ell) const { return radial_operator(model_->grid, ell, wm_); }
Tridiag RadialLinearization::plus(int ell) const { return radial_operator(model_->grid, ell, wp_); }

Pair RadialLinearization::apply(int ell, const Pair& u) const {
  return join(minus(ell).apply(CVec(second(u))), -plus(ell).apply(CVec(first(u))));
}

double RadialLinearization::kernel_minus_residual() const {
  const Vec r = minus(0).apply(bp_.phi);
  return r.norm() / (bp_.lambda * bp_.phi.norm());
}

double RadialLinearization::kernel_plus_residual() const {
  const Vec r = plus(0).apply(bp_.dphi) + bp_.phi;
  return r.norm() / bp_.phi.norm();
}

std::vector<double> RadialLinearization::channel_frequencies(int ell, int count) const {
  if (ell < 1) throw InvalidParameter("channel_frequencies needs l >= 1");
  const CongruenceProblem cp = congruence(minus(ell), plus(ell));
  const Vec mu = band_lowest_values(cp.band, model_->grid.size(), count);
  std::vector<double> out;
  const double edge = bp_.lambda * bp_.lambda;
  for (long i = 0; i < mu.size(); ++i)
    if (mu[i] < edge) out.push_back(std::sqrt(std::max(mu[i], 0.0)));
  return out;
}

NeutralBasis RadialLinearization::neutral_modes(double e_gap) const {
  const int n = model_->grid.size();
  const Tridiag lm = minus(1), lp = plus(1);
  const CongruenceProblem cp = congruence(lm, lp);
  const double mu = band_lowest_values(cp.band, n, 1)[0];
  if (!(mu > 0.0)) throw HypothesisViolated("non-positive E^2 in the l = 1 channel");
  double E = std::sqrt(mu);
  if (!(E < 1.5 * e_gap)) throw HypothesisViolated("neutral frequency outside the expected window");
  if (!(E < bp_.lambda)) throw HypothesisViolated("neutral frequency is not below the continuum edge");
  const Vec y = band_inverse_iteration(cp.band, n, mu);
  Vec xi = upper_transpose_apply(cp.d, cp.e, y);
  Vec eta = lp.apply(xi) / E;
  refine_pair(lm, lp, E, xi, eta);
  const double pairing = radial_inner(model_->grid, xi, eta, 1);
  NeutralBasis b;
  b.E = E;
  b.N = 3;
  b.radial = true;
  b.raw_pairing = {pairing / std::sqrt(radial_inner(model_->grid, xi, xi, 1) * radial_inner(model_->grid, eta, eta, 1))};
  if (!(pairing > 0.0)) throw DegeneracyError("neutral pairing <xi, eta> is not positive");
  double s = 1.0 / std::sqrt(pairing);
  if (xi.sum() < 0) s = -s;
  b.xi = {xi * s};
  b.eta = {eta * s};
  return b;
}

Pair RadialLinearization::project_disc(int ell, const Pair& u) const {
  const auto& g = model_->grid;
  const CVec u1 = first(u), u2 = second(u);
  if (ell == 0) {
    const CVec phi = bp_.phi.cast<cplx>(), dphi = bp_.dphi.cast<cplx>();
    const double c = radial_inner(g, bp_.phi, bp_.dphi, 0);
    return join(dphi * (radial_inner(g, u1, phi, 0) / c), phi * (radial_inner(g, u2, dphi, 0) / c));
  }
  if (ell == 1 && !basis_.xi.empty()) {
    const CVec xi = basis_.xi[0].cast<cplx>(), eta = basis_.eta[0].cast<cplx>();
    return join(xi * radial_inner(g, u1, eta, 1), eta * radial_inner(g, u2, xi, 1));
  }
  return Pair::Zero(u.size());
}

Pair RadialLinearization::project_c_adjoint(int ell, const Pair& u) const {
  const auto& g = model_->grid;
  const CVec u1 = first(u), u2 = second(u);
  if (ell == 0) {
    const CVec phi = bp_.phi.cast<cplx>(), dphi = bp_.dphi.cast<cplx>();
    const double c = radial_inner(g, bp_.phi, bp_.dphi, 0);
    return u - join(phi * (radial_inner(g, u1, dphi, 0) / c), dphi * (radial_inner(g, u2, phi, 0) / c));
  }
  if (ell == 1 && !basis_.xi.empty()) {
    const CVec xi = basis_.xi[0].cast<cplx>(), eta = basis_.eta[0].cast<cplx>();
    return u - join(eta * radial_inner(g, u1, xi, 1), xi * radial_inner(g, u2, eta, 1));
  }
  return u;
}

IdentityReport RadialLinearization::identities(unsigned seed, int samples) const {
  IdentityReport rep;
  rep.kernel_minus = kernel_minus_residual();
  rep.kernel_plus = kernel_plus_residual();
  if (!basis_.xi.empty()) {
    const Vec& xi = basis_.xi[0];
    const Vec& eta = basis_.eta[0];
    const double E = basis_.E;
    rep.eigen = std::max((minus(1).apply(eta) - E * xi).norm() / (E * xi.norm()),
                         (plus(1).apply(xi) - E * eta).norm() / (E * eta.norm()));
    rep.biorthogonality = std::abs(radial_inner(model_->grid, xi, eta, 1) - 1.0);
    // <phi, xi_n> and <dphi, eta_n> vanish through the angular integral of x_n/|x|; as do the
    // antisymmetric couplings since xi_m eta_n - xi_n eta_m = 0 pointwise.
    rep.orthogonality = 0.0;
    rep.antisymmetry = 0.0;
    rep.resonance_margin = 2.0 * E - bp_.lambda;
  }
  std::mt19937_64 rng(seed);
  const long n = model_->grid.size();
  for (int ell : {0, 1, 2}) {
    for (int s = 0; s < samples; ++s) {
      const Pair u = random_pair(rng, n);
      const Pair p = project_disc(ell, u);
      rep.idempotence = std::max(rep.idempotence, (project_disc(ell, p) - p).norm() / u.norm());
      const Pair lhs = project_c_adjoint(ell, apply_J(u));
      const Pair rhs = apply_J(project_c(ell, u));
      rep.symplectic = std::max(rep.symplectic, (lhs - rhs).norm() / u.norm());
    }
  }
  return rep;
}

// ---------------------------------------------------------------- box

BoxLinearization::BoxLinearization(const BoxModel& model, const BranchPoint& bp)
    : model_(&model), bp_(bp), wm_(model.w_minus(bp.lambda, bp.phi)), wp_(model.w_plus(bp.lambda, bp.phi)) {}

Vec BoxLinearization::apply_minus(const Vec& u) const { return model_->ops.laplacian_neg(u) + wm_.cwiseProduct(u); }
Vec BoxLinearization::apply_plus(const Vec& u) const { return model_->ops.laplacian_neg(u) + wp_.cwiseProduct(u); }

Pair BoxLinearization::apply(const Pair& u) const {
  const CVec a = first(u), b = second(u);
  auto minus_c = [&](const CVec& v) {
    return CVec(model_->ops.laplacian_neg(v) + wm_.cast<cplx>().cwiseProduct(v));
  };
  auto plus_c = [&](const CVec& v) { return CVec(model_->ops.laplacian_neg(v) + wp_.cast<cplx>().cwiseProduct(v)); };
  return join(minus_c(b), -plus_c(a));
}

NeutralBasis BoxLinearization::neutral_modes(int N, const std::vector<Vec>& guesses, double tol, int max_iter) const {
  const BoxOps& ops = model_->ops;
  const Vec& phi = bp_.phi;
  const double pp = ops.inner(phi, phi);
  auto P = [&](const Vec& u) {
    Vec e = ops.restrict_even(u);
    return Vec(e - phi * (ops.inner(e, phi) / pp));
  };
  auto blockwise = [](auto&& f) {
    return [f](const Mat& Y) {
      Mat out(Y.rows(), Y.cols());
      for (long c = 0; c < Y.cols(); ++c) out.col(c) = f(Vec(Y.col(c)));
      return out;
    };
  };
  const double lam = bp_.lambda;
  BlockOp A = blockwise([&](const Vec& u) {
    const Vec a = apply_minus(P(u));
    return P(apply_minus(apply_plus(a)));
  });
  BlockOp B = blockwise([&](const Vec& u) { return P(apply_minus(P(u))); });
  BlockOp T = blockwise([&](const Vec& u) {
    return P(ops.shifted_inverse(ops.shifted_inverse(ops.shifted_inverse(u, lam), lam), lam));
  });
  BlockOp C = blockwise([&](const Vec& u) { return P(u); });
  const int block = N + 2;
  Mat X(phi.size(), block);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int c = 0; c < block; ++c) {
    if (c < static_cast<int>(guesses.size())) {
      X.col(c) = guesses[c];
    } else {
      Vec r(phi.size());
      for (long i = 0; i < r.size(); ++i) r[i] = nd(rng);
      X.col(c) = ops.shifted_inverse(ops.shifted_inverse(r, lam), lam);
    }
  }
  LobpcgOptions lo;
  lo.wanted = N;
  lo.tol = tol;
  lo.max_iter = max_iter;
  const LobpcgResult res = lobpcg(A, B, T, C, X, lo);
  if (!res.converged) throw NoConvergence("neutral mode eigensolver did not converge");
  double E = 0.0;
  for (int n = 0; n < N; ++n) E += std::sqrt(std::max(res.values[n], 0.0));
  E /= N;
  NeutralBasis b;
  b.E = E;
  b.N = N;
  for (int n = 0; n < N; ++n) {
    const Vec x = res.vectors.col(n);
    Vec xi = apply_minus(x) / E;
    Vec eta = apply_plus(xi) / E;
    const double pairing = ops.inner(xi, eta);
    b.raw_pairing.push_back(pairing / (ops.norm(xi) * ops.norm(eta)));
    b.xi.push_back(xi);
    b.eta.push_back(eta);
  }
  if (res.values.size() > N) {
    const double gap = std::sqrt(std::max(res.values[N], 0.0)) - E;
    if (!(gap > 1e-6 * E)) throw DegeneracyError("neutral cluster is not separated from the next eigenvalue");
  }
  return b;
}

NeutralBasis BoxLinearization::canonical_basis(const NeutralBasis& raw) const {
  const BoxOps& ops = model_->ops;
  const BoxGrid& g = ops.grid();
  const int N = raw.N;
  NeutralBasis b = raw;
  // quadrupole probes spanning the two-dimensional representation, then dipole-like fallbacks
  std::vector<Vec> probes;
  {
    Vec q1(g.size()), q2(g.size());
    for (int i = 0; i < g.n(); ++i)
      for (int j = 0; j < g.n(); ++j)
        for (int k = 0; k < g.n(); ++k) {
          const double x = g.x(i), y = g.x(j), z = g.x(k);
          const double w = std::exp(-0.5 * (x * x + y * y + z * z));
          q1[g.index(i, j, k)] = (x * x - y * y) * w;
          q2[g.index(i, j, k)] = (2 * z * z - x * x - y * y) / std::sqrt(3.0) * w;
        }
    probes = {q1, q2};
  }
  Mat S(N, N);
  bool use_probes = N <= static_cast<int>(probes.size());
  if (use_probes) {
    for (int n = 0; n < N; ++n)
      for (int p = 0; p < N; ++p) S(n, p) = ops.inner(raw.xi[n], probes[p]);
    const double scale = S.cwiseAbs().maxCoeff();
    if (!(std::abs(S.determinant()) > 1e-6 * std::pow(scale, N))) use_probes = false;
  }
  std::vector<Vec> xi(N), eta(N);
  if (use_probes) {
    for (int p = 0; p < N; ++p) {
      xi[p] = Vec::Zero(g.size());
      for (int n = 0; n < N; ++n) xi[p] += S(n, p) * raw.xi[n];
    }
  } else {
    std::vector<int> order(N);
    for (int n = 0; n < N; ++n) order[n] = n;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int c) { return raw.raw_pairing[a] > raw.raw_pairing[c]; });
    for (int p = 0; p < N; ++p) xi[p] = raw.xi[order[p]];
  }
  for (int p = 0; p < N; ++p) eta[p] = apply_plus(xi[p]) / raw.E;
  Mat M(N, N);
  for (int m = 0; m < N; ++m)
    for (int n = 0; n < N; ++n) M(m, n) = ops.inner(xi[m], eta[n]);
  M = 0.5 * (M + M.transpose()).eval();
  Eigen::LLT<Mat> llt(M);
  if (llt.info() != Eigen::Success) throw DegeneracyError("pairing matrix <xi_m, eta_n> is not positive definite");
  const Mat Linv = llt.matrixL().solve(Mat::Identity(N, N));
  b.xi.assign(N, Vec::Zero(g.size()));
  b.eta.assign(N, Vec::Zero(g.size()));
  for (int p = 0; p < N; ++p)
    for (int n = 0; n <= p; ++n) {
      b.xi[p] += Linv(p, n) * xi[n];
      b.eta[p] += Linv(p, n) * eta[n];
    }
  for (int p = 0; p < N; ++p) {
    const double sgn = use_probes ? ops.inner(b.xi[p], probes[p]) : b.xi[p].sum();
    if (sgn < 0) {
      b.xi[p] = -b.xi[p];
      b.eta[p] = -b.eta[p];
    }
  }
  return b;
}

Pair BoxLinearization::project_disc(const Pair& u) const {
  const BoxOps& ops = model_->ops;
  const CVec u1 = first(u), u2 = second(u);
  const CVec phi = bp_.phi.cast<cplx>(), dphi = bp_.dphi.cast<cplx>();
  const double c = ops.inner(bp_.phi, bp_.dphi);
  CVec p1 = dphi * (ops.inner(u1, phi) / c);
  CVec p2 = phi * (ops.inner(u2, dphi) / c);
  for (int n = 0; n < basis_.N; ++n) {
    const CVec xi = basis_.xi[n].cast<cplx>(), eta = basis_.eta[n].cast<cplx>();
    p1 += xi * ops.inner(u1, eta);
    p2 += eta * ops.inner(u2, xi);
  }
  return join(p1, p2);
}

Pair BoxLinearization::project_c_adjoint(const Pair& u) const {
  const BoxOps& ops = model_->ops;
  const CVec u1 = first(u), u2 = second(u);
  const CVec phi = bp_.phi.cast<cplx>(), dphi = bp_.dphi.cast<cplx>();
  const double c = ops.inner(bp_.phi, bp_.dphi);
  CVec p1 = phi * (ops.inner(u1, dphi) / c);
  CVec p2 = dphi * (ops.inner(u2, phi) / c);
  for (int n = 0; n < basis_.N; ++n) {
    const CVec xi = basis_.xi[n].cast<cplx>(), eta = basis_.eta[n].cast<cplx>();
    p1 += eta * ops.inner(u1, xi);
    p2 += xi * ops.inner(u2, eta);
  }
  return u - join(p1, p2);
}

IdentityReport BoxLinearization::identities(unsigned seed, int samples) const {
  const BoxOps& ops = model_->ops;
  IdentityReport rep;
  const Vec& phi = bp_.phi;
  rep.kernel_minus = ops.norm(ops.restrict_even(apply_minus(phi))) / (bp_.lambda * ops.norm(phi));
  rep.kernel_plus = ops.norm(apply_plus(bp_.dphi) + phi) / ops.norm(phi);
  const double E = basis_.E;
  for (int n = 0; n < basis_.N; ++n) {
    const Vec& xi = basis_.xi[n];
    const Vec& eta = basis_.eta[n];
    rep.eigen = std::max({rep.eigen, ops.norm(apply_minus(eta) - E * xi) / (E * ops.norm(xi)),
                          ops.norm(apply_plus(xi) - E * eta) / (E * ops.norm(eta))});
    for (int m = 0; m < basis_.N; ++m)
      rep.biorthogonality = std::max(rep.biorthogonality, std::abs(ops.inner(basis_.xi[m], eta) - (m == n ? 1.0 : 0.0)));
    rep.orthogonality = std::max({rep.orthogonality, std::abs(ops.inner(phi, xi)) / (ops.norm(phi) * ops.norm(xi)),
                                  std::abs(ops.inner(bp_.dphi, eta)) / (ops.norm(bp_.dphi) * ops.norm(eta))});
  }
  rep.antisymmetry = antisymmetry_residual(coupling_matrix(*model_, bp_, basis_));
  rep.resonance_margin = 2.0 * E - bp_.lambda;
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    Pair u = random_pair(rng, phi.size());
    for (long i = 0; i < phi.size(); ++i) {  // keep samples in the even sector
      const long j = ops.grid().mirror(i);
      if (j > i) {
        u[i] = u[j] = 0.5 * (u[i] + u[j]);
        u[phi.size() + i] = u[phi.size() + j] = 0.5 * (u[phi.size() + i] + u[phi.size() + j]);
      }
    }
    const Pair p = project_disc(u);
    rep.idempotence = std::max(rep.idempotence, (project_disc(p) - p).norm() / u.norm());
    rep.symplectic = std::max(rep.symplectic, (project_c_adjoint(apply_J(u)) - apply_J(project_c(u))).norm() / u.norm());
  }
  return rep;
}

Mat coupling_matrix(const BoxModel& model, const BranchPoint& bp, const NeutralBasis& basis) {
  Vec w(bp.phi.size());
  for (long i = 0; i < w.size(); ++i) {
    const double s = bp.phi[i] * bp.phi[i];
    w[i] = model.nl.df(s) * s;
  }
  Mat omega(basis.N, basis.N);
  for (int n = 0; n < basis.N; ++n)
    for (int m = 0; m < basis.N; ++m)
      omega(n, m) = model.ops.inner(Vec(w.cwiseProduct(basis.xi[n])), basis.eta[m]);
  return omega;
}

double antisymmetry_residual(const Mat& omega) {
  const double scale = omega.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (omega - omega.transpose()).cwiseAbs().maxCoeff() / scale;
}

double n11_orthogonality_residual(const Mat& omega, const Eigen::VectorXcd& z) {
  const double scale = omega.cwiseAbs().maxCoeff() * z.squaredNorm();
  if (scale == 0.0) return 0.0;
  cplx s = 0.0;
  for (long n = 0; n < omega.rows(); ++n)
    for (long m = 0; m < omega.cols(); ++m) s += std::conj(z[n]) * z[m] * (omega(n, m) - omega(m, n));
  return std::abs(s / cplx(0.0, 2.0)) / scale;
}

NeutralBasis rotate_degenerate_pair(const NeutralBasis& basis, double theta) {
  if (basis.N < 2 || basis.radial) throw InvalidParameter("rotation needs an explicit basis with N >= 2");
  NeutralBasis out = basis;
  const double c = std::cos(theta), s = std::sin(theta);
  out.xi[0] = c * basis.xi[0] - s * basis.xi[1];
  out.xi[1] = s * basis.xi[0] + c * basis.xi[1];
  return out;
}

// ---------------------------------------------------------------- linear flow

LinearPropagation propagate_linearized(const RadialLinearization& lin, int ell, const Vec& u1, const Vec& u2,
                                       double T, double dt, double nu, int samples, bool project) {
  const RadialModel& model = lin.model();
  const RadialGrid& grid = model.grid;
  const int n = grid.size();
  Pair u = join(u1.cast<cplx>(), u2.cast<cplx>());
  if (project) u = lin.project_c(ell, u);
  Vec a(n), b(n);
  const Vec wm = model.w_minus(lin.lambda(), lin.bound().phi);
  const Vec wp = model.w_plus(lin.lambda(), lin.bound().phi);
  for (int i = 0; i < n; ++i) {
    a[i] = wm[i] - lin.lambda();
    b[i] = wp[i] - lin.lambda();
  }
  // free part: d/dt chi = -i K chi with chi = u1 + i u2 and K = -d^2 + l(l+1)/r^2 + lambda
  Vec shift = Vec::Constant(n, lin.lambda());
  const Tridiag K = radial_operator(grid, ell, shift);
  BandedLU<cplx> lu(n, 1, 1);
  const cplx half(0.0, 0.5 * dt);
  for (int i = 0; i < n; ++i) {
    lu.set(i, i, 1.0 + half * K.diag[i]);
    if (i + 1 < n) {
      lu.set(i, i + 1, half * K.off[i]);
      lu.set(i + 1, i, half * K.off[i]);
    }
  }
  lu.factor();
  // pointwise part: d/dt (u1, u2) = (a u2, -b u1), exact 2x2 exponential over dt/2
  std::vector<double> c0(n), s01(n), s10(n);
  for (int i = 0; i < n; ++i) {
    const double s = a[i] * b[i];
    const double tau = 0.5 * dt;
    double c, S;
    if (s > 1e-14) {
      const double w = std::sqrt(s);
      c = std::cos(w * tau);
      S = std::sin(w * tau) / w;
    } else if (s < -1e-14) {
      const double w = std::sqrt(-s);
      c = std::cosh(w * tau);
      S = std::sinh(w * tau) / w;
    } else {
      c = 1.0 - 0.5 * s * tau * tau;
      S = tau * (1.0 - s * tau * tau / 6.0);
    }
    c0[i] = c;
    s01[i] = a[i] * S;
    s10[i] = -b[i] * S;
  }
  Vec x1 = first(u).real(), x2 = second(u).real();
  auto pointwise = [&]() {
    for (int i = 0; i < n; ++i) {
      const double p = x1[i], q = x2[i];
      x1[i] = c0[i] * p + s01[i] * q;
      x2[i] = s10[i] * p + c0[i] * q;
    }
  };
  auto weighted = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = grid.r(i);
      const double w = std::pow(1.0 + r * r, -nu);
      s += w * (x1[i] * x1[i] + x2[i] * x2[i]);
    }
    const double ang = ell == 0 ? kFourPi : (ell == 1 ? kFourPi / 3.0 : kFourPi);
    return std::sqrt(ang * grid.h() * s);
  };
  // boundary guard from the spectral content of the data
  const double kmax = std::max(spectral_wavenumber(grid, x1, 0.999), spectral_wavenumber(grid, x2, 0.999));
  const double vmax = std::max(2.0 * kmax, 1e-3);
  const double guard = grid.r_max() / vmax;

  LinearPropagation out;
  const long steps = static_cast<long>(std::ceil(T / dt));
  std::vector<long> marks;
  for (int s = 0; s < samples; ++s) {
    const double ts = std::exp(std::log(dt) + (std::log(T) - std::log(dt)) * s / (samples - 1));
    marks.push_back(std::max<long>(1, std::lround(ts / dt)));
  }
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  std::size_t next = 0;
  out.t.push_back(0.0);
  out.weighted_norm.push_back(weighted());
  for (long k = 1; k <= steps && next < marks.size(); ++k) {
    pointwise();
    CVec chi = x1.cast<cplx>() + cplx(0, 1) * x2.cast<cplx>();
    CVec rhs = chi - half * K.apply(chi);
    chi = lu.solve(rhs);
    x1 = chi.real();
    x2 = chi.imag();
    pointwise();
    if (k == marks[next]) {
      const double t = k * dt;
      if (t > guard) {
        out.guard_tripped = true;
        break;
      }
      out.t.push_back(t);
      out.weighted_norm.push_back(weighted());
      ++next;
    }
  }
  const double t_hi = out.t.back();
  if (t_hi > 0.0) {
    std::vector<double> tt(out.t.begin() + 1, out.t.end()), vv(out.weighted_norm.begin() + 1, out.weighted_norm.end());
    out.fit = fit_decay(tt, vv, t_hi / 10.0, t_hi);
  }
  return out;
}

}  // namespace gplab
