#include "gplab/fgr.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include "gplab/parallel.hpp"

namespace gplab {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI{0.0, 1.0};

CVec first(const Pair& u) { return u.head(u.size() / 2); }
CVec second(const Pair& u) { return u.tail(u.size() / 2); }
Pair join(const CVec& a, const CVec& b) {
  Pair p(a.size() + b.size());
  p << a, b;
  return p;
}

Pair pad(const Pair& f, long n) {
  const long m = f.size() / 2;
  if (m == n) return f;
  Pair out = Pair::Zero(2 * n);
  out.segment(0, m) = f.head(m);
  out.segment(n, m) = f.tail(m);
  return out;
}

Vec pad(const Vec& f, long n) {
  Vec out = Vec::Zero(n);
  out.head(f.size()) = f;
  return out;
}

// h * sum over the shorter pair of a * conj(b), both halves.
cplx pair_inner(const Pair& a, const Pair& b, double h) {
  const long na = a.size() / 2, nb = b.size() / 2, m = std::min(na, nb);
  cplx s = 0.0;
  for (long i = 0; i < m; ++i) s += a[i] * std::conj(b[i]) + a[na + i] * std::conj(b[nb + i]);
  return h * s;
}

// i J (c1, c2) = i (c2, -c1)
Pair apply_iJ(const Pair& c) { return join(kI * second(c), -kI * first(c)); }

Vec resample(const RadialGrid& from, const Vec& u, const RadialGrid& to) {
  Vec out(to.size());
  const double h = from.h();
  for (int i = 0; i < to.size(); ++i) {
    const double s = to.r(i) / h - 1.0;
    const int j = static_cast<int>(std::floor(s));
    const double t = s - j;
    const double a = (j >= 0 && j < from.size()) ? u[j] : 0.0;
    const double b = (j + 1 >= 0 && j + 1 < from.size()) ? u[j + 1] : 0.0;
    out[i] = (1.0 - t) * a + t * b;
  }
  return out;
}

struct Harmonics {
  std::array<double, 9> y;
  static constexpr std::array<int, 9> ell{0, 1, 1, 1, 2, 2, 2, 2, 2};
};

// Real orthonormal spherical harmonics up to l = 2 at the unit vector w.
Harmonics real_harmonics(const Point& w) {
  const double x = w[0], y = w[1], z = w[2];
  const double c0 = 0.5 / std::sqrt(kPi), c1 = std::sqrt(3.0 / (4.0 * kPi)), c2 = std::sqrt(15.0 / (4.0 * kPi));
  const double c20 = std::sqrt(5.0 / (16.0 * kPi)), c22 = std::sqrt(15.0 / (16.0 * kPi));
  return {{c0, c1 * x, c1 * y, c1 * z, c2 * x * y, c2 * y * z, c2 * x * z, c20 * (3.0 * z * z - 1.0),
           c22 * (x * x - y * y)}};
}

struct AngularNode {
  Point w;
  double weight;
};

// Gauss-Legendre in cos(theta) times uniform azimuth; exact for spherical polynomials of degree <= 15.
std::vector<AngularNode> sphere_quadrature() {
  using GL = boost::math::quadrature::gauss<double, 12>;
  const auto& x = GL::abscissa();
  const auto& wt = GL::weights();
  std::vector<std::pair<double, double>> mu;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mu.emplace_back(x[i], wt[i]);
    if (x[i] != 0.0) mu.emplace_back(-x[i], wt[i]);
  }
  const int nphi = 16;
  std::vector<AngularNode> nodes;
  for (auto [c, w] : mu) {
    const double s = std::sqrt(1.0 - c * c);
    for (int j = 0; j < nphi; ++j) {
      const double p = 2.0 * kPi * (j + 0.5) / nphi;
      nodes.push_back({{s * std::cos(p), s * std::sin(p), c}, w * 2.0 * kPi / nphi});
    }
  }
  return nodes;
}

}  // namespace

Extrapolated extrapolate_to_zero(std::span<const double> eps, std::span<const cplx> values) {
  const std::size_t m = eps.size();
  if (m == 0 || values.size() != m) throw InvalidParameter("extrapolation ladder is empty or mismatched");
  auto neville = [&](std::size_t start) {
    std::vector<cplx> p(values.begin() + start, values.end());
    const std::size_t k = p.size();
    for (std::size_t level = 1; level < k; ++level)
      for (std::size_t i = 0; i + level < k; ++i) {
        const double xi = eps[start + i], xj = eps[start + i + level];
        p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
      }
    return p[0];
  };
  Extrapolated out;
  out.value = neville(0);
  out.error = m > 1 ? std::abs(out.value - neville(1)) : std::abs(out.value);
  return out;
}

std::array<cplx, 2> coupling_pointwise(const Nonlinearity& nl, double phi, std::span<const double> xi,
                                       std::span<const double> eta, int k, const CVec& z) {
  cplx zxi = 0.0, zeta = 0.0;
  for (std::size_t n = 0; n < xi.size(); ++n) {
    zxi += z[n] * xi[n];
    zeta += z[n] * eta[n];
  }
  const double s = phi * phi, fp = nl.df(s), fpp = nl.d2f(s);
  const cplx B = -kI * fp * phi * (zxi * eta[k] + zeta * xi[k]);
  const cplx D = -fp * phi * (3.0 * zxi * xi[k] - zeta * eta[k]) - 2.0 * fpp * phi * s * zxi * xi[k];
  return {B, D};
}

std::array<cplx, 2> quadratic_pointwise(const Nonlinearity& nl, double phi, std::span<const double> xi,
                                        std::span<const double> eta, const CVec& z) {
  const double s = phi * phi, fp = nl.df(s), fpp = nl.d2f(s);
  const int M = 8;
  std::array<cplx, 2> acc{0.0, 0.0};
  for (int j = 0; j < M; ++j) {
    const double th = 2.0 * kPi * j / M;
    const cplx rot = std::polar(1.0, th);
    double A = 0.0, B = 0.0;
    for (std::size_t n = 0; n < xi.size(); ++n) {
      const cplx w = rot * z[n];
      A += w.real() * xi[n];
      B += w.imag() * eta[n];
    }
    const double first_c = 2.0 * fp * phi * A * B;
    const double second_c = -(3.0 * fp * phi + 2.0 * fpp * phi * s) * A * A - fp * phi * B * B;
    const cplx back = std::polar(1.0, -2.0 * th) / double(M);
    acc[0] += back * first_c;
    acc[1] += back * second_c;
  }
  return acc;
}

std::array<cplx, 2> GVectors::radial_value(int k, const CVec& z, int i, const Point& omega) const {
  std::array<double, 3> x, y;
  for (int n = 0; n < 3; ++n) {
    x[n] = omega[n] * xi[i];
    y[n] = omega[n] * eta[i];
  }
  return coupling_pointwise(nl, phi[i], x, y, k, z);
}

Pair GVectors::box_field(int k, const CVec& z) const {
  Pair out = Pair::Zero(fields.front().size());
  for (int m = 0; m < N; ++m) out += z[m] * fields[k * N + m];
  return out;
}

GVectors build_G_vectors(const RadialLinearization& lin) {
  const auto& b = lin.basis();
  if (!b.radial || b.xi.empty()) throw InvalidParameter("radial G vectors need a radial neutral basis");
  const auto& grid = lin.model().grid;
  GVectors G;
  G.N = 3;
  G.radial = true;
  G.nl = lin.model().nl;
  G.r = grid.radii();
  G.phi = profile_from_reduced(grid, lin.bound().phi);
  G.xi = profile_from_reduced(grid, b.xi[0]);
  G.eta = profile_from_reduced(grid, b.eta[0]);
  return G;
}

GVectors build_G_vectors(const BoxLinearization& lin) {
  const auto& b = lin.basis();
  if (b.radial || b.xi.empty()) throw InvalidParameter("box G vectors need a box neutral basis");
  const int N = b.N;
  const long n = lin.model().ops.grid().size();
  GVectors G;
  G.N = N;
  G.nl = lin.model().nl;
  G.fields.assign(static_cast<std::size_t>(N) * N, Pair::Zero(2 * n));
  const Vec& phi = lin.bound().phi;
  std::vector<double> x(N), y(N);
  CVec e = CVec::Zero(N);
  for (long p = 0; p < n; ++p) {
    for (int j = 0; j < N; ++j) {
      x[j] = b.xi[j][p];
      y[j] = b.eta[j][p];
    }
    for (int m = 0; m < N; ++m) {
      e.setZero();
      e[m] = 1.0;
      for (int k = 0; k < N; ++k) {
        const auto v = coupling_pointwise(G.nl, phi[p], x, y, k, e);
        G.fields[k * N + m][p] = v[0];
        G.fields[k * N + m][n + p] = v[1];
      }
    }
  }
  return G;
}

ChannelResolvent::ChannelResolvent(const RadialLinearization& lin, int ell, cplx shift)
    : lin_(&lin), ell_(ell), n_(lin.model().grid.size()) {
  const Tridiag lm = lin.minus(ell), lp = lin.plus(ell);
  lu_ = std::make_unique<BandedLU<cplx>>(2 * n_, 3, 3);
  auto& lu = *lu_;
  for (int i = 0; i < n_; ++i) {
    lu.set(2 * i, 2 * i, shift);
    lu.set(2 * i + 1, 2 * i + 1, shift);
    lu.set(2 * i, 2 * i + 1, lm.diag[i]);
    lu.set(2 * i + 1, 2 * i, -lp.diag[i]);
    if (i + 1 < n_) {
      lu.set(2 * i, 2 * i + 3, lm.off[i]);
      lu.set(2 * i + 2, 2 * i + 1, lm.off[i]);
      lu.set(2 * i + 1, 2 * i + 2, -lp.off[i]);
      lu.set(2 * i + 3, 2 * i, -lp.off[i]);
    }
  }
  lu.factor();
}

Pair ChannelResolvent::solve(const Pair& f) const {
  const long m = f.size() / 2;
  CVec x = CVec::Zero(2 * n_);
  for (long i = 0; i < m; ++i) {
    x[2 * i] = f[i];
    x[2 * i + 1] = f[m + i];
  }
  x = lu_->solve(x);
  Pair out(2 * n_);
  for (int i = 0; i < n_; ++i) {
    out[i] = x[2 * i];
    out[n_ + i] = x[2 * i + 1];
  }
  return out;
}

Pair ChannelResolvent::solve_projected(const Pair& f) const { return solve(lin_->project_c(ell_, pad(f, n_))); }

CMat FgrTensor::Z(const CVec& z) const {
  CMat out = CMat::Zero(N, N);
  for (int k = 0; k < N; ++k)
    for (int l = 0; l < N; ++l) {
      cplx s = 0.0;
      for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) s += z[m] * std::conj(z[n]) * at(k, l, m, n);
      out(k, l) = s;
    }
  return out;
}

CMat FgrTensor::Gamma(const CVec& z) const {
  const CMat Zz = Z(z);
  return 0.5 * (Zz + Zz.adjoint());
}

CMat FgrTensor::Lambda(const CVec& z) const {
  const CMat Zz = Z(z);
  return 0.5 * (Zz - Zz.adjoint());
}

FgrMinimum fgr_constant(const FgrTensor& C, unsigned seed, int samples) {
  const int N = C.N;
  auto value = [&](const CVec& z) {
    const CVec u = z / z.norm();
    Eigen::SelfAdjointEigenSolver<CMat> es(C.Gamma(u), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<std::pair<double, CVec>> pool;
  for (int s = 0; s < samples; ++s) {
    CVec z(N);
    for (int i = 0; i < N; ++i) z[i] = cplx(nd(rng), nd(rng));
    z.normalize();
    pool.emplace_back(value(z), z);
  }
  for (int i = 0; i < N; ++i) {  // real axes
    CVec z = CVec::Zero(N);
    z[i] = 1.0;
    pool.emplace_back(value(z), z);
  }
  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  pool.resize(std::min<std::size_t>(pool.size(), 5));
  FgrMinimum best{pool.front().first, pool.front().second};
  for (auto& [v, z] : pool) {
    double step = 0.25;
    while (step > 1e-9) {
      bool improved = false;
      for (int c = 0; c < 2 * N; ++c)
        for (double sgn : {1.0, -1.0}) {
          CVec t = z;
          t[c / 2] += (c % 2 == 0 ? cplx(sgn * step, 0.0) : cplx(0.0, sgn * step));
          t.normalize();
          const double tv = value(t);
          if (tv < v) {
            v = tv;
            z = t;
            improved = true;
          }
        }
      if (!improved) step *= 0.5;
    }
    if (v < best.K) best = {v, z};
  }
  best.K = value(best.z);
  return best;
}

RadialFgr::RadialFgr(const RadialLinearization& lin, const Potential& V, const FgrOptions& opts) : opts_(opts) {
  if (opts.eps_ladder.empty()) throw InvalidParameter("empty eps ladder");
  for (double e : opts.eps_ladder)
    if (!(e > 0.0)) throw InvalidParameter("eps ladder entries must be positive");
  if (!(opts.spacing > 0.0) || !(opts.reach > 0.0)) throw InvalidParameter("invalid resolvent grid options");
  if (lin.basis().xi.empty()) throw InvalidParameter("linearization has no neutral basis");
  const auto& mg = lin.model().grid;
  const int n_core = std::max(16, static_cast<int>(std::lround(mg.r_max() / opts.spacing)) - 1);
  const RadialGrid cg(mg.r_max(), n_core);
  core_model_ = std::make_unique<RadialModel>(cg, V, lin.model().nl);
  const double lam = lin.lambda();
  const BranchPoint bp = solve_radial_bound_state(*core_model_, lam, resample(mg, lin.bound().phi, cg), 1e-12, 60);
  core_lin_ = std::make_unique<RadialLinearization>(*core_model_, bp);
  core_lin_->set_basis(core_lin_->neutral_modes(lin.basis().E));
  const NeutralBasis& b = core_lin_->basis();
  const double mu = 2.0 * b.E - lam;
  if (!(mu > 0.0)) throw HypothesisViolated("2E - lambda is not positive: no resonance with the continuum");
  k_ = std::sqrt(mu);
  const double eps_min = *std::min_element(opts.eps_ladder.begin(), opts.eps_ladder.end());
  ext_model_ = std::make_unique<RadialModel>(core_model_->extended(std::max(cg.r_max(), opts.reach * k_ / eps_min), V));
  const long n_ext = ext_model_->grid.size();
  BranchPoint ebp = bp;
  ebp.phi = pad(bp.phi, n_ext);
  ebp.dphi = pad(bp.dphi, n_ext);
  ext_lin_ = std::make_unique<RadialLinearization>(*ext_model_, ebp);
  NeutralBasis eb = b;
  eb.xi = {pad(b.xi[0], n_ext)};
  eb.eta = {pad(b.eta[0], n_ext)};
  ext_lin_->set_basis(std::move(eb));
  G_ = build_G_vectors(*core_lin_);
}

RadialConstants RadialFgr::constants() const {
  const auto& cg = core_model_->grid;
  const int n = cg.size();
  const double h = cg.h();
  Pair g(2 * n);
  for (int i = 0; i < n; ++i) {
    const double p = G_.phi[i], x = G_.xi[i], y = G_.eta[i], s = p * p;
    const double fp = G_.nl.df(s), fpp = G_.nl.d2f(s);
    g[i] = -2.0 * kI * fp * p * x * y * cg.r(i);
    g[n + i] = (-fp * p * (3.0 * x * x - y * y) - 2.0 * fpp * p * s * x * x) * cg.r(i);
  }
  const Pair target = apply_iJ(g);
  const int rungs = static_cast<int>(opts_.eps_ladder.size());
  std::vector<cplx> z11(rungs), z22(rungs);
  parallel_for(rungs, [&](int j) {
    const cplx shift(-opts_.eps_ladder[j], 2.0 * E());
    const ChannelResolvent r0(*ext_lin_, 0, shift), r2(*ext_lin_, 2, shift);
    const cplx i0 = pair_inner(r0.solve_projected(g), target, h);
    const cplx i2 = pair_inner(r2.solve_projected(g), target, h);
    z11[j] = -(kFourPi / 9.0 * i0 + 4.0 * kFourPi / 45.0 * i2);
    z22[j] = -(kFourPi / 15.0 * i2);
  });
  const auto a = extrapolate_to_zero(opts_.eps_ladder, z11);
  const auto c = extrapolate_to_zero(opts_.eps_ladder, z22);
  return {a.value.real(), c.value.real(), a.error, c.error};
}

FgrTensor RadialFgr::tensor() const {
  const auto& cg = core_model_->grid;
  const int n = cg.size(), N = 3;
  const double h = cg.h();
  const auto nodes = sphere_quadrature();
  std::vector<Harmonics> Y;
  for (const auto& q : nodes) Y.push_back(real_harmonics(q.w));

  // coef[f][a]: reduced radial coefficient of field f = k * N + m against harmonic a
  std::vector<std::array<Pair, 9>> coef(N * N);
  for (auto& c : coef)
    for (auto& p : c) p = Pair::Zero(2 * n);
  for (int k = 0; k < N; ++k)
    for (int m = 0; m < N; ++m) {
      CVec e = CVec::Zero(N);
      e[m] = 1.0;
      auto& c = coef[k * N + m];
      for (int i = 0; i < n; ++i)
        for (std::size_t q = 0; q < nodes.size(); ++q) {
          const auto v = G_.radial_value(k, e, i, nodes[q].w);
          const double w = nodes[q].weight * cg.r(i);
          for (int a = 0; a < 9; ++a) {
            c[a][i] += w * Y[q].y[a] * v[0];
            c[a][n + i] += w * Y[q].y[a] * v[1];
          }
        }
    }
  double cmax = 0.0;
  for (auto& c : coef)
    for (auto& p : c) cmax = std::max(cmax, p.norm());
  std::vector<std::array<bool, 9>> live(N * N);
  for (int f = 0; f < N * N; ++f)
    for (int a = 0; a < 9; ++a) live[f][a] = coef[f][a].norm() > 1e-12 * cmax;

  const int N4 = N * N * N * N;
  const int rungs = static_cast<int>(opts_.eps_ladder.size());
  std::vector<std::vector<cplx>> rung_values(rungs);
  parallel_for(rungs, [&](int j) {
    std::vector<cplx> C(N4, 0.0);
    const cplx shift(-opts_.eps_ladder[j], 2.0 * E());
    for (int ell = 0; ell <= 2; ++ell) {
      std::unique_ptr<ChannelResolvent> R;
      for (int a = 0; a < 9; ++a) {
        if (Harmonics::ell[a] != ell) continue;
        for (int src = 0; src < N * N; ++src) {
          if (!live[src][a]) continue;
          if (!R) R = std::make_unique<ChannelResolvent>(*ext_lin_, ell, shift);
          const Pair w = R->solve_projected(coef[src][a]);
          const int l = src / N, m = src % N;
          for (int dst = 0; dst < N * N; ++dst) {
            if (!live[dst][a]) continue;
            const int k = dst / N, nn = dst % N;
            C[((k * N + l) * N + m) * N + nn] -= pair_inner(w, apply_iJ(coef[dst][a]), h);
          }
        }
      }
    }
    rung_values[j] = std::move(C);
  });
  std::vector<std::vector<cplx>> ladder(N4);
  for (const auto& C : rung_values)
    for (int i = 0; i < N4; ++i) ladder[i].push_back(C[i]);
  FgrTensor T;
  T.N = N;
  T.eps = opts_.eps_ladder;
  T.C.resize(N4);
  for (int i = 0; i < N4; ++i) {
    const auto x = extrapolate_to_zero(opts_.eps_ladder, ladder[i]);
    T.C[i] = x.value;
    T.error = std::max(T.error, x.error);
    T.scale = std::max(T.scale, std::abs(x.value));
  }
  T.confident = T.error <= opts_.gamma_tol * T.scale;
  return T;
}

FgrTensor box_fgr_tensor(const BoxLinearization& lin, const GVectors& G, const FgrOptions& opts) {
  const auto& ops = lin.model().ops;
  const int N = G.N;
  const long n = ops.grid().size();
  const double E = lin.basis().E, lam = lin.lambda();
  const auto& k2 = ops.grid().k2();
  const int N4 = N * N * N * N;
  std::vector<std::vector<cplx>> ladder(N4);
  for (double eps : opts.eps_ladder) {
    const cplx s(-eps, 2.0 * E);
    std::vector<cplx> sym_p(n), sym_m(n);
    for (long i = 0; i < n; ++i) {
      sym_p[i] = 1.0 / (s - kI * (k2[i] + lam));
      sym_m[i] = 1.0 / (s + kI * (k2[i] + lam));
    }
    // free inverse of J(-Lap + lambda) + s through chi = u1 +- i u2
    auto precond = [&](const Pair& u) {
      const CVec a = first(u), b = second(u);
      const CVec cp = ops.fourier_multiply(CVec(a + kI * b), sym_p);
      const CVec cm = ops.fourier_multiply(CVec(a - kI * b), sym_m);
      return join(0.5 * (cp + cm), (cp - cm) / (2.0 * kI));
    };
    auto apply = [&](const Pair& u) { return Pair(lin.apply(u) + s * u); };
    std::vector<cplx> C(N4, 0.0);
    for (int l = 0; l < N; ++l)
      for (int m = 0; m < N; ++m) {
        const Pair rhs = lin.project_c(G.fields[l * N + m]);
        Pair w = precond(rhs);
        const KrylovResult kr = gmres(apply, rhs, w, precond, 1e-8, 60, 3000);
        if (!kr.converged) throw NoConvergence("box resolvent GMRES stagnated at residual " + std::to_string(kr.residual));
        for (int k = 0; k < N; ++k)
          for (int nn = 0; nn < N; ++nn) {
            const Pair t = apply_iJ(G.fields[k * N + nn]);
            C[((k * N + l) * N + m) * N + nn] = -ops.grid().cell() * t.dot(w);
          }
      }
    for (int i = 0; i < N4; ++i) ladder[i].push_back(C[i]);
  }
  FgrTensor T;
  T.N = N;
  T.eps = opts.eps_ladder;
  T.C.resize(N4);
  for (int i = 0; i < N4; ++i) {
    const auto x = extrapolate_to_zero(opts.eps_ladder, ladder[i]);
    T.C[i] = x.value;
    T.error = std::max(T.error, x.error);
    T.scale = std::max(T.scale, std::abs(x.value));
  }
  T.confident = T.error <= opts.gamma_tol * T.scale;
  return T;
}

CVec scalar_resolvent(const RadialGrid& grid, int ell, const Vec& w, double mu, double eps, const CVec& f,
                      const std::vector<Vec>& remove) {
  const int n = grid.size();
  CVec rhs = CVec::Zero(n);
  rhs.head(f.size()) = f;
  for (const Vec& v : remove) {
    const CVec vc = pad(v, n).cast<cplx>();
    rhs -= vc * (vc.dot(rhs) / vc.squaredNorm());
  }
  const Tridiag T = radial_operator(grid, ell, w);
  std::vector<cplx> dl(n - 1), d(n), du(n - 1);
  for (int i = 0; i < n; ++i) d[i] = cplx(T.diag[i] - mu, -eps);
  for (int i = 0; i + 1 < n; ++i) dl[i] = du[i] = T.off[i];
  const lapack_int info = LAPACKE_zgtsv(LAPACK_COL_MAJOR, n, 1, reinterpret_cast<lapack_complex_double*>(dl.data()),
                                        reinterpret_cast<lapack_complex_double*>(d.data()),
                                        reinterpret_cast<lapack_complex_double*>(du.data()),
                                        reinterpret_cast<lapack_complex_double*>(rhs.data()), n);
  if (info != 0) throw NumericalError("scalar resolvent solve failed");
  return rhs;
}

WeakCoupling radial_weak_coupling(double r_core, const Potential& V, const FgrOptions& opts) {
  if (!V.is_radial()) throw GeometryMismatch("radial weak coupling needs a radial potential");
  const int n_core = std::max(16, static_cast<int>(std::lround(r_core / opts.spacing)) - 1);
  const RadialGrid cg(r_core, n_core);
  const Vec vc = sample_potential(cg, V);
  auto bound_states = [&](int ell, int count) {
    const Tridiag T = radial_operator(cg, ell, vc);
    const EigenPairs ep = tridiagonal_lowest(T.diag, T.off, count);
    std::vector<std::pair<double, Vec>> out;
    for (int j = 0; j < ep.values.size(); ++j)
      if (ep.values[j] < 0.0) out.emplace_back(ep.values[j], ep.vectors.col(j));
    return out;
  };
  const auto s0 = bound_states(0, 4), s1 = bound_states(1, 2), s2 = bound_states(2, 2);
  if (s0.empty() || s1.empty()) throw HypothesisViolated("weak coupling needs an l = 0 ground state and an l = 1 level");
  const double e0 = s0[0].first, e1 = s1[0].first;
  if (s0.size() > 1 && s0[1].first < e1) throw HypothesisViolated("first excited level is not in the l = 1 channel");
  if (!s2.empty() && s2[0].first < e1) throw HypothesisViolated("first excited level is not in the l = 1 channel");
  WeakCoupling out;
  out.mu = 2.0 * e1 - e0;
  if (!(out.mu > 0.0)) throw HypothesisViolated("2 e1 - e0 is not positive");
  Vec u0 = s0[0].second, u1 = s1[0].second;
  u0 /= std::sqrt(radial_inner(cg, u0, u0, 0));
  u1 /= std::sqrt(radial_inner(cg, u1, u1, 1));
  if (u0.sum() < 0) u0 = -u0;
  if (u1.sum() < 0) u1 = -u1;
  const Vec p0 = profile_from_reduced(cg, u0), p1 = profile_from_reduced(cg, u1);
  CVec F(n_core);
  for (int i = 0; i < n_core; ++i) F[i] = p0[i] * p1[i] * p1[i] * cg.r(i);

  const double eps_min = *std::min_element(opts.eps_ladder.begin(), opts.eps_ladder.end());
  const RadialGrid eg = cg.extended(std::max(r_core, opts.reach * std::sqrt(out.mu) / eps_min));
  const Vec ve = sample_potential(eg, V);
  std::vector<Vec> rm0, rm2;
  for (auto& s : s0) rm0.push_back(s.second);
  for (auto& s : s2) rm2.push_back(s.second);
  std::vector<cplx> diag, off;
  const double h = cg.h();
  for (double eps : opts.eps_ladder) {
    const CVec w0 = scalar_resolvent(eg, 0, ve, out.mu, eps, F, rm0);
    const CVec w2 = scalar_resolvent(eg, 2, ve, out.mu, eps, F, rm2);
    const cplx j0 = h * (w0.head(n_core).array() * F.array()).sum();
    const cplx j2 = h * (w2.head(n_core).array() * F.array()).sum();
    diag.push_back(kFourPi / 9.0 * j0 + 4.0 * kFourPi / 45.0 * j2);
    off.push_back(kFourPi / 15.0 * j2);
  }
  const auto d = extrapolate_to_zero(opts.eps_ladder, diag);
  const auto o = extrapolate_to_zero(opts.eps_ladder, off);
  out.K0 = Mat::Constant(3, 3, o.value.imag());
  out.K0.diagonal().setConstant(d.value.imag());
  out.error = Mat::Constant(3, 3, o.error);
  out.error.diagonal().setConstant(d.error);
  Eigen::SelfAdjointEigenSolver<Mat> es(out.K0, Eigen::EigenvaluesOnly);
  out.min_eig = es.eigenvalues()[0];
  return out;
}

}  // namespace gplab
