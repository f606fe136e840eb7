#include "gplab/pde_solver.hpp"

#include <cmath>
#include <numbers>

#include <lapacke.h>

#include "gplab/linalg.hpp"

namespace gplab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

lapack_complex_double* lp(std::vector<cplx>& v) { return reinterpret_cast<lapack_complex_double*>(v.data()); }

}  // namespace

AxisymmetricPropagator::AxisymmetricPropagator(const RadialGrid& grid, int nodes, const Potential& V, Nonlinearity nl)
    : grid_(grid), nodes_(nodes), V_(sample_potential(grid, V)), nl_(nl) {
  if (nodes < 2) throw InvalidParameter("axisymmetric grid needs at least two angular nodes");
  Vec off(nodes - 1);
  for (int k = 1; k < nodes; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  const EigenPairs gl = tridiagonal_lowest(Vec::Zero(nodes), off, nodes);
  mu_ = gl.values;
  mu_w_.resize(nodes);
  for (int j = 0; j < nodes; ++j) mu_w_[j] = 2.0 * gl.vectors(0, j) * gl.vectors(0, j);
  to_modal_.resize(nodes, nodes);
  to_nodal_.resize(nodes, nodes);
  for (int j = 0; j < nodes; ++j)
    for (int l = 0; l < nodes; ++l) {
      const double p = std::sqrt((2.0 * l + 1.0) / 2.0) * std::legendre(l, mu_[j]);
      to_modal_(j, l) = mu_w_[j] * p;
      to_nodal_(l, j) = p;
    }
  const int n = grid.size();
  weights_.resize(static_cast<long>(n) * nodes);
  radius_.resize(weights_.size());
  for (int j = 0; j < nodes; ++j)
    for (int i = 0; i < n; ++i) {
      weights_[j * n + i] = kTwoPi * grid.h() * mu_w_[j];
      radius_[j * n + i] = grid.r(i);
    }
}

Vec AxisymmetricPropagator::embed(const Vec& reduced, int power) const {
  const int n = grid_.size();
  if (reduced.size() != n) throw GeometryMismatch("profile does not match the radial grid");
  Vec out(static_cast<long>(n) * nodes_);
  for (int j = 0; j < nodes_; ++j) out.segment(j * n, n) = (power ? mu_[j] : 1.0) * reduced;
  return out;
}

void AxisymmetricPropagator::phase(CVec& u, double tau) const {
  const int n = grid_.size();
  for (int j = 0; j < nodes_; ++j)
    for (int i = 0; i < n; ++i) {
      cplx& x = u[j * n + i];
      const double r = grid_.r(i);
      const double s = std::norm(x) / (r * r);
      x *= std::polar(1.0, -tau * (V_[i] - nl_.f(s)));
    }
}

void AxisymmetricPropagator::prepare(double dt) {
  if (dt == dt_) return;
  const int n = grid_.size();
  const Vec zero = Vec::Zero(n);
  dl_.assign(nodes_, {});
  d_.assign(nodes_, {});
  du_.assign(nodes_, {});
  du2_.assign(nodes_, std::vector<cplx>(n));
  piv_.assign(nodes_, std::vector<int>(n));
  const cplx a(0.0, 0.5 * dt);
  for (int l = 0; l < nodes_; ++l) {
    const Tridiag K = radial_operator(grid_, l, zero);
    d_[l].resize(n);
    dl_[l].resize(n - 1);
    for (int i = 0; i < n; ++i) d_[l][i] = 1.0 + a * K.diag[i];
    for (int i = 0; i + 1 < n; ++i) dl_[l][i] = a * K.off[i];
    du_[l] = dl_[l];
    std::vector<lapack_int> piv(n);
    const lapack_int info =
        LAPACKE_zgttrf(n, lp(dl_[l]), lp(d_[l]), lp(du_[l]), lp(du2_[l]), piv.data());
    if (info != 0) throw NumericalError("Crank-Nicolson factorisation failed");
    std::copy(piv.begin(), piv.end(), piv_[l].begin());
  }
  dt_ = dt;
}

void AxisymmetricPropagator::step(CVec& u, double dt) {
  const int n = grid_.size();
  if (u.size() != weights_.size()) throw GeometryMismatch("field does not match the axisymmetric grid");
  prepare(dt);
  phase(u, 0.5 * dt);
  Eigen::Map<Eigen::MatrixXcd> U(u.data(), n, nodes_);
  Eigen::MatrixXcd A = U * to_modal_.cast<cplx>();
  const double ih2 = 1.0 / (grid_.h() * grid_.h());
  const cplx a(0.0, 0.5 * dt);
  std::vector<cplx> rhs(n);
  std::vector<lapack_int> piv(n);
  for (int l = 0; l < nodes_; ++l) {
    const double c = l * (l + 1.0);
    for (int i = 0; i < n; ++i) {
      const double r = grid_.r(i);
      cplx Ku = (2.0 * ih2 + c / (r * r)) * A(i, l);
      if (i > 0) Ku -= ih2 * A(i - 1, l);
      if (i + 1 < n) Ku -= ih2 * A(i + 1, l);
      rhs[i] = A(i, l) - a * Ku;
    }
    std::copy(piv_[l].begin(), piv_[l].end(), piv.begin());
    const lapack_int info = LAPACKE_zgttrs(LAPACK_COL_MAJOR, 'N', n, 1, lp(dl_[l]), lp(d_[l]), lp(du_[l]),
                                           lp(du2_[l]), piv.data(), lp(rhs), n);
    if (info != 0) throw NumericalError("Crank-Nicolson solve failed");
    for (int i = 0; i < n; ++i) A(i, l) = rhs[i];
  }
  U = A * to_nodal_.cast<cplx>();
  phase(u, 0.5 * dt);
}

double AxisymmetricPropagator::mass(const CVec& u) const { return (weights_.array() * u.array().abs2()).sum(); }

double AxisymmetricPropagator::energy(const CVec& u) const {
  const int n = grid_.size();
  Eigen::Map<const Eigen::MatrixXcd> U(u.data(), n, nodes_);
  const Eigen::MatrixXcd A = U * to_modal_.cast<cplx>();
  const Vec zero = Vec::Zero(n);
  double kinetic = 0.0;
  for (int l = 0; l < nodes_; ++l) {
    const Tridiag K = radial_operator(grid_, l, zero);
    const CVec a = A.col(l);
    kinetic += a.dot(K.apply(a)).real();
  }
  kinetic *= 0.5 * kTwoPi * grid_.h();
  double rest = 0.0;
  for (int j = 0; j < nodes_; ++j)
    for (int i = 0; i < n; ++i) {
      const long p = j * n + i;
      const double r = grid_.r(i);
      const double s = std::norm(u[p]) / (r * r);
      rest += weights_[p] * (0.5 * V_[i] * std::norm(u[p]) - r * r * nl_.primitive(s));
    }
  return kinetic + rest;
}

double AxisymmetricPropagator::boundary_mass(const CVec& u, double fraction) const {
  const double edge = (1.0 - fraction) * grid_.r_max();
  double s = 0.0;
  for (long p = 0; p < u.size(); ++p)
    if (radius_[p] > edge) s += weights_[p] * std::norm(u[p]);
  return s;
}

BoxPropagator::BoxPropagator(const BoxModel& model) : model_(&model) {
  const auto& g = model.ops.grid();
  weights_ = Vec::Constant(g.size(), g.cell());
  radius_.resize(g.size());
  edge_.resize(g.size());
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      for (int k = 0; k < g.n(); ++k) {
        const long p = g.index(i, j, k);
        radius_[p] = std::sqrt(g.x(i) * g.x(i) + g.x(j) * g.x(j) + g.x(k) * g.x(k));
        edge_[p] = std::max({std::abs(g.x(i)), std::abs(g.x(j)), std::abs(g.x(k))}) / g.half_width();
      }
}

void BoxPropagator::step(CVec& psi, double dt) {
  const auto& ops = model_->ops;
  if (psi.size() != ops.grid().size()) throw GeometryMismatch("field does not match the box");
  if (dt != dt_) {
    const auto& k2 = ops.grid().k2();
    kinetic_.resize(k2.size());
    for (std::size_t i = 0; i < k2.size(); ++i) kinetic_[i] = std::polar(1.0, -dt * k2[i]);
    dt_ = dt;
  }
  const Vec& V = ops.potential();
  const auto& nl = model_->nl;
  auto phase = [&] {
    for (long p = 0; p < psi.size(); ++p) psi[p] *= std::polar(1.0, -0.5 * dt * (V[p] - nl.f(std::norm(psi[p]))));
  };
  phase();
  psi = ops.fourier_multiply(psi, kinetic_);
  phase();
}

double BoxPropagator::mass(const CVec& psi) const { return (weights_.array() * psi.array().abs2()).sum(); }

double BoxPropagator::energy(const CVec& psi) const {
  const auto& ops = model_->ops;
  const Vec& V = ops.potential();
  double e = 0.5 * ops.inner(ops.laplacian_neg(psi), psi).real();
  for (long p = 0; p < psi.size(); ++p)
    e += weights_[p] * (0.5 * V[p] * std::norm(psi[p]) - model_->nl.primitive(std::norm(psi[p])));
  return e;
}

double BoxPropagator::boundary_mass(const CVec& psi, double fraction) const {
  double s = 0.0;
  for (long p = 0; p < psi.size(); ++p)
    if (edge_[p] > 1.0 - fraction) s += weights_[p] * std::norm(psi[p]);
  return s;
}

ManifoldTable radial_manifold(const RadialModel& model, const AxisymmetricPropagator& prop,
                              const std::vector<double>& lambdas, const Vec& guess, double e_gap) {
  std::vector<ManifoldSample> out;
  Vec seed = guess;
  for (double lambda : lambdas) {
    const BranchPoint bp = solve_radial_bound_state(model, lambda, seed, 1e-10, 40);
    seed = bp.phi;
    const RadialLinearization lin(model, bp);
    const NeutralBasis b = lin.neutral_modes(e_gap);
    ManifoldSample s;
    s.lambda = lambda;
    s.E = b.E;
    s.phi = prop.embed(bp.phi, 0);
    s.dphi = prop.embed(bp.dphi, 0);
    s.xi = {prop.embed(b.xi[0], 1)};
    s.eta = {prop.embed(b.eta[0], 1)};
    out.push_back(std::move(s));
  }
  return ManifoldTable(std::move(out));
}

ManifoldTable box_manifold(const BoxModel& model, const std::vector<double>& lambdas, const Vec& guess,
                           const std::vector<Vec>& mode_guesses) {
  std::vector<ManifoldSample> out;
  Vec seed = guess;
  std::vector<Vec> modes = mode_guesses;
  for (double lambda : lambdas) {
    const BranchPoint bp = solve_box_bound_state(model, lambda, seed, 1e-10, 40);
    seed = bp.phi;
    const BoxLinearization lin(model, bp);
    const NeutralBasis b = lin.canonical_basis(lin.neutral_modes(static_cast<int>(modes.size()), modes));
    modes = b.xi;
    ManifoldSample s;
    s.lambda = lambda;
    s.E = b.E;
    s.phi = bp.phi;
    s.dphi = bp.dphi;
    s.xi = b.xi;
    s.eta = b.eta;
    out.push_back(std::move(s));
  }
  return ManifoldTable(std::move(out));
}

CVec prepare_initial_data(const ManifoldSample& s, const CVec& z0, double gamma0, const CVec* extra, double eps0) {
  if (z0.size() != static_cast<long>(s.xi.size())) throw InvalidParameter("initial amplitude has the wrong dimension");
  if (z0.norm() > eps0)
    throw InvalidParameter("initial amplitude |z0| = " + std::to_string(z0.norm()) + " is outside the small-data regime");
  CVec psi = s.phi.cast<cplx>();
  for (long n = 0; n < z0.size(); ++n) {
    psi += z0[n].real() * s.xi[n].cast<cplx>();
    psi += cplx(0.0, z0[n].imag()) * s.eta[n].cast<cplx>();
  }
  psi *= std::polar(1.0, gamma0);
  if (extra) {
    if (extra->size() != psi.size()) throw GeometryMismatch("extra initial field does not match the grid");
    psi += *extra;
  }
  return psi;
}

PdeRun evolve_and_measure(Propagator& prop, const Decomposer& dec, CVec psi, double lambda0, const CVec& z0,
                          double gamma0, const EvolveOptions& opts, const CheckpointSink& sink, double t0) {
  if (!(opts.dt > 0.0) || !(opts.T > t0) || opts.samples < 2) throw InvalidParameter("invalid evolution window");
  if (psi.size() != prop.weights().size()) throw GeometryMismatch("initial field does not match the propagator");
  PdeRun run;
  run.mass0 = prop.mass(psi);
  run.energy0 = prop.energy(psi);
  std::vector<double> marks;
  const double first = std::max(10.0 * opts.dt, t0 + opts.dt);
  for (int j = 0; j < opts.samples; ++j) {
    const double t = first * std::pow(opts.T / first, double(j) / (opts.samples - 1));
    if (t > t0 && (marks.empty() || t - marks.back() >= opts.dt)) marks.push_back(t);
  }

  double lam = lambda0, theta = gamma0 + lambda0 * t0, t_prev = t0, lam_int = lambda0 * t0;
  CVec z = z0;
  auto record = [&](double t) {
    double rot = 0.0;
    try {
      rot = dec.table().at(lam).E;
    } catch (const NumericalError&) {
    }
    const CVec zg = z * std::polar(1.0, -rot * (t - t_prev));
    ModulationState st = dec.decompose(psi, lam, theta + lam * (t - t_prev), zg, opts.decompose_tol);
    st.t = t;
    if (st.ok) {
      lam_int += 0.5 * (lam + st.lambda) * (t - t_prev);
      lam = st.lambda;
      theta = st.theta;
      z = st.z;
      t_prev = t;
      st.gamma = theta - lam_int;
    } else {
      ++run.failed_frames;
    }
    const double m = prop.mass(psi), e = prop.energy(psi);
    run.mass.push_back(m);
    run.energy.push_back(e);
    run.mass_drift = std::max(run.mass_drift, std::abs(m - run.mass0) / run.mass0);
    run.energy_drift = std::max(run.energy_drift, std::abs(e - run.energy0) / std::max(std::abs(run.energy0), 1e-300));
    run.frames.push_back(std::move(st));
    if (run.guard_time < 0.0 && prop.boundary_mass(psi, opts.guard_fraction) > opts.guard_tol * run.mass0)
      run.guard_time = t;
  };

  record(t0);
  double t = t0;
  for (double mark : marks) {
    while (t < mark - 1e-12) {
      const double h = std::min(opts.dt, mark - t);
      prop.step(psi, h);
      t = (mark - t <= opts.dt) ? mark : t + h;
      ++run.steps;
      if (sink && opts.checkpoint_every > 0 && run.steps % opts.checkpoint_every == 0) {
        ModulationState last;
        last.t = t_prev;
        last.lambda = lam;
        last.theta = theta;
        last.z = z;
        last.gamma = theta - lam_int;
        last.ok = true;
        sink(t, psi, last);
      }
    }
    if (!psi.allFinite()) throw NumericalError("solution became non-finite at t = " + std::to_string(t));
    record(t);
    if (opts.stop_at_guard && run.guard_time >= 0.0) break;
  }
  run.t_end = t;

  run.fit_hi = run.guard_time >= 0.0 ? run.guard_time : run.t_end;
  run.fit_lo = run.fit_hi / 10.0;
  std::vector<double> ts, zs, rs;
  for (const auto& f : run.frames)
    if (f.ok && f.t > 0.0) {
      ts.push_back(f.t);
      zs.push_back(std::max(f.z.norm(), 1e-300));
      rs.push_back(std::max(f.r_weighted, 1e-300));
    }
  try {
    run.z_fit = fit_decay(ts, zs, run.fit_lo, run.fit_hi);
    run.r_fit = fit_decay(ts, rs, run.fit_lo, run.fit_hi);
  } catch (const std::exception&) {
  }
  const double half = 0.5 * run.fit_hi;
  const ModulationState* prev = nullptr;
  for (const auto& f : run.frames) {
    if (!f.ok || f.t > run.fit_hi) continue;
    if (prev) (f.t <= half ? run.tv_early : run.tv_late) += std::abs(f.lambda - prev->lambda);
    prev = &f;
  }
  return run;
}

}  // namespace gplab
