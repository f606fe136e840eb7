#include "gplab/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>

#include <Eigen/Eigenvalues>

#include "gplab/lemmas.hpp"
#include "gplab/normal_form.hpp"
#include "gplab/pde_solver.hpp"

namespace gplab {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

const Potential kGaussian{GaussianWell{14.0, 1.0}};
const Nonlinearity kFocusing{-1.0};
constexpr double kOffset = 0.5;  // lambda - lambda_b for the radial runs

BranchPoint radial_point(const RadialModel& model, double e0, double offset, int steps = 5) {
  BranchOptions bo;
  bo.lambda_range = {-e0 + std::min(0.01, 0.5 * offset), -e0 + offset};
  bo.steps = steps;
  return continue_radial_branch(model, bo).back();
}

CriterionResult titled(int id, std::string title) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  return r;
}

double e_gap(const SpectrumResult& s) { return s.levels[1].energy - s.levels[0].energy; }

}  // namespace

struct AcceptanceSuite::State {
  // radial Gaussian well on (0, 40) at lambda_b + 0.5
  std::unique_ptr<RadialModel> model;
  SpectrumResult spectrum;
  std::unique_ptr<RadialLinearization> lin;
  std::unique_ptr<RadialFgr> fgr;
  std::optional<FgrTensor> tensor;
  std::optional<RadialConstants> constants;

  // double well on [-10, 10)^3, 64^3
  std::unique_ptr<BoxModel> box;
  std::optional<SpectrumResult> box_spectrum_;
  double box_spectrum_seconds = 0.0;

  void radial() {
    if (model) return;
    const RadialGrid g(40.0, 4096);
    SpectrumOptions so;
    so.k_eigs = 3;
    spectrum = radial_spectrum(g, kGaussian, so);
    model = std::make_unique<RadialModel>(g, kGaussian, kFocusing);
    lin = std::make_unique<RadialLinearization>(*model, radial_point(*model, spectrum.levels[0].energy, kOffset));
    lin->set_basis(lin->neutral_modes(e_gap(spectrum)));
  }
  RadialFgr& radial_fgr() {
    radial();
    if (!fgr) fgr = std::make_unique<RadialFgr>(*lin, kGaussian);
    return *fgr;
  }
  const FgrTensor& fgr_tensor() {
    if (!tensor) tensor = radial_fgr().tensor();
    return *tensor;
  }
  const RadialConstants& fgr_constants() {
    if (!constants) constants = radial_fgr().constants();
    return *constants;
  }
  const SpectrumResult& box_spectrum_result() {
    if (!box_spectrum_) {
      const BoxGrid g(10.0, 64);
      box = std::make_unique<BoxModel>(g, Potential::double_well(1.75, 36.0, 1.0), kFocusing);
      SpectrumOptions so;
      so.k_eigs = 3;
      const auto t0 = Clock::now();
      box_spectrum_ = box_spectrum(box->ops, so);
      box_spectrum_seconds = since(t0);
    }
    return *box_spectrum_;
  }
};

AcceptanceSuite::AcceptanceSuite() : state_(std::make_unique<State>()) {}
AcceptanceSuite::~AcceptanceSuite() = default;

namespace {

CriterionResult oscillator() {
  CriterionResult r = titled(1, "oscillator oracle");
  const auto t0 = Clock::now();
  SpectrumOptions so;
  so.k_eigs = 2;
  so.max_ell = 1;
  const auto s = radial_spectrum(RadialGrid(12.0, 4096), Potential(HarmonicWell{1.0}), so);
  double l0 = INFINITY, l1 = INFINITY;
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
    (s.channel[i] == 0 ? l0 : l1) = std::min(s.channel[i] == 0 ? l0 : l1, s.eigenvalues[i]);
  r.seconds = since(t0);
  const double d0 = std::abs(l0 - 3.0), d1 = std::abs(l1 - 5.0);
  r.pass = d0 <= 1e-5 && d1 <= 1e-5 && r.seconds < 10.0;
  r.summary = format("l=0 level %.8f (err %.1e), l=1 level %.8f (err %.1e)", l0, d0, l1, d1);
  r.data = {{"ell0", l0}, {"ell1", l1}};
  return r;
}

CriterionResult double_well(AcceptanceSuite::State& st) {
  CriterionResult r = titled(2, "double-well hypothesis");
  const auto& s = st.box_spectrum_result();
  r.seconds = st.box_spectrum_seconds;
  const auto& lv = s.levels;
  double split = INFINITY;
  int mult = 0;
  if (lv.size() >= 2) {
    mult = lv[1].multiplicity;
    double lo = INFINITY, hi = -INFINITY;
    for (int m : lv[1].members) {
      lo = std::min(lo, s.eigenvalues[m]);
      hi = std::max(hi, s.eigenvalues[m]);
    }
    split = hi - lo;
  }
  const double e0 = lv[0].energy, e1 = lv.size() > 1 ? lv[1].energy : NAN;
  r.pass = lv.size() >= 2 && e0 < e1 && e1 < 0.0 && mult == 2 && split < 1e-6 * std::abs(e1) &&
           s.resonance_gap() > 0.0 && r.seconds < 300.0;
  r.summary = format("e0 %.6f, e1 %.6f x%d (split %.1e), 2e1-e0 %.4f", e0, e1, mult, split, s.resonance_gap());
  r.data = {{"e0", e0}, {"e1", e1}, {"multiplicity", mult}, {"split", split}, {"gap", s.resonance_gap()}};
  return r;
}

CriterionResult identities() {
  CriterionResult r = titled(3, "structural identities");
  const auto t0 = Clock::now();
  const RadialGrid g(40.0, 4096);
  SpectrumOptions so;
  so.k_eigs = 3;
  const auto s = radial_spectrum(g, kGaussian, so);
  const RadialModel model(g, kGaussian, kFocusing);
  BranchOptions bo;
  bo.lambda_range = {-s.levels[0].energy + 0.01, -s.levels[0].energy + kOffset};
  bo.steps = 50;
  const auto branch = continue_radial_branch(model, bo);
  double worst = 0.0, worst_lambda = 0.0;
  for (const auto& bp : branch) {
    RadialLinearization lin(model, bp);
    lin.set_basis(lin.neutral_modes(e_gap(s)));
    const double w = lin.identities().worst();
    if (w > worst) worst_lambda = bp.lambda;
    worst = std::max(worst, w);
  }
  r.seconds = since(t0);
  r.pass = branch.size() >= 50 && worst <= 1e-8 && r.seconds < 120.0;
  r.summary = format("%zu samples, worst residual %.2e (lambda %.4f)", branch.size(), worst, worst_lambda);
  r.data = {{"samples", branch.size()}, {"worst", worst}};
  return r;
}

CriterionResult gamma_certificate(AcceptanceSuite::State& st) {
  CriterionResult r = titled(4, "gamma certificate");
  const auto t0 = Clock::now();
  const FgrTensor& T = st.fgr_tensor();
  const RadialConstants& c = st.fgr_constants();
  std::mt19937 rng(11);
  std::normal_distribution<double> gauss;
  double herm = 0.0, low = INFINITY;
  for (int s = 0; s < 1000; ++s) {
    CVec z(T.N);
    for (auto& x : z) x = cplx(gauss(rng), gauss(rng));
    z.normalize();
    const CMat G = T.Gamma(z);
    const double scale = G.norm();
    herm = std::max(herm, (G - G.adjoint()).cwiseAbs().maxCoeff() / scale);
    const Eigen::SelfAdjointEigenSolver<CMat> es(G);
    low = std::min(low, es.eigenvalues().minCoeff() / scale);
  }
  CVec e1 = CVec::Zero(T.N);
  e1[0] = 1.0;
  const CMat G1 = T.Gamma(e1);
  const double d11 = std::abs(G1(0, 0).real() - c.re_z11) / c.re_z11;
  const double d22 = std::max(std::abs(G1(1, 1).real() - c.re_z22), std::abs(G1(2, 2).real() - c.re_z22)) / c.re_z22;
  r.seconds = since(t0);
  r.pass = herm <= 1e-12 && low >= -1e-8 && d11 <= 0.01 && d22 <= 0.01 && r.seconds < 600.0;
  r.summary = format("hermiticity %.1e, min eig/norm %.1e, routes differ %.1e / %.1e, error bars %.1e (tensor) "
                     "%.1e %.1e (radial), Z11 %.5e Z22 %.5e",
                     herm, low, d11, d22, T.error, c.error11, c.error22, c.re_z11, c.re_z22);
  r.data = {{"hermiticity", herm}, {"min_eig_ratio", low},      {"route_gap_11", d11},     {"route_gap_22", d22},
            {"re_z11", c.re_z11},  {"re_z22", c.re_z22},    {"tensor_error", T.error}, {"error11", c.error11},
            {"error22", c.error22}, {"confident", T.confident}};
  return r;
}

CriterionResult weak_coupling(AcceptanceSuite::State& st) {
  CriterionResult r = titled(5, "weak-coupling consistency");
  const auto t0 = Clock::now();
  st.radial();
  const double e0 = st.spectrum.levels[0].energy;
  const WeakCoupling wc = radial_weak_coupling(40.0, kGaussian);
  std::vector<double> ratios, masses;
  for (double off : {0.025, 0.05, 0.1, 0.2}) {
    RadialLinearization lin(*st.model, radial_point(*st.model, e0, off));
    lin.set_basis(lin.neutral_modes(e_gap(st.spectrum)));
    const RadialFgr fgr(lin, kGaussian);
    const double mass = fgr.core().bound().mass;
    masses.push_back(mass);
    ratios.push_back(fgr.constants().re_z11 / (mass * wc.K0(0, 0)));
  }
  const double lo = std::min({ratios[0], ratios[1], ratios[2]}), hi = std::max({ratios[0], ratios[1], ratios[2]});
  r.seconds = since(t0);
  r.pass = lo > 0.0 && hi / lo - 1.0 <= 0.15;
  r.summary = format("ratios %.4f %.4f %.4f %.4f at mass %.4f %.4f %.4f %.4f, spread %.1f%%", ratios[0], ratios[1],
                     ratios[2], ratios[3], masses[0], masses[1], masses[2], masses[3], 100.0 * (hi / lo - 1.0));
  r.data = {{"ratios", ratios}, {"masses", masses}, {"K0", wc.K0(0, 0)}};
  return r;
}

CriterionResult normal_form(AcceptanceSuite::State& st) {
  CriterionResult r = titled(6, "normal-form decay");
  const auto t0 = Clock::now();
  const FgrTensor& T = st.fgr_tensor();
  const FgrMinimum K = fgr_constant(T);
  NormalFormModel model{st.radial_fgr().E(), T, 0.25, upsilon_matrix(st.radial_fgr().core())};
  CVec z0(3);
  z0 << cplx(0.4, 0.0), cplx(0.0, 0.3), cplx(0.0, 0.0);
  const double horizon = 3e5, dt = 0.1 / model.E;
  const Trajectory tr = integrate_normal_form(model, z0, 0.0, horizon, dt);
  const DecayFit fit = fit_decay(tr.t, tr.norm, horizon / 100.0, horizon);

  // isotropic case: z(t) = e^{-iEt} z0 / sqrt(1 + 2 c g0 |z0|^2 t)
  NormalFormModel iso{model.E, isotropic_tensor(3, 0.02), 0.25, Mat()};
  CVec w0(3);
  w0 << cplx(0.3, 0.0), cplx(0.0, 0.2), cplx(0.1, 0.0);
  const Trajectory ti = integrate_normal_form(iso, w0, 0.0, 1e4, dt);
  double err = 0.0;
  for (std::size_t i = 0; i < ti.t.size(); ++i) {
    const double t = ti.t[i];
    const CVec exact = std::polar(1.0, -iso.E * t) * w0 / std::sqrt(1.0 + 2.0 * 0.25 * 0.02 * w0.squaredNorm() * t);
    err = std::max(err, (ti.z[i] - exact).norm() / w0.norm());
  }
  r.seconds = since(t0);
  r.pass = K.K > 0.0 && std::abs(fit.exponent - 0.5) <= 0.05 && err <= 1e-6 && r.seconds < 60.0;
  r.summary = format("K %.3e, slope -%.4f over [%.0f, %.0f] (r2 %.6f), isotropic error %.1e", K.K, fit.exponent,
                     horizon / 100.0, horizon, fit.r2, err);
  r.data = {{"K", K.K}, {"exponent", fit.exponent}, {"isotropic_error", err}};
  return r;
}

CriterionResult pde_decay(AcceptanceSuite::State& st) {
  CriterionResult r = titled(7, "PDE decay reproduction");
  const auto t0 = Clock::now();
  const RadialGrid g(400.0, 4096);
  SpectrumOptions so;
  so.k_eigs = 3;
  const auto s = radial_spectrum(g, kGaussian, so);
  const RadialModel model(g, kGaussian, kFocusing);
  const double e0 = s.levels[0].energy, lam = -e0 + kOffset;
  const BranchPoint bp = radial_point(model, e0, kOffset);
  AxisymmetricPropagator prop(g, 8, kGaussian, kFocusing);
  std::vector<double> lambdas;
  for (int k = -4; k <= 4; ++k) lambdas.push_back(lam + 0.01 * k);
  const Decomposer dec(radial_manifold(model, prop, lambdas, bp.phi, e_gap(s)), prop.weights(), prop.radius());
  CVec z0(1);
  z0[0] = 0.05;
  const ManifoldSample center = dec.table().at(lam);
  EvolveOptions eo;
  eo.T = 2000.0;
  const PdeRun run = evolve_and_measure(prop, dec, prepare_initial_data(center, z0, 0.0), lam, z0, 0.0, eo);
  r.seconds = since(t0);

  const double decade = run.fit_lo > 0.0 ? run.fit_hi / run.fit_lo : 0.0;
  const double mass_rate = run.mass_drift / std::max(run.t_end, 1.0);
  const bool tv_ok = run.tv_late < 0.1 * run.tv_early;
  // FGR prediction for the same window: d|z|/dt = -c Gamma_33(e_3) |z|^3
  const double predicted = 0.25 * st.fgr_constants().re_z11 * std::pow(z0.norm(), 3);
  const ModulationState* last = nullptr;
  for (const auto& f : run.frames)
    if (f.ok && f.t <= run.fit_hi) last = &f;
  const double measured = last ? (z0.norm() - last->z.norm()) / last->t : 0.0;
  r.pass = std::abs(run.z_fit.exponent - 0.5) <= 0.1 && std::abs(run.r_fit.exponent - 1.0) <= 0.2 && decade >= 10.0 &&
           tv_ok && mass_rate <= 1e-10 && r.seconds < 1800.0;
  r.summary = format("|z| exponent %.4f, R exponent %.4f over [%.1f, %.1f] (guard %.1f), TV late/early %.3f, "
                     "mass drift %.1e/unit time, d|z|/dt %.2e vs FGR rate %.2e",
                     run.z_fit.exponent, run.r_fit.exponent, run.fit_lo, run.fit_hi, run.guard_time,
                     run.tv_early > 0.0 ? run.tv_late / run.tv_early : NAN, mass_rate, measured, predicted);
  r.data = {{"z_exponent", run.z_fit.exponent}, {"r_exponent", run.r_fit.exponent}, {"fit_lo", run.fit_lo},
            {"fit_hi", run.fit_hi},             {"guard_time", run.guard_time},     {"tv_early", run.tv_early},
            {"tv_late", run.tv_late},           {"mass_rate", mass_rate},           {"rate_measured", measured},
            {"rate_predicted", predicted},      {"failed_frames", run.failed_frames}};
  return r;
}

CriterionResult linear_decay() {
  CriterionResult r = titled(8, "linearized dispersive decay");
  const auto t0 = Clock::now();
  const RadialGrid g(800.0, 16384);
  SpectrumOptions so;
  so.k_eigs = 3;
  const auto s = radial_spectrum(g, kGaussian, so);
  const RadialModel model(g, kGaussian, kFocusing);
  RadialLinearization lin(model, radial_point(model, s.levels[0].energy, kOffset));
  lin.set_basis(lin.neutral_modes(e_gap(s)));
  Vec u1(g.size()), u2(g.size());
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.r(i);
    u1[i] = x * std::exp(-x * x / 18.0);
    u2[i] = 0.5 * x * std::exp(-(x - 1.0) * (x - 1.0) / 9.0);
  }
  const auto p = propagate_linearized(lin, 0, u1, u2, 2000.0, 5e-3, 4.0, 600);
  r.seconds = since(t0);
  r.pass = std::abs(p.fit.exponent - 1.5) <= 0.3;
  r.summary = format("weighted-norm exponent %.4f over [%.1f, %.1f] (r2 %.4f)", p.fit.exponent, p.t.back() / 10.0,
                     p.t.back(), p.fit.r2);
  r.data = {{"exponent", p.fit.exponent}, {"t_hi", p.t.back()}, {"r2", p.fit.r2}};
  return r;
}

CriterionResult lemmas() {
  CriterionResult r = titled(9, "analysis-lemma checks");
  const auto t0 = Clock::now();
  int held = 0, total = 0;
  double worst_k = 0.0;
  for (double T0 : {2.0, 10.0, 100.0})
    for (double c : {0.01, 0.1, 1.0})
      for (double delta : {0.1, 0.4, 1.0}) {
        const auto rep = verify_riccati_bound(T0, c, delta, 0.3, 1e5);
        held += rep.holds;
        ++total;
        worst_k = std::max(worst_k, rep.k_fit);
      }
  bool conv_ok = true;
  std::vector<double> consts;
  for (double sigma : {0.0, 1.0, 1.5}) {
    const auto rep = verify_convolution_bound(2.0, sigma, 1e3);
    conv_ok = conv_ok && rep.stable && std::isfinite(rep.c_observed);
    consts.push_back(rep.c_observed);
  }
  r.seconds = since(t0);
  r.pass = held == total && conv_ok && r.seconds < 60.0;
  r.summary = format("Riccati bound holds %d/%d (largest fitted K %.3f), convolution constants %.4f %.4f %.4f%s", held,
                     total, worst_k, consts[0], consts[1], consts[2], conv_ok ? "" : " (unstable)");
  r.data = {{"riccati_held", held}, {"riccati_total", total}, {"k_fit_max", worst_k}, {"convolution", consts}};
  return r;
}

CriterionResult basis_necessity(AcceptanceSuite::State& st) {
  CriterionResult r = titled(10, "basis-necessity demonstration");
  const auto t0 = Clock::now();
  const auto& s = st.box_spectrum_result();
  const double e0 = s.levels[0].energy;
  BranchOptions bo;
  bo.lambda_range = {-e0 + 0.05, -e0 + 0.3};
  bo.steps = 3;
  const BranchPoint bp = continue_box_branch(*st.box, bo, &s).back();
  const BoxLinearization lin(*st.box, bp);
  std::vector<Vec> guesses;
  for (int m : s.levels[1].members) guesses.push_back(s.vectors[m]);
  const NeutralBasis canon = lin.canonical_basis(lin.neutral_modes(2, guesses));
  CVec z(2);
  z << cplx(0.6, 0.2), cplx(-0.3, 0.7);
  const double good = n11_orthogonality_residual(coupling_matrix(*st.box, bp, canon), z);
  const double bad = n11_orthogonality_residual(coupling_matrix(*st.box, bp, rotate_degenerate_pair(canon, 0.7)), z);
  r.seconds = since(t0) + st.box_spectrum_seconds;
  r.pass = good <= 1e-8 && bad >= 1e-3;
  r.summary = format("residual %.2e with the canonical basis, %.2e with the rotated basis (E %.6f)", good, bad, canon.E);
  r.data = {{"canonical", good}, {"rotated", bad}, {"E", canon.E}};
  return r;
}

}  // namespace

CriterionResult AcceptanceSuite::run(int id) {
  auto& st = *state_;
  try {
    switch (id) {
      case 1: return oscillator();
      case 2: return double_well(st);
      case 3: return identities();
      case 4: return gamma_certificate(st);
      case 5: return weak_coupling(st);
      case 6: return normal_form(st);
      case 7: return pde_decay(st);
      case 8: return linear_decay();
      case 9: return lemmas();
      case 10: return basis_necessity(st);
      default: throw InvalidParameter("unknown acceptance criterion " + std::to_string(id));
    }
  } catch (const NumericalError& e) {
    CriterionResult r = titled(id, "criterion " + std::to_string(id));
    r.summary = std::string("numerical failure: ") + e.what();
    return r;
  }
}

}  // namespace gplab
