#include <cstdio>
#include <iostream>
#include <optional>
#include <random>

#include <Eigen/Eigenvalues>

#include "CLI11.hpp"

#include "gplab/acceptance.hpp"
#include "gplab/config.hpp"
#include "gplab/error.hpp"
#include "gplab/io.hpp"
#include "gplab/normal_form.hpp"
#include "gplab/pde_solver.hpp"

using namespace gplab;
namespace fs = std::filesystem;

namespace {

Json complex_list(const CVec& z) {
  Json out = Json::array();
  for (const auto& x : z) out.push_back({x.real(), x.imag()});
  return out;
}

CVec complex_from(const Json& j) {
  CVec z(static_cast<long>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) z[static_cast<long>(i)] = cplx(j[i][0].get<double>(), j[i][1].get<double>());
  return z;
}

Json matrix_json(const Mat& m) {
  Json out = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

Json cmatrix_json(const CMat& m) {
  Json out = Json::array();
  for (int i = 0; i < m.rows(); ++i) out.push_back(complex_list(m.row(i).transpose()));
  return out;
}

Mat matrix_from(const Json& j) {
  Mat m(static_cast<long>(j.size()), j.empty() ? 0 : static_cast<long>(j[0].size()));
  for (int i = 0; i < m.rows(); ++i)
    for (int k = 0; k < m.cols(); ++k) m(i, k) = j[i][k].get<double>();
  return m;
}

Json identity_json(const IdentityReport& r) {
  return {{"kernel_minus", r.kernel_minus},     {"kernel_plus", r.kernel_plus},
          {"eigen", r.eigen},                   {"biorthogonality", r.biorthogonality},
          {"orthogonality", r.orthogonality},   {"antisymmetry", r.antisymmetry},
          {"idempotence", r.idempotence},       {"symplectic", r.symplectic},
          {"resonance_margin", r.resonance_margin}, {"worst", r.worst()}};
}

Json tensor_json(const FgrTensor& T) {
  Json C = Json::array();
  for (const auto& c : T.C) C.push_back({c.real(), c.imag()});
  return {{"N", T.N}, {"C", C}, {"eps", T.eps}, {"error", T.error}, {"scale", T.scale}, {"confident", T.confident}};
}

FgrTensor tensor_from(const Json& j) {
  FgrTensor T;
  T.N = j.at("N").get<int>();
  for (const auto& c : j.at("C")) T.C.emplace_back(c[0].get<double>(), c[1].get<double>());
  if (T.C.size() != static_cast<std::size_t>(T.N * T.N * T.N * T.N)) throw ConfigError("gamma: tensor has the wrong size");
  T.eps = j.value("eps", std::vector<double>{});
  T.error = j.value("error", 0.0);
  T.scale = j.value("scale", 0.0);
  T.confident = j.value("confident", true);
  return T;
}

// Lazily built pipeline stages for one configuration.
class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.radial()) {
      if (!cfg_.potential.is_radial()) throw GeometryMismatch("config: radial grids need a radially symmetric potential");
      radial_ = std::make_unique<RadialModel>(RadialGrid(cfg_.grid.r_max, cfg_.grid.n), cfg_.potential, cfg_.nl);
    } else {
      box_ = std::make_unique<BoxModel>(BoxGrid(cfg_.grid.L, cfg_.grid.box_n), cfg_.potential, cfg_.nl);
    }
  }

  const RunConfig& cfg() const { return cfg_; }
  bool radial() const { return radial_ != nullptr; }
  const RadialModel& radial_model() const { return *radial_; }
  const BoxModel& box_model() const { return *box_; }

  Json grid_header() const {
    if (radial()) return {{"geometry", "radial"}, {"r_max", cfg_.grid.r_max}, {"n", cfg_.grid.n}, {"stores", "r f"}};
    return {{"geometry", "box"}, {"L", cfg_.grid.L}, {"n", cfg_.grid.box_n}};
  }

  const SpectrumResult& spectrum() {
    if (!spectrum_)
      spectrum_ = radial() ? radial_spectrum(radial_->grid, cfg_.potential, cfg_.spectrum) : box_spectrum(box_->ops, cfg_.spectrum);
    if (spectrum_->levels.size() < 2) throw HypothesisViolated("fewer than two bound levels below the continuum");
    return *spectrum_;
  }
  double e0() { return spectrum().levels[0].energy; }
  double e_gap() { return spectrum().levels[1].energy - e0(); }

  double absolute_lambda(double value, bool relative) { return relative ? -e0() + value : value; }

  const std::vector<BranchPoint>& branch() {
    if (branch_.empty()) {
      BranchOptions bo;
      bo.lambda_range = {absolute_lambda(cfg_.branch.range[0], cfg_.branch.relative),
                         absolute_lambda(cfg_.branch.range[1], cfg_.branch.relative)};
      bo.steps = cfg_.branch.steps;
      bo.newton_tol = cfg_.branch.newton_tol;
      bo.max_newton = cfg_.branch.max_newton;
      branch_ = radial() ? continue_radial_branch(*radial_, bo) : continue_box_branch(*box_, bo, &spectrum());
    }
    return branch_;
  }
  // Linearization, FGR and verification use the last branch sample.
  const BranchPoint& working() { return branch().back(); }

  std::vector<Vec> mode_guesses() {
    std::vector<Vec> g;
    for (int m : spectrum().levels[1].members) g.push_back(spectrum().vectors[m]);
    return g;
  }

  const NeutralBasis& basis() {
    if (radial()) {
      if (!rlin_) {
        rlin_ = std::make_unique<RadialLinearization>(*radial_, working());
        rlin_->set_basis(rlin_->neutral_modes(e_gap()));
      }
      return rlin_->basis();
    }
    if (!blin_) {
      blin_ = std::make_unique<BoxLinearization>(*box_, working());
      const auto guesses = mode_guesses();
      blin_->set_basis(blin_->canonical_basis(blin_->neutral_modes(static_cast<int>(guesses.size()), guesses)));
    }
    return blin_->basis();
  }
  IdentityReport identities() {
    basis();
    return radial() ? rlin_->identities(cfg_.seeds.identities) : blin_->identities(cfg_.seeds.identities);
  }

  const RadialFgr& radial_fgr() {
    basis();
    if (!rfgr_) rfgr_ = std::make_unique<RadialFgr>(*rlin_, cfg_.potential, cfg_.fgr);
    return *rfgr_;
  }
  const FgrTensor& tensor() {
    if (!tensor_) tensor_ = radial() ? radial_fgr().tensor() : box_fgr_tensor(*blin_, build_G_vectors(*blin_), cfg_.fgr);
    return *tensor_;
  }
  double E() { return radial() ? radial_fgr().E() : basis().E; }
  Mat upsilon() { return radial() ? upsilon_matrix(radial_fgr().core()) : (basis(), upsilon_matrix(*blin_)); }

  const BoxLinearization& box_linearization() {
    basis();
    return *blin_;
  }

 private:
  RunConfig cfg_;
  std::unique_ptr<RadialModel> radial_;
  std::unique_ptr<BoxModel> box_;
  std::optional<SpectrumResult> spectrum_;
  std::vector<BranchPoint> branch_;
  std::unique_ptr<RadialLinearization> rlin_;
  std::unique_ptr<BoxLinearization> blin_;
  std::unique_ptr<RadialFgr> rfgr_;
  std::optional<FgrTensor> tensor_;
};

struct Session {
  Pipeline pipe;
  Manifest manifest;
};

void run_spectrum(Session& s) {
  const auto& sp = s.pipe.spectrum();
  Json levels = Json::array();
  for (const auto& l : sp.levels) levels.push_back({{"energy", l.energy}, {"multiplicity", l.multiplicity}, {"ell", l.ell}});
  const double e0 = sp.levels[0].energy, e1 = sp.levels[1].energy;
  Json doc{{"e0", e0},
           {"e1", e1},
           {"N", sp.levels[1].multiplicity},
           {"margins",
            {{"e1_minus_e0", e1 - e0}, {"two_e1_minus_e0", sp.resonance_gap()}, {"hypothesis", sp.hypothesis_holds()}}},
           {"residuals", sp.residuals},
           {"eigenvalues", sp.eigenvalues},
           {"channels", sp.channel},
           {"levels", levels}};
  write_json(s.manifest.file("spectrum.json", "report"), doc);
  for (std::size_t i = 0; i < sp.vectors.size(); ++i) {
    Json h = s.pipe.grid_header();
    h["eigenvalue"] = sp.eigenvalues[i];
    h["channel"] = sp.channel[i];
    write_field(s.manifest.file("eig_" + std::to_string(i) + ".fld", "field"), sp.vectors[i], h);
  }
  s.manifest.summary("spectrum", {{"e0", e0}, {"e1", e1}, {"max_residual", *std::max_element(sp.residuals.begin(), sp.residuals.end())}});
}

void run_bound_state(Session& s) {
  const auto& br = s.pipe.branch();
  Json lambda = Json::array(), mass = Json::array(), dmass = Json::array(), residual = Json::array(), iters = Json::array();
  bool slope = true;
  double worst = 0.0;
  for (std::size_t i = 0; i < br.size(); ++i) {
    const auto& b = br[i];
    lambda.push_back(b.lambda);
    mass.push_back(b.mass);
    dmass.push_back(b.dmass);
    residual.push_back(b.residual);
    iters.push_back(b.iterations);
    slope = slope && b.dmass > 0.0;
    worst = std::max(worst, b.residual);
    Json h = s.pipe.grid_header();
    h["lambda"] = b.lambda;
    write_field(s.manifest.file("phi_" + std::to_string(i) + ".fld", "field"), b.phi, h);
  }
  write_json(s.manifest.file("branch.json", "report"),
             {{"e0", s.pipe.e0()}, {"lambda", lambda}, {"mass", mass}, {"dmass", dmass}, {"residual", residual},
              {"iterations", iters}, {"slope_condition", slope}});
  s.manifest.summary("branch", {{"samples", br.size()}, {"max_residual", worst}, {"slope_condition", slope}});
}

void run_linearize(Session& s) {
  const NeutralBasis& b = s.pipe.basis();
  const IdentityReport rep = s.pipe.identities();
  const double lambda = s.pipe.working().lambda;
  write_json(s.manifest.file("linearization.json", "report"),
             {{"lambda", lambda}, {"E", b.E}, {"N", b.N}, {"radial", b.radial}, {"residuals", identity_json(rep)},
              {"margin", 2.0 * b.E - lambda}, {"raw_pairing", b.raw_pairing}});
  for (std::size_t n = 0; n < b.xi.size(); ++n) {
    Json h = s.pipe.grid_header();
    h["E"] = b.E;
    h["member"] = n;
    write_field(s.manifest.file("xi_" + std::to_string(n) + ".fld", "field"), b.xi[n], h);
    write_field(s.manifest.file("eta_" + std::to_string(n) + ".fld", "field"), b.eta[n], h);
  }
  s.manifest.summary("linearization", {{"E", b.E}, {"worst_identity", rep.worst()}, {"margin", 2.0 * b.E - lambda}});
}

void run_fgr(Session& s) {
  const FgrTensor& T = s.pipe.tensor();
  const FgrMinimum K = fgr_constant(T, s.pipe.cfg().seeds.fgr);
  Json samples = Json::array();
  for (int n = 0; n < T.N; ++n) {
    CVec z = CVec::Zero(T.N);
    z[n] = 1.0;
    samples.push_back({{"z", complex_list(z)}, {"Gamma", cmatrix_json(T.Gamma(z))}});
  }
  Json doc{{"E", s.pipe.E()},
           {"lambda", s.pipe.working().lambda},
           {"coupling", s.pipe.cfg().normal_form.coupling},
           {"tensor", tensor_json(T)},
           {"Gamma_canonical", samples},
           {"K", K.K},
           {"minimizer", complex_list(K.z)},
           {"upsilon", matrix_json(s.pipe.upsilon())}};
  if (s.pipe.radial()) {
    const RadialConstants c = s.pipe.radial_fgr().constants();
    doc["radial"] = {{"re_z11", c.re_z11}, {"re_z22", c.re_z22}, {"error11", c.error11}, {"error22", c.error22}};
    const WeakCoupling wc = radial_weak_coupling(s.pipe.cfg().grid.r_max, s.pipe.cfg().potential, s.pipe.cfg().fgr);
    doc["weak_coupling"] = {{"K0", matrix_json(wc.K0)}, {"error", matrix_json(wc.error)}, {"mu", wc.mu},
                            {"min_eig", wc.min_eig}};
  }
  write_json(s.manifest.file("gamma.json", "report"), doc);

  CsvWriter csv(s.manifest.file("gamma.csv", "table"), {"sample", "min_eig", "max_eig", "trace"});
  std::mt19937 rng(s.pipe.cfg().seeds.fgr);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < 200; ++i) {
    CVec z(T.N);
    for (auto& x : z) x = cplx(gauss(rng), gauss(rng));
    z.normalize();
    const CMat G = T.Gamma(z);
    const Eigen::SelfAdjointEigenSolver<CMat> es(G);
    csv.row({double(i), es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff(), G.trace().real()});
  }
  s.manifest.summary("fgr", {{"K", K.K}, {"error", T.error}, {"confident", T.confident}});
}

void run_normal_form(Session& s, const std::string& gamma_path) {
  NormalFormModel model;
  const fs::path path = gamma_path.empty() ? s.manifest.dir() / "gamma.json" : fs::path(gamma_path);
  const auto& nf = s.pipe.cfg().normal_form;
  model.coupling = nf.coupling;
  if (fs::exists(path)) {
    Json g;
    try {
      g = read_json(path);
      model.E = g.at("E").get<double>();
      model.tensor = tensor_from(g.at("tensor"));
      model.upsilon = matrix_from(g.at("upsilon"));
    } catch (const Json::exception& e) {
      throw ConfigError("gamma: '" + path.string() + "' is not a gamma report: " + e.what());
    }
    s.manifest.input(path.filename().string(), sha256_file(path));
  } else if (!gamma_path.empty()) {
    throw ConfigError("gamma: cannot open '" + gamma_path + "'");
  } else {
    model.E = s.pipe.E();
    model.tensor = s.pipe.tensor();
    model.upsilon = s.pipe.upsilon();
  }
  const int N = model.N();
  CVec z0 = nf.z0;
  if (z0.size() == 0) z0 = CVec::Constant(N, cplx(0.5 / std::sqrt(double(N)), 0.0));
  if (z0.size() != N) throw ConfigError("config: 'normal_form.z0' must have " + std::to_string(N) + " entries");
  const Trajectory tr = integrate_normal_form(model, z0, 0.0, nf.T, std::min(nf.dt, 0.1 / model.E), nf.samples);

  std::vector<std::string> cols{"t"};
  for (int n = 1; n <= N; ++n) {
    cols.push_back("re_z" + std::to_string(n));
    cols.push_back("im_z" + std::to_string(n));
  }
  cols.insert(cols.end(), {"abs_z", "gamma"});
  CsvWriter csv(s.manifest.file("trajectory.csv", "table"), cols);
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    std::vector<double> row{tr.t[i]};
    for (const auto& x : tr.z[i]) row.insert(row.end(), {x.real(), x.imag()});
    row.insert(row.end(), {tr.norm[i], tr.gamma[i]});
    csv.row(row);
  }
  const DecayFit fit = fit_decay(tr.t, tr.norm, nf.T / 100.0, nf.T);
  write_json(s.manifest.file("fit.json", "report"),
             {{"exponent", fit.exponent}, {"amplitude", fit.amplitude}, {"r2", fit.r2}, {"window", {nf.T / 100.0, nf.T}},
              {"final_norm", tr.norm.back()}});
  s.manifest.summary("normal_form", {{"exponent", fit.exponent}, {"r2", fit.r2}});
}

struct Simulation {
  std::unique_ptr<Propagator> prop;
  std::unique_ptr<Decomposer> dec;
  double lambda = 0.0;
};

Simulation build_simulation(Pipeline& pipe, double lambda) {
  const auto& sc = pipe.cfg().simulate;
  std::vector<double> lambdas;
  for (int k = -4; k <= 4; ++k) lambdas.push_back(lambda + 0.01 * k);
  if (lambdas.front() <= 0.0) throw InvalidParameter("config: 'simulate' lambda lies too close to zero");
  Simulation sim;
  sim.lambda = lambda;
  BranchOptions bo;
  const double e0 = pipe.e0();
  bo.lambda_range = {-e0 + std::min(0.01, 0.5 * (lambda + e0)), lambda};
  bo.steps = 5;
  bo.newton_tol = pipe.cfg().branch.newton_tol;
  bo.max_newton = pipe.cfg().branch.max_newton;
  if (!(lambda + e0 > 0.0)) throw InvalidParameter("config: 'simulate' lambda must lie above the bifurcation point");
  if (pipe.radial()) {
    auto prop = std::make_unique<AxisymmetricPropagator>(pipe.radial_model().grid, pipe.cfg().grid.angular_nodes,
                                                         pipe.cfg().potential, pipe.cfg().nl);
    const Vec guess = continue_radial_branch(pipe.radial_model(), bo).back().phi;
    sim.dec = std::make_unique<Decomposer>(radial_manifold(pipe.radial_model(), *prop, lambdas, guess, pipe.e_gap()),
                                           prop->weights(), prop->radius(), sc.nu);
    sim.prop = std::move(prop);
  } else {
    auto prop = std::make_unique<BoxPropagator>(pipe.box_model());
    const Vec guess = continue_box_branch(pipe.box_model(), bo, &pipe.spectrum()).back().phi;
    sim.dec = std::make_unique<Decomposer>(box_manifold(pipe.box_model(), lambdas, guess, pipe.mode_guesses()),
                                           prop->weights(), prop->radius(), sc.nu);
    sim.prop = std::move(prop);
  }
  return sim;
}

void run_simulate(Session& s) {
  const auto& sc = s.pipe.cfg().simulate;
  Simulation sim = build_simulation(s.pipe, s.pipe.absolute_lambda(sc.lambda, sc.relative));
  const int N = sim.dec->table().modes();

  CVec psi, z0 = sc.z0;
  double lambda0 = sim.lambda, gamma0 = sc.gamma0, t0 = 0.0;
  if (!sc.resume.empty()) {
    const Field f = read_field(sc.resume);
    if (!f.is_complex() || f.complex.size() != sim.prop->weights().size())
      throw ConfigError("config: 'simulate.resume' does not match this grid");
    const Json& h = f.header;
    psi = f.complex;
    t0 = h.at("t").get<double>();
    lambda0 = h.at("lambda").get<double>();
    gamma0 = h.at("gamma").get<double>();
    z0 = complex_from(h.at("z"));
    s.manifest.input(fs::path(sc.resume).filename().string(), sha256_file(sc.resume));
  } else {
    if (z0.size() == 0) z0 = CVec::Constant(N, cplx(0.05 / std::sqrt(double(N)), 0.0));
    if (z0.size() != N) throw ConfigError("config: 'simulate.z0' must have " + std::to_string(N) + " entries");
    psi = prepare_initial_data(sim.dec->table().at(sim.lambda), z0, gamma0, nullptr, sc.eps0);
  }

  EvolveOptions eo;
  eo.T = sc.T;
  eo.dt = sc.dt;
  eo.samples = sc.samples;
  eo.guard_fraction = sc.guard_fraction;
  eo.guard_tol = sc.guard_tol;
  eo.checkpoint_every = sc.checkpoint_every;
  int checkpoints = 0;
  const Json grid = s.pipe.grid_header();
  auto sink = [&](double t, const CVec& field, const ModulationState& last) {
    Json h = grid;
    h.update(Json{{"t", t}, {"lambda", last.lambda}, {"gamma", last.gamma}, {"theta", last.theta}, {"z", complex_list(last.z)}});
    char name[32];
    std::snprintf(name, sizeof name, "ckpt_%04d.fld", checkpoints++);
    write_field(s.manifest.file(name, "checkpoint"), field, h);
  };
  const PdeRun run = evolve_and_measure(*sim.prop, *sim.dec, psi, lambda0, z0, gamma0, eo, sink, t0);

  std::vector<std::string> cols{"t", "lambda", "gamma", "abs_z"};
  for (int n = 1; n <= N; ++n) cols.push_back("phase_z" + std::to_string(n));
  cols.insert(cols.end(), {"r_weighted", "r_norm", "mass", "energy", "ok"});
  CsvWriter csv(s.manifest.file("run.csv", "table"), cols);
  for (std::size_t i = 0; i < run.frames.size(); ++i) {
    const auto& f = run.frames[i];
    std::vector<double> row{f.t, f.lambda, std::remainder(f.gamma, 2.0 * M_PI), f.z.size() ? f.z.norm() : NAN};
    for (int n = 0; n < N; ++n) row.push_back(f.z.size() == N ? std::arg(f.z[n]) : NAN);
    row.insert(row.end(), {f.r_weighted, f.r_norm, run.mass[i], run.energy[i], f.ok ? 1.0 : 0.0});
    csv.row(row);
  }
  s.manifest.summary("simulate", {{"t_end", run.t_end},
                                  {"steps", run.steps},
                                  {"guard_time", run.guard_time},
                                  {"mass_drift", run.mass_drift},
                                  {"energy_drift", run.energy_drift},
                                  {"failed_frames", run.failed_frames},
                                  {"z_exponent", run.z_fit.exponent},
                                  {"r_exponent", run.r_fit.exponent},
                                  {"fit_window", {run.fit_lo, run.fit_hi}},
                                  {"lambda_tv", {run.tv_early, run.tv_late}},
                                  {"checkpoints", checkpoints}});
  if (run.failed_frames == static_cast<int>(run.frames.size()))
    throw NumericalError("no frame could be decomposed");
}

struct Check {
  std::string name;
  double value;
  double tolerance;
  bool pass;
};

std::vector<Check> property_checks(Pipeline& pipe) {
  std::vector<Check> out;
  const IdentityReport rep = pipe.identities();
  out.push_back({"projection_identities", rep.worst(), 1e-8, rep.worst() <= 1e-8});
  out.push_back({"resonance_margin", rep.resonance_margin, 0.0, rep.resonance_margin > 0.0});

  const FgrTensor& T = pipe.tensor();
  std::mt19937 rng(pipe.cfg().seeds.fgr);
  std::normal_distribution<double> gauss;
  double herm = 0.0, low = INFINITY;
  for (int i = 0; i < 200; ++i) {
    CVec z(T.N);
    for (auto& x : z) x = cplx(gauss(rng), gauss(rng));
    z.normalize();
    const CMat G = T.Gamma(z);
    herm = std::max(herm, (G - G.adjoint()).cwiseAbs().maxCoeff() / G.norm());
    low = std::min(low, Eigen::SelfAdjointEigenSolver<CMat>(G).eigenvalues().minCoeff() / G.norm());
  }
  const double psd = pipe.cfg().fgr.psd_tol;
  out.push_back({"gamma_hermitian", herm, 1e-12, herm <= 1e-12});
  out.push_back({"gamma_psd", low, -psd, low >= -psd});

  if (!pipe.radial()) {
    const auto& lin = pipe.box_linearization();
    CVec z(lin.basis().N);
    for (auto& x : z) x = cplx(gauss(rng), gauss(rng));
    const double r = n11_orthogonality_residual(coupling_matrix(lin.model(), lin.bound(), lin.basis()), z);
    out.push_back({"n11_orthogonality", r, 1e-8, r <= 1e-8});
  }

  // short evolution: conservation laws
  const auto& sc = pipe.cfg().simulate;
  Simulation sim = build_simulation(pipe, pipe.absolute_lambda(sc.lambda, sc.relative));
  const int N = sim.dec->table().modes();
  const CVec z0 = sc.z0.size() == N ? sc.z0 : CVec::Constant(N, cplx(0.05 / std::sqrt(double(N)), 0.0));
  EvolveOptions eo;
  eo.T = 1.0;
  eo.dt = sc.dt;
  eo.samples = 4;
  eo.stop_at_guard = false;
  const PdeRun run = evolve_and_measure(*sim.prop, *sim.dec, prepare_initial_data(sim.dec->table().at(sim.lambda), z0, 0.0),
                                        sim.lambda, z0, 0.0, eo);
  out.push_back({"mass_conservation", run.mass_drift, 1e-10, run.mass_drift <= 1e-10});
  out.push_back({"energy_conservation", run.energy_drift, 1e-6, run.energy_drift <= 1e-6});
  return out;
}

int run_verify(Session& s, bool acceptance, const std::vector<int>& only) {
  Json checks = Json::array();
  bool ok = true;
  if (acceptance) {
    AcceptanceSuite suite;
    std::vector<int> ids = only;
    if (ids.empty())
      for (int i = 1; i <= AcceptanceSuite::kCount; ++i) ids.push_back(i);
    for (int id : ids) {
      const auto r = suite.run(id);
      std::printf("[%s] %2d %s (%.1f s): %s\n", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(), r.seconds, r.summary.c_str());
      std::fflush(stdout);
      ok = ok && r.pass;
      checks.push_back({{"id", r.id}, {"name", r.title}, {"pass", r.pass}, {"seconds", r.seconds},
                        {"summary", r.summary}, {"data", r.data}});
    }
  } else {
    for (const auto& c : property_checks(s.pipe)) {
      std::printf("[%s] %s %.3e (tolerance %.1e)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.tolerance);
      ok = ok && c.pass;
      checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
    }
  }
  write_json(s.manifest.file(acceptance ? "acceptance.json" : "verify.json", "report"), {{"pass", ok}, {"checks", checks}});
  s.manifest.summary("verify", {{"pass", ok}, {"checks", checks.size()}});
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bound states, neutral modes and radiation damping for Gross-Pitaevskii equations"};
  app.require_subcommand(1);
  std::string config_path, output, gamma_path;
  bool acceptance = false;
  std::vector<int> only;

  std::vector<CLI::App*> subs;
  for (const char* name : {"spectrum", "bound-state", "linearize", "fgr", "normal-form", "simulate", "verify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--output", output, "Output directory (overrides the config)");
    subs.push_back(sub);
  }
  subs[0]->description("Linear spectrum of -Lap + V");
  subs[1]->description("Continue the nonlinear bound-state branch");
  subs[2]->description("Neutral modes and structural identities at the working point");
  subs[3]->description("Radiation-damping tensor and its certificate");
  subs[4]->description("Integrate the reduced amplitude equations");
  subs[4]->add_option("--gamma", gamma_path, "gamma.json from a previous fgr run");
  subs[5]->description("Evolve the full equation and extract modulation parameters");
  subs[6]->description("Property checks for the configured model, or the acceptance suite");
  subs[6]->add_flag("--acceptance", acceptance, "Run the acceptance suite instead");
  subs[6]->add_option("--only", only, "Acceptance criteria to run")->check(CLI::Range(1, AcceptanceSuite::kCount));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  fs::path out_dir;
  try {
    RunConfig cfg = config_path.empty() ? parse_config(Json::object()) : load_config(config_path);
    if (!output.empty()) cfg.output = output;
    out_dir = cfg.output;
    fs::create_directories(out_dir);
    Session s{Pipeline(cfg), Manifest(out_dir)};
    if (!config_path.empty()) s.manifest.input(fs::path(config_path).filename().string(), sha256_file(config_path));
    int code = 0;
    if (command == "spectrum") run_spectrum(s);
    else if (command == "bound-state") run_bound_state(s);
    else if (command == "linearize") run_linearize(s);
    else if (command == "fgr") run_fgr(s);
    else if (command == "normal-form") run_normal_form(s, gamma_path);
    else if (command == "simulate") run_simulate(s);
    else code = run_verify(s, acceptance, only);
    if (code) write_json(s.manifest.file("diagnostics.json", "diagnostics"), {{"command", command}, {"error", "checks failed"}});
    s.manifest.write(command);
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "gp-lab: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "gp-lab: " << e.what() << '\n';
    if (!out_dir.empty()) {
      try {
        Manifest m(out_dir);
        write_json(m.file("diagnostics.json", "diagnostics"), {{"command", command}, {"error", e.what()}});
        m.write(command);
      } catch (const std::exception&) {
      }
    }
    return 1;
  }
}
