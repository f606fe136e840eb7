#include "gplab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace gplab {

namespace {

// Typed access to one JSON object; every key read is recorded so leftovers can be rejected.
class Section {
 public:
  Section(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail("", "must be an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  double number(const std::string& key, double fallback, double lo = -INFINITY, double hi = INFINITY) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x) || x < lo || x > hi) fail(key, "is out of range");
    return x;
  }

  double positive(const std::string& key, double fallback) {
    const double x = number(key, fallback);
    if (!(x > 0.0)) fail(key, "must be positive");
    return x;
  }

  int integer(const std::string& key, int fallback, int lo, int hi) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (!v.is_number_integer()) fail(key, "must be an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > hi) fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(x);
  }

  std::string text(const std::string& key, const std::string& fallback, const std::set<std::string>& allowed = {}) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (!v.is_string()) fail(key, "must be a string");
    std::string s = v.get<std::string>();
    if (!allowed.empty() && !allowed.count(s)) fail(key, "has unknown value '" + s + "'");
    return s;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (!v.is_array()) fail(key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(key, "must be an array of numbers");
      out.push_back(x.get<double>());
      if (!std::isfinite(out.back())) fail(key, "contains a non-finite value");
    }
    return out;
  }

  // Complex vector written as [[re, im], ...].
  CVec amplitudes(const std::string& key, const CVec& fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (!v.is_array() || v.empty()) fail(key, "must be a non-empty array of [re, im] pairs");
    CVec z(static_cast<long>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Json& p = v[i];
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        fail(key, "must be a non-empty array of [re, im] pairs");
      z[static_cast<long>(i)] = cplx(p[0].get<double>(), p[1].get<double>());
    }
    if (!z.allFinite()) fail(key, "contains a non-finite value");
    return z;
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    static const Json empty = Json::object();
    return Section(has(key) ? obj_.at(key) : empty, path_.empty() ? key : path_ + "." + key);
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) fail(key, "is not a recognised key");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    std::string where = path_;
    if (!key.empty()) where += where.empty() ? key : "." + key;
    throw ConfigError("config: '" + where + "' " + what);
  }

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

Potential read_potential(Section s) {
  const std::string kind = s.text("kind", "gaussian", {"zero", "harmonic", "gaussian", "double_well", "profile"});
  Potential V;
  if (kind == "zero") {
    V = Potential(ZeroPotential{});
  } else if (kind == "harmonic") {
    V = Potential(HarmonicWell{s.positive("omega", 1.0)});
  } else if (kind == "gaussian") {
    V = Potential(GaussianWell{s.number("depth", 14.0), s.positive("width", 1.0)});
  } else if (kind == "double_well") {
    V = Potential::double_well(s.number("m", 1.75, 0.0), s.number("q", 36.0), s.positive("lambda_g", 1.0));
  } else {
    RadialProfile p{s.numbers("r", {}), s.numbers("v", {})};
    if (p.r.size() < 2 || p.r.size() != p.v.size()) s.fail("r", "and 'v' must be equally long with two entries or more");
    for (std::size_t i = 1; i < p.r.size(); ++i)
      if (!(p.r[i] > p.r[i - 1])) s.fail("r", "must be strictly increasing");
    V = Potential(std::move(p));
  }
  s.finish();
  return V;
}

std::array<double, 2> read_range(Section& s, const std::string& key, std::array<double, 2> fallback) {
  const auto v = s.numbers(key, {fallback[0], fallback[1]});
  if (v.size() != 2 || !(v[1] > v[0])) s.fail(key, "must be an increasing pair");
  return {v[0], v[1]};
}

}  // namespace

RunConfig parse_config(const Json& doc) {
  RunConfig cfg;
  cfg.source = doc;
  Section root(doc, "");
  cfg.potential = read_potential(root.child("potential"));
  {
    Section s = root.child("nonlinearity");
    cfg.nl = Nonlinearity(s.number("g", -1.0));
    s.finish();
  }
  {
    Section s = root.child("grid");
    cfg.grid.geometry = s.text("geometry", "radial", {"radial", "box"});
    Section r = s.child("radial");
    cfg.grid.r_max = r.positive("r_max", cfg.grid.r_max);
    cfg.grid.n = r.integer("n", cfg.grid.n, 16, 1 << 22);
    cfg.grid.angular_nodes = r.integer("angular_nodes", cfg.grid.angular_nodes, 2, 64);
    r.finish();
    Section b = s.child("box");
    cfg.grid.L = b.positive("L", cfg.grid.L);
    cfg.grid.box_n = b.integer("n", cfg.grid.box_n, 8, 512);
    if (cfg.grid.box_n % 2) b.fail("n", "must be even");
    b.finish();
    s.finish();
  }
  {
    Section s = root.child("spectrum");
    cfg.spectrum.k_eigs = s.integer("k_eigs", cfg.spectrum.k_eigs, 2, 64);
    cfg.spectrum.gap_tol = s.positive("gap_tol", cfg.spectrum.gap_tol);
    cfg.spectrum.max_ell = s.integer("max_ell", cfg.spectrum.max_ell, 1, 16);
    cfg.spectrum.tol = s.positive("tol", cfg.spectrum.tol);
    cfg.spectrum.max_iter = s.integer("max_iter", cfg.spectrum.max_iter, 1, 100000);
    s.finish();
  }
  {
    Section s = root.child("branch");
    if (s.has("lambda_range") && s.has("offset_range")) s.fail("lambda_range", "and 'offset_range' are exclusive");
    cfg.branch.relative = !s.has("lambda_range");
    cfg.branch.range = cfg.branch.relative ? read_range(s, "offset_range", cfg.branch.range)
                                           : read_range(s, "lambda_range", cfg.branch.range);
    cfg.branch.steps = s.integer("steps", cfg.branch.steps, 2, 100000);
    cfg.branch.newton_tol = s.positive("newton_tol", cfg.branch.newton_tol);
    cfg.branch.max_newton = s.integer("max_newton", cfg.branch.max_newton, 1, 1000);
    s.finish();
  }
  {
    Section s = root.child("fgr");
    cfg.fgr.eps_ladder = s.numbers("eps_ladder", cfg.fgr.eps_ladder);
    if (cfg.fgr.eps_ladder.size() < 2) s.fail("eps_ladder", "needs at least two entries");
    for (double e : cfg.fgr.eps_ladder)
      if (!(e > 0.0)) s.fail("eps_ladder", "entries must be positive");
    cfg.fgr.psd_tol = s.positive("psd_tol", cfg.fgr.psd_tol);
    cfg.fgr.spacing = s.positive("spacing", cfg.fgr.spacing);
    cfg.fgr.reach = s.positive("reach", cfg.fgr.reach);
    cfg.fgr.gamma_tol = s.positive("gamma_tol", cfg.fgr.gamma_tol);
    s.finish();
  }
  {
    Section s = root.child("normal_form");
    cfg.normal_form.T = s.positive("T", cfg.normal_form.T);
    cfg.normal_form.dt = s.positive("dt", cfg.normal_form.dt);
    cfg.normal_form.samples = s.integer("samples", cfg.normal_form.samples, 2, 1000000);
    cfg.normal_form.z0 = s.amplitudes("z0", CVec());
    cfg.normal_form.coupling = s.positive("coupling", cfg.normal_form.coupling);
    s.finish();
  }
  {
    Section s = root.child("simulate");
    if (s.has("lambda0") && s.has("lambda_offset")) s.fail("lambda0", "and 'lambda_offset' are exclusive");
    cfg.simulate.relative = !s.has("lambda0");
    cfg.simulate.lambda = cfg.simulate.relative ? s.number("lambda_offset", cfg.simulate.lambda)
                                                : s.number("lambda0", cfg.simulate.lambda);
    cfg.simulate.z0 = s.amplitudes("z0", CVec());
    cfg.simulate.gamma0 = s.number("gamma0", cfg.simulate.gamma0);
    cfg.simulate.T = s.positive("T", cfg.simulate.T);
    cfg.simulate.dt = s.positive("dt", cfg.simulate.dt);
    cfg.simulate.samples = s.integer("samples", cfg.simulate.samples, 2, 1000000);
    cfg.simulate.nu = s.number("nu", cfg.simulate.nu, 0.0, 50.0);
    cfg.simulate.eps0 = s.positive("eps0", cfg.simulate.eps0);
    cfg.simulate.guard_fraction = s.number("guard_fraction", cfg.simulate.guard_fraction, 1e-3, 0.5);
    cfg.simulate.guard_tol = s.positive("guard_tol", cfg.simulate.guard_tol);
    cfg.simulate.checkpoint_every = s.integer("checkpoint_every", 0, 0, 1 << 30);
    cfg.simulate.resume = s.text("resume", "");
    s.finish();
  }
  {
    Section s = root.child("seeds");
    cfg.seeds.spectrum = static_cast<unsigned>(s.integer("spectrum", 1, 0, 1 << 30));
    cfg.seeds.identities = static_cast<unsigned>(s.integer("identities", 7, 0, 1 << 30));
    cfg.seeds.fgr = static_cast<unsigned>(s.integer("fgr", 3, 0, 1 << 30));
    s.finish();
  }
  cfg.spectrum.seed = cfg.seeds.spectrum;
  cfg.output = root.text("output", "out");
  if (cfg.output.empty()) root.fail("output", "must not be empty");
  root.finish();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace gplab
