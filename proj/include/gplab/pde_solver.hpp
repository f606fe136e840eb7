#pragma once

#include <functional>
#include <vector>

#include "gplab/decomposition.hpp"
#include "gplab/fit.hpp"

namespace gplab {

// Strang split-step for i psi_t = -Lap psi + (V - f(|psi|^2)) psi with an exact pointwise phase
// half step and a kinetic full step.
class Propagator {
 public:
  virtual ~Propagator() = default;
  virtual void step(CVec& psi, double dt) = 0;
  virtual double mass(const CVec& psi) const = 0;
  virtual double energy(const CVec& psi) const = 0;
  // Quadrature weights of 3D integrals and |x| at every stored point.
  virtual const Vec& weights() const = 0;
  virtual const Vec& radius() const = 0;
  // Mass in the outer shell of relative thickness `fraction`.
  virtual double boundary_mass(const CVec& psi, double fraction) const = 0;
};

// Axially symmetric fields: radial grid times Gauss-Legendre nodes in cos(theta).
// Stored values are u = r psi, column-major (radial index fastest, one column per node).
// The kinetic step is Crank-Nicolson per Legendre channel.
class AxisymmetricPropagator final : public Propagator {
 public:
  AxisymmetricPropagator(const RadialGrid& grid, int nodes, const Potential& V, Nonlinearity nl);

  void step(CVec& u, double dt) override;
  double mass(const CVec& u) const override;
  double energy(const CVec& u) const override;
  const Vec& weights() const override { return weights_; }
  const Vec& radius() const override { return radius_; }
  double boundary_mass(const CVec& u, double fraction) const override;

  const RadialGrid& grid() const { return grid_; }
  int nodes() const { return nodes_; }
  const Vec& mu() const { return mu_; }
  // Field (x_3/|x|)^power f(r) from the reduced profile u = r f, power 0 or 1.
  Vec embed(const Vec& reduced, int power) const;

 private:
  void phase(CVec& u, double tau) const;
  void prepare(double dt);

  RadialGrid grid_;
  int nodes_;
  Vec V_;
  Nonlinearity nl_;
  Vec mu_, mu_w_;
  Mat to_modal_, to_nodal_;  // modal = nodal * to_modal, nodal = modal * to_nodal
  Vec weights_, radius_;
  double dt_ = 0.0;
  std::vector<std::vector<cplx>> dl_, d_, du_, du2_;
  std::vector<std::vector<int>> piv_;
};

// Periodic box with the exact kinetic multiplier e^{-i dt |k|^2}.
class BoxPropagator final : public Propagator {
 public:
  BoxPropagator(const BoxModel& model);

  void step(CVec& psi, double dt) override;
  double mass(const CVec& psi) const override;
  double energy(const CVec& psi) const override;
  const Vec& weights() const override { return weights_; }
  const Vec& radius() const override { return radius_; }
  double boundary_mass(const CVec& psi, double fraction) const override;

 private:
  const BoxModel* model_;
  Vec weights_, radius_, edge_;
  double dt_ = 0.0;
  std::vector<cplx> kinetic_;
};

// Tabulated bound states and neutral bases on the propagator's representation.
ManifoldTable radial_manifold(const RadialModel& model, const AxisymmetricPropagator& prop,
                              const std::vector<double>& lambdas, const Vec& guess, double e_gap);
ManifoldTable box_manifold(const BoxModel& model, const std::vector<double>& lambdas, const Vec& guess,
                           const std::vector<Vec>& mode_guesses);

// psi0 = e^{i gamma0} (phi + Re z xi + i Im z eta) + extra; |z0| above eps0 is out of regime.
CVec prepare_initial_data(const ManifoldSample& s, const CVec& z0, double gamma0, const CVec* extra = nullptr,
                          double eps0 = 0.1);

struct EvolveOptions {
  double T = 100.0;
  double dt = 5e-3;
  int samples = 200;          // log-spaced decomposition times
  double guard_fraction = 0.1;
  double guard_tol = 1e-8;    // boundary mass relative to the initial mass
  bool stop_at_guard = true;
  int checkpoint_every = 0;   // steps; 0 disables
  double decompose_tol = 1e-9;
};

struct PdeRun {
  std::vector<ModulationState> frames;
  std::vector<double> mass, energy;  // at frame times
  double mass0 = 0.0, energy0 = 0.0;
  double mass_drift = 0.0;      // max |N(t) - N0| / N0
  double energy_drift = 0.0;    // max |E(t) - E0| / |E0|
  double guard_time = -1.0;     // first frame with boundary mass above tolerance, -1 if never
  double t_end = 0.0;
  int steps = 0;
  int failed_frames = 0;
  // Fits over the last decade before the guard (or the end of the run).
  DecayFit z_fit, r_fit;
  double fit_lo = 0.0, fit_hi = 0.0;
  double tv_early = 0.0, tv_late = 0.0;  // total variation of lambda on [0, t/2] and [t/2, t]
};

// Receives the field and the latest accepted decomposition.
using CheckpointSink = std::function<void(double t, const CVec& psi, const ModulationState& last)>;

PdeRun evolve_and_measure(Propagator& prop, const Decomposer& dec, CVec psi, double lambda0, const CVec& z0,
                          double gamma0, const EvolveOptions& opts, const CheckpointSink& sink = {},
                          double t0 = 0.0);

}  // namespace gplab
