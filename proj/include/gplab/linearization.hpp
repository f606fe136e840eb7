#pragma once

#include <functional>
#include <vector>

#include "gplab/bound_state.hpp"
#include "gplab/fit.hpp"

namespace gplab {

// Real neutral-mode pairs: L_- eta_n = E xi_n, L_+ xi_n = E eta_n.
// Radial bases hold one reduced profile each; the N = 3 members are (x_n/|x|) times it.
struct NeutralBasis {
  double E = 0.0;
  int N = 0;
  bool radial = false;
  std::vector<Vec> xi;
  std::vector<Vec> eta;
  std::vector<double> raw_pairing;  // <u1, u2> of the raw eigenvectors before normalisation
};

struct IdentityReport {
  double kernel_minus = 0.0;     // ||L_- phi|| / (lambda ||phi||)
  double kernel_plus = 0.0;      // ||L_+ dphi + phi|| / ||phi||
  double eigen = 0.0;            // max relative eigen-relation residual
  double biorthogonality = 0.0;  // max |<xi_m, eta_n> - delta_mn|
  double orthogonality = 0.0;    // max |<phi, xi_n>|, |<dphi, eta_n>| (normalised)
  double antisymmetry = 0.0;     // relative antisymmetric part of int f' phi^2 xi_m eta_n
  double idempotence = 0.0;      // max ||(P^2 - P) u|| / ||u|| on random u
  double symplectic = 0.0;       // max ||(P_c^* J - J P_c) u|| / ||u|| on random u
  double resonance_margin = 0.0; // 2E - lambda

  double worst() const;
};

// A complex pair (u1, u2) of fields stored as [u1; u2].
using Pair = CVec;

class RadialLinearization {
 public:
  RadialLinearization(const RadialModel& model, const BranchPoint& bp);

  const RadialModel& model() const { return *model_; }
  const BranchPoint& bound() const { return bp_; }
  double lambda() const { return bp_.lambda; }
  Tridiag minus(int ell) const;
  Tridiag plus(int ell) const;
  // Applies L = [[0, L_-], [-L_+, 0]] in channel ell.
  Pair apply(int ell, const Pair& u) const;

  // Neutral pair in the l = 1 channel, canonical normalisation.
  // e_gap bounds the admissible window (0, 1.5 e_gap).
  NeutralBasis neutral_modes(double e_gap) const;
  // Internal eigenvalues E^2 of L_- L_+ below the continuum edge lambda^2 in channel ell >= 1.
  std::vector<double> channel_frequencies(int ell, int count) const;

  void set_basis(NeutralBasis b) { basis_ = std::move(b); }
  const NeutralBasis& basis() const { return basis_; }

  // Discrete and continuous projections for channel ell, angular member j (only matters for ell = 1).
  Pair project_disc(int ell, const Pair& u) const;
  Pair project_c(int ell, const Pair& u) const { return u - project_disc(ell, u); }
  Pair project_c_adjoint(int ell, const Pair& u) const;

  IdentityReport identities(unsigned seed = 7, int samples = 20) const;

  double kernel_minus_residual() const;
  double kernel_plus_residual() const;

 private:
  const RadialModel* model_;
  BranchPoint bp_;
  Vec wm_, wp_;
  NeutralBasis basis_;
};

class BoxLinearization {
 public:
  BoxLinearization(const BoxModel& model, const BranchPoint& bp);

  const BoxModel& model() const { return *model_; }
  const BranchPoint& bound() const { return bp_; }
  double lambda() const { return bp_.lambda; }
  Vec apply_minus(const Vec& u) const;
  Vec apply_plus(const Vec& u) const;
  Pair apply(const Pair& u) const;

  // Lowest neutral cluster on the even subspace. Guesses seed the block (e.g. linear excited states).
  NeutralBasis neutral_modes(int N, const std::vector<Vec>& guesses, double tol = 1e-9, int max_iter = 400) const;
  // Re-derives eta from xi through the eigen relation, biorthonormalises, fixes order and signs with
  // quadrupole probes.
  NeutralBasis canonical_basis(const NeutralBasis& raw) const;

  void set_basis(NeutralBasis b) { basis_ = std::move(b); }
  const NeutralBasis& basis() const { return basis_; }

  Pair project_disc(const Pair& u) const;
  Pair project_c(const Pair& u) const { return u - project_disc(u); }
  Pair project_c_adjoint(const Pair& u) const;

  IdentityReport identities(unsigned seed = 7, int samples = 4) const;

 private:
  const BoxModel* model_;
  BranchPoint bp_;
  Vec wm_, wp_;
  NeutralBasis basis_;
};

// Omega_nm = int f'(phi^2) phi^2 xi_n eta_m on the box.
Mat coupling_matrix(const BoxModel& model, const BranchPoint& bp, const NeutralBasis& basis);
// max |Omega - Omega^T| / max |Omega|
double antisymmetry_residual(const Mat& omega);
// |<N^Im_{1,1}(z), phi>| / (|z|^2 max|Omega|); identically zero for radial bases.
double n11_orthogonality_residual(const Mat& omega, const Eigen::VectorXcd& z);
// Rotates the xi members of the first two basis vectors by theta and leaves eta untouched.
NeutralBasis rotate_degenerate_pair(const NeutralBasis& basis, double theta);

// Evolution of du/dt = L u in one radial channel by Strang splitting, with u0 replaced by P_c u0.
struct LinearPropagation {
  std::vector<double> t;
  std::vector<double> weighted_norm;
  DecayFit fit;
  bool guard_tripped = false;
};

LinearPropagation propagate_linearized(const RadialLinearization& lin, int ell, const Vec& u1, const Vec& u2,
                                       double T, double dt, double nu, int samples, bool project = true);

}  // namespace gplab
