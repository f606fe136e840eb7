#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "gplab/linearization.hpp"

namespace gplab {

using CMat = Eigen::MatrixXcd;

struct FgrOptions {
  std::vector<double> eps_ladder{1e-2, 5e-3, 2.5e-3};
  double psd_tol = 1e-8;
  double spacing = 0.04;    // radial resolvent grid spacing
  double reach = 12.0;      // extended radius = reach * k / min(eps), k the radiation wavenumber
  double gamma_tol = 1e-2;  // relative extrapolation error above which a tensor is flagged
};

// Polynomial extrapolation to eps = 0 through all ladder values (Neville); the error estimate is the
// distance to the extrapolant that omits the largest eps.
struct Extrapolated {
  cplx value;
  double error = 0.0;
};
Extrapolated extrapolate_to_zero(std::span<const double> eps, std::span<const cplx> values);

// Quadratic coupling fields at one point, (B(k), D(k)) for the amplitude vector z.
std::array<cplx, 2> coupling_pointwise(const Nonlinearity& nl, double phi, std::span<const double> xi,
                                       std::span<const double> eta, int k, const CVec& z);
// z^2 coefficient of J N(z) assembled from the real quadratic nonlinearity by phase averaging.
std::array<cplx, 2> quadratic_pointwise(const Nonlinearity& nl, double phi, std::span<const double> xi,
                                        std::span<const double> eta, const CVec& z);

// Radial members are generated from profiles: xi_n(x) = (x_n / |x|) xi(|x|).
struct GVectors {
  int N = 0;
  bool radial = false;
  Nonlinearity nl;
  // radial: profile values on the grid radii
  Vec r, phi, xi, eta;
  // box: fields[k * N + m] = G_k[e_m]
  std::vector<Pair> fields;

  std::array<cplx, 2> radial_value(int k, const CVec& z, int i, const Point& omega) const;
  Pair box_field(int k, const CVec& z) const;
};

GVectors build_G_vectors(const RadialLinearization& lin);
GVectors build_G_vectors(const BoxLinearization& lin);

// LU of (L_ell + 2iE - eps) in one radial channel, interleaved band storage.
class ChannelResolvent {
 public:
  ChannelResolvent(const RadialLinearization& lin, int ell, cplx shift);
  // Solution for a pair of reduced functions; shorter inputs are zero padded.
  Pair solve(const Pair& f) const;
  Pair solve_projected(const Pair& f) const;
  int ell() const { return ell_; }

 private:
  const RadialLinearization* lin_;
  int ell_;
  int n_;
  std::unique_ptr<BandedLU<cplx>> lu_;
};

// Z^{(k,l)}(z) = sum_{m,n} z_m conj(z_n) C[k][l][m][n]
struct FgrTensor {
  int N = 0;
  std::vector<cplx> C;
  std::vector<double> eps;
  double error = 0.0;  // max extrapolation error over entries
  double scale = 0.0;  // max |C|
  bool confident = true;

  cplx& at(int k, int l, int m, int n) { return C[((k * N + l) * N + m) * N + n]; }
  cplx at(int k, int l, int m, int n) const { return C[((k * N + l) * N + m) * N + n]; }
  CMat Z(const CVec& z) const;
  CMat Gamma(const CVec& z) const;
  CMat Lambda(const CVec& z) const;
};

struct FgrMinimum {
  double K = 0.0;
  CVec z;
};
// min over unit z of the smallest eigenvalue of Gamma(z): random coarse sampling then local refinement.
FgrMinimum fgr_constant(const FgrTensor& C, unsigned seed = 3, int samples = 400);

struct RadialConstants {
  double re_z11 = 0.0, re_z22 = 0.0;
  double error11 = 0.0, error22 = 0.0;
};

// Radial FGR problem: bound state and neutral pair recomputed at the resolvent spacing, then zero padded
// onto a grid long enough for the regularised outgoing waves to decay.
class RadialFgr {
 public:
  RadialFgr(const RadialLinearization& lin, const Potential& V, const FgrOptions& opts = {});

  const RadialLinearization& core() const { return *core_lin_; }
  const RadialLinearization& extended() const { return *ext_lin_; }
  const GVectors& G() const { return G_; }
  const FgrOptions& options() const { return opts_; }
  double wavenumber() const { return k_; }
  double E() const { return core_lin_->basis().E; }

  // Angular reduction through x_1^2 G(|x|) and x_1 x_2 G(|x|) in the l = 0 and l = 2 channels.
  RadialConstants constants() const;
  // Full tensor from angular quadrature of G_k[e_m] against real harmonics l <= 2.
  FgrTensor tensor() const;

 private:
  FgrOptions opts_;
  std::unique_ptr<RadialModel> core_model_, ext_model_;
  std::unique_ptr<RadialLinearization> core_lin_, ext_lin_;
  GVectors G_;
  double k_ = 0.0;
};

// Box tensor by preconditioned GMRES on the periodic grid. Limiting absorption is not resolved by a
// periodic box, so such tensors are normally flagged as not confident.
FgrTensor box_fgr_tensor(const BoxLinearization& lin, const GVectors& G, const FgrOptions& opts = {});

// Scalar outgoing resolvent (-d^2 + l(l+1)/r^2 + w - mu - i eps)^{-1} on reduced functions,
// with an optional list of channel eigenvectors projected out first.
CVec scalar_resolvent(const RadialGrid& grid, int ell, const Vec& w, double mu, double eps, const CVec& f,
                      const std::vector<Vec>& remove = {});

struct WeakCoupling {
  Mat K0;              // Im <(-Lap + V - mu - i0)^{-1} P_c F_mn, F_mn>, F_mn = phi_lin xi_m xi_n
  Mat error;
  double mu = 0.0;     // 2 e1 - e0
  double min_eig = 0.0;
};

// Linear-limit surrogate for a radial potential: phi_lin the l = 0 ground state, xi_lin the l = 1 level.
WeakCoupling radial_weak_coupling(double r_core, const Potential& V, const FgrOptions& opts = {});

}  // namespace gplab
