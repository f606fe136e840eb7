#pragma once

#include <memory>
#include <numbers>

#include "gplab/grid.hpp"
#include "gplab/model.hpp"

namespace gplab {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// Symmetric tridiagonal matrix for -d^2/dr^2 + l(l+1)/r^2 + w(r) acting on reduced functions.
struct Tridiag {
  Vec diag;
  Vec off;

  Vec apply(const Vec& u) const;
  CVec apply(const CVec& u) const;
  int size() const { return static_cast<int>(diag.size()); }
};

Tridiag radial_operator(const RadialGrid& grid, int ell, const Vec& weight);
Vec sample_potential(const RadialGrid& grid, const Potential& V);

// Angular normalisation of a channel: integral over the sphere of |Y|^2 where the 3D function is (u/r) Y.
// Channel l = 0 uses Y = 1, channel l = 1 uses Y = x_j / |x|.
double angular_weight(int ell);

// <f, g> = ang * h * sum u_f u_g for 3D functions sharing one angular factor.
double radial_inner(const RadialGrid& grid, const Vec& u, const Vec& v, int ell);
cplx radial_inner(const RadialGrid& grid, const CVec& u, const CVec& v, int ell);

// Pointwise profile value f(r_i) = u_i / r_i.
Vec profile_from_reduced(const RadialGrid& grid, const Vec& u);
Vec reduced_from_profile(const RadialGrid& grid, const Vec& f);

// Sampled potential and spectral Laplacian on a periodic box.
class BoxOps {
 public:
  BoxOps(const BoxGrid& grid, const Potential& V);

  const BoxGrid& grid() const { return grid_; }
  const Vec& potential() const { return V_; }
  Vec laplacian_neg(const Vec& u) const;               // -Lap u
  CVec laplacian_neg(const CVec& u) const;
  Vec shifted_inverse(const Vec& u, double sigma) const;  // (-Lap + sigma)^{-1} u
  CVec fourier_multiply(const CVec& u, const std::vector<cplx>& symbol) const;
  Vec hamiltonian(const Vec& u) const;                 // (-Lap + V) u
  // Symmetrisation onto functions even under x -> -x.
  Vec restrict_even(const Vec& u) const;
  double inner(const Vec& a, const Vec& b) const { return grid_.cell() * a.dot(b); }
  cplx inner(const CVec& a, const CVec& b) const { return grid_.cell() * b.dot(a); }
  double norm(const Vec& a) const { return std::sqrt(inner(a, a)); }
  Fft3& fft() const { return *fft_; }

 private:
  BoxGrid grid_;
  Vec V_;
  std::shared_ptr<Fft3> fft_;
};

}  // namespace gplab

namespace gplab {

// Wavenumber below which the given fraction of the sine-transform energy of u lies.
double spectral_wavenumber(const RadialGrid& grid, const Vec& u, double fraction = 0.99);
// Weighted norm ||<x>^{-nu} f|| for a reduced radial function in channel ell.
double weighted_norm(const RadialGrid& grid, const Vec& u, int ell, double nu);

}  // namespace gplab
