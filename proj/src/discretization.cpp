#include "gplab/discretization.hpp"

#include "gplab/error.hpp"

namespace gplab {

Vec Tridiag::apply(const Vec& u) const {
  const int n = size();
  Vec out = diag.cwiseProduct(u);
  out.head(n - 1) += off.cwiseProduct(u.tail(n - 1));
  out.tail(n - 1) += off.cwiseProduct(u.head(n - 1));
  return out;
}

CVec Tridiag::apply(const CVec& u) const {
  const int n = size();
  CVec out = diag.cast<cplx>().cwiseProduct(u);
  out.head(n - 1) += off.cast<cplx>().cwiseProduct(u.tail(n - 1));
  out.tail(n - 1) += off.cast<cplx>().cwiseProduct(u.head(n - 1));
  return out;
}

Tridiag radial_operator(const RadialGrid& grid, int ell, const Vec& weight) {
  if (weight.size() != grid.size()) throw GeometryMismatch("radial weight does not match grid");
  const int n = grid.size();
  const double ih2 = 1.0 / (grid.h() * grid.h());
  Tridiag t{Vec(n), Vec::Constant(n - 1, -ih2)};
  for (int i = 0; i < n; ++i) {
    const double r = grid.r(i);
    t.diag[i] = 2.0 * ih2 + ell * (ell + 1) / (r * r) + weight[i];
  }
  return t;
}

Vec sample_potential(const RadialGrid& grid, const Potential& V) {
  Vec v(grid.size());
  for (int i = 0; i < grid.size(); ++i) v[i] = V.radial(grid.r(i));
  return v;
}

double angular_weight(int ell) {
  switch (ell) {
    case 0: return kFourPi;
    case 1: return kFourPi / 3.0;
    default: throw InvalidParameter("angular_weight: only channels 0 and 1 carry a fixed angular factor");
  }
}

double radial_inner(const RadialGrid& grid, const Vec& u, const Vec& v, int ell) {
  return angular_weight(ell) * grid.h() * u.dot(v);
}

cplx radial_inner(const RadialGrid& grid, const CVec& u, const CVec& v, int ell) {
  return angular_weight(ell) * grid.h() * v.dot(u);
}

Vec profile_from_reduced(const RadialGrid& grid, const Vec& u) { return u.cwiseQuotient(grid.radii()); }
Vec reduced_from_profile(const RadialGrid& grid, const Vec& f) { return f.cwiseProduct(grid.radii()); }

BoxOps::BoxOps(const BoxGrid& grid, const Potential& V)
    : grid_(grid), V_(grid.size()), fft_(std::make_shared<Fft3>(grid.n())) {
  for (int i = 0; i < grid.n(); ++i)
    for (int j = 0; j < grid.n(); ++j)
      for (int k = 0; k < grid.n(); ++k) V_[grid.index(i, j, k)] = V.at({grid.x(i), grid.x(j), grid.x(k)});
}

CVec BoxOps::laplacian_neg(const CVec& u) const {
  CVec w = u;
  fft_->forward(w);
  const auto& k2 = grid_.k2();
  const double inv = 1.0 / static_cast<double>(grid_.size());
  for (long i = 0; i < w.size(); ++i) w[i] *= k2[i] * inv;
  fft_->backward(w);
  return w;
}

Vec BoxOps::laplacian_neg(const Vec& u) const { return laplacian_neg(CVec(u.cast<cplx>())).real(); }

CVec BoxOps::fourier_multiply(const CVec& u, const std::vector<cplx>& symbol) const {
  CVec w = u;
  fft_->forward(w);
  const double inv = 1.0 / static_cast<double>(grid_.size());
  for (long i = 0; i < w.size(); ++i) w[i] *= symbol[i] * inv;
  fft_->backward(w);
  return w;
}

Vec BoxOps::shifted_inverse(const Vec& u, double sigma) const {
  CVec w = u.cast<cplx>();
  fft_->forward(w);
  const auto& k2 = grid_.k2();
  const double inv = 1.0 / static_cast<double>(grid_.size());
  for (long i = 0; i < w.size(); ++i) w[i] *= inv / (k2[i] + sigma);
  fft_->backward(w);
  return w.real();
}

Vec BoxOps::hamiltonian(const Vec& u) const { return laplacian_neg(u) + V_.cwiseProduct(u); }

Vec BoxOps::restrict_even(const Vec& u) const {
  Vec out(u.size());
  for (long i = 0; i < u.size(); ++i) out[i] = 0.5 * (u[i] + u[grid_.mirror(i)]);
  return out;
}

}  // namespace gplab

#include <fftw3.h>

namespace gplab {

double spectral_wavenumber(const RadialGrid& grid, const Vec& u, double fraction) {
  const int n = grid.size();
  Vec in = u, out(n);
  fftw_plan p = fftw_plan_r2r_1d(n, in.data(), out.data(), FFTW_RODFT00, FFTW_ESTIMATE);
  fftw_execute(p);
  fftw_destroy_plan(p);
  const double total = out.squaredNorm();
  if (total == 0.0) return 0.0;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    acc += out[k] * out[k];
    if (acc >= fraction * total) return std::numbers::pi * (k + 1) / grid.r_max();
  }
  return std::numbers::pi * n / grid.r_max();
}

double weighted_norm(const RadialGrid& grid, const Vec& u, int ell, double nu) {
  double s = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double r = grid.r(i);
    const double w = std::pow(1.0 + r * r, -0.5 * nu);
    s += w * w * u[i] * u[i];
  }
  const double ang = ell <= 1 ? angular_weight(ell) : kFourPi;
  return std::sqrt(ang * grid.h() * s);
}

}  // namespace gplab
