#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Core>

namespace gplab {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

// Uniform interior grid r_i = (i+1) h on (0, r_max) with Dirichlet ends.
// Radial functions are stored in reduced form u = r f.
class RadialGrid {
 public:
  RadialGrid(double r_max, int n);

  int size() const { return n_; }
  double r_max() const { return r_max_; }
  double h() const { return h_; }
  double r(int i) const { return (i + 1) * h_; }
  Vec radii() const;
  // Same spacing, more points.
  RadialGrid extended(double new_r_max) const;

 private:
  double r_max_;
  int n_;
  double h_;
};

// Periodic box [-L, L)^3 with n points per axis.
class BoxGrid {
 public:
  BoxGrid(double half_width, int n);

  int n() const { return n_; }
  long size() const { return static_cast<long>(n_) * n_ * n_; }
  double half_width() const { return L_; }
  double h() const { return h_; }
  double cell() const { return h_ * h_ * h_; }
  double x(int i) const { return -L_ + i * h_; }
  long index(int i, int j, int k) const { return (static_cast<long>(i) * n_ + j) * n_ + k; }
  // Index of the point -x.
  long mirror(long idx) const;
  // Squared wavenumbers in FFTW order.
  const std::vector<double>& k2() const { return k2_; }

 private:
  double L_;
  int n_;
  double h_;
  std::vector<double> k2_;
};

// In-place complex 3D transforms; owns FFTW plans.
class Fft3 {
 public:
  explicit Fft3(int n);
  ~Fft3();
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  void forward(CVec& data) const;
  // Unnormalised inverse; caller divides by n^3.
  void backward(CVec& data) const;

 private:
  int n_;
  void* buffer_;
  void* fwd_;
  void* bwd_;
};

}  // namespace gplab
