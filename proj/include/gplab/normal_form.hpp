#pragma once

#include <vector>

#include "gplab/fgr.hpp"

namespace gplab {

// Hermitian form of the phase equation: Upsilon_11(z) = sum_{m,n} z_m conj(z_n) A_mn (A real symmetric).
Mat upsilon_matrix(const RadialLinearization& lin);
Mat upsilon_matrix(const BoxLinearization& lin);
double upsilon11(const Mat& A, const CVec& z);

// dz/dt = -iE z - coupling * (Gamma(z) + Lambda_Z(z)) z,   dgamma/dt = Upsilon_11(z)
struct NormalFormModel {
  double E = 0.0;
  FgrTensor tensor;
  double coupling = 0.25;
  Mat upsilon;
  bool skew = true;

  int N() const { return tensor.N; }
  CVec rhs(const CVec& z) const;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<CVec> z;
  std::vector<double> gamma;
  std::vector<double> norm;  // |z|
};

// Classical RK4 with dt <= 0.1 / E, recorded at `samples` log-spaced times in [dt, T] plus t = 0.
Trajectory integrate_normal_form(const NormalFormModel& model, const CVec& z0, double gamma0, double T, double dt,
                                 int samples = 200);

// Isotropic test tensor with Gamma(z) = g0 |z|^2 I and Lambda_Z = 0.
FgrTensor isotropic_tensor(int N, double g0);

}  // namespace gplab
