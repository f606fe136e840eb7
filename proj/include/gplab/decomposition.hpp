#pragma once

#include <vector>

#include "gplab/linearization.hpp"

namespace gplab {

// Bound state, lambda derivative and neutral basis at one lambda, sampled in the propagator's
// representation (reduced nodal values r psi on axisymmetric grids, plain values on boxes).
struct ManifoldSample {
  double lambda = 0.0;
  double E = 0.0;
  Vec phi, dphi;
  std::vector<Vec> xi, eta;
};

// Samples ordered in lambda, read back by local cubic interpolation.
class ManifoldTable {
 public:
  explicit ManifoldTable(std::vector<ManifoldSample> samples);
  ManifoldSample at(double lambda) const;
  double lambda_min() const { return samples_.front().lambda; }
  double lambda_max() const { return samples_.back().lambda; }
  int modes() const { return static_cast<int>(samples_.front().xi.size()); }
  const std::vector<ManifoldSample>& samples() const { return samples_; }

 private:
  std::vector<ManifoldSample> samples_;
};

struct ModulationState {
  double t = 0.0;
  double lambda = 0.0;
  double theta = 0.0;  // accumulated phase
  double gamma = 0.0;  // theta - int_0^t lambda, set by the caller
  CVec z;
  double r_norm = 0.0;      // ||R||_2
  double r_weighted = 0.0;  // ||<x>^{-nu} R||_2
  double orthogonality = 0.0;
  int iterations = 0;
  bool ok = false;
};

// Solves for (lambda, theta, z) making
//   R = e^{-i theta} psi - [phi + (Re z) xi + i (Im z) eta]
// symplectically orthogonal to i phi, dphi, i eta_n, xi_n.
class Decomposer {
 public:
  Decomposer(ManifoldTable table, Vec weights, Vec radius, double nu = 4.0);

  ModulationState decompose(const CVec& psi, double lambda_guess, double theta_guess, const CVec& z_guess,
                            double tol = 1e-10, int max_iter = 30) const;
  const ManifoldTable& table() const { return table_; }
  cplx inner(const CVec& a, const CVec& b) const;

 private:
  Eigen::VectorXd conditions(const CVec& psi, const Eigen::VectorXd& p, CVec* R) const;

  ManifoldTable table_;
  Vec w_, radius_, decay_;
};

}  // namespace gplab
