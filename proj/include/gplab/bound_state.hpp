#pragma once

#include <array>
#include <vector>

#include "gplab/discretization.hpp"
#include "gplab/linear_spectrum.hpp"

namespace gplab {

struct RadialModel {
  RadialGrid grid;
  Vec potential;  // sampled V(r_i)
  Nonlinearity nl;

  RadialModel(const RadialGrid& g, const Potential& V, Nonlinearity n)
      : grid(g), potential(sample_potential(g, V)), nl(n) {}
  // Weights of the linearised operators: L_- = T + w_minus, L_+ = T + w_plus.
  Vec w_minus(double lambda, const Vec& phi_u) const;
  Vec w_plus(double lambda, const Vec& phi_u) const;
  // Same model on a longer grid with identical spacing; fields are zero padded by the caller.
  RadialModel extended(double r_max, const Potential& V) const;
};

struct BoxModel {
  BoxOps ops;
  Nonlinearity nl;

  BoxModel(const BoxGrid& g, const Potential& V, Nonlinearity n) : ops(g, V), nl(n) {}
  Vec w_minus(double lambda, const Vec& phi) const;
  Vec w_plus(double lambda, const Vec& phi) const;
  Vec apply_minus(double lambda, const Vec& phi, const Vec& u) const;
  Vec apply_plus(double lambda, const Vec& phi, const Vec& u) const;
};

// One solution of -Lap phi + V phi - f(phi^2) phi = -lambda phi together with d phi / d lambda.
// Radial samples store reduced functions u = r phi; box samples store grid values.
struct BranchPoint {
  double lambda = 0.0;
  Vec phi;
  Vec dphi;
  double mass = 0.0;   // ||phi||^2
  double dmass = 0.0;  // d/dlambda ||phi||^2
  double residual = 0.0;
  int iterations = 0;
};

struct BranchOptions {
  std::array<double, 2> lambda_range{0.0, 0.0};
  int steps = 50;
  double newton_tol = 1e-10;
  int max_newton = 40;
};

// Ground-state amplitude predicted by the bifurcation expansion, delta^2 = (lambda + e0) / (-g int phi_lin^4).
// Returns NaN when lambda lies on the side where no branch exists.
double bifurcation_amplitude(double lambda, double e0, double g, double quartic);

BranchPoint solve_radial_bound_state(const RadialModel& model, double lambda, const Vec& guess, double tol,
                                     int max_iter);
std::vector<BranchPoint> continue_radial_branch(const RadialModel& model, const BranchOptions& opts);

BranchPoint solve_box_bound_state(const BoxModel& model, double lambda, const Vec& guess, double tol, int max_iter);
std::vector<BranchPoint> continue_box_branch(const BoxModel& model, const BranchOptions& opts,
                                             const SpectrumResult* linear = nullptr);

// d phi / d lambda = -L_+^{-1} phi
Vec radial_lambda_derivative(const RadialModel& model, double lambda, const Vec& phi);
Vec box_lambda_derivative(const BoxModel& model, double lambda, const Vec& phi, double tol = 1e-12);

}  // namespace gplab
