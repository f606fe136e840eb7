#pragma once

#include <vector>

namespace gplab {

// d|z|^2/dt = -|z|^4 + c (T0 + t)^{-2-delta}, |z(0)| = w0, checked against
// |z(t)| <= (1 + K c T0^{-delta}) / sqrt(kappa + t) with kappa = min(T0, w0^{-2}).
struct RiccatiReport {
  bool holds = false;
  double margin = 0.0;     // K - k_fit (or 1 - sup ratio when c = 0)
  double k_fit = 0.0;      // smallest K making the bound hold on the sampled times
  double sup_ratio = 0.0;  // sup |z| sqrt(kappa + t)
};

RiccatiReport verify_riccati_bound(double T0, double c, double delta, double w0, double T, double K = 2.0);

// sup over a log grid of t of (T0 + t)^sigma int_0^t (1 + t - s)^{-3/2} (T0 + s)^{-sigma} ds
struct ConvolutionReport {
  double c_observed = 0.0;
  double c_extended = 0.0;  // same sup with the grid extended ten times further
  bool stable = false;
};

double convolution_integral(double T0, double sigma, double t);
ConvolutionReport verify_convolution_bound(double T0, double sigma, double t_max, int points = 60);

}  // namespace gplab
