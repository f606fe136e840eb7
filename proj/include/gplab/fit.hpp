#pragma once

#include <span>

namespace gplab {

struct DecayFit {
  double exponent = 0.0;   // value ~ amplitude * t^(-exponent)
  double amplitude = 0.0;
  double r2 = 0.0;
};

// Least squares line through (log t, log value) for t in [t_lo, t_hi]. Throws on non-positive values.
DecayFit fit_decay(std::span<const double> t, std::span<const double> value, double t_lo, double t_hi);

}  // namespace gplab
