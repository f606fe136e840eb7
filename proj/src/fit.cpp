#include "gplab/fit.hpp"

#include <cmath>

#include "gplab/error.hpp"

namespace gplab {

DecayFit fit_decay(std::span<const double> t, std::span<const double> value, double t_lo, double t_hi) {
  if (t.size() != value.size()) throw InvalidParameter("fit_decay: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int m = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(t[i] > 0.0) || !(value[i] > 0.0)) throw InvalidParameter("fit_decay: non-positive value in window");
    const double x = std::log(t[i]), y = std::log(value[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++m;
  }
  if (m < 2) throw InvalidParameter("fit_decay: fewer than two points in window");
  const double vx = sxx - sx * sx / m, vy = syy - sy * sy / m, cxy = sxy - sx * sy / m;
  if (vx <= 0.0) throw InvalidParameter("fit_decay: degenerate window");
  const double slope = cxy / vx;
  DecayFit f;
  f.exponent = -slope;
  f.amplitude = std::exp((sy - slope * sx) / m);
  f.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  return f;
}

}  // namespace gplab
