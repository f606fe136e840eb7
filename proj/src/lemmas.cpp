#include "gplab/lemmas.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "gplab/error.hpp"

namespace gplab {

RiccatiReport verify_riccati_bound(double T0, double c, double delta, double w0, double T, double K) {
  if (!(T0 >= 2.0)) throw InvalidParameter("T0 must be at least 2");
  if (!(delta > 0.0) || c < 0.0 || !(w0 > 0.0) || !(T > 0.0)) throw InvalidParameter("invalid Riccati parameters");
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 1>;
  auto rhs = [&](const State& y, State& dy, double t) { dy[0] = -y[0] * y[0] + c * std::pow(T0 + t, -2.0 - delta); };
  auto stepper = ode::make_dense_output(1e-12, 1e-12, ode::runge_kutta_dopri5<State>());
  const double kappa = std::min(T0, 1.0 / (w0 * w0));
  const double slack = c * std::pow(T0, -delta);
  RiccatiReport rep;
  State y{w0 * w0};
  std::vector<double> times{0.0};
  const int points = 400;
  for (int j = 0; j < points; ++j) times.push_back(1e-3 * std::pow(T / 1e-3, double(j) / (points - 1)));
  auto observe = [&](const State& s, double t) {
    const double ratio = std::sqrt(std::max(s[0], 0.0)) * std::sqrt(kappa + t);
    rep.sup_ratio = std::max(rep.sup_ratio, ratio);
  };
  ode::integrate_times(stepper, rhs, y, times.begin(), times.end(), 1e-3, observe);
  if (slack > 0.0) {
    rep.k_fit = std::max(0.0, (rep.sup_ratio - 1.0) / slack);
    rep.margin = K - rep.k_fit;
  } else {
    rep.margin = 1.0 - rep.sup_ratio;
  }
  rep.holds = rep.margin >= 0.0;
  return rep;
}

double convolution_integral(double T0, double sigma, double t) {
  if (!(sigma >= 0.0 && sigma <= 1.5)) throw InvalidParameter("sigma must lie in [0, 3/2]");
  if (t <= 0.0) return 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto f = [&](double s) { return std::pow(1.0 + t - s, -1.5) * std::pow(T0 + s, -sigma); };
  // breakpoints cluster near s = t where the kernel peaks and near s = 0 where the weight does
  std::vector<double> cuts{0.0};
  for (double d = 1.0; d < t; d *= 4.0) cuts.push_back(t - d);
  for (double a = 1.0; a < t - 1.0; a *= 4.0) cuts.push_back(a);
  cuts.push_back(t);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += GK::integrate(f, cuts[i], cuts[i + 1], 12, 1e-13);
  return sum;
}

ConvolutionReport verify_convolution_bound(double T0, double sigma, double t_max, int points) {
  if (!(T0 >= 2.0)) throw InvalidParameter("T0 must be at least 2");
  if (!(sigma >= 0.0 && sigma <= 1.5)) throw InvalidParameter("sigma must lie in [0, 3/2]");
  auto sup = [&](double upper) {
    double c = 0.0;
    for (int j = 0; j < points; ++j) {
      const double t = 1e-2 * std::pow(upper / 1e-2, double(j) / (points - 1));
      c = std::max(c, convolution_integral(T0, sigma, t) * std::pow(T0 + t, sigma));
    }
    return c;
  };
  ConvolutionReport rep;
  rep.c_observed = sup(t_max);
  rep.c_extended = sup(10.0 * t_max);
  rep.stable = std::isfinite(rep.c_extended) && std::abs(rep.c_extended - rep.c_observed) <= 0.05 * rep.c_observed;
  return rep;
}

}  // namespace gplab
