#pragma once

#include <array>
#include <variant>
#include <vector>

namespace gplab {

using Point = std::array<double, 3>;

// Local nonlinearity f(s) = -g s entering  i psi_t = -Lap psi + (V - f(|psi|^2)) psi.
// g < 0 is focusing.
class Nonlinearity {
 public:
  explicit Nonlinearity(double g = 0.0) : g_(g) {}

  double g() const { return g_; }
  double f(double s) const { return -g_ * s; }
  double df(double) const { return -g_; }
  double d2f(double) const { return 0.0; }
  // F(u) = 1/2 int_0^u f
  double primitive(double u) const { return -0.25 * g_ * u * u; }

 private:
  double g_;
};

struct HarmonicWell {
  double omega = 1.0;  // V = omega^2 |x|^2
};

struct GaussianWell {
  double depth = 1.0;  // V = -depth exp(-|x|^2 / width^2)
  double width = 1.0;
};

struct DoubleWell {
  double m = 1.0;
  double q = 1.0;
  double lambda_g = 1.0;
};

// Radially symmetric tabulated profile, linear interpolation, zero beyond the table.
struct RadialProfile {
  std::vector<double> r;
  std::vector<double> v;
};

struct ZeroPotential {};

class Potential {
 public:
  using Kind = std::variant<ZeroPotential, HarmonicWell, GaussianWell, DoubleWell, RadialProfile>;

  Potential() = default;
  explicit Potential(Kind kind);

  static Potential double_well(double m, double q, double lambda_g);

  bool is_radial() const;
  double at(const Point& x) const;
  // Throws GeometryMismatch for non radial potentials.
  double radial(double r) const;
  const Kind& kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace gplab
