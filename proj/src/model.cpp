#include "gplab/model.hpp"

#include <algorithm>
#include <cmath>

#include "gplab/error.hpp"

namespace gplab {

namespace {

double gauss_bump(const DoubleWell& w, double x, double y, double z) {
  return w.q * std::pow(w.lambda_g, -1.5) * std::exp(-(x * x + y * y + z * z) / w.lambda_g);
}

double double_well_at(const DoubleWell& w, const Point& p) {
  double sum = 0.0;
  for (int k = 0; k < 3; ++k) {
    Point plus = p, minus = p;
    plus[k] += w.m;
    minus[k] -= w.m;
    sum += 0.5 * (gauss_bump(w, plus[0], plus[1], plus[2]) + gauss_bump(w, minus[0], minus[1], minus[2]));
  }
  return -sum / 3.0;
}

double profile_at(const RadialProfile& p, double r) {
  if (p.r.empty() || r > p.r.back()) return 0.0;
  if (r <= p.r.front()) return p.v.front();
  auto it = std::upper_bound(p.r.begin(), p.r.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - p.r.begin());
  const double t = (r - p.r[i - 1]) / (p.r[i] - p.r[i - 1]);
  return (1.0 - t) * p.v[i - 1] + t * p.v[i];
}

}  // namespace

Potential::Potential(Kind kind) : kind_(std::move(kind)) {
  if (const auto* w = std::get_if<DoubleWell>(&kind_)) {
    if (!(w->lambda_g > 0.0) || !(w->m >= 0.0) || !std::isfinite(w->q))
      throw InvalidParameter("double well needs lambda_g > 0, m >= 0 and finite q");
  }
  if (const auto* g = std::get_if<GaussianWell>(&kind_)) {
    if (!(g->width > 0.0)) throw InvalidParameter("gaussian well needs width > 0");
  }
  if (const auto* p = std::get_if<RadialProfile>(&kind_)) {
    if (p->r.size() != p->v.size() || p->r.size() < 2)
      throw InvalidParameter("radial profile needs matching r and v arrays with at least two entries");
    if (!std::is_sorted(p->r.begin(), p->r.end()) || p->r.front() < 0.0)
      throw InvalidParameter("radial profile abscissae must be sorted and non negative");
  }
}

Potential Potential::double_well(double m, double q, double lambda_g) {
  return Potential(DoubleWell{m, q, lambda_g});
}

bool Potential::is_radial() const { return !std::holds_alternative<DoubleWell>(kind_); }

double Potential::radial(double r) const {
  struct Visitor {
    double r;
    double operator()(const ZeroPotential&) const { return 0.0; }
    double operator()(const HarmonicWell& w) const { return w.omega * w.omega * r * r; }
    double operator()(const GaussianWell& w) const { return -w.depth * std::exp(-r * r / (w.width * w.width)); }
    double operator()(const DoubleWell&) const {
      throw GeometryMismatch("double well potential is not radially symmetric");
    }
    double operator()(const RadialProfile& p) const { return profile_at(p, r); }
  };
  return std::visit(Visitor{r}, kind_);
}

double Potential::at(const Point& x) const {
  if (const auto* w = std::get_if<DoubleWell>(&kind_)) return double_well_at(*w, x);
  return radial(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
}

}  // namespace gplab
