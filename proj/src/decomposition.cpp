#include "gplab/decomposition.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace gplab {

ManifoldTable::ManifoldTable(std::vector<ManifoldSample> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) throw InvalidParameter("manifold table needs at least two samples");
  std::sort(samples_.begin(), samples_.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  const std::size_t N = samples_.front().xi.size();
  for (const auto& s : samples_)
    if (s.xi.size() != N || s.eta.size() != N) throw InvalidParameter("manifold samples disagree on the mode count");
}

ManifoldSample ManifoldTable::at(double lambda) const {
  if (lambda < lambda_min() || lambda > lambda_max())
    throw NumericalError("lambda " + std::to_string(lambda) + " left the tabulated branch");
  const int n = static_cast<int>(samples_.size());
  const int order = std::min(4, n);
  int i = 0;
  while (i + 1 < n - 1 && samples_[i + 1].lambda <= lambda) ++i;
  int first = std::clamp(i - (order / 2 - 1), 0, n - order);
  std::vector<double> w(order, 1.0);
  for (int a = 0; a < order; ++a)
    for (int b = 0; b < order; ++b)
      if (a != b)
        w[a] *= (lambda - samples_[first + b].lambda) / (samples_[first + a].lambda - samples_[first + b].lambda);

  ManifoldSample out;
  out.lambda = lambda;
  const auto& s0 = samples_[first];
  out.phi = Vec::Zero(s0.phi.size());
  out.dphi = Vec::Zero(s0.dphi.size());
  out.xi.assign(s0.xi.size(), Vec::Zero(s0.phi.size()));
  out.eta.assign(s0.eta.size(), Vec::Zero(s0.phi.size()));
  for (int a = 0; a < order; ++a) {
    const auto& s = samples_[first + a];
    out.E += w[a] * s.E;
    out.phi += w[a] * s.phi;
    out.dphi += w[a] * s.dphi;
    for (std::size_t k = 0; k < s.xi.size(); ++k) {
      out.xi[k] += w[a] * s.xi[k];
      out.eta[k] += w[a] * s.eta[k];
    }
  }
  return out;
}

Decomposer::Decomposer(ManifoldTable table, Vec weights, Vec radius, double nu)
    : table_(std::move(table)), w_(std::move(weights)), radius_(std::move(radius)) {
  if (w_.size() != table_.samples().front().phi.size() || radius_.size() != w_.size())
    throw InvalidParameter("decomposer weights do not match the manifold fields");
  decay_ = (1.0 + radius_.array().square()).pow(-nu);
}

cplx Decomposer::inner(const CVec& a, const CVec& b) const {
  return (w_.array() * a.array() * b.conjugate().array()).sum();
}

Eigen::VectorXd Decomposer::conditions(const CVec& psi, const Eigen::VectorXd& p, CVec* R) const {
  const int N = table_.modes();
  const ManifoldSample s = table_.at(p[0]);
  CVec r = std::polar(1.0, -p[1]) * psi;
  r -= s.phi.cast<cplx>();
  for (int n = 0; n < N; ++n) {
    r -= p[2 + n] * s.xi[n].cast<cplx>();
    r -= cplx(0.0, p[2 + N + n]) * s.eta[n].cast<cplx>();
  }
  auto dot = [&](const Vec& f) { return (w_.array() * r.array() * f.array()).sum(); };
  Eigen::VectorXd F(2 + 2 * N);
  F[0] = dot(s.phi).real();
  F[1] = dot(s.dphi).imag();
  for (int n = 0; n < N; ++n) {
    F[2 + n] = dot(s.eta[n]).real();
    F[2 + N + n] = dot(s.xi[n]).imag();
  }
  if (R) *R = std::move(r);
  return F;
}

ModulationState Decomposer::decompose(const CVec& psi, double lambda_guess, double theta_guess, const CVec& z_guess,
                                      double tol, int max_iter) const {
  const int N = table_.modes();
  if (z_guess.size() != N) throw InvalidParameter("amplitude guess has the wrong dimension");
  const int m = 2 + 2 * N;
  Eigen::VectorXd p(m);
  p[0] = lambda_guess;
  p[1] = theta_guess;
  for (int n = 0; n < N; ++n) {
    p[2 + n] = z_guess[n].real();
    p[2 + N + n] = z_guess[n].imag();
  }
  const double scale = std::sqrt(std::max(inner(psi, psi).real(), 1e-300));
  ModulationState st;
  // Unknown scales differ (lambda moves the whole profile), so the Jacobian uses per-unknown steps.
  const double step = 1e-6;
  try {
    Eigen::VectorXd F = conditions(psi, p, nullptr);
    for (int it = 1; it <= max_iter; ++it) {
      st.iterations = it;
      Mat J(m, m);
      for (int c = 0; c < m; ++c) {
        Eigen::VectorXd hi = p, lo = p;
        hi[c] += step;
        lo[c] -= step;
        J.col(c) = (conditions(psi, hi, nullptr) - conditions(psi, lo, nullptr)) / (2.0 * step);
      }
      const Eigen::VectorXd dp = J.fullPivLu().solve(-F);
      if (!dp.allFinite()) break;
      p += dp;
      F = conditions(psi, p, nullptr);
      if (F.cwiseAbs().maxCoeff() <= tol * scale && dp.cwiseAbs().maxCoeff() < 1e-6) {
        st.ok = true;
        break;
      }
    }
    CVec R;
    F = conditions(psi, p, &R);
    st.orthogonality = F.cwiseAbs().maxCoeff() / scale;
    st.ok = st.ok && st.orthogonality <= tol;
    st.r_norm = std::sqrt(inner(R, R).real());
    st.r_weighted = std::sqrt((w_.array() * decay_.array() * R.array().abs2()).sum());
  } catch (const NumericalError&) {
    st.ok = false;
  }
  st.lambda = p[0];
  st.theta = p[1];
  st.z.resize(N);
  for (int n = 0; n < N; ++n) st.z[n] = cplx(p[2 + n], p[2 + N + n]);
  return st;
}

}  // namespace gplab
