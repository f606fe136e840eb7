#include "gplab/normal_form.hpp"

#include <array>
#include <cmath>

namespace gplab {

namespace {

double weight_xi(const Nonlinearity& nl, double phi) {
  const double s = phi * phi;
  return phi * (1.5 * nl.df(s) + nl.d2f(s) * s);
}

double weight_eta(const Nonlinearity& nl, double phi) { return 0.5 * nl.df(phi * phi) * phi; }

}  // namespace

Mat upsilon_matrix(const RadialLinearization& lin) {
  const auto& b = lin.basis();
  if (b.xi.empty()) throw InvalidParameter("upsilon needs a neutral basis");
  const auto& g = lin.model().grid;
  const auto& nl = lin.model().nl;
  const Vec phi = profile_from_reduced(g, lin.bound().phi);
  const Vec& u = b.xi[0];
  const Vec& v = b.eta[0];
  const Vec& d = lin.bound().dphi;
  double s = 0.0;
  for (int i = 0; i < g.size(); ++i)
    s += (weight_xi(nl, phi[i]) * u[i] * u[i] + weight_eta(nl, phi[i]) * v[i] * v[i]) * d[i] / g.r(i);
  const double c = radial_inner(g, lin.bound().phi, d, 0);
  if (c == 0.0) throw HypothesisViolated("slope <phi, dphi> vanishes");
  return Mat::Identity(3, 3) * (angular_weight(1) * g.h() * s / c);
}

Mat upsilon_matrix(const BoxLinearization& lin) {
  const auto& b = lin.basis();
  if (b.xi.empty()) throw InvalidParameter("upsilon needs a neutral basis");
  const auto& ops = lin.model().ops;
  const auto& nl = lin.model().nl;
  const Vec& phi = lin.bound().phi;
  const Vec& d = lin.bound().dphi;
  Vec w1(phi.size()), w2(phi.size());
  for (long i = 0; i < phi.size(); ++i) {
    w1[i] = weight_xi(nl, phi[i]) * d[i];
    w2[i] = weight_eta(nl, phi[i]) * d[i];
  }
  const double c = ops.inner(phi, d);
  if (c == 0.0) throw HypothesisViolated("slope <phi, dphi> vanishes");
  const int N = b.N;
  Mat A(N, N);
  for (int m = 0; m < N; ++m)
    for (int n = 0; n < N; ++n)
      A(m, n) = (ops.inner(w1.cwiseProduct(b.xi[m]), b.xi[n]) + ops.inner(w2.cwiseProduct(b.eta[m]), b.eta[n])) / c;
  return 0.5 * (A + A.transpose());
}

double upsilon11(const Mat& A, const CVec& z) { return (z.transpose() * A * z.conjugate())(0, 0).real(); }

CVec NormalFormModel::rhs(const CVec& z) const {
  const CMat Zm = tensor.Z(z);
  const CVec w = skew ? CVec(Zm * z) : CVec(0.5 * (Zm + Zm.adjoint()) * z);
  return cplx(0.0, -E) * z - coupling * w;
}

namespace {

// Allocation-free evaluation of -coupling * (Gamma + Lambda_Z)(w) w for N <= 8.
class SlowField {
 public:
  static constexpr int kMax = 8;
  using State = std::array<cplx, kMax>;

  explicit SlowField(const NormalFormModel& m) : model_(m), N_(m.N()) {
    if (N_ > kMax) throw InvalidParameter("normal form supports at most 8 modes");
  }

  void operator()(const State& w, State& out) const {
    std::array<cplx, kMax * kMax> P, Z;
    for (int m = 0; m < N_; ++m)
      for (int n = 0; n < N_; ++n) P[m * N_ + n] = w[m] * std::conj(w[n]);
    const auto& C = model_.tensor.C;
    const int NN = N_ * N_;
    for (int kl = 0; kl < NN; ++kl) {
      cplx s = 0.0;
      const cplx* c = C.data() + static_cast<std::size_t>(kl) * NN;
      for (int mn = 0; mn < NN; ++mn) s += P[mn] * c[mn];
      Z[kl] = s;
    }
    for (int k = 0; k < N_; ++k) {
      cplx s = 0.0;
      for (int l = 0; l < N_; ++l) {
        const cplx a = model_.skew ? Z[k * N_ + l] : 0.5 * (Z[k * N_ + l] + std::conj(Z[l * N_ + k]));
        s += a * w[l];
      }
      out[k] = -model_.coupling * s;
    }
  }

  double upsilon(const State& w) const {
    if (model_.upsilon.rows() != N_) return 0.0;
    double s = 0.0;
    for (int m = 0; m < N_; ++m)
      for (int n = 0; n < N_; ++n) s += model_.upsilon(m, n) * (w[m] * std::conj(w[n])).real();
    return s;
  }

  int size() const { return N_; }

 private:
  const NormalFormModel& model_;
  int N_;
};

}  // namespace

Trajectory integrate_normal_form(const NormalFormModel& model, const CVec& z0, double gamma0, double T, double dt,
                                 int samples) {
  if (z0.size() != model.N()) throw InvalidParameter("initial amplitude has the wrong dimension");
  if (z0.norm() > 0.5) throw InvalidParameter("initial amplitude |z0| exceeds 0.5");
  if (!(dt > 0.0) || dt > 0.1 / model.E) throw InvalidParameter("time step must satisfy 0 < dt <= 0.1 / E");
  if (!(T > dt) || samples < 2) throw InvalidParameter("invalid integration window");
  using State = SlowField::State;
  const SlowField field(model);
  const int N = field.size();
  std::vector<double> marks;
  for (int j = 0; j < samples; ++j) marks.push_back(dt * std::pow(T / dt, double(j) / (samples - 1)));

  // The rotation -iE z is taken exactly: w = e^{iEt} z obeys the autonomous slow equation because the
  // nonlinear term commutes with global phase.
  State w{}, k1, k2, k3, k4, tmp;
  for (int i = 0; i < N; ++i) w[i] = z0[i];
  auto axpy = [&](const State& a, double h, const State& b) {
    for (int i = 0; i < N; ++i) tmp[i] = a[i] + h * b[i];
    return tmp;
  };
  Trajectory out;
  double g = gamma0, t = 0.0;
  auto record = [&] {
    CVec z(N);
    const cplx rot = std::polar(1.0, -model.E * t);
    for (int i = 0; i < N; ++i) z[i] = rot * w[i];
    out.t.push_back(t);
    out.norm.push_back(z.norm());
    out.z.push_back(std::move(z));
    out.gamma.push_back(g);
  };
  const double limit = 10.0 * std::max(z0.norm(), 1e-300);
  record();
  for (double mark : marks) {
    while (t < mark) {
      const double h = std::min(dt, mark - t);
      field(w, k1);
      const double u1 = field.upsilon(w);
      const State w2 = axpy(w, 0.5 * h, k1);
      field(w2, k2);
      const State w3 = axpy(w, 0.5 * h, k2);
      field(w3, k3);
      const State w4 = axpy(w, h, k3);
      field(w4, k4);
      g += h / 6.0 * (u1 + 2.0 * field.upsilon(w2) + 2.0 * field.upsilon(w3) + field.upsilon(w4));
      double norm2 = 0.0;
      for (int i = 0; i < N; ++i) {
        w[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        norm2 += std::norm(w[i]);
      }
      t = (mark - t <= dt) ? mark : t + h;
      if (!std::isfinite(norm2) || std::sqrt(norm2) > limit)
        throw NumericalError("normal form amplitude blew up at t = " + std::to_string(t));
    }
    record();
  }
  return out;
}

FgrTensor isotropic_tensor(int N, double g0) {
  FgrTensor T;
  T.N = N;
  T.C.assign(static_cast<std::size_t>(N) * N * N * N, 0.0);
  for (int k = 0; k < N; ++k)
    for (int m = 0; m < N; ++m) T.at(k, k, m, m) = g0;
  T.scale = g0;
  return T;
}

}  // namespace gplab
