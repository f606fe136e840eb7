#include "gplab/bound_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gplab/linalg.hpp"

namespace gplab {

namespace {

BandedLU<double> tridiagonal_lu(const Tridiag& T) {
  const int n = T.size();
  BandedLU<double> lu(n, 1, 1);
  for (int i = 0; i < n; ++i) {
    lu.set(i, i, T.diag[i]);
    if (i + 1 < n) {
      lu.set(i, i + 1, T.off[i]);
      lu.set(i + 1, i, T.off[i]);
    }
  }
  lu.factor();
  return lu;
}

Vec radial_residual(const RadialModel& model, double lambda, const Vec& u) {
  return radial_operator(model.grid, 0, model.w_minus(lambda, u)).apply(u);
}

double radial_norm(const RadialModel& model, const Vec& u) { return std::sqrt(radial_inner(model.grid, u, u, 0)); }

}  // namespace

Vec RadialModel::w_minus(double lambda, const Vec& phi_u) const {
  const Vec p = profile_from_reduced(grid, phi_u);
  Vec w(p.size());
  for (long i = 0; i < p.size(); ++i) w[i] = lambda + potential[i] - nl.f(p[i] * p[i]);
  return w;
}

Vec RadialModel::w_plus(double lambda, const Vec& phi_u) const {
  const Vec p = profile_from_reduced(grid, phi_u);
  Vec w = w_minus(lambda, phi_u);
  for (long i = 0; i < p.size(); ++i) w[i] -= 2.0 * nl.df(p[i] * p[i]) * p[i] * p[i];
  return w;
}

RadialModel RadialModel::extended(double r_max, const Potential& V) const {
  return RadialModel(grid.extended(r_max), V, nl);
}

Vec BoxModel::w_minus(double lambda, const Vec& phi) const {
  Vec w(phi.size());
  const Vec& V = ops.potential();
  for (long i = 0; i < phi.size(); ++i) w[i] = lambda + V[i] - nl.f(phi[i] * phi[i]);
  return w;
}

Vec BoxModel::w_plus(double lambda, const Vec& phi) const {
  Vec w = w_minus(lambda, phi);
  for (long i = 0; i < phi.size(); ++i) w[i] -= 2.0 * nl.df(phi[i] * phi[i]) * phi[i] * phi[i];
  return w;
}

Vec BoxModel::apply_minus(double lambda, const Vec& phi, const Vec& u) const {
  return ops.laplacian_neg(u) + w_minus(lambda, phi).cwiseProduct(u);
}

Vec BoxModel::apply_plus(double lambda, const Vec& phi, const Vec& u) const {
  return ops.laplacian_neg(u) + w_plus(lambda, phi).cwiseProduct(u);
}

double bifurcation_amplitude(double lambda, double e0, double g, double quartic) {
  const double d2 = (lambda + e0) / (-g * quartic);
  if (!(d2 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(d2);
}

Vec radial_lambda_derivative(const RadialModel& model, double lambda, const Vec& phi) {
  const auto lu = tridiagonal_lu(radial_operator(model.grid, 0, model.w_plus(lambda, phi)));
  return -lu.solve(phi);
}

BranchPoint solve_radial_bound_state(const RadialModel& model, double lambda, const Vec& guess, double tol,
                                     int max_iter) {
  Vec u = guess;
  Vec F = radial_residual(model, lambda, u);
  double res = radial_norm(model, F);
  int it = 0;
  for (; it < max_iter && res > tol; ++it) {
    const auto lu = tridiagonal_lu(radial_operator(model.grid, 0, model.w_plus(lambda, u)));
    const Vec step = lu.solve(F);
    double t = 1.0;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      const Vec trial = u - t * step;
      const Vec Ft = radial_residual(model, lambda, trial);
      const double rt = radial_norm(model, Ft);
      if (rt < res || ls == 29) {
        u = trial;
        F = Ft;
        res = rt;
        break;
      }
    }
  }
  if (!(res <= tol)) throw NoConvergence("radial Newton iteration did not converge at lambda = " + std::to_string(lambda));
  if (u.sum() < 0) u = -u;
  BranchPoint bp;
  bp.lambda = lambda;
  bp.phi = u;
  bp.dphi = radial_lambda_derivative(model, lambda, u);
  bp.mass = radial_inner(model.grid, u, u, 0);
  bp.dmass = 2.0 * radial_inner(model.grid, u, bp.dphi, 0);
  bp.residual = res;
  bp.iterations = it;
  return bp;
}

namespace {

// Walks from just beyond the bifurcation point to lambda_target, returning the solution there.
template <class Solve>
std::vector<BranchPoint> march(double e0, double g, double quartic, const Vec& lin, double norm_lin,
                               const BranchOptions& opts, Solve&& solve) {
  const double lam_b = -e0;
  const double a = opts.lambda_range[0], b = opts.lambda_range[1];
  if (opts.steps < 2) throw InvalidParameter("branch needs at least two samples");
  const double side = g < 0 ? 1.0 : -1.0;  // focusing branches lie above |e0|
  auto on_side = [&](double lam) { return side * (lam - lam_b) > 0.0; };
  if (!on_side(a) || !on_side(b))
    throw HypothesisViolated("lambda_range lies on the side of the bifurcation point where no branch exists");
  const double start = std::abs(a - lam_b) < std::abs(b - lam_b) ? a : b;
  const double end = start == a ? b : a;
  const double dl = (end - start) / (opts.steps - 1);

  // approach the first sample from the bifurcation point
  double lam = lam_b + side * std::min(std::abs(start - lam_b), std::max(1e-3 * std::abs(lam_b), 1e-6));
  Vec phi = bifurcation_amplitude(lam, e0, g, quartic) / norm_lin * lin;
  BranchPoint cur = solve(lam, phi);
  const double h0 = std::max(std::abs(dl), 1e-3);
  while (std::abs(lam - start) > 0.0) {
    const double next = std::abs(start - lam) <= h0 ? start : lam + (start > lam ? h0 : -h0);
    Vec pred = cur.phi + (next - lam) * cur.dphi;
    cur = solve(next, pred);
    lam = next;
  }
  std::vector<BranchPoint> out{cur};
  for (int s = 1; s < opts.steps; ++s) {
    const double next = start + s * dl;
    Vec pred = out.back().phi + (next - out.back().lambda) * out.back().dphi;
    out.push_back(solve(next, pred));
  }
  if (dl < 0) std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<BranchPoint> continue_radial_branch(const RadialModel& model, const BranchOptions& opts) {
  const Tridiag H = radial_operator(model.grid, 0, model.potential);
  const EigenPairs ep = tridiagonal_lowest(H.diag, H.off, 1, true);
  const double e0 = ep.values[0];
  if (!(e0 < 0.0)) throw HypothesisViolated("no negative ground state for the linear operator");
  Vec lin = ep.vectors.col(0);
  if (lin.sum() < 0) lin = -lin;
  const double nlin = std::sqrt(radial_inner(model.grid, lin, lin, 0));
  const Vec prof = profile_from_reduced(model.grid, lin) / nlin;
  const double quartic = kFourPi * model.grid.h() * (prof.array().square() * (lin / nlin).array().square()).sum();
  auto solve = [&](double lam, const Vec& guess) {
    return solve_radial_bound_state(model, lam, guess, opts.newton_tol, opts.max_newton);
  };
  return march(e0, model.nl.g(), quartic, lin, nlin, opts, solve);
}

Vec box_lambda_derivative(const BoxModel& model, double lambda, const Vec& phi, double tol) {
  const Vec wp = model.w_plus(lambda, phi);
  auto A = [&](const Vec& u) { return model.ops.restrict_even(model.ops.laplacian_neg(u) + wp.cwiseProduct(u)); };
  auto M = [&](const Vec& u) { return model.ops.shifted_inverse(u, lambda); };
  Vec x = Vec::Zero(phi.size());
  const Vec rhs = -model.ops.restrict_even(phi);
  const KrylovResult kr = gmres(A, rhs, x, M, tol, 200, 4000);
  if (!kr.converged) throw NoConvergence("GMRES for d phi / d lambda did not converge");
  return x;
}

BranchPoint solve_box_bound_state(const BoxModel& model, double lambda, const Vec& guess, double tol, int max_iter) {
  const BoxOps& ops = model.ops;
  auto residual = [&](const Vec& u) { return ops.restrict_even(model.apply_minus(lambda, u, u)); };
  Vec u = ops.restrict_even(guess);
  Vec F = residual(u);
  double res = ops.norm(F);
  int it = 0;
  for (; it < max_iter && res > tol; ++it) {
    const Vec wp = model.w_plus(lambda, u);
    auto A = [&](const Vec& v) { return ops.restrict_even(ops.laplacian_neg(v) + wp.cwiseProduct(v)); };
    auto M = [&](const Vec& v) { return ops.shifted_inverse(v, lambda); };
    Vec step = Vec::Zero(u.size());
    const double ktol = std::max(1e-13, std::min(1e-4, 0.1 * tol / std::max(res, 1e-300)));
    gmres(A, F, step, M, ktol, 200, 4000);
    double t = 1.0;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      const Vec trial = u - t * step;
      const Vec Ft = residual(trial);
      const double rt = ops.norm(Ft);
      if (rt < res || ls == 29) {
        u = trial;
        F = Ft;
        res = rt;
        break;
      }
    }
  }
  if (!(res <= tol)) throw NoConvergence("box Newton iteration did not converge at lambda = " + std::to_string(lambda));
  if (u.sum() < 0) u = -u;
  BranchPoint bp;
  bp.lambda = lambda;
  bp.phi = u;
  bp.dphi = box_lambda_derivative(model, lambda, u);
  bp.mass = ops.inner(u, u);
  bp.dmass = 2.0 * ops.inner(u, bp.dphi);
  bp.residual = res;
  bp.iterations = it;
  return bp;
}

std::vector<BranchPoint> continue_box_branch(const BoxModel& model, const BranchOptions& opts,
                                             const SpectrumResult* linear) {
  SpectrumResult spectrum;
  if (!linear) {
    SpectrumOptions so;
    so.k_eigs = 1;
    spectrum = box_spectrum(model.ops, so);
    linear = &spectrum;
  }
  const double e0 = linear->eigenvalues.front();
  if (!(e0 < 0.0)) throw HypothesisViolated("no negative ground state for the linear operator");
  Vec lin = linear->vectors.front();
  const double nlin = model.ops.norm(lin);
  const Vec unit = lin / nlin;
  const double quartic = model.ops.grid().cell() * unit.array().pow(4).sum();
  auto solve = [&](double lam, const Vec& guess) {
    return solve_box_bound_state(model, lam, guess, opts.newton_tol, opts.max_newton);
  };
  return march(e0, model.nl.g(), quartic, lin, nlin, opts, solve);
}

}  // namespace gplab
