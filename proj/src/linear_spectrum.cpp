#include "gplab/linear_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace gplab {

double SpectrumResult::resonance_gap() const {
  if (levels.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return 2.0 * levels[1].energy - levels[0].energy;
}

bool SpectrumResult::hypothesis_holds() const {
  if (levels.size() < 2) return false;
  return levels[0].energy < levels[1].energy && levels[1].energy < 0.0 && resonance_gap() > 0.0;
}

std::vector<Level> cluster_levels(const std::vector<double>& sorted, const std::vector<int>& channel, double gap_tol) {
  std::vector<Level> out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const int ell = channel.empty() ? -1 : channel[i];
    const int weight = ell >= 0 ? 2 * ell + 1 : 1;
    if (!out.empty()) {
      Level& last = out.back();
      const double scale = std::max({std::abs(last.energy), std::abs(sorted[i]), 1e-300});
      const bool same_channel = ell < 0 || last.ell == ell;
      if (std::abs(sorted[i] - sorted[last.members.back()]) < gap_tol * scale && (ell < 0 || !same_channel)) {
        last.members.push_back(static_cast<int>(i));
        last.multiplicity += weight;
        if (last.ell != ell) last.ell = -1;
        continue;
      }
      if (std::abs(sorted[i] - sorted[last.members.back()]) < gap_tol * scale && same_channel)
        throw DegeneracyError("accidental degeneracy inside one radial channel");
    }
    Level lv;
    lv.energy = sorted[i];
    lv.multiplicity = weight;
    lv.ell = ell;
    lv.members = {static_cast<int>(i)};
    out.push_back(lv);
  }
  for (auto& lv : out) {
    double s = 0.0;
    for (int m : lv.members) s += sorted[m];
    lv.energy = s / static_cast<double>(lv.members.size());
  }
  return out;
}

SpectrumResult radial_spectrum(const RadialGrid& grid, const Potential& V, const SpectrumOptions& opts) {
  const Vec v = sample_potential(grid, V);
  struct Entry {
    double e;
    int ell;
    Vec u;
  };
  std::vector<Entry> all;
  for (int ell = 0; ell <= opts.max_ell; ++ell) {
    const Tridiag T = radial_operator(grid, ell, v);
    const EigenPairs ep = tridiagonal_lowest(T.diag, T.off, opts.k_eigs, true);
    for (int j = 0; j < opts.k_eigs; ++j) {
      Vec u = ep.vectors.col(j);
      u /= std::sqrt(grid.h()) * u.norm();
      if (u.sum() < 0) u = -u;
      all.push_back({ep.values[j], ell, std::move(u)});
    }
  }
  std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.e < b.e; });
  all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(opts.k_eigs)));
  SpectrumResult out;
  for (auto& en : all) {
    out.eigenvalues.push_back(en.e);
    out.channel.push_back(en.ell);
    out.vectors.push_back(std::move(en.u));
    out.residuals.push_back(0.0);
  }
  out.levels = cluster_levels(out.eigenvalues, out.channel, opts.gap_tol);
  return out;
}

SpectrumResult box_spectrum(const BoxOps& ops, const SpectrumOptions& opts) {
  const long n = ops.grid().size();
  const int block = opts.k_eigs + 2;
  const double sigma = std::max(1.0, -ops.potential().minCoeff());
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd;
  Mat X(n, block);
  for (int c = 0; c < block; ++c) {
    Vec col(n);
    for (long i = 0; i < n; ++i) col[i] = nd(rng);
    // smooth random start: damp high frequencies
    X.col(c) = ops.shifted_inverse(ops.shifted_inverse(col, sigma), sigma);
  }
  auto even = [&](const Mat& Y) {
    Mat out(Y.rows(), Y.cols());
    for (long c = 0; c < Y.cols(); ++c) out.col(c) = ops.restrict_even(Y.col(c));
    return out;
  };
  auto A = [&](const Mat& Y) {
    Mat out(Y.rows(), Y.cols());
    for (long c = 0; c < Y.cols(); ++c) out.col(c) = ops.hamiltonian(Y.col(c));
    return out;
  };
  auto T = [&](const Mat& Y) {
    Mat out(Y.rows(), Y.cols());
    for (long c = 0; c < Y.cols(); ++c) out.col(c) = ops.shifted_inverse(Y.col(c), sigma);
    return out;
  };
  LobpcgOptions lo;
  lo.wanted = opts.k_eigs;
  lo.tol = opts.tol;
  lo.max_iter = opts.max_iter;
  const LobpcgResult res = lobpcg(A, BlockOp{}, T, even, X, lo);
  if (!res.converged) throw NoConvergence("box eigensolver did not reach tolerance");
  SpectrumResult out;
  const double scale = 1.0 / std::sqrt(ops.grid().cell());
  for (int j = 0; j < opts.k_eigs; ++j) {
    out.eigenvalues.push_back(res.values[j]);
    out.channel.push_back(-1);
    Vec u = res.vectors.col(j) * scale;
    if (u.sum() < 0) u = -u;
    out.vectors.push_back(std::move(u));
    out.residuals.push_back(res.residuals[j]);
  }
  out.levels = cluster_levels(out.eigenvalues, out.channel, opts.gap_tol);
  return out;
}

}  // namespace gplab
