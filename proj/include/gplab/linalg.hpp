#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "gplab/error.hpp"
#include "gplab/grid.hpp"

namespace gplab {

using Mat = Eigen::MatrixXd;

struct EigenPairs {
  Vec values;
  Mat vectors;  // columns
};

// Lowest k eigenpairs of the symmetric tridiagonal matrix (diag, off).
EigenPairs tridiagonal_lowest(const Vec& diag, const Vec& off, int k, bool want_vectors = true);

// Dense-free LU of a general band matrix, LAPACK storage.
template <class T>
class BandedLU {
 public:
  BandedLU(int n, int kl, int ku);
  int size() const { return n_; }
  void set(int i, int j, T value);
  void add(int i, int j, T value);
  void factor();
  // Solves in place; several right hand sides allowed as columns.
  void solve(Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& rhs) const;
  Eigen::Matrix<T, Eigen::Dynamic, 1> solve(const Eigen::Matrix<T, Eigen::Dynamic, 1>& rhs) const;

 private:
  T& at(int i, int j);
  int n_, kl_, ku_, ldab_;
  std::vector<T> ab_;
  std::vector<int> ipiv_;
  bool factored_ = false;
};

extern template class BandedLU<double>;
extern template class BandedLU<std::complex<double>>;

// Cholesky of a symmetric positive definite band matrix (upper bandwidth kd).
class BandCholesky {
 public:
  BandCholesky(int n, int kd);
  void set(int i, int j, double value);  // j >= i, j - i <= kd
  void factor();                          // throws NumericalError if not positive definite
  Vec solve(const Vec& rhs) const;
  // Factor entries U(i, j) with A = U^T U.
  double factor_entry(int i, int j) const;
  int bandwidth() const { return kd_; }
  int size() const { return n_; }

 private:
  int n_, kd_;
  std::vector<double> ab_;
  bool factored_ = false;
};

struct KrylovResult {
  int iterations = 0;
  double residual = 0.0;  // relative
  bool converged = false;
};

// Right preconditioned restarted GMRES. V is an Eigen column vector type.
template <class V, class Op, class Prec>
KrylovResult gmres(const Op& apply, const V& b, V& x, const Prec& precond, double tol, int restart, int max_iter) {
  using S = typename V::Scalar;
  KrylovResult out;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero(b.size());
    out.converged = true;
    return out;
  }
  if (x.size() != b.size()) x = V::Zero(b.size());
  std::vector<V> basis;
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> H(restart + 1, restart);
  std::vector<S> cs(restart), sn(restart), g(restart + 1);
  int total = 0;
  while (total < max_iter) {
    V r = b - apply(x);
    double beta = r.norm();
    out.residual = beta / bnorm;
    if (out.residual < tol) {
      out.converged = true;
      break;
    }
    basis.assign(1, r / beta);
    H.setZero();
    std::fill(g.begin(), g.end(), S(0));
    g[0] = beta;
    int j = 0;
    for (; j < restart && total < max_iter; ++j, ++total) {
      V w = apply(precond(basis[j]));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = basis[i].dot(w);
        w -= H(i, j) * basis[i];
      }
      for (int i = 0; i <= j; ++i) {  // second pass for stability
        const S c = basis[i].dot(w);
        H(i, j) += c;
        w -= c * basis[i];
      }
      const double hn = w.norm();
      H(j + 1, j) = hn;
      for (int i = 0; i < j; ++i) {
        const S t = Eigen::numext::conj(cs[i]) * H(i, j) + Eigen::numext::conj(sn[i]) * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double d = std::hypot(std::abs(H(j, j)), hn);
      if (d == 0.0) {
        cs[j] = 1;
        sn[j] = 0;
      } else {
        cs[j] = H(j, j) / d;
        sn[j] = hn / d;
      }
      H(j, j) = Eigen::numext::conj(cs[j]) * H(j, j) + Eigen::numext::conj(sn[j]) * H(j + 1, j);
      H(j + 1, j) = 0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = Eigen::numext::conj(cs[j]) * g[j];
      out.residual = std::abs(g[j + 1]) / bnorm;
      if (hn == 0.0 || out.residual < tol) {
        ++j;
        ++total;
        break;
      }
      basis.push_back(w / hn);
    }
    std::vector<S> y(j);
    for (int i = j - 1; i >= 0; --i) {
      S s = g[i];
      for (int k = i + 1; k < j; ++k) s -= H(i, k) * y[k];
      y[i] = s / H(i, i);
    }
    V update = V::Zero(b.size());
    for (int i = 0; i < j; ++i) update += y[i] * basis[i];
    x += precond(update);
    if (out.residual < tol) {
      out.residual = (b - apply(x)).norm() / bnorm;
      if (out.residual < 10 * tol) {
        out.converged = true;
        break;
      }
    }
  }
  out.iterations = total;
  return out;
}

}  // namespace gplab
