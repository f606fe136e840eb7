#include "gplab/linalg.hpp"

#include <lapacke.h>

#include <algorithm>

namespace gplab {

EigenPairs tridiagonal_lowest(const Vec& diag, const Vec& off, int k, bool want_vectors) {
  const lapack_int n = static_cast<lapack_int>(diag.size());
  if (k < 1 || k > n || off.size() != n - 1) throw InvalidParameter("tridiagonal_lowest: bad sizes");
  Vec d = diag, e(n);
  e.head(n - 1) = off;
  e[n - 1] = 0.0;
  lapack_int m = 0;
  Vec w(n);
  Mat z(want_vectors ? n : 1, want_vectors ? k : 1);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(k));
  const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'I', n, d.data(), e.data(), 0.0,
                                         0.0, 1, k, 0.0, &m, w.data(), z.data(), want_vectors ? n : 1,
                                         isuppz.data());
  if (info != 0 || m != k) throw NumericalError("dstevr failed");
  EigenPairs out;
  out.values = w.head(k);
  if (want_vectors) out.vectors = z;
  return out;
}

template <class T>
BandedLU<T>::BandedLU(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
      ab_(static_cast<std::size_t>(ldab_) * n, T(0)), ipiv_(n) {}

template <class T>
T& BandedLU<T>::at(int i, int j) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i - j > kl_ || j - i > ku_)
    throw InvalidParameter("BandedLU: entry outside band");
  return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
}

template <class T>
void BandedLU<T>::set(int i, int j, T value) {
  at(i, j) = value;
  factored_ = false;
}

template <class T>
void BandedLU<T>::add(int i, int j, T value) {
  at(i, j) += value;
  factored_ = false;
}

template <class T>
void BandedLU<T>::factor() {
  lapack_int info;
  if constexpr (std::is_same_v<T, double>)
    info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, ab_.data(), ldab_, ipiv_.data());
  else
    info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, reinterpret_cast<lapack_complex_double*>(ab_.data()),
                          ldab_, ipiv_.data());
  if (info != 0) throw NumericalError("banded LU: singular matrix");
  factored_ = true;
}

template <class T>
void BandedLU<T>::solve(Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& rhs) const {
  if (!factored_) throw NumericalError("banded LU used before factor()");
  lapack_int info;
  const lapack_int nrhs = static_cast<lapack_int>(rhs.cols());
  if constexpr (std::is_same_v<T, double>)
    info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, nrhs, ab_.data(), ldab_, ipiv_.data(), rhs.data(), n_);
  else
    info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, nrhs,
                          reinterpret_cast<const lapack_complex_double*>(ab_.data()), ldab_, ipiv_.data(),
                          reinterpret_cast<lapack_complex_double*>(rhs.data()), n_);
  if (info != 0) throw NumericalError("banded solve failed");
}

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, 1> BandedLU<T>::solve(const Eigen::Matrix<T, Eigen::Dynamic, 1>& rhs) const {
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> m = rhs;
  solve(m);
  return m.col(0);
}

template class BandedLU<double>;
template class BandedLU<std::complex<double>>;

BandCholesky::BandCholesky(int n, int kd) : n_(n), kd_(kd), ab_(static_cast<std::size_t>(kd + 1) * n, 0.0) {}

void BandCholesky::set(int i, int j, double value) {
  if (j < i || j - i > kd_ || j >= n_) throw InvalidParameter("BandCholesky: entry outside band");
  ab_[static_cast<std::size_t>(j) * (kd_ + 1) + (kd_ + i - j)] = value;
  factored_ = false;
}

void BandCholesky::factor() {
  const lapack_int info = LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'U', n_, kd_, ab_.data(), kd_ + 1);
  if (info != 0) throw NumericalError("band Cholesky: matrix not positive definite");
  factored_ = true;
}

Vec BandCholesky::solve(const Vec& rhs) const {
  if (!factored_) throw NumericalError("band Cholesky used before factor()");
  Vec x = rhs;
  const lapack_int info = LAPACKE_dpbtrs(LAPACK_COL_MAJOR, 'U', n_, kd_, 1, ab_.data(), kd_ + 1, x.data(), n_);
  if (info != 0) throw NumericalError("band Cholesky solve failed");
  return x;
}

double BandCholesky::factor_entry(int i, int j) const {
  if (j < i || j - i > kd_) return 0.0;
  return ab_[static_cast<std::size_t>(j) * (kd_ + 1) + (kd_ + i - j)];
}

}  // namespace gplab
