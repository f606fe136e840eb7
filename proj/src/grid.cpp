#include "gplab/grid.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "gplab/error.hpp"

namespace gplab {

RadialGrid::RadialGrid(double r_max, int n) : r_max_(r_max), n_(n) {
  if (!(r_max > 0.0) || n < 16) throw InvalidParameter("radial grid needs r_max > 0 and n >= 16");
  h_ = r_max / (n + 1);
}

Vec RadialGrid::radii() const {
  Vec r(n_);
  for (int i = 0; i < n_; ++i) r[i] = this->r(i);
  return r;
}

RadialGrid RadialGrid::extended(double new_r_max) const {
  if (new_r_max <= r_max_) return *this;
  const int n = static_cast<int>(std::lround(new_r_max / h_)) - 1;
  RadialGrid g(*this);
  g.n_ = n;
  g.r_max_ = (n + 1) * h_;
  return g;
}

BoxGrid::BoxGrid(double half_width, int n) : L_(half_width), n_(n) {
  if (!(half_width > 0.0) || n < 4 || n % 2 != 0)
    throw InvalidParameter("box grid needs L > 0 and an even n >= 4");
  h_ = 2.0 * L_ / n_;
  k2_.resize(static_cast<std::size_t>(size()));
  const double dk = std::numbers::pi / L_;
  std::vector<double> k(n_);
  for (int i = 0; i < n_; ++i) k[i] = dk * (i <= n_ / 2 ? i : i - n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int l = 0; l < n_; ++l) k2_[index(i, j, l)] = k[i] * k[i] + k[j] * k[j] + k[l] * k[l];
}

long BoxGrid::mirror(long idx) const {
  const int l = static_cast<int>(idx % n_);
  const int j = static_cast<int>((idx / n_) % n_);
  const int i = static_cast<int>(idx / (static_cast<long>(n_) * n_));
  auto flip = [this](int a) { return a == 0 ? 0 : n_ - a; };
  return index(flip(i), flip(j), flip(l));
}

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft3::Fft3(int n) : n_(n) {
  std::lock_guard lock(planner_mutex());
  const std::size_t total = static_cast<std::size_t>(n) * n * n;
  auto* buf = fftw_alloc_complex(total);
  buffer_ = buf;
  fwd_ = fftw_plan_dft_3d(n, n, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft_3d(n, n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft3::~Fft3() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  fftw_free(buffer_);
}

void Fft3::forward(CVec& data) const {
  const std::size_t bytes = sizeof(cplx) * static_cast<std::size_t>(data.size());
  std::memcpy(buffer_, data.data(), bytes);
  fftw_execute(static_cast<fftw_plan>(fwd_));
  std::memcpy(data.data(), buffer_, bytes);
}

void Fft3::backward(CVec& data) const {
  const std::size_t bytes = sizeof(cplx) * static_cast<std::size_t>(data.size());
  std::memcpy(buffer_, data.data(), bytes);
  fftw_execute(static_cast<fftw_plan>(bwd_));
  std::memcpy(data.data(), buffer_, bytes);
}

}  // namespace gplab
