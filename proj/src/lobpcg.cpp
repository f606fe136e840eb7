#include "gplab/lobpcg.hpp"

#include <Eigen/Eigenvalues>

namespace gplab {

namespace {

// Block with its A and B images.
struct Block {
  Mat V, AV, BV;
  long cols() const { return V.cols(); }
  void combine(const Mat& T) {
    V = V * T;
    AV = AV * T;
    BV = BV * T;
  }
};

// Coefficients T making V T B-orthonormal; near dependent directions are dropped.
Mat orthonormal_coefficients(const Mat& V, const Mat& BV, double drop) {
  Mat G = V.transpose() * BV;
  G = 0.5 * (G + G.transpose()).eval();
  const Vec scale = G.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Mat Gs = scale.asDiagonal() * G * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(Gs);
  const double top = es.eigenvalues().maxCoeff();
  std::vector<long> keep;
  for (long i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > drop * top) keep.push_back(i);
  Mat T(V.cols(), static_cast<long>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    T.col(static_cast<long>(c)) = scale.asDiagonal() * es.eigenvectors().col(keep[c]) / std::sqrt(es.eigenvalues()[keep[c]]);
  return T;
}

// Removes the B-components of `blk` along the B-orthonormal blocks in `against` (two passes),
// then orthonormalises what is left.
void orthogonalise(Block& blk, const std::vector<const Block*>& against, double drop) {
  for (int pass = 0; pass < 2; ++pass)
    for (const Block* q : against) {
      const Mat c = q->BV.transpose() * blk.V;
      blk.V -= q->V * c;
      blk.AV -= q->AV * c;
      blk.BV -= q->BV * c;
    }
  blk.combine(orthonormal_coefficients(blk.V, blk.BV, drop));
}

}  // namespace

LobpcgResult lobpcg(const BlockOp& A, const BlockOp& B, const BlockOp& precond, const BlockOp& constrain, Mat X0,
                    const LobpcgOptions& opts) {
  const long m = X0.cols();
  if (opts.wanted > m) throw InvalidParameter("lobpcg: block smaller than requested count");
  auto applyB = [&](const Mat& Y) { return B ? B(Y) : Y; };
  auto project = [&](const Mat& Y) { return constrain ? constrain(Y) : Y; };
  auto fresh = [&](Mat V) {
    Block b;
    b.V = project(V);
    b.AV = A(b.V);
    b.BV = applyB(b.V);
    return b;
  };

  // Rayleigh-Ritz on a B-orthonormal block: returns all Ritz values and rotates the block in place.
  auto rayleigh_ritz = [&](Block& X) {
    Mat M = X.V.transpose() * X.AV;
    M = 0.5 * (M + M.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(M);
    X.combine(es.eigenvectors());
    return Vec(es.eigenvalues());
  };

  Block X = fresh(std::move(X0));
  X.combine(orthonormal_coefficients(X.V, X.BV, 1e-14));
  if (X.cols() < m) throw NumericalError("lobpcg: initial block is rank deficient");
  Vec mu = rayleigh_ritz(X);
  Block P;
  LobpcgResult out;
  out.residuals = Vec::Zero(m);

  auto residuals = [&](const Block& Y, const Vec& values) {
    const Mat R = Y.AV - Y.BV * values.asDiagonal();
    Vec r(Y.cols());
    for (long c = 0; c < Y.cols(); ++c) r[c] = R.col(c).norm() / std::max(Y.AV.col(c).norm(), 1e-300);
    return std::make_pair(R, r);
  };

  for (int it = 1; it <= opts.max_iter; ++it) {
    auto [R, res] = residuals(X, mu);
    out.residuals = res;
    out.iterations = it - 1;
    bool done = true;
    for (int c = 0; c < opts.wanted; ++c)
      if (!(res[c] < opts.tol)) done = false;
    if (done) break;

    Block W = fresh(precond ? precond(R) : R);
    std::vector<const Block*> against{&X};
    orthogonalise(W, against, 1e-12);
    if (P.cols() > 0) {
      against.push_back(&W);
      orthogonalise(P, against, 1e-12);
    }

    Block S;
    const long ks = X.cols() + W.cols() + P.cols();
    S.V.resize(X.V.rows(), ks);
    S.AV.resize(X.V.rows(), ks);
    S.BV.resize(X.V.rows(), ks);
    S.V << X.V, W.V, P.V;
    S.AV << X.AV, W.AV, P.AV;
    S.BV << X.BV, W.BV, P.BV;
    Mat M = S.V.transpose() * S.AV;
    M = 0.5 * (M + M.transpose()).eval();
    Mat G = S.V.transpose() * S.BV;
    G = 0.5 * (G + G.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(M, G);
    if (ges.info() != Eigen::Success) throw NumericalError("lobpcg: Rayleigh-Ritz failed");
    const Mat C = ges.eigenvectors().leftCols(m);
    mu = ges.eigenvalues().head(m);

    Block Pn;
    const Mat Cr = C.bottomRows(ks - m);
    Pn.V = S.V.rightCols(ks - m) * Cr;
    Pn.AV = S.AV.rightCols(ks - m) * Cr;
    Pn.BV = S.BV.rightCols(ks - m) * Cr;
    X.combine(C.topRows(m));
    X.V += Pn.V;
    X.AV += Pn.AV;
    X.BV += Pn.BV;
    P = std::move(Pn);

    if (it % 20 == 0) {  // refresh images to remove drift
      X = fresh(X.V);
      X.combine(orthonormal_coefficients(X.V, X.BV, 1e-14));
      mu = rayleigh_ritz(X);
      P = Block{};
    }
  }

  X = fresh(X.V);
  X.combine(orthonormal_coefficients(X.V, X.BV, 1e-14));
  mu = rayleigh_ritz(X);
  out.residuals = residuals(X, mu).second;
  out.values = mu;
  out.vectors = X.V;
  out.converged = true;
  for (int c = 0; c < opts.wanted; ++c)
    if (!(out.residuals[c] < 10 * opts.tol)) out.converged = false;
  return out;
}

}  // namespace gplab
