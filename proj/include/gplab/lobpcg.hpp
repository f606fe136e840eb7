#pragma once

#include <functional>

#include "gplab/linalg.hpp"

namespace gplab {

// Block operator acting on the columns of a matrix.
using BlockOp = std::function<Mat(const Mat&)>;

struct LobpcgOptions {
  int wanted = 1;
  double tol = 1e-10;  // relative residual ||A x - mu B x|| / ||A x||
  int max_iter = 500;
};

struct LobpcgResult {
  Vec values;
  Mat vectors;  // B-orthonormal columns
  Vec residuals;
  int iterations = 0;
  bool converged = false;
};

// Smallest eigenpairs of A x = mu B x with A symmetric and B symmetric positive definite on the range of
// `constrain`. Empty B means identity; empty precond and constrain mean identity.
LobpcgResult lobpcg(const BlockOp& A, const BlockOp& B, const BlockOp& precond, const BlockOp& constrain, Mat X,
                    const LobpcgOptions& opts);

}  // namespace gplab
