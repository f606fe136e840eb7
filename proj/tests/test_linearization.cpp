#include "doctest.h"

#include "common.hpp"

using namespace gplab;

TEST_CASE("structural identities at the working point") {
  const auto lin = testing::radial_fixture().linearization();
  const IdentityReport r = lin.identities(7, 10);
  CHECK(r.kernel_minus <= 1e-9);
  CHECK(r.kernel_plus <= 1e-9);
  CHECK(r.eigen <= 1e-9);
  CHECK(r.biorthogonality <= 1e-9);
  CHECK(r.idempotence <= 1e-9);
  CHECK(r.symplectic <= 1e-9);
  CHECK(r.resonance_margin > 0.0);
  const NeutralBasis& b = lin.basis();
  CHECK(b.radial);
  CHECK(b.N == 3);
  CHECK(b.E > 0.0);
  CHECK(b.E < lin.lambda());
  CHECK(b.raw_pairing[0] > 0.0);
}

TEST_CASE("neutral frequency tends to e1 - e0 at the bifurcation point") {
  const auto& f = testing::radial_fixture();
  BranchOptions bo;
  bo.lambda_range = {-f.e0() + 0.002, -f.e0() + 0.01};
  bo.steps = 2;
  const auto bp = continue_radial_branch(f.model, bo).front();
  RadialLinearization lin(f.model, bp);
  const NeutralBasis b = lin.neutral_modes(f.e_gap());
  CHECK(b.E == doctest::Approx(f.e_gap()).epsilon(0.01));
}

TEST_CASE("linearized operator maps eigenpairs as claimed") {
  const auto lin = testing::radial_fixture().linearization();
  const NeutralBasis& b = lin.basis();
  const Vec lm_eta = lin.minus(1).apply(b.eta[0]);
  const Vec lp_xi = lin.plus(1).apply(b.xi[0]);
  CHECK((lm_eta - b.E * b.xi[0]).norm() <= 1e-8 * lm_eta.norm());
  CHECK((lp_xi - b.E * b.eta[0]).norm() <= 1e-8 * lp_xi.norm());
}

TEST_CASE("coupling matrix symmetry and rotation sensitivity on a small double well") {
  const BoxGrid g(10.0, 32);
  const BoxModel model(g, Potential::double_well(1.75, 36.0, 1.0), Nonlinearity(-1.0));
  SpectrumOptions so;
  so.k_eigs = 3;
  so.tol = 1e-10;
  const auto s = box_spectrum(model.ops, so);
  REQUIRE(s.levels.size() >= 2);
  REQUIRE(s.levels[1].multiplicity == 2);
  BranchOptions bo;
  bo.lambda_range = {-s.levels[0].energy + 0.05, -s.levels[0].energy + 0.3};
  bo.steps = 3;
  const BranchPoint bp = continue_box_branch(model, bo, &s).back();
  BoxLinearization lin(model, bp);
  std::vector<Vec> guesses;
  for (int m : s.levels[1].members) guesses.push_back(s.vectors[m]);
  const NeutralBasis canon = lin.canonical_basis(lin.neutral_modes(2, guesses));
  const Mat omega = coupling_matrix(model, bp, canon);
  CHECK(antisymmetry_residual(omega) < 1e-8);
  CVec z(2);
  z << cplx(0.6, 0.2), cplx(-0.3, 0.7);
  CHECK(n11_orthogonality_residual(omega, z) <= 1e-8);
  CHECK(n11_orthogonality_residual(coupling_matrix(model, bp, rotate_degenerate_pair(canon, 0.7)), z) >= 1e-3);
}

TEST_CASE("projected free-like data disperses in the l = 0 channel") {
  const auto& f = testing::radial_fixture();
  const auto lin = f.linearization();
  Vec u1(f.grid.size()), u2(f.grid.size());
  for (int i = 0; i < f.grid.size(); ++i) {
    const double r = f.grid.r(i);
    u1[i] = r * std::exp(-r * r / 2);
    u2[i] = 0.5 * r * std::exp(-(r - 1) * (r - 1));
  }
  const auto p = propagate_linearized(lin, 0, u1, u2, 50.0, 5e-3, 4.0, 40);
  CHECK(p.weighted_norm.back() < 0.3 * p.weighted_norm.front());
  CHECK(p.fit.exponent > 0.5);
}
