#include <gtest/gtest.h>

#include "muchan/dynamics.hpp"
#include "muchan/structure.hpp"
#include "oracles.hpp"

using namespace muchan;

namespace {

// HS-orthogonal projection onto span(basis), built column by column.
CMat projection_superop(const std::vector<CMat>& basis, Index d) {
  CMat cols(d * d, static_cast<Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) cols.col(static_cast<Index>(i)) = vec(basis[i]);
  const CMat q = orthonormal_columns(cols);
  return q * q.adjoint();
}

// Random element of the algebra: Q (sum_k I_m (x) X_k) Q*.
CMat random_element(const BlockAlgebra& alg, std::mt19937_64& rng) {
  CMat x = CMat::Zero(alg.dim(), alg.dim());
  for (const CMat& u : alg.matrix_units()) {
    std::normal_distribution<double> n;
    x += cplx(n(rng), n(rng)) * u;
  }
  return x;
}

CMat diag3(cplx a, cplx b, cplx c) {
  CMat m = CMat::Zero(3, 3);
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return m;
}

}  // namespace

TEST(BlockAlgebra, Validation) {
  EXPECT_THROW((BlockAlgebra{{}, std::nullopt}.validate()), Error);
  EXPECT_THROW((BlockAlgebra{{{1, 0}}, std::nullopt}.validate()), Error);
  EXPECT_THROW((BlockAlgebra{{{1, 2}}, CMat::Identity(3, 3)}.validate()), Error);
  CMat bad = CMat::Identity(2, 2);
  bad(0, 1) = 1;
  EXPECT_THROW((BlockAlgebra{{{1, 2}}, bad}.validate()), Error);
  const BlockAlgebra ok{{{2, 1}, {1, 2}}, std::nullopt};
  EXPECT_EQ(ok.dim(), 4);
  EXPECT_EQ(ok.algebra_dim(), 5);
  EXPECT_EQ(ok.matrix_units().size(), 5u);
  EXPECT_EQ(ok.central_projections().size(), 2u);
}

TEST(ConditionalExpectation, FullAlgebraIsIdentity) {
  EXPECT_LT(choi_distance(conditional_expectation({{{1, 3}}, std::nullopt}), identity_channel(3)), 1e-12);
}

TEST(ConditionalExpectation, ScalarsGiveDepolarizing) {
  EXPECT_LT(choi_distance(conditional_expectation({{{4, 1}}, std::nullopt}), depolarizing(4)), 1e-12);
}

TEST(ConditionalExpectation, DiagonalPinching) {
  const Channel e = conditional_expectation({{{1, 1}, {1, 1}, {1, 1}}, std::nullopt});
  std::mt19937_64 rng(1);
  const CMat x = oracle::ginibre(3, 3, rng);
  EXPECT_LT((e.apply(x) - CMat(x.diagonal().asDiagonal())).norm(), 1e-12);
}

TEST(ConditionalExpectation, BimoduleAndProjectionProperties) {
  std::mt19937_64 rng(2);
  const BlockAlgebra alg{{{2, 1}, {1, 2}}, oracle::haar_unitary(4, rng)};
  const Channel e = conditional_expectation(alg);
  EXPECT_LT(choi_distance(compose(e, e), e), 1e-10);
  const VerifyReport vr = verify(e);
  EXPECT_TRUE(vr.is_unital_channel());
  // Equal to the HS-orthogonal projection onto the algebra.
  EXPECT_LT((e.superop() - projection_superop(alg.matrix_units(), 4)).norm(), 1e-10);
  for (int trial = 0; trial < 5; ++trial) {
    const CMat a = random_element(alg, rng), b = random_element(alg, rng);
    const CMat x = oracle::ginibre(4, 4, rng);
    EXPECT_LT((e.apply(a * x * b) - a * e.apply(x) * b).norm(), 1e-9);
  }
}

TEST(AutomorphismUnitary, FullMatrixAlgebraRecoversConjugation) {
  const CMat v = random_unitary(3, 3);
  const CMat u = automorphism_unitary({{{1, 3}}, std::nullopt}, ad_unitary(v));
  EXPECT_NEAR(std::abs((v.adjoint() * u).trace()) / 3.0, 1.0, 1e-9);
}

TEST(AutomorphismUnitary, CyclicShiftOfDiagonal) {
  // psi(diag(x0, x1, x2)) = diag(x2, x0, x1) on the diagonal algebra.
  const Channel psi = Channel::from_function(3, [](const CMat& x) {
    return diag3(x(2, 2), x(0, 0), x(1, 1));
  });
  const BlockAlgebra alg{{{1, 1}, {1, 1}, {1, 1}}, std::nullopt};
  const CMat u = automorphism_unitary(alg, psi);
  EXPECT_LT(unitarity_residual(u), 1e-12);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(u(i, j)), (j == (i + 1) % 3) ? 1.0 : 0.0, 1e-12);
  const CMat x = diag3(1, 2, 3);
  EXPECT_LT((u.adjoint() * x * u - psi.apply(x)).norm(), 1e-12);
}

TEST(AutomorphismUnitary, UnequalMultiplicitySwapIsNotTracePreserving) {
  // a(E11 + E22) + b E33 -> b(E11 + E22) + a E33.
  const Channel psi = Channel::from_function(3, [](const CMat& x) {
    return diag3(x(2, 2), x(2, 2), (x(0, 0) + x(1, 1)) / 2.0);
  });
  try {
    automorphism_unitary({{{2, 1}, {1, 1}}, std::nullopt}, psi);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotTracePreserving);
  }
}

TEST(AutomorphismUnitary, RejectsNonMultiplicativeMaps) {
  try {
    automorphism_unitary({{{1, 1}, {1, 1}}, std::nullopt}, depolarizing(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotAutomorphism);
  }
}

TEST(AutomorphismUnitary, LeavesAlgebraInvariant) {
  std::mt19937_64 rng(4);
  const CMat q = oracle::haar_unitary(5, rng);
  const BlockAlgebra alg{{{1, 2}, {1, 2}, {1, 1}}, q};
  // Swap the two M_2 blocks and twist each by a unitary.
  CMat u0 = CMat::Zero(5, 5);
  u0.block(0, 2, 2, 2) = oracle::haar_unitary(2, rng);
  u0.block(2, 0, 2, 2) = oracle::haar_unitary(2, rng);
  u0(4, 4) = std::polar(1.0, 0.3);
  const Channel psi = ad_unitary(q * u0 * q.adjoint());
  const CMat u = automorphism_unitary(alg, psi);
  const Channel e = conditional_expectation(alg);
  EXPECT_LT(choi_distance(compose(e, compose(ad_unitary(u), e)), compose(ad_unitary(u), e)), 1e-9);
  for (const CMat& x : alg.matrix_units()) EXPECT_LT((psi.apply(x) - u.adjoint() * x * u).norm(), 1e-9);
}

TEST(PeripheralSplit, Dimensions) {
  const PeripheralSplit a = peripheral_split(ad_unitary(random_unitary(3, 5)));
  EXPECT_EQ(a.peripheral_basis.size(), 9u);
  EXPECT_EQ(a.decaying_dim, 0);
  const PeripheralSplit dep = peripheral_split(depolarizing(3));
  EXPECT_EQ(dep.peripheral_basis.size(), 1u);
  const PeripheralSplit hw = peripheral_split(holevo_werner());
  EXPECT_EQ(hw.peripheral_basis.size(), 1u);
  EXPECT_EQ(hw.decaying_dim, 8);
  EXPECT_NEAR(hw.spectral_radius, 1.0, 1e-12);
}

TEST(PeripheralSplit, ProjectorIsSelfDualIdempotentAndClosed) {
  std::mt19937_64 rng(6);
  // Pinching followed by a diagonal-preserving unitary: P = diagonal matrices.
  const CMat perm = oracle::weyl(3, 1, 0);
  const Channel ch = compose(ad_unitary(perm), conditional_expectation({{{1, 1}, {1, 1}, {1, 1}}, std::nullopt}));
  const PeripheralSplit ps = peripheral_split(ch);
  EXPECT_EQ(ps.peripheral_basis.size(), 3u);
  EXPECT_TRUE(ps.closed);
  EXPECT_TRUE(ps.diagonalizable);
  EXPECT_LT(ps.closure_residual, 1e-8);
  const CMat p = ps.projector.superop();
  EXPECT_LT((p * p - p).norm(), 1e-10);
  EXPECT_LT((p - p.adjoint()).norm(), 1e-10);
  for (cplx l : ps.peripheral_eigenvalues) EXPECT_NEAR(std::abs(l), 1.0, 1e-9);
  // Eigenvalues of a random unital channel stay in the closed unit disc.
  const Channel r = Channel::from_choi(oracle::random_unital_choi(3, rng));
  for (cplx l : eig_general(r.superop()).eigenvalues) EXPECT_LE(std::abs(l), 1.0 + 1e-9);
}

TEST(PeripheralSplit, RejectsNonChannels) { EXPECT_THROW(peripheral_split(transpose_map(2)), Error); }

TEST(RecoverBlockAlgebra, RoundTrip) {
  std::mt19937_64 rng(7);
  const BlockAlgebra alg{{{1, 2}, {2, 1}}, oracle::haar_unitary(4, rng)};
  const BlockAlgebra rec = recover_block_algebra(alg.matrix_units(), 3);
  EXPECT_EQ(rec.algebra_dim(), alg.algebra_dim());
  // Same algebra: the two conditional expectations agree.
  EXPECT_LT(choi_distance(conditional_expectation(rec), conditional_expectation(alg)), 1e-8);
}

TEST(AsymptoticParts, UnitaryChannel) {
  const CMat v = random_unitary(2, 8);
  const AsymptoticParts p = asymptotic_parts(ad_unitary(v));
  EXPECT_LT(p.beta.superop().norm(), 1e-9);
  EXPECT_LT(choi_distance(p.alpha, ad_unitary(v)), 1e-9);
  EXPECT_TRUE(p.beta_decays);
}

TEST(AsymptoticParts, Depolarizing) {
  const AsymptoticParts p = asymptotic_parts(depolarizing(3));
  EXPECT_LT(choi_distance(p.alpha, depolarizing(3)), 1e-10);
  EXPECT_NEAR(std::abs(p.unitary(0, 0)), 1.0, 1e-10);
  for (double n : p.beta_power_norms) EXPECT_LT(n, 1e-10);
}

TEST(AsymptoticParts, HolevoWernerDecaysAtHalfRate) {
  const AsymptoticParts p = asymptotic_parts(holevo_werner());
  EXPECT_TRUE(p.beta_decays);
  for (std::size_t n = 0; n < p.beta_power_norms.size(); ++n)
    EXPECT_NEAR(p.beta_power_norms[n], std::pow(0.5, static_cast<double>(n + 1)), 1e-10);
}

TEST(AsymptoticParts, TwistedMapsFixPeripheralSpace) {
  // Phi = Ad_W o pinching: tau_n = Ad_{(U*)^n} o Phi^n fixes P and equals E_P.
  const CMat w = oracle::weyl(3, 1, 0);
  const Channel ch = compose(ad_unitary(w), conditional_expectation({{{1, 1}, {1, 1}, {1, 1}}, std::nullopt}));
  const AsymptoticParts p = asymptotic_parts(ch);
  for (unsigned n : {1u, 2u, 5u}) {
    CMat un = CMat::Identity(3, 3);
    for (unsigned k = 0; k < n; ++k) un *= p.unitary.adjoint();
    // Ad_{U^n}* undoes n applications of Ad_U on P.
    const Channel tau = compose(ad_unitary(un), power(ch, n));
    for (const CMat& x : p.split.peripheral_basis) EXPECT_LT((tau.apply(x) - x).norm(), 1e-8);
    EXPECT_LT(choi_distance(tau, p.split.projector), 1e-8);
  }
}

TEST(MuIndex, UnitaryChannel) {
  const MUIndexReport r = mu_index(ad_unitary(random_unitary(2, 9)), 3);
  ASSERT_TRUE(r.index.has_value());
  EXPECT_EQ(*r.index, 1u);
  EXPECT_EQ(r.per_power.size(), 3u);
}

TEST(MuIndex, HolevoWernerPowersBecomeMixedUnitary) {
  ClassifyConfig cfg;
  cfg.fw.max_iters = 400;
  cfg.witness.max_rounds = 40;
  const MUIndexReport r = mu_index(holevo_werner(), 6, cfg);
  EXPECT_NE(r.per_power[0].verdict, MUVerdict::MixedUnitary);
  ASSERT_TRUE(r.index.has_value());
  EXPECT_GT(*r.index, 1u);
  for (unsigned k = *r.index; k <= r.n_max; ++k) EXPECT_EQ(r.per_power[k - 1].verdict, MUVerdict::MixedUnitary);
}

TEST(MuIndex, SemigroupRootHasNonMixedUnitaryPower) {
  CMat bb = CMat::Zero(3, 3);
  bb(0, 1) = -1;
  bb(1, 0) = 1;
  bb(2, 2) = 1;
  const Channel l = example59_generator(bb);
  const Channel phi = evolve(l, 1.0 / 3.0);
  ClassifyConfig cfg;
  cfg.candidate_witnesses.push_back(transpose_witness(bb));
  cfg.run_witness_search = false;
  cfg.fw.max_iters = 50;
  const MUIndexReport r = mu_index(phi, 3, cfg);
  EXPECT_EQ(r.per_power[2].verdict, MUVerdict::NotMixedUnitaryAnalytic);
  EXPECT_FALSE(r.index.has_value());
}
