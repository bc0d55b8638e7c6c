#include <gtest/gtest.h>

#include "muchan/channels.hpp"
#include "oracles.hpp"

using namespace muchan;

namespace {

CMat e(Index d, Index i, Index j) { return matrix_unit(d, i, j); }

double action_error(const Channel& a, const oracle::Map& f, Index d) {
  double err = 0;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) err = std::max(err, (a.apply(e(d, i, j)) - f(e(d, i, j))).norm());
  return err;
}

}  // namespace

TEST(Representations, AgreeOnMatrixUnits) {
  std::mt19937_64 rng(1);
  std::vector<CMat> ks = {oracle::ginibre(3, 3, rng), oracle::ginibre(3, 3, rng)};
  const Channel k = Channel::from_kraus(ks);
  const Channel c = Channel::from_choi(k.choi());
  const Channel s = Channel::from_superop(k.superop());
  const auto f = oracle::kraus_map(ks);
  EXPECT_LT(action_error(k, f, 3), 1e-12);
  EXPECT_LT(action_error(c, f, 3), 1e-12);
  EXPECT_LT(action_error(s, f, 3), 1e-12);
  EXPECT_LT((k.choi() - oracle::choi(3, f)).norm(), 1e-12);
  EXPECT_LT((k.superop() - oracle::superop(3, f)).norm(), 1e-12);
}

TEST(Representations, UnitaryConjugationSuperop) {
  const CMat u = random_unitary(3, 4);
  // vec(U* X U) = (U^T (x) U*) vec(X).
  EXPECT_LT((ad_unitary(u).superop() - kron(u.transpose(), u.adjoint())).norm(), 1e-12);
}

TEST(ChoiOf, Identity) {
  CVec omega = CVec::Zero(9);
  for (Index j = 0; j < 3; ++j) omega(j * 3 + j) = 1.0 / std::sqrt(3.0);
  EXPECT_LT((choi_of(identity_channel(3)) - omega * omega.adjoint()).norm(), 1e-14);
}

TEST(ChoiOf, DepolarizingAndHolevoWerner) {
  EXPECT_LT((choi_of(depolarizing(3)) - CMat::Identity(9, 9) / 9.0).norm(), 1e-14);
  EXPECT_LT((choi_of(depolarizing(3)) - oracle::choi(3, oracle::depolarizing(3))).norm(), 1e-14);
  const CMat hw = (CMat::Identity(9, 9) - oracle::swap(3)) / 6.0;
  EXPECT_LT((choi_of(holevo_werner()) - hw).norm(), 1e-14);
  EXPECT_LT((choi_of(holevo_werner()) - oracle::choi(3, oracle::holevo_werner())).norm(), 1e-14);
}

TEST(KrausOf, UnitaryConjugationGivesOneOperator) {
  const CMat u = random_unitary(4, 2);
  const auto ks = kraus_of(ad_unitary(u));
  ASSERT_EQ(ks.size(), 1u);
  const cplx ph = (u.adjoint() * ks[0]).trace() / 4.0;
  EXPECT_NEAR(std::abs(ph), 1.0, 1e-10);
  EXPECT_LT((ks[0] - ph * u).norm(), 1e-10);
}

TEST(KrausOf, DepolarizingAndHolevoWerner) {
  const auto kd = kraus_of(depolarizing(2));
  EXPECT_EQ(kd.size(), 4u);
  EXPECT_LT(action_error(Channel::from_kraus(kd), oracle::depolarizing(2), 2), 1e-10);
  const auto kh = kraus_of(holevo_werner());
  EXPECT_EQ(kh.size(), 3u);
  EXPECT_LT(action_error(Channel::from_kraus(kh), oracle::holevo_werner(), 3), 1e-10);
}

TEST(KrausOf, CanonicalPhaseAndOrder) {
  std::mt19937_64 rng(7);
  const Channel ch = Channel::from_kraus({oracle::ginibre(3, 3, rng), 0.3 * oracle::ginibre(3, 3, rng)});
  const auto ks = kraus_of(ch);
  for (std::size_t i = 1; i < ks.size(); ++i) EXPECT_GE(ks[i - 1].squaredNorm(), ks[i].squaredNorm() - 1e-12);
  for (const CMat& k : ks) {
    // First significant entry in row-major order is positive real.
    const double scale = k.cwiseAbs().maxCoeff();
    bool found = false;
    for (Index r = 0; r < 3 && !found; ++r)
      for (Index c = 0; c < 3 && !found; ++c)
        if (std::abs(k(r, c)) > 1e-8 * scale) {
          EXPECT_GT(k(r, c).real(), 0);
          EXPECT_NEAR(k(r, c).imag(), 0, 1e-12);
          found = true;
        }
  }
  // Same channel from another Kraus list gives the same canonical list.
  const auto again = kraus_of(Channel::from_choi(ch.choi()));
  ASSERT_EQ(again.size(), ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) EXPECT_LT((again[i] - ks[i]).norm(), 1e-9);
}

TEST(Verify, HolevoWerner) {
  const VerifyReport r = verify(holevo_werner());
  EXPECT_TRUE(r.is_cp);
  EXPECT_TRUE(r.is_tp);
  EXPECT_TRUE(r.is_unital);
  EXPECT_EQ(r.choi_rank, 3);
}

TEST(Verify, TransposeIsNotCp) {
  const VerifyReport r = verify(transpose_map(3));
  EXPECT_FALSE(r.is_cp);
  EXPECT_NEAR(r.min_choi_eigenvalue, -1.0 / 3.0, 1e-12);
  EXPECT_TRUE(r.is_tp);
  EXPECT_TRUE(r.is_unital);
}

TEST(Verify, UnitaryConjugation) {
  const VerifyReport r = verify(ad_unitary(random_unitary(3, 8)));
  EXPECT_TRUE(r.is_unital_channel());
  EXPECT_TRUE(r.is_hermitian_preserving);
  EXPECT_EQ(r.choi_rank, 1);
}

TEST(Verify, NonUnitalAmplitudeDamping) {
  CMat k0 = CMat::Zero(2, 2), k1 = CMat::Zero(2, 2);
  const double g = 0.3;
  k0(0, 0) = 1;
  k0(1, 1) = std::sqrt(1 - g);
  k1(0, 1) = std::sqrt(g);
  // X -> sum K X K*, passed as the adjoint list.
  const VerifyReport r = verify(Channel::from_kraus({k0.adjoint(), k1.adjoint()}));
  EXPECT_TRUE(r.is_cp);
  EXPECT_TRUE(r.is_tp);
  EXPECT_FALSE(r.is_unital);
}

TEST(Apply, Examples) {
  EXPECT_LT((muchan::apply(depolarizing(3), e(3, 0, 0)) - CMat::Identity(3, 3) / 3.0).norm(), 1e-14);
  EXPECT_LT((muchan::apply(holevo_werner(), CMat::Identity(3, 3)) - CMat::Identity(3, 3)).norm(), 1e-14);
  EXPECT_LT((muchan::apply(holevo_werner(), e(3, 0, 1)) + e(3, 1, 0) / 2.0).norm(), 1e-14);
  std::mt19937_64 rng(9);
  const CMat u = random_unitary(3, 3), x = oracle::ginibre(3, 3, rng);
  EXPECT_LT((muchan::apply(ad_unitary(u), x) - u.adjoint() * x * u).norm(), 1e-12);
}

TEST(Compose, UnitaryConjugations) {
  const CMat u = random_unitary(3, 10), v = random_unitary(3, 11);
  EXPECT_LT(choi_distance(compose(ad_unitary(u), ad_unitary(v)), ad_unitary(v * u)), 1e-12);
}

TEST(Compose, DepolarizingAbsorbsUnitalChannels) {
  for (const Channel& ch : {holevo_werner(), ad_unitary(random_unitary(3, 12))}) {
    EXPECT_LT(choi_distance(compose(depolarizing(3), ch), depolarizing(3)), 1e-12);
    EXPECT_LT(choi_distance(compose(ch, depolarizing(3)), depolarizing(3)), 1e-12);
    EXPECT_LT(choi_distance(compose(ch, identity_channel(3)), ch), 1e-12);
  }
}

TEST(DualOf, AdjointIdentity) {
  const CMat u = random_unitary(3, 13);
  EXPECT_LT(choi_distance(dual_of(ad_unitary(u)), ad_unitary(u.adjoint())), 1e-12);
  EXPECT_LT(choi_distance(dual_of(depolarizing(4)), depolarizing(4)), 1e-12);
  std::mt19937_64 rng(14);
  const Channel ch = Channel::from_choi(oracle::random_unital_choi(3, rng));
  const Channel du = dual_of(ch);
  EXPECT_TRUE(verify(du).is_unital_channel());
  for (int k = 0; k < 5; ++k) {
    const CMat x = oracle::ginibre(3, 3, rng), y = oracle::ginibre(3, 3, rng);
    EXPECT_NEAR(std::abs(hs_inner(ch.apply(x), y) - hs_inner(x, du.apply(y))), 0, 1e-10);
  }
}

TEST(Power, RepeatedComposition) {
  const Channel hw = holevo_werner();
  EXPECT_LT(choi_distance(power(hw, 0), identity_channel(3)), 1e-14);
  EXPECT_LT(choi_distance(power(hw, 3), compose(hw, compose(hw, hw))), 1e-12);
}

TEST(Depolarizing, Properties) {
  const Channel dep = depolarizing(4);
  EXPECT_TRUE(verify(dep).is_unital_channel());
  CMat x = e(4, 0, 1) + e(4, 2, 2) - e(4, 3, 3);
  EXPECT_LT(dep.apply(x).norm(), 1e-14);
}

TEST(AdUnitary, IdentityAndPhase) {
  EXPECT_LT(choi_distance(ad_unitary(CMat::Identity(3, 3)), identity_channel(3)), 1e-14);
  const CMat u = random_unitary(3, 15);
  EXPECT_LT(choi_distance(ad_unitary(std::polar(1.0, 0.7) * u), ad_unitary(u)), 1e-12);
  const CVec w = bell_vector(u);
  EXPECT_LT((ad_unitary(u).choi() - w * w.adjoint() / 3.0).norm(), 1e-12);
  EXPECT_THROW(ad_unitary(2.0 * u), Error);
}

TEST(TransposeMap, Qubit) {
  const Channel t = transpose_map(2);
  EXPECT_LT((t.choi() - oracle::swap(2) / 2.0).norm(), 1e-14);
  EXPECT_NEAR(verify(t).min_choi_eigenvalue, -0.5, 1e-12);
  EXPECT_LT(choi_distance(compose(t, t), identity_channel(2)), 1e-14);
}

TEST(MixedUnitaryChannel, WeightedSum) {
  const CMat u = random_unitary(2, 16), v = random_unitary(2, 17);
  const Channel m = mixed_unitary_channel({0.25, 0.75}, {u, v});
  EXPECT_LT((m.choi() - 0.25 * ad_unitary(u).choi() - 0.75 * ad_unitary(v).choi()).norm(), 1e-12);
  EXPECT_THROW(mixed_unitary_channel({-0.1, 1.1}, {u, v}), Error);
}

TEST(HermitianBasis, OrthonormalTracelessMatchesGellMann) {
  for (Index d = 2; d <= 5; ++d) {
    const auto g = traceless_hermitian_basis(d);
    const auto ref = oracle::gell_mann(d);
    ASSERT_EQ(static_cast<Index>(g.size()), d * d - 1);
    for (std::size_t a = 0; a < g.size(); ++a) {
      EXPECT_LT((g[a] - g[a].adjoint()).norm(), 1e-14);
      EXPECT_LT(std::abs(g[a].trace()), 1e-14);
      EXPECT_LT((g[a] - ref[a]).norm(), 1e-12);
      for (std::size_t b = 0; b < g.size(); ++b)
        EXPECT_NEAR(std::abs(hs_inner(g[a], g[b])), a == b ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(LinearCombinations, Generators) {
  const CMat w = random_unitary(2, 18);
  const Channel l = ad_unitary(w) - identity_channel(2);
  std::mt19937_64 rng(19);
  const CMat x = oracle::ginibre(2, 2, rng);
  EXPECT_LT((l.apply(x) - (w.adjoint() * x * w - x)).norm(), 1e-12);
  EXPECT_LT(((2.0 * l).apply(x) - 2.0 * l.apply(x)).norm(), 1e-12);
}

TEST(Inner, ChoiIsometry) {
  const CMat u = random_unitary(3, 20);
  EXPECT_NEAR(map_inner(ad_unitary(u), ad_unitary(u)).real(), 1.0, 1e-12);
  EXPECT_NEAR(map_inner(depolarizing(3), ad_unitary(u)).real(), 1.0 / 9.0, 1e-12);
}

TEST(ChannelGuards, ShapeErrors) {
  EXPECT_THROW(Channel::from_kraus({}), Error);
  EXPECT_THROW(Channel::from_choi(CMat::Identity(5, 5)), Error);
  EXPECT_THROW(compose(identity_channel(2), identity_channel(3)), Error);
  EXPECT_THROW(identity_channel(2).apply(CMat::Identity(3, 3)), Error);
}
