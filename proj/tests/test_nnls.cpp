#include <random>

#include <gtest/gtest.h>

#include "muchan/nnls.hpp"

using namespace muchan;

namespace {

RMat gaussian(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  RMat m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

// Exhaustive NNLS: unconstrained least squares on every support, keep the
// best feasible one.
double brute_force_nnls(const RMat& a, const RVec& b) {
  const Index n = a.cols();
  double best = b.norm();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<Index> cols;
    for (Index j = 0; j < n; ++j)
      if (mask & (1u << j)) cols.push_back(j);
    RMat s(a.rows(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) s.col(static_cast<Index>(k)) = a.col(cols[k]);
    const RVec z = s.colPivHouseholderQr().solve(b);
    if (z.minCoeff() < 0) continue;
    best = std::min(best, (s * z - b).norm());
  }
  return best;
}

}  // namespace

TEST(Nnls, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const RMat a = gaussian(6, 5, rng);
    const RVec b = gaussian(6, 1, rng);
    const NnlsResult r = nnls(a, b);
    EXPECT_TRUE(r.converged);
    EXPECT_GE(r.x.minCoeff(), 0.0);
    EXPECT_NEAR(r.residual, brute_force_nnls(a, b), 1e-10);
    EXPECT_NEAR(r.residual, (a * r.x - b).norm(), 1e-12);
  }
}

TEST(Nnls, KktConditions) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const RMat a = gaussian(12, 20, rng);
    const RVec b = gaussian(12, 1, rng);
    const NnlsResult r = nnls(a, b);
    const RVec w = a.transpose() * (b - a * r.x);
    for (Index j = 0; j < a.cols(); ++j) {
      EXPECT_LE(w(j), 1e-9);
      if (r.x(j) > 0) {
        EXPECT_NEAR(w(j), 0.0, 1e-9);
      }
    }
  }
}

TEST(Nnls, ExactRecoveryAndWarmStart) {
  std::mt19937_64 rng(3);
  const RMat a = gaussian(10, 4, rng);
  RVec x(4);
  x << 0.5, 0.0, 2.0, 1.0;
  const RVec b = a * x;
  const NnlsResult cold = nnls(a, b);
  EXPECT_LT((cold.x - x).norm(), 1e-10);
  const NnlsResult warm = nnls(a, b, {0, 2, 3});
  EXPECT_LT((warm.x - x).norm(), 1e-10);
  // Infeasible warm columns are dropped rather than trusted.
  const NnlsResult bad = nnls(a, b, {1});
  EXPECT_LT((bad.x - x).norm(), 1e-10);
}

TEST(Nnls, ShapeMismatch) { EXPECT_THROW(nnls(RMat::Zero(3, 2), RVec::Zero(4)), Error); }

TEST(SimplexLeastSquares, MinNormPointOfHull) {
  // Hull of (1,0) and (0,1): nearest point to the origin is (1/2, 1/2).
  RMat p(2, 2);
  p << 1, 0, 0, 1;
  const NnlsResult r = simplex_least_squares(p);
  EXPECT_NEAR(r.x(0), 0.5, 1e-12);
  EXPECT_NEAR(r.x(1), 0.5, 1e-12);
  EXPECT_NEAR(r.x.sum(), 1.0, 1e-12);
}

TEST(SimplexLeastSquares, OriginInside) {
  RMat p(2, 3);
  p << 1, -1, 0, 0, 0.5, -1;
  const NnlsResult r = simplex_least_squares(p);
  EXPECT_NEAR(r.x.sum(), 1.0, 1e-12);
  EXPECT_GE(r.x.minCoeff(), 0.0);
  EXPECT_LT((p * r.x).norm(), 1e-10);
}

TEST(SimplexLeastSquares, AgreesWithVertexEdgeEnumeration) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const RMat p = gaussian(3, 4, rng) + RMat::Constant(3, 4, 1.5);
    const NnlsResult r = simplex_least_squares(p);
    double best = 1e300;
    // Nearest point over all faces up to dimension 2 covers the 3-d optimum
    // only approximately; sample the simplex densely instead.
    std::uniform_real_distribution<double> u(0, 1);
    for (int s = 0; s < 20000; ++s) {
      RVec w(4);
      for (Index k = 0; k < 4; ++k) w(k) = -std::log(u(rng) + 1e-300);
      w /= w.sum();
      best = std::min(best, (p * w).norm());
    }
    EXPECT_LE((p * r.x).norm(), best + 1e-12);
  }
}

TEST(LeastDistance, HalfspaceProjection) {
  // min ||x|| s.t. x0 + x1 >= 2 -> (1, 1).
  RMat g(1, 2);
  g << 1, 1;
  RVec h(1);
  h << 2;
  const LdpResult r = least_distance(g, h);
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.x(0), 1.0, 1e-12);
  EXPECT_NEAR(r.x(1), 1.0, 1e-12);
}

TEST(LeastDistance, InfeasibleSystem) {
  RMat g(2, 1);
  g << 1, -1;
  RVec h(2);
  h << 1, 1;  // x >= 1 and -x >= 1
  EXPECT_FALSE(least_distance(g, h).feasible);
}

TEST(LeastDistance, InactiveConstraintsGiveZero) {
  RMat g(2, 2);
  g << 1, 0, 0, 1;
  RVec h(2);
  h << -1, -2;
  const LdpResult r = least_distance(g, h);
  ASSERT_TRUE(r.feasible);
  EXPECT_LT(r.x.norm(), 1e-14);
}
