#pragma once

#include <vector>

#include "muchan/channels.hpp"
#include "muchan/mucone.hpp"

namespace muchan {

inline constexpr double kEpsCone = 1e-9;

// Shift U e_j = e_{j+1}, clock V e_j = xi^j e_j, W_{a,b} = U^a V^b.
class WeylSystem {
 public:
  explicit WeylSystem(Index d);

  Index dim() const { return d_; }
  cplx xi() const { return xi_; }
  const CMat& shift() const { return shift_; }
  const CMat& clock() const { return clock_; }
  // Index a*d + b holds W_{a,b} (and w_{a,b}).
  const CMat& w(Index a, Index b) const;
  const std::vector<CMat>& table() const { return table_; }
  // w_{a,b} = sum_j e_j (x) W_{a,b}* e_j.
  const CVec& bell(Index a, Index b) const;

  // Largest residual over the adjoint, commutation and orthogonality identities.
  double identity_residual() const;

 private:
  Index d_;
  cplx xi_;
  CMat shift_;
  CMat clock_;
  std::vector<CMat> table_;
  std::vector<CVec> bells_;
};

WeylSystem weyl_system(Index d);
std::vector<CMat> weyl_unitaries(Index d);

// Exhaustive check of Phi(W X W*) = W Phi(X) W* over all W_{a,b} and E_ij.
bool is_weyl_covariant(const Channel& m, const WeylSystem& ws, double tol = 1e-9);
double weyl_covariance_residual(const Channel& m, const WeylSystem& ws);

// lambda_{a,b} = (1/d) <w_{a,b}, J w_{a,b}>, flattened as a*d + b.
std::vector<double> weyl_coeffs(const Channel& ch, const WeylSystem& ws);
Channel weyl_reconstruct(const std::vector<double>& coeffs, const WeylSystem& ws);

struct WeylDecomposition {
  MUDecomposition decomposition;
  bool covariant = false;
  double covariance_residual = 0.0;
  double min_coefficient = 0.0;
  std::vector<double> coefficients;  // full grid, empty when not covariant
};

WeylDecomposition mixed_weyl_decompose(const Channel& ch, const WeylSystem& ws);

enum class ConeVerdict { Member, NotMember };

struct ConeMembershipResult {
  std::vector<double> coefficients;
  double residual = 0.0;
  ConeVerdict verdict = ConeVerdict::NotMember;
};

// Nonnegative fit of J(L) by {J(Ad_U) - J(id) : U in g}.
ConeMembershipResult g_cone_membership(const Channel& generator, const std::vector<CMat>& g,
                                       double eps = kEpsCone);
ConeMembershipResult weyl_cone_membership(const Channel& generator, const WeylSystem& ws,
                                          double eps = kEpsCone);

// Simplex-constrained fit of J(Phi) by {J(Ad_U) : U in g}. Conclusive for a
// finite set: verdict NotInHull when the residual exceeds eps.
MUDecomposition g_mixed_decompose(const Channel& ch, const std::vector<CMat>& g, double eps = kEpsMU);

}  // namespace muchan
