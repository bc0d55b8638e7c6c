#pragma once

// Linear maps on M_d. The same type carries channels, generators and witness
// maps; nothing in Channel itself assumes complete positivity.
//
// Conventions:
//   Ad_U(X) = U* X U, so a Kraus list {V_j} means X -> sum_j V_j* X V_j.
//   J(Phi) = (1/d) sum_ij E_ij (x) Phi(E_ij), with (i,k) -> i*d + k.
//   The superoperator S acts on column-stacked matrices: vec(Phi(X)) = S vec(X).

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "muchan/matcore.hpp"

namespace muchan {

inline constexpr double kPsdTol = 1e-9;
inline constexpr double kRankTol = 1e-8;
inline constexpr double kFlagTol = 1e-9;

enum class Repr { Kraus, Choi, Superop };

class Channel {
 public:
  // Empty zero-dimensional map; only useful as a placeholder.
  Channel();

  static Channel from_kraus(std::vector<CMat> kraus);
  static Channel from_choi(CMat choi);
  static Channel from_superop(CMat superop);
  // Superoperator assembled column by column from the action on E_ij.
  static Channel from_function(Index d, const std::function<CMat(const CMat&)>& f);

  Index dim() const;
  Repr primary() const;

  // Lazily computed and cached; safe to call concurrently.
  const CMat& choi() const;
  const CMat& superop() const;
  // Present only when the map was built from Kraus operators.
  const std::vector<CMat>* stored_kraus() const;

  CMat apply(const CMat& x) const;

 private:
  struct State;
  explicit Channel(std::shared_ptr<State> s);
  std::shared_ptr<State> state_;
};

struct VerifyReport {
  bool is_hermitian_preserving = false;
  bool is_cp = false;
  bool is_tp = false;
  bool is_unital = false;
  int choi_rank = 0;
  double min_choi_eigenvalue = 0.0;
  double tp_residual = 0.0;
  double unital_residual = 0.0;

  bool is_unital_channel() const { return is_cp && is_tp && is_unital; }
};

// Representation conversions (d inferred from sizes).
CMat superop_to_choi(const CMat& superop);
CMat choi_to_superop(const CMat& choi);
CMat kraus_to_superop(const std::vector<CMat>& kraus);
CMat kraus_to_choi(const std::vector<CMat>& kraus);

CMat choi_of(const Channel& ch);
// Canonical Kraus list: descending Choi eigenvalue, each operator's first
// significant entry (row-major) made positive real.
std::vector<CMat> kraus_of(const Channel& ch);
VerifyReport verify(const Channel& ch);
CMat apply(const Channel& ch, const CMat& x);
// (a o b)(X) = a(b(X)).
Channel compose(const Channel& a, const Channel& b);
Channel dual_of(const Channel& ch);
// Phi^n by repeated squaring of the superoperator; n = 0 gives id.
Channel power(const Channel& ch, unsigned n);

// Linear combinations, used for generators such as Ad_W - id.
Channel operator+(const Channel& a, const Channel& b);
Channel operator-(const Channel& a, const Channel& b);
Channel operator*(double s, const Channel& a);

// tr(J(a)* J(b)).
cplx map_inner(const Channel& a, const Channel& b);
// ||J(a) - J(b)||_F.
double choi_distance(const Channel& a, const Channel& b);
// Operator norm of the superoperator (HS-induced).
double superop_norm(const Channel& a);

// (tr (x) id)(J) and (id (x) tr)(J).
CMat trace_first(const CMat& choi);
CMat trace_second(const CMat& choi);

// w_U = sum_j e_j (x) U* e_j, so J(Ad_U) = |w_U><w_U| / d.
CVec bell_vector(const CMat& u);

Channel identity_channel(Index d);
Channel depolarizing(Index d);
Channel holevo_werner();
Channel ad_unitary(const CMat& u);
Channel transpose_map(Index d);
// Sum_i p_i Ad_{U_i}.
Channel mixed_unitary_channel(const std::vector<double>& weights, const std::vector<CMat>& unitaries);

// Orthonormal (tr(G_a G_b) = delta_ab) traceless Hermitian basis of M_d,
// generalized Gell-Mann ordering: symmetric, antisymmetric, diagonal.
std::vector<CMat> traceless_hermitian_basis(Index d);

}  // namespace muchan
