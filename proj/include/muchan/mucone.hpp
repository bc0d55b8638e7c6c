#pragma once

// Convex geometry of mixed unitary channels: the unitary linear minimization
// oracle, Frank-Wolfe decomposition, dual-cone witnesses and the closed-form
// floor for transpose-type witnesses.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "muchan/channels.hpp"

namespace muchan {

inline constexpr double kEpsMU = 1e-7;
inline constexpr double kDeltaWit = 1e-4;
inline constexpr double kTauWit = 1e-8;

enum class Direction { Min, Max };

struct LmoConfig {
  int starts = 16;
  int max_steps = 500;
  std::uint64_t seed = 0;
  double grad_tol = 1e-13;
  int threads = 1;  // <= 0 uses default_threads()
};

struct LmoCandidate {
  CMat unitary;
  double objective = 0.0;
  int start_index = 0;
};

struct LmoResult {
  CMat unitary;
  double objective = 0.0;
  int start_index = 0;
  std::vector<LmoCandidate> candidates;  // one per start, in start order
};

// <J(Ad_U), M> = (1/d) <w_U, M w_U>.
double unitary_overlap(const CMat& m, const CMat& u);

// Multistart Riemannian gradient descent (Min) or ascent (Max) over U(d)
// with polar retraction and Armijo backtracking. Hints are used as the first
// starts, followed by cfg.starts seeded Haar-random unitaries. The winner is
// chosen by (objective, start index).
LmoResult lmo_unitary(const CMat& m, Direction dir, const LmoConfig& cfg,
                      const std::vector<CMat>& hints = {});

enum class DecompositionVerdict { MixedUnitary, Undetermined, NotInHull };

struct MUDecomposition {
  std::vector<double> weights;
  std::vector<CMat> unitaries;
  double residual = std::numeric_limits<double>::infinity();
  DecompositionVerdict verdict = DecompositionVerdict::Undetermined;
  int iterations = 0;
  std::vector<double> residual_history;
  double final_gap = 0.0;
  std::string stop_reason;
};

struct FWConfig {
  int max_iters = 5000;
  double eps_mu = kEpsMU;
  LmoConfig lmo;
  // Seed the active set with the Weyl unitaries.
  bool weyl_atoms = true;
  // Stop once the Frank-Wolfe duality gap shows the residual cannot reach
  // eps_mu (assuming the oracle is exact).
  bool dual_bound_stop = false;
  // Stop when the oracle no longer finds a descent atom.
  double stall_gap = 1e-15;
};

// Fully corrective Frank-Wolfe on ||rho - J(Phi)||_F^2 over co{J(Ad_U)}:
// every iteration adds the oracle atom and re-solves the weights exactly on
// the simplex. `residual` is recomputed from the returned decomposition.
MUDecomposition fw_decompose(const Channel& ch, const FWConfig& cfg = {});

// ||sum_i w_i J(Ad_{U_i}) - J(Phi)||_F.
double decomposition_residual(const Channel& ch, const std::vector<double>& weights,
                              const std::vector<CMat>& unitaries);

enum class CertificateGrade { Analytic, Heuristic };

struct Witness {
  Channel gamma;
  double value_on_target = std::numeric_limits<double>::quiet_NaN();
  double min_unitary_value = std::numeric_limits<double>::quiet_NaN();
  double id_value = std::numeric_limits<double>::quiet_NaN();
  CertificateGrade grade = CertificateGrade::Heuristic;
  // Closed-form lower bound on <Gamma, Ad_U>, when one is known.
  std::optional<double> analytic_floor;
  int rounds = 0;
};

// <Gamma, Phi> = tr(J(Gamma)* J(Phi)); both must be Hermitian-preserving.
double witness_value(const Channel& gamma, const Channel& phi);

// True when the witness separates its target at the given thresholds.
bool separates(const Witness& w, double delta = kDeltaWit, double tau = kTauWit);

struct WitnessConfig {
  int max_rounds = 150;
  int initial_random = 16;
  int cuts_per_round = 4;
  LmoConfig lmo;
  // Adds <Gamma, id> = 0 and the stationarity cuts at U = I, restricting the
  // search to the dual cone of the generator cone.
  bool dual_cone = false;
  double tau_wit = kTauWit;
  // Mix with the depolarizing map after the search so that every unitary
  // found has <Gamma, Ad_U> >= 0 (ignored in dual-cone mode).
  bool repair = true;
  int verify_starts = 48;
};

// Cutting-plane search over unital TP Hermitian-preserving Gamma with
// ||J(Gamma)||_F <= 1, minimizing <Gamma, target> subject to nonnegativity on
// a growing set of unitary channels.
// When `projection` holds a Frank-Wolfe iterate, the hyperplane through its
// residual is tried first and its unitaries seed the cuts.
Witness witness_search(const Channel& target, const WitnessConfig& cfg = {},
                       const MUDecomposition* projection = nullptr);

// Separating hyperplane from an approximate projection p of J(target) onto
// the mixed unitary hull: y ~ p - J(target), offset by the oracle minimum of
// <y, J(Ad_U)> and mixed with the depolarizing map if needed.
Witness witness_from_projection(const Channel& target, const MUDecomposition& projection,
                                const WitnessConfig& cfg = {});

// Multistart estimate of min_U <Gamma, Ad_U>.
double estimate_min_unitary_value(const Channel& gamma, const LmoConfig& cfg,
                                  const std::vector<CMat>& hints = {});

// min tr(A conj(A)) over A with the given (descending, nonnegative) singular values.
double min_trace_a_abar(std::span<const double> mu);
// A matrix with singular values mu attaining min_trace_a_abar(mu).
CMat paired_block_minimizer(std::span<const double> mu);
// Lower bound on tr(W |(I(x)U)e><(I(x)U)e|), W = (I(x)B) F (I(x)B*).
double conj_floor(const CMat& b);

// Gamma_B(X) = (B X^T B* + tr(X) I/d) / 2.
Channel transpose_witness_map(const CMat& b);
// Closed-form floor of <Gamma_B, Ad_U> over unitaries: (conj_floor(B) + 1) / (2 d^2).
double transpose_witness_floor(const CMat& b);
// d = 3, B unitary with tr(B* B^T) = -1; member of the generator dual cone.
Witness transpose_witness(const CMat& b);
// Recovers a unitary B when gamma equals Gamma_B (to 1e-10).
std::optional<CMat> recognize_transpose_witness(const Channel& gamma);
// Grades and evaluates an arbitrary map as a witness against `target`.
Witness evaluate_witness(const Channel& gamma, const Channel& target, const LmoConfig& cfg);
Witness with_target(Witness w, const Channel& target);

// Real symmetric form Q_ab = <M, J(D_ab)> for the Hermitian-jump maps
// D_A(X) = A X A - {A^2, X}/2 with A = sum_a h_a G_a (h^T Q h = <M, J(D_A)>).
RMat jump_quadratic_form(const CMat& m);
Channel hermitian_jump_map(const CMat& a);

}  // namespace muchan
